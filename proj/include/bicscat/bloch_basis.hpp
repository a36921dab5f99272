#pragma once

#include <vector>

#include "bicscat/common.hpp"
#include "bicscat/potential.hpp"

namespace bicscat {

/// Reaction region |z| <= L and the truncation of the (nu, n) basis.
struct RegionConfig {
  double half_width = 3.0;    // L
  int cell_count = 1;         // N, fixes the Bloch momentum grid K_l = l pi / (N a)
  int fourier_cutoff = 8;     // M, nu in [-M, M]
  int transverse_cutoff = 40; // n_max, n in [0, n_max]

  int mode_count() const { return 2 * fourier_cutoff + 1; }
  int basis_size() const { return mode_count() * (transverse_cutoff + 1); }
  int index(int nu, int n) const { return (nu + fourier_cutoff) * (transverse_cutoff + 1) + n; }

  void validate() const;
  // Also checks that the potential has decayed to below 1e-6 U at |z| = L.
  void validate(const LatticeConfig& lattice) const;
};

bool operator==(const RegionConfig&, const RegionConfig&);

struct BlochChannel {
  int index = 0;      // l
  int cells = 1;      // N
  double momentum = 0.0;

  static BlochChannel from_index(int l, int cells, double half_cell);
  // Channel with an arbitrary momentum in [0, pi/a); index/cells are left at 0/1.
  static BlochChannel from_momentum(double K);
};

enum class Sheet { physical, second };

/// One transverse mode nu of a channel at a given energy.
struct ChannelMode {
  int nu = 0;
  cplx k;                 // z-wavenumber; +iq when evanescent on the physical sheet
  bool propagating = false;

  double decay_rate() const { return propagating ? 0.0 : k.imag(); }
};

/// Modes nu in [-cutoff, cutoff], ordered by nu ascending.
struct ModeSet {
  cplx energy;
  BlochChannel channel;
  std::vector<ChannelMode> modes;

  int size() const { return int(modes.size()); }
  int propagating_count() const;
  std::vector<int> propagating_positions() const;
  // Position of mode nu in `modes`, or -1.
  int position(int nu) const;
};

// K + nu pi / a
double transverse_momentum(const BlochChannel& channel, int nu, double half_cell);

double asymptotic_band_energy(double K, int nu, double half_cell = 1.0);

/// z-wavenumber with k^2 + (K + nu pi/a)^2 = 2E. The physical sheet takes
/// Im k >= 0 (Re k >= 0 on the real axis); the second sheet negates it.
cplx mode_wavenumber(cplx E, const BlochChannel& channel, int nu, double half_cell,
                     Sheet sheet = Sheet::physical);

/// Branch that is analytic in a neighbourhood of the real segment around
/// `reference_energy`: modes open at the reference take the principal root
/// sqrt(2E - kappa^2) (second sheet below the axis), closed modes take
/// i sqrt(kappa^2 - 2E). Agrees with the physical sheet on the real axis.
cplx continued_wavenumber(cplx E, const BlochChannel& channel, int nu, double half_cell,
                          double reference_energy);

ModeSet enumerate_modes(double E, const BlochChannel& channel, int cutoff, double half_cell);

// Complex-energy mode set on the continued branch of `continued_wavenumber`.
ModeSet enumerate_modes_continued(cplx E, const BlochChannel& channel, int cutoff,
                                  double half_cell, double reference_energy);

struct BandPoint {
  double momentum;
  int nu;
  double energy;
};

// k_z = 0 band edges E = (K + nu pi/a)^2 / 2 on a uniform K grid over [0, pi/2a].
std::vector<BandPoint> band_structure(int k_points, int nu_min, int nu_max, double half_cell);

}  // namespace bicscat
