#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bicscat/bloch_basis.hpp"
#include "bicscat/common.hpp"
#include "bicscat/potential.hpp"

namespace bicscat {

/// Transverse Neumann basis function xi_n(z) on [-L, L].
double neumann_mode(int n, double z, double half_width);

/// Reaction-region eigenpairs for one Bloch channel.
///
/// `coefficients` holds one state per column in the (nu, n) index order of
/// RegionConfig::index. `surface_bottom(j, m)` and `surface_top(j, m)` are
/// Phi_{j, nu}(-L) and Phi_{j, nu}(+L) with m = nu + M.
struct ChannelEigenBasis {
  BlochChannel channel;
  RegionConfig region;
  double half_cell = 1.0;
  bool real_potential = true;
  RVector eigenvalues;
  CMatrix coefficients;
  CMatrix surface_bottom;
  CMatrix surface_top;

  int size() const { return int(eigenvalues.size()); }
  int fourier_cutoff() const { return region.fourier_cutoff; }
  cplx surface(bool top, int j, int nu) const;
  // psi_j(x, z), including the Bloch factor.
  cplx wavefunction(int j, double x, double z) const;
  // Phi_{j, nu}(z) = sum_n C_{nu, n} xi_n(z)
  cplx mode_profile(int j, int nu, double z) const;
};

struct SolveOptions {
  double energy_ceiling = std::numeric_limits<double>::infinity();
};

CMatrix build_channel_hamiltonian(const LatticeConfig& cfg, const RegionConfig& region,
                                  const BlochChannel& channel);

/// Diagonalizes a channel Hamiltonian in the (nu, n) basis described by
/// `region`. Real symmetric input is solved in real arithmetic. Each
/// eigenvector is rotated so its largest-magnitude coefficient is real positive.
ChannelEigenBasis make_eigen_basis(const CMatrix& hamiltonian, const RegionConfig& region,
                                   const BlochChannel& channel, double half_cell,
                                   const SolveOptions& options = {});

ChannelEigenBasis solve_channel(const LatticeConfig& cfg, const RegionConfig& region,
                                const BlochChannel& channel, const SolveOptions& options = {});

enum class Parity { even, odd, none };

std::string to_string(Parity p);

// Compares C_{nu, n} with C_{-nu, n}; `tolerance` is relative to the state norm.
Parity x_parity(const CVector& coefficients, const RegionConfig& region,
                double tolerance = 1e-6);

struct StateTag {
  int j = 0;                         // index at the reference L
  bool localized = false;
  Parity parity = Parity::none;
  double energy = 0.0;               // eigenvalue at the reference L
  double drift = 0.0;                // least-squares dE/dL along the tracked path
  double core_weight = 0.0;          // median core probability along the path
  std::vector<double> path;          // tracked energy at each L of the sweep
  std::vector<double> overlaps;      // density overlap with the reference state at each L
  std::vector<double> cores;         // core probability of the tracked state at each L
};

struct ClassifyOptions {
  double slope_threshold = 0.1;
  double core_weight_threshold = 0.5;
  double overlap_threshold = 0.5;
  double energy_reach = 3.0;             // candidates lie within this distance of E_ref
  double parity_tolerance = 1e-6;
  bool scale_transverse_cutoff = true;  // n_max grows in proportion to L
  int threads = 1;
};

struct ClassifyResult {
  std::vector<double> half_widths;
  int reference = 0;                       // sweep index of the reference L
  std::vector<StateTag> tags;              // states in the window at the reference L
  std::vector<std::string> diagnostics;    // tracking ambiguities
  std::vector<RVector> spectra;            // eigenvalues at each L, for export
};

/// Follows every state in the window from the reference L (the region's own
/// half width, or the nearest sweep point) to each other L by the overlap of
/// nu-resolved z-densities on [-L_min, L_min]. A state is localized when its
/// tracked eigenvalue has |dE/dL| below `slope_threshold` and the median over
/// the sweep of its probability within |z| <= L_min / 2 is at least
/// `core_weight_threshold`.
///
/// Tracking is against the reference density rather than step to step, so a
/// resonant state is followed through avoided crossings with extended states.
ClassifyResult classify_states(const LatticeConfig& cfg, const RegionConfig& region,
                               const BlochChannel& channel, const std::vector<double>& half_widths,
                               double window_lo, double window_hi,
                               const ClassifyOptions& options = {});

struct ConvergenceEntry {
  double energy;
  double delta_fourier;     // change when M -> M + 2
  double delta_transverse;  // change when n_max -> n_max + 10
};

std::vector<ConvergenceEntry> convergence_report(const LatticeConfig& cfg,
                                                 const RegionConfig& region,
                                                 const BlochChannel& channel, double window_lo,
                                                 double window_hi);

// Localized states in a window at a single L, given a precomputed tag list.
std::vector<StateTag> localized_in(const std::vector<StateTag>& tags, double lo, double hi);

}  // namespace bicscat
