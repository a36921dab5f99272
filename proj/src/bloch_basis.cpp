#include "bicscat/bloch_basis.hpp"

#include <cmath>

namespace bicscat {

void RegionConfig::validate() const {
  if (!(half_width > 0.0)) throw InvalidConfig("region half_width must be positive");
  if (cell_count < 1) throw InvalidConfig("cell_count must be >= 1");
  if (fourier_cutoff < 1) throw InvalidConfig("fourier_cutoff must be >= 1");
  if (transverse_cutoff < 1) throw InvalidConfig("transverse_cutoff must be >= 1");
}

void RegionConfig::validate(const LatticeConfig& lattice) const {
  validate();
  const double s2 = 2.0 * lattice.gauss_width * lattice.gauss_width;
  double tail = std::exp(-half_width * half_width / s2);
  if (lattice.asymmetry != 0.0) {
    const double lo = half_width - lattice.offset_z();
    tail = std::max(tail, std::abs(lattice.asymmetry) * std::exp(-lo * lo / s2));
  }
  // |V| at the boundary relative to U, up to the theta_3 maximum of order 2
  const double edge = std::abs(lattice.amplitude()) * 2.0 * tail;
  if (lattice.well_depth > 0.0 && edge >= 1e-6 * lattice.well_depth) {
    throw InvalidConfig("reaction region too narrow: potential at |z| = L is " +
                        std::to_string(edge));
  }
}

bool operator==(const RegionConfig& a, const RegionConfig& b) {
  return a.half_width == b.half_width && a.cell_count == b.cell_count &&
         a.fourier_cutoff == b.fourier_cutoff && a.transverse_cutoff == b.transverse_cutoff;
}

BlochChannel BlochChannel::from_index(int l, int cells, double half_cell) {
  if (cells < 1 || l < 0 || l >= cells) {
    throw InvalidConfig("channel index must satisfy 0 <= l < N");
  }
  return BlochChannel{l, cells, l * kPi / (cells * half_cell)};
}

BlochChannel BlochChannel::from_momentum(double K) {
  if (!(K >= 0.0)) throw InvalidConfig("Bloch momentum must be non-negative");
  return BlochChannel{0, 1, K};
}

int ModeSet::propagating_count() const {
  int count = 0;
  for (const auto& m : modes) count += m.propagating ? 1 : 0;
  return count;
}

std::vector<int> ModeSet::propagating_positions() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (modes[i].propagating) out.push_back(i);
  }
  return out;
}

int ModeSet::position(int nu) const {
  for (int i = 0; i < size(); ++i) {
    if (modes[i].nu == nu) return i;
  }
  return -1;
}

double transverse_momentum(const BlochChannel& channel, int nu, double half_cell) {
  return channel.momentum + nu * kPi / half_cell;
}

double asymptotic_band_energy(double K, int nu, double half_cell) {
  const double kappa = K + nu * kPi / half_cell;
  return 0.5 * kappa * kappa;
}

cplx mode_wavenumber(cplx E, const BlochChannel& channel, int nu, double half_cell, Sheet sheet) {
  const double kappa = transverse_momentum(channel, nu, half_cell);
  cplx k = std::sqrt(2.0 * E - kappa * kappa);
  // principal root has Re k >= 0; move to the upper half plane
  if (k.imag() < 0.0 || (k.imag() == 0.0 && k.real() < 0.0)) k = -k;
  if (k.real() == 0.0 && k.imag() == 0.0) k = 0.0;
  return sheet == Sheet::physical ? k : -k;
}

cplx continued_wavenumber(cplx E, const BlochChannel& channel, int nu, double half_cell,
                          double reference_energy) {
  const double kappa = transverse_momentum(channel, nu, half_cell);
  if (2.0 * reference_energy >= kappa * kappa) return std::sqrt(2.0 * E - kappa * kappa);
  return kI * std::sqrt(kappa * kappa - 2.0 * E);
}

ModeSet enumerate_modes(double E, const BlochChannel& channel, int cutoff, double half_cell) {
  if (cutoff < 0) throw InvalidConfig("mode cutoff must be >= 0");
  ModeSet set{cplx{E, 0.0}, channel, {}};
  for (int nu = -cutoff; nu <= cutoff; ++nu) {
    const double kappa = transverse_momentum(channel, nu, half_cell);
    const bool open = 2.0 * E >= kappa * kappa;
    set.modes.push_back({nu, mode_wavenumber(E, channel, nu, half_cell), open});
  }
  return set;
}

ModeSet enumerate_modes_continued(cplx E, const BlochChannel& channel, int cutoff,
                                  double half_cell, double reference_energy) {
  if (cutoff < 0) throw InvalidConfig("mode cutoff must be >= 0");
  ModeSet set{E, channel, {}};
  for (int nu = -cutoff; nu <= cutoff; ++nu) {
    const double kappa = transverse_momentum(channel, nu, half_cell);
    const bool open = 2.0 * reference_energy >= kappa * kappa;
    set.modes.push_back(
        {nu, continued_wavenumber(E, channel, nu, half_cell, reference_energy), open});
  }
  return set;
}

std::vector<BandPoint> band_structure(int k_points, int nu_min, int nu_max, double half_cell) {
  if (k_points < 2) throw InvalidConfig("band structure needs at least two K points");
  if (nu_min > nu_max) throw InvalidConfig("empty nu range");
  std::vector<BandPoint> out;
  const double k_max = kPi / (2.0 * half_cell);
  for (int i = 0; i < k_points; ++i) {
    const double K = k_max * i / (k_points - 1);
    for (int nu = nu_min; nu <= nu_max; ++nu) {
      out.push_back({K, nu, asymptotic_band_energy(K, nu, half_cell)});
    }
  }
  return out;
}

}  // namespace bicscat
