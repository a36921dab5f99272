#include "bicscat/reaction_region.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#define LAPACK_COMPLEX_CUSTOM
#include <lapacke.h>

#include <Eigen/Eigenvalues>

#include "bicscat/parallel.hpp"

namespace bicscat {

double neumann_mode(int n, double z, double half_width) {
  const double L = half_width;
  if (n == 0) return std::sqrt(0.5 / L);
  return std::sqrt(1.0 / L) * std::cos(n * kPi * (z + L) / (2.0 * L));
}

cplx ChannelEigenBasis::surface(bool top, int j, int nu) const {
  const int m = nu + region.fourier_cutoff;
  return top ? surface_top(j, m) : surface_bottom(j, m);
}

cplx ChannelEigenBasis::mode_profile(int j, int nu, double z) const {
  const int nz = region.transverse_cutoff + 1;
  const int base = (nu + region.fourier_cutoff) * nz;
  cplx sum = 0.0;
  for (int n = 0; n < nz; ++n) sum += coefficients(base + n, j) * neumann_mode(n, z, region.half_width);
  return sum;
}

cplx ChannelEigenBasis::wavefunction(int j, double x, double z) const {
  const double norm = 1.0 / std::sqrt(2.0 * half_cell);
  cplx sum = 0.0;
  for (int nu = -region.fourier_cutoff; nu <= region.fourier_cutoff; ++nu) {
    const double kx = transverse_momentum(channel, nu, half_cell);
    sum += mode_profile(j, nu, z) * std::polar(norm, kx * x);
  }
  return sum;
}

CMatrix build_channel_hamiltonian(const LatticeConfig& cfg, const RegionConfig& region,
                                  const BlochChannel& channel) {
  cfg.validate();
  region.validate();
  CMatrix H = ChannelPotential(cfg, region).dense();
  const double L = region.half_width;
  for (int nu = -region.fourier_cutoff; nu <= region.fourier_cutoff; ++nu) {
    const double kx = transverse_momentum(channel, nu, cfg.half_cell);
    for (int n = 0; n <= region.transverse_cutoff; ++n) {
      const double kz = n * kPi / (2.0 * L);
      H(region.index(nu, n), region.index(nu, n)) += 0.5 * (kx * kx + kz * kz);
    }
  }
  return H;
}

namespace {

std::atomic<bool> real_driver_ok{true};
std::atomic<bool> complex_driver_ok{true};

// Residual and orthogonality of a decomposition, probed with one random vector.
bool decomposition_ok(const CMatrix& H, const RVector& values, const CMatrix& vectors) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss;
  CVector c(H.rows());
  for (auto& v : c) v = cplx{gauss(rng), gauss(rng)};
  c.normalize();
  const CVector y = vectors * c;
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  const double residual = (H * y - vectors * (values.cast<cplx>().asDiagonal() * c)).norm();
  const double orthogonality = (vectors.adjoint() * y - c).norm();
  return std::isfinite(residual) && residual < 1e-9 * scale && orthogonality < 1e-9;
}

void driver_failed(std::atomic<bool>& flag, const char* name) {
  if (flag.exchange(false)) {
    std::fprintf(stderr, "warning: LAPACK %s returned an inaccurate decomposition; not using it "
                 "for the rest of this run\n", name);
  }
}

bool real_eigensolve(const CMatrix& H, RVector& values, CMatrix& vectors) {
  if (!real_driver_ok.load()) return false;
  const lapack_int n = lapack_int(H.rows());
  lapack_int found = 0;
  std::vector<lapack_int> support(2 * std::size_t(n));
  RMatrix a = H.real();
  RMatrix z(n, n);
  values.resize(n);
  const int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'A', 'U', n, a.data(), n, 0.0, 0.0, 0,
                                  0, 0.0, &found, values.data(), z.data(), n, support.data());
  vectors = z.cast<cplx>();
  if (info == 0 && found == n && decomposition_ok(H, values, vectors)) return true;
  driver_failed(real_driver_ok, "dsyevr");
  return false;
}

bool complex_eigensolve(const CMatrix& H, RVector& values, CMatrix& vectors) {
  if (!complex_driver_ok.load()) return false;
  const lapack_int n = lapack_int(H.rows());
  lapack_int found = 0;
  std::vector<lapack_int> support(2 * std::size_t(n));
  CMatrix a = H;
  vectors.resize(n, n);
  values.resize(n);
  const int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'A', 'U', n, a.data(), n, 0.0, 0.0, 0,
                                  0, 0.0, &found, values.data(), vectors.data(), n, support.data());
  if (info == 0 && found == n && decomposition_ok(H, values, vectors)) return true;
  driver_failed(complex_driver_ok, "zheevr");
  return false;
}

// MRRR drivers, each checked before use. Some OpenBLAS kernels return wrong
// vectors on some CPUs; a failed check disables that driver for the process.
bool lapack_eigensolve(const CMatrix& H, bool real, RVector& values, CMatrix& vectors) {
  if (real && real_eigensolve(H, values, vectors)) return true;
  return complex_eigensolve(H, values, vectors);
}

void fix_phase(CMatrix& C) {
  for (Eigen::Index j = 0; j < C.cols(); ++j) {
    Eigen::Index imax = 0;
    C.col(j).cwiseAbs().maxCoeff(&imax);
    const cplx c = C(imax, j);
    if (std::abs(c) > 0.0) C.col(j) *= std::conj(c) / std::abs(c);
  }
}

}  // namespace

ChannelEigenBasis make_eigen_basis(const CMatrix& hamiltonian, const RegionConfig& region,
                                   const BlochChannel& channel, double half_cell,
                                   const SolveOptions& options) {
  const int size = region.basis_size();
  if (hamiltonian.rows() != size || hamiltonian.cols() != size) {
    throw InvalidConfig("Hamiltonian size does not match the region basis");
  }
  ChannelEigenBasis basis;
  basis.channel = channel;
  basis.region = region;
  basis.half_cell = half_cell;
  basis.real_potential = hamiltonian.imag().cwiseAbs().maxCoeff() == 0.0;

  RVector values(size);
  CMatrix vectors;
  if (!lapack_eigensolve(hamiltonian, basis.real_potential, values, vectors)) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hamiltonian);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("eigen-decomposition failed for a " + std::to_string(size) + "x" +
                           std::to_string(size) + " matrix");
    }
    values = solver.eigenvalues();
    vectors = solver.eigenvectors();
  }

  int kept = int(values.size());
  while (kept > 0 && values(kept - 1) > options.energy_ceiling) --kept;
  basis.eigenvalues = values.head(kept);
  basis.coefficients = vectors.leftCols(kept);
  fix_phase(basis.coefficients);

  const int modes = region.mode_count();
  const int nz = region.transverse_cutoff + 1;
  RVector xi_bottom(nz), xi_top(nz);
  for (int n = 0; n < nz; ++n) {
    xi_bottom(n) = neumann_mode(n, -region.half_width, region.half_width);
    xi_top(n) = (n % 2 == 0 ? 1.0 : -1.0) * xi_bottom(n);
  }
  basis.surface_bottom.resize(kept, modes);
  basis.surface_top.resize(kept, modes);
  for (int m = 0; m < modes; ++m) {
    const auto block = basis.coefficients.middleRows(m * nz, nz);
    basis.surface_bottom.col(m) = block.transpose() * xi_bottom.cast<cplx>();
    basis.surface_top.col(m) = block.transpose() * xi_top.cast<cplx>();
  }
  return basis;
}

ChannelEigenBasis solve_channel(const LatticeConfig& cfg, const RegionConfig& region,
                                const BlochChannel& channel, const SolveOptions& options) {
  return make_eigen_basis(build_channel_hamiltonian(cfg, region, channel), region, channel,
                          cfg.half_cell, options);
}

std::string to_string(Parity p) {
  switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    default: return "none";
  }
}

Parity x_parity(const CVector& coefficients, const RegionConfig& region, double tolerance) {
  const int M = region.fourier_cutoff;
  const int nz = region.transverse_cutoff + 1;
  if (coefficients.size() != region.basis_size()) {
    throw InvalidConfig("coefficient vector does not match the region basis");
  }
  const double norm = coefficients.norm();
  if (norm == 0.0) return Parity::none;
  double even = 0.0, odd = 0.0;
  for (int nu = -M; nu <= M; ++nu) {
    for (int n = 0; n < nz; ++n) {
      const cplx c = coefficients((nu + M) * nz + n);
      const cplx mirror = coefficients((-nu + M) * nz + n);
      even += std::norm(c - mirror);
      odd += std::norm(c + mirror);
    }
  }
  if (std::sqrt(even) <= tolerance * norm) return Parity::even;
  if (std::sqrt(odd) <= tolerance * norm) return Parity::odd;
  return Parity::none;
}

namespace {

constexpr int kDensityPoints = 81;
constexpr int kCorePoints = 121;

struct Candidate {
  int j;
  Parity parity;
  RVector density;  // nu-resolved |Phi_nu(z)|^2 on [-extent, extent], unit sum
  double core;      // probability within |z| <= extent / 2
};

Candidate describe(const ChannelEigenBasis& basis, int j, double extent, Parity parity) {
  const int M = basis.region.fourier_cutoff;
  const int nz = basis.region.transverse_cutoff + 1;
  const double L = basis.region.half_width;
  const double half = 0.5 * extent;
  const int rows = kDensityPoints + kCorePoints;
  RMatrix xi(rows, nz);
  for (int p = 0; p < rows; ++p) {
    const double z = p < kDensityPoints
                         ? -extent + 2.0 * extent * p / (kDensityPoints - 1)
                         : -half + 2.0 * half * (p - kDensityPoints) / (kCorePoints - 1);
    for (int n = 0; n < nz; ++n) xi(p, n) = neumann_mode(n, z, L);
  }
  Candidate c{j, parity, RVector((2 * M + 1) * kDensityPoints), 0.0};
  RVector core_density = RVector::Zero(kCorePoints);
  for (int m = 0; m < 2 * M + 1; ++m) {
    const CVector profile = xi.cast<cplx>() * basis.coefficients.col(j).segment(m * nz, nz);
    c.density.segment(m * kDensityPoints, kDensityPoints) =
        profile.head(kDensityPoints).cwiseAbs2();
    core_density += profile.tail(kCorePoints).cwiseAbs2();
  }
  const double total = c.density.sum();
  if (total > 0.0) c.density /= total;
  // Simpson rule; the full-region integral of sum_nu |Phi_nu|^2 is one
  const double h = 2.0 * half / (kCorePoints - 1);
  double s = core_density(0) + core_density(kCorePoints - 1);
  for (int p = 1; p + 1 < kCorePoints; ++p) s += (p % 2 ? 4.0 : 2.0) * core_density(p);
  c.core = s * h / 3.0;
  return c;
}

double bhattacharyya(const RVector& p, const RVector& q) {
  return (p.cwiseSqrt().array() * q.cwiseSqrt().array()).sum();
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ClassifyResult classify_states(const LatticeConfig& cfg, const RegionConfig& region,
                               const BlochChannel& channel, const std::vector<double>& half_widths,
                               double window_lo, double window_hi,
                               const ClassifyOptions& options) {
  if (half_widths.size() < 3) throw InvalidConfig("L sweep needs at least three points");
  if (!(window_lo < window_hi)) throw InvalidConfig("empty energy window");
  for (std::size_t i = 1; i < half_widths.size(); ++i) {
    if (!(half_widths[i] > half_widths[i - 1])) throw InvalidConfig("L sweep must increase");
  }
  const int steps = int(half_widths.size());
  const double extent = half_widths.front();
  const bool parity_defined = cfg.asymmetry == 0.0 && channel.momentum == 0.0;

  ClassifyResult result;
  result.half_widths = half_widths;
  for (int s = 1; s < steps; ++s) {
    if (std::abs(half_widths[s] - region.half_width) <
        std::abs(half_widths[result.reference] - region.half_width)) {
      result.reference = s;
    }
  }

  std::vector<ChannelEigenBasis> bases(steps);
  parallel_for(steps, options.threads, [&](int s) {
    RegionConfig r = region;
    r.half_width = half_widths[s];
    if (options.scale_transverse_cutoff) {
      r.transverse_cutoff = std::max(
          1, int(std::lround(region.transverse_cutoff * half_widths[s] / region.half_width)));
    }
    r.validate(cfg);
    bases[s] = solve_channel(cfg, r, channel);
  });
  for (const auto& b : bases) result.spectra.push_back(b.eigenvalues);

  // candidates: states within one window width of the window
  const double span = window_hi - window_lo;
  std::vector<std::vector<Candidate>> candidates(steps);
  parallel_for(steps, options.threads, [&](int s) {
    const auto& b = bases[s];
    for (int j = 0; j < b.size(); ++j) {
      const double e = b.eigenvalues(j);
      if (e < window_lo - span || e > window_hi + span) continue;
      const Parity p = parity_defined
                           ? x_parity(b.coefficients.col(j), b.region, options.parity_tolerance)
                           : Parity::none;
      candidates[s].push_back(describe(b, j, extent, p));
    }
  });

  const int ref = result.reference;
  for (const auto& start : candidates[ref]) {
    const double e0 = bases[ref].eigenvalues(start.j);
    if (e0 <= window_lo || e0 >= window_hi) continue;
    StateTag tag;
    tag.j = start.j;
    tag.energy = e0;
    tag.parity = start.parity;
    for (int s = 0; s < steps; ++s) {
      const Candidate* best = nullptr;
      double best_overlap = -1.0;
      for (const auto& c : candidates[s]) {
        if (parity_defined && c.parity != start.parity) continue;
        if (std::abs(bases[s].eigenvalues(c.j) - e0) > options.energy_reach) continue;
        const double ov = bhattacharyya(start.density, c.density);
        if (ov > best_overlap) {
          best_overlap = ov;
          best = &c;
        }
      }
      if (best == nullptr) {
        result.diagnostics.push_back("state at E=" + std::to_string(e0) +
                                     ": no candidate at L=" + std::to_string(half_widths[s]));
        tag.path.push_back(std::numeric_limits<double>::quiet_NaN());
        tag.overlaps.push_back(0.0);
        tag.cores.push_back(0.0);
        continue;
      }
      if (best_overlap < options.overlap_threshold) {
        result.diagnostics.push_back("state at E=" + std::to_string(e0) +
                                     ": ambiguous tracking at L=" +
                                     std::to_string(half_widths[s]) + ", best overlap " +
                                     std::to_string(best_overlap));
      }
      tag.path.push_back(bases[s].eigenvalues(best->j));
      tag.overlaps.push_back(best_overlap);
      tag.cores.push_back(best->core);
    }
    std::vector<double> sorted = tag.cores;
    std::nth_element(sorted.begin(), sorted.begin() + steps / 2, sorted.end());
    tag.core_weight = sorted[steps / 2];
    tag.drift = fitted_slope(half_widths, tag.path);
    tag.localized = std::isfinite(tag.drift) && std::abs(tag.drift) < options.slope_threshold &&
                    tag.core_weight >= options.core_weight_threshold;
    result.tags.push_back(std::move(tag));
  }
  return result;
}

std::vector<StateTag> localized_in(const std::vector<StateTag>& tags, double lo, double hi) {
  std::vector<StateTag> out;
  for (const auto& t : tags) {
    if (t.localized && t.energy > lo && t.energy < hi) out.push_back(t);
  }
  return out;
}

std::vector<ConvergenceEntry> convergence_report(const LatticeConfig& cfg,
                                                 const RegionConfig& region,
                                                 const BlochChannel& channel, double window_lo,
                                                 double window_hi) {
  RegionConfig wider = region;
  wider.fourier_cutoff += 2;
  RegionConfig taller = region;
  taller.transverse_cutoff += 10;
  const RVector base = solve_channel(cfg, region, channel).eigenvalues;
  const RVector a = solve_channel(cfg, wider, channel).eigenvalues;
  const RVector b = solve_channel(cfg, taller, channel).eigenvalues;
  auto nearest = [](const RVector& v, double e) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v(i) - e) < std::abs(best - e)) best = v(i);
    }
    return best;
  };
  std::vector<ConvergenceEntry> out;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    const double e = base(i);
    if (e < window_lo || e > window_hi) continue;
    out.push_back({e, nearest(a, e) - e, nearest(b, e) - e});
  }
  return out;
}

}  // namespace bicscat
