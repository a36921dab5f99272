#include "bicscat/validation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "bicscat/reaction_region.hpp"
#include "bicscat/scattering.hpp"
#include "bicscat/special.hpp"

namespace bicscat {

void SquareWellConfig::validate() const {
  if (!std::isfinite(depth)) throw InvalidConfig("square-well depth must be finite");
  if (!(half_width > 0.0)) throw InvalidConfig("square-well half width must be positive");
  if (series_terms < 1) throw InvalidConfig("square-well series needs at least one term");
}

namespace {

cplx well_wavenumber(double E, double depth) { return std::sqrt(cplx{2.0 * (E + depth), 0.0}); }

}  // namespace

SquareWellR square_well_exact(double E, const SquareWellConfig& cfg) {
  cfg.validate();
  const cplx k0 = well_wavenumber(E, cfg.depth);
  if (std::abs(k0) < 1e-300) throw PoleProximityError("k0 = 0 is a pole of the well R-matrix", E);
  const cplx s = std::sin(2.0 * cfg.half_width * k0);
  if (std::abs(s) < 1e-12) {
    throw PoleProximityError("energy is at a pole of cot/csc (2 L k0)", E);
  }
  const cplx c = std::cos(2.0 * cfg.half_width * k0);
  return {c / (s * k0), 1.0 / (s * k0)};
}

SquareWellR square_well_series(double E, const SquareWellConfig& cfg, bool accelerate) {
  cfg.validate();
  const double L = cfg.half_width;
  const cplx y = 2.0 * L * well_wavenumber(E, cfg.depth) / kPi;
  const cplx y2 = y * y;
  const double scale = 4.0 * L / (kPi * kPi);
  // Sum from the top so that the small terms accumulate first.
  cplx same = 0.0, alternating = 0.0;
  for (long n = cfg.series_terms; n >= 1; --n) {
    const cplx term = 1.0 / (y2 - double(n) * double(n));
    same += term;
    alternating += (n % 2 == 0 ? 1.0 : -1.0) * term;
  }
  if (accelerate) {
    same += inverse_square_tail(y, cfg.series_terms + 1);
    alternating += alternating_inverse_square_tail(y, cfg.series_terms + 1);
  }
  const cplx lead = 2.0 * L / (kPi * kPi * y2);
  return {lead + scale * same, lead + scale * alternating};
}

SquareWellR square_well_pipeline(double E, const SquareWellConfig& cfg) {
  cfg.validate();
  RegionConfig region;
  region.half_width = cfg.half_width;
  region.fourier_cutoff = 0;
  region.transverse_cutoff = cfg.series_terms;
  const int size = region.basis_size();
  CMatrix H = CMatrix::Zero(size, size);
  for (int n = 0; n < size; ++n) {
    const double kz = n * kPi / (2.0 * cfg.half_width);
    H(n, n) = 0.5 * kz * kz - cfg.depth;
  }
  const BlochChannel channel = BlochChannel::from_momentum(0.0);
  const ChannelEigenBasis basis = make_eigen_basis(H, region, channel, 1.0);
  const ModeSet modes = enumerate_modes(E, channel, 0, 1.0);
  ReactionOptions options;
  options.tail_completion = true;
  options.tail_shift = -cfg.depth;
  const ReactionBlocks R = reaction_matrix(basis, E, modes, options);
  return {R.bb(0, 0), R.bt(0, 0)};
}

std::vector<double> fd_eigen_oracle(const LatticeConfig& cfg, const BlochChannel& channel,
                                    const FdOptions& options) {
  cfg.validate();
  if (!(options.spacing > 0.0)) throw InvalidConfig("grid spacing must be positive");
  if (!(options.half_width > 0.0)) throw InvalidConfig("half width must be positive");
  if (options.count < 1) throw InvalidConfig("eigenvalue count must be positive");
  const double a = cfg.half_cell;
  const double L = options.half_width;
  const long nx = std::max(4L, std::lround(2.0 * a / options.spacing));
  const long nz = std::max(4L, std::lround(2.0 * L / options.spacing));
  if (nx * nz > options.max_points) {
    throw InvalidConfig("finite-difference grid of " + std::to_string(nx * nz) +
                        " points exceeds the limit of " + std::to_string(options.max_points));
  }
  const double hx = 2.0 * a / nx;
  const double hz = 2.0 * L / nz;
  const int N = int(nx * nz);
  auto at = [nz](long i, long j) { return int(i * nz + j); };
  const cplx bloch = std::exp(kI * (2.0 * a * channel.momentum));

  std::vector<Eigen::Triplet<cplx>> entries;
  entries.reserve(std::size_t(N) * 5);
  const double cx = 0.5 / (hx * hx);
  const double cz = 0.5 / (hz * hz);
  for (long i = 0; i < nx; ++i) {
    const double x = -a + i * hx;
    for (long j = 0; j < nz; ++j) {
      const double z = -L + (j + 0.5) * hz;
      const int r = at(i, j);
      double diagonal = 2.0 * cx + potential_value(cfg, x, z);
      // Mirror ghost points at the walls: zero slope.
      if (j > 0) entries.emplace_back(r, at(i, j - 1), -cz);
      if (j + 1 < nz) entries.emplace_back(r, at(i, j + 1), -cz);
      diagonal += (j > 0 ? cz : 0.0) + (j + 1 < nz ? cz : 0.0);
      const long right = (i + 1) % nx;
      const long left = (i + nx - 1) % nx;
      const cplx phase_right = i + 1 == nx ? bloch : cplx{1.0};
      const cplx phase_left = i == 0 ? std::conj(bloch) : cplx{1.0};
      entries.emplace_back(r, at(right, j), -cx * phase_right);
      entries.emplace_back(r, at(left, j), -cx * phase_left);
      entries.emplace_back(r, r, diagonal);
    }
  }
  Eigen::SparseMatrix<cplx> H(N, N);
  H.setFromTriplets(entries.begin(), entries.end());

  Eigen::SparseMatrix<cplx> shifted = H;
  for (int r = 0; r < N; ++r) shifted.coeffRef(r, r) -= options.target;
  shifted.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) {
    throw NumericalError("sparse LU factorization failed; the target may be an eigenvalue");
  }

  const int block = std::min(N, 2 * options.count + 4);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss;
  CMatrix X(N, block);
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    for (Eigen::Index r = 0; r < X.rows(); ++r) X(r, c) = cplx{gauss(rng), gauss(rng)};
  }
  std::vector<double> previous;
  std::vector<double> ritz;
  for (int it = 0; it < options.max_iterations; ++it) {
    CMatrix Y = lu.solve(X);
    Eigen::HouseholderQR<CMatrix> qr(Y);
    const CMatrix Q = qr.householderQ() * CMatrix::Identity(N, block);
    const CMatrix small = Q.adjoint() * (H * Q);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (small + small.adjoint()));
    X = Q * es.eigenvectors();

    std::vector<double> values(es.eigenvalues().data(), es.eigenvalues().data() + block);
    std::sort(values.begin(), values.end(), [&](double u, double v) {
      return std::abs(u - options.target) < std::abs(v - options.target);
    });
    values.resize(options.count);
    std::sort(values.begin(), values.end());
    ritz = values;
    if (!previous.empty()) {
      double change = 0.0;
      for (int k = 0; k < options.count; ++k) {
        change = std::max(change, std::abs(ritz[k] - previous[k]) / std::max(1.0, std::abs(ritz[k])));
      }
      if (change < options.tolerance) return ritz;
    }
    previous = ritz;
  }
  throw NumericalError("finite-difference subspace iteration did not converge in " +
                       std::to_string(options.max_iterations) + " sweeps");
}

std::vector<double> richardson(const std::vector<double>& coarse, const std::vector<double>& fine) {
  if (coarse.size() != fine.size()) throw InvalidConfig("Richardson needs matching level lists");
  std::vector<double> out(coarse.size());
  for (std::size_t i = 0; i < coarse.size(); ++i) out[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  return out;
}

namespace {

double relative(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double nearest(const std::vector<double>& values, double x) {
  double best = values.front();
  for (double v : values) {
    if (std::abs(v - x) < std::abs(best - x)) best = v;
  }
  return best;
}

}  // namespace

std::vector<ValidationCheck> run_validation(const LatticeConfig& cfg, const RegionConfig& region,
                                            const ValidationOptions& options) {
  std::vector<ValidationCheck> checks;
  auto add = [&](std::string name, double measured, double tolerance) {
    checks.push_back({std::move(name), measured, tolerance, measured < tolerance});
  };

  // Square well: depth 1, |z| <= 3.
  const std::vector<double> energies{-0.73, -0.2, 0.05, 0.31, 0.9, 2.2, 5.7};
  {
    SquareWellConfig well{1.0, 3.0, 10000};
    double plain = 0.0, accelerated = 0.0;
    for (double E : energies) {
      const SquareWellR exact = square_well_exact(E, well);
      const SquareWellR p = square_well_series(E, well, false);
      const SquareWellR s = square_well_series(E, well, true);
      plain = std::max({plain, relative(p.bb, exact.bb), relative(p.bt, exact.bt)});
      accelerated = std::max({accelerated, relative(s.bb, exact.bb), relative(s.bt, exact.bt)});
    }
    add("square well series, 10^4 terms", plain, 1e-3);
    add("square well series, accelerated", accelerated, 1e-8);
  }
  {
    SquareWellConfig well{1.0, 3.0, region.transverse_cutoff};
    double worst = 0.0;
    for (double E : energies) {
      const SquareWellR exact = square_well_exact(E, well);
      const SquareWellR w = square_well_pipeline(E, well);
      worst = std::max({worst, relative(w.bb, exact.bb), relative(w.bt, exact.bt)});
    }
    add("square well through reaction-matrix pipeline", worst, 1e-6);
  }

  // Free particle: the region is transparent, so S carries only the phase.
  {
    LatticeConfig free = cfg;
    free.well_depth = 0.0;
    free.asymmetry = 0.0;
    double worst = 0.0;
    ReactionOptions ro;
    ro.tail_completion = true;
    for (double K : {0.0, kPi / 5.0, kPi / 3.0}) {
      const ChannelEigenBasis basis = solve_channel(free, region, BlochChannel::from_momentum(K));
      std::vector<double> grid;
      for (int i = 0; i < 25; ++i) grid.push_back(0.05 + i * (2.0 * kPi * kPi - 0.05) / 24.0);
      grid = avoid_eigenvalues(grid, basis.eigenvalues, 1e-4);
      for (double E : grid) {
        const ScatteringBlocks sb = scatter(basis, E, 2, ro);
        for (const Amplitude& amp : reflection_coefficients(sb, Side::bottom)) {
          const double expected = amp.transmitted && amp.out_nu == amp.in_nu ? 1.0 : 0.0;
          worst = std::max(worst, std::abs(std::abs(amp.value) - expected));
        }
      }
    }
    add("free particle |T| = 1, |R| = 0", worst, 1e-8);
  }

  if (options.finite_difference) {
    const BlochChannel gamma = BlochChannel::from_momentum(0.0);
    LatticeConfig sym = cfg;
    sym.asymmetry = 0.0;
    std::vector<double> Ls;
    for (int i = 0; i <= 10; ++i) Ls.push_back(2.5 + 0.25 * i);
    ClassifyOptions co;
    co.threads = options.threads;
    const ClassifyResult cls = classify_states(sym, region, gamma, Ls, 0.0, 0.5 * kPi * kPi, co);
    const std::vector<StateTag> localized = localized_in(cls.tags, 0.0, 0.5 * kPi * kPi);
    if (localized.empty()) {
      add("finite-difference oracle: localized levels found", 1.0, 0.5);
    }
    for (const StateTag& tag : localized) {
      FdOptions fo;
      fo.half_width = region.half_width;
      fo.target = tag.energy;
      fo.count = 3;
      fo.spacing = options.fd_spacing;
      const std::vector<double> coarse = fd_eigen_oracle(sym, gamma, fo);
      fo.spacing = 0.5 * options.fd_spacing;
      const std::vector<double> fine = fd_eigen_oracle(sym, gamma, fo);
      const double extrapolated = (4.0 * nearest(fine, tag.energy) - nearest(coarse, tag.energy)) / 3.0;
      char label[96];
      std::snprintf(label, sizeof label, "finite-difference oracle at %.6f", tag.energy);
      add(label, std::abs(extrapolated - tag.energy) / std::abs(tag.energy), 1e-2);
    }
  }
  return checks;
}

}  // namespace bicscat
