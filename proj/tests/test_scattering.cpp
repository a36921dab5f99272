#include <cmath>
#include <map>

#include "bicscat/reaction_region.hpp"
#include "bicscat/scattering.hpp"
#include "doctest.h"

using namespace bicscat;

namespace {

const double kFirst = kPi * kPi / 2.0;

const ChannelEigenBasis& basis_at(double K, double beta) {
  static std::map<std::pair<double, double>, ChannelEigenBasis> cache;
  auto it = cache.find({K, beta});
  if (it == cache.end()) {
    LatticeConfig cfg;
    cfg.asymmetry = beta;
    it = cache.emplace(std::pair{K, beta},
                       solve_channel(cfg, RegionConfig{}, BlochChannel::from_momentum(K))).first;
  }
  return it->second;
}

}  // namespace

TEST_CASE("reaction matrix is Hermitian, and real symmetric at beta = 0") {
  for (double beta : {0.0, 0.02}) {
    const ChannelEigenBasis& b = basis_at(0.0, beta);
    for (double E : {0.9, 6.3, 15.0}) {
      const CMatrix R = reaction_matrix(b, E, enumerate_modes(E, b.channel, 2, 1.0)).full();
      const double scale = R.cwiseAbs().maxCoeff();
      CHECK((R - R.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * scale);
      if (beta == 0.0) {
        CHECK(R.imag().cwiseAbs().maxCoeff() < 1e-12 * scale);
        CHECK((R - R.transpose()).cwiseAbs().maxCoeff() < 1e-12 * scale);
      }
    }
  }
}

TEST_CASE("S is unitary on the open modes and symmetric at beta = 0") {
  for (double K : {0.0, kPi / 3.0}) {
    const ChannelEigenBasis& b = basis_at(K, 0.0);
    std::vector<double> grid;
    for (int i = 0; i < 1000; ++i) grid.push_back(0.5 * K * K + 0.01 + i * (2 * kPi * kPi - 0.5 * K * K) / 1000.0);
    double worst = 0.0, asym = 0.0;
    for (double E : avoid_eigenvalues(grid, b.eigenvalues)) {
      const ScatteringBlocks s = scatter(b, E, 2);
      worst = std::max(worst, unitarity_defect(s.s_prop));
      asym = std::max(asym, (s.s_prop - s.s_prop.transpose()).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-8);
    if (K == 0.0) CHECK(asym < 1e-8);
  }
}

TEST_CASE("unitarity with broken symmetry, and row sums of |R|^2 + |T|^2") {
  const ChannelEigenBasis& b = basis_at(0.0, 0.02);
  for (double E : {0.8, 3.3, 7.1, 12.9}) {
    const ScatteringBlocks s = scatter(b, E, 2);
    CHECK(unitarity_defect(s.s_prop) < 1e-8);
    std::map<int, double> flux;
    for (const Amplitude& a : reflection_coefficients(s, Side::bottom)) flux[a.in_nu] += std::norm(a.value);
    for (const auto& [nu, f] : flux) CHECK(f == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("the open-mode block has 2 x (open modes) rows") {
  const ChannelEigenBasis& b = basis_at(0.0, 0.0);
  CHECK(scatter(b, 2.0, 2).s_prop.rows() == 2);
  CHECK(scatter(b, kFirst + 1.0, 2).s_prop.rows() == 6);
}

TEST_CASE("dropping a strongly evanescent mode leaves the open block unchanged") {
  const ChannelEigenBasis& b = basis_at(0.0, 0.0);
  for (double E : {1.7, 10.4}) {
    // nu = +-5 has q L > 40 at these energies
    const double q = std::sqrt(std::pow(5 * kPi, 2) - 2 * E);
    REQUIRE(q * b.region.half_width > 40.0);
    const CMatrix with = scatter(b, E, 5).s_prop;
    const CMatrix without = scatter(b, E, 4).s_prop;
    CHECK((with - without).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("odd localized state is invisible in nu = 0 reflection at beta = 0") {
  // Near the odd state at 0.656436 the nu = 0 amplitude has no resonance
  // feature: |T_00| varies smoothly across it.
  const ChannelEigenBasis& b = basis_at(0.0, 0.0);
  double lo = 1.0, hi = 0.0;
  for (double E = 0.64; E <= 0.67; E += 0.001) {
    const double t = std::abs(scatter(b, E, 1).s_prop(1, 0));
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  CHECK(hi - lo < 0.05);
}

TEST_CASE("reaction matrix errors and energy grids") {
  const ChannelEigenBasis& b = basis_at(0.0, 0.0);
  const double lambda = b.eigenvalues(3);
  CHECK_THROWS_AS(reaction_matrix(b, lambda, enumerate_modes(std::abs(lambda), b.channel, 1, 1.0)),
                  PoleProximityError);
  const auto grid = avoid_eigenvalues({lambda, lambda + 1e-8, 1.23456}, b.eigenvalues, 1e-6);
  CHECK(std::abs(grid[0] - lambda) == doctest::Approx(1e-6));
  CHECK(std::abs(grid[1] - lambda) == doctest::Approx(1e-6));
  CHECK(grid[2] == 1.23456);
  CHECK(mode_label(0) == "0");
  CHECK(mode_label(-1) == "m");
  CHECK(mode_label(2) == "p2");
}

TEST_CASE("state filters") {
  const ChannelEigenBasis& b = basis_at(0.0, 0.0);
  CHECK(int(StateFilter::all().select(b).size()) == b.size());
  const auto below = StateFilter::below(0.0).select(b);
  for (int j : below) CHECK(b.eigenvalues(j) < 0.0);
  CHECK_THROWS_AS(StateFilter::listed({b.size()}).select(b), InvalidConfig);
}
