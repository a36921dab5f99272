#include <algorithm>
#include <cmath>

#include "bicscat/continuum.hpp"
#include "bicscat/reaction_region.hpp"
#include "doctest.h"

using namespace bicscat;

namespace {

const double kFirst = kPi * kPi / 2.0;

ChannelEigenBasis solve(double K, double beta) {
  LatticeConfig cfg;
  cfg.asymmetry = beta;
  return solve_channel(cfg, RegionConfig{}, BlochChannel::from_momentum(K));
}

PoleSearchOptions gamma_window() {
  PoleSearchOptions o;
  o.re_lo = 1e-3;
  o.re_hi = kFirst - 1e-3;
  o.im_lo = -0.05;
  return o;
}

}  // namespace

TEST_CASE("bound-state determinant is real below threshold at beta = 0") {
  const ChannelEigenBasis basis = solve(kPi / 3.0, 0.0);
  for (double E : {0.05, 0.2, 0.4}) {
    const BoundStateMatrix m = bound_state_matrix(basis, E);
    CHECK(std::abs(m.det.imag()) < 1e-10 * std::max(1.0, std::abs(m.det)));
    CHECK(m.decay_rate == doctest::Approx(std::sqrt(kPi * kPi / 9.0 - 2.0 * E)));
  }
  CHECK_THROWS_AS(det_hbd(basis, 0.6), DomainError);
}

TEST_CASE("BIC below the nu = 0 threshold at K = pi/3") {
  const ChannelEigenBasis basis = solve(kPi / 3.0, 0.0);
  const double threshold = kPi * kPi / 18.0;
  const BicScan scan = scan_bics(basis, 0.0, threshold, 2000);
  REQUIRE(scan.roots.size() == 1);
  const BicRoot& r = scan.roots.front();
  CHECK(r.energy == doctest::Approx(0.226718).epsilon(1e-5));
  CHECK(r.energy < threshold);
  CHECK(r.residual < 1e-6);
  const double below = det_hbd(basis, r.energy - 1e-3);
  const double above = det_hbd(basis, r.energy + 1e-3);
  CHECK(below * above < 0.0);
}

TEST_CASE("no Gamma-point poles at beta = 0, two at beta = 0.01") {
  const PoleSearch at0 = find_poles(solve(0.0, 0.0), gamma_window());
  CHECK(at0.poles.empty());

  const PoleSearch at1 = find_poles(solve(0.0, 0.01), gamma_window());
  REQUIRE(at1.poles.size() == 2);
  std::vector<cplx> e{at1.poles[0].energy, at1.poles[1].energy};
  std::sort(e.begin(), e.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  CHECK(e[0].real() == doctest::Approx(0.56380).epsilon(1e-4));
  CHECK(e[1].real() == doctest::Approx(4.70016).epsilon(1e-4));
  CHECK(e[0].imag() == doctest::Approx(-3.469e-5).epsilon(1e-2));
  CHECK(e[1].imag() == doctest::Approx(-1.204e-5).epsilon(1e-2));
  CHECK(at1.winding == 2);
}

TEST_CASE("pole widths are even in beta") {
  const PoleSearch plus = find_poles(solve(0.0, 0.01), gamma_window());
  const PoleSearch minus = find_poles(solve(0.0, -0.01), gamma_window());
  REQUIRE(plus.poles.size() == minus.poles.size());
  double sp = 0.0, sm = 0.0;
  for (const Pole& p : plus.poles) sp += p.energy.imag();
  for (const Pole& p : minus.poles) sm += p.energy.imag();
  CHECK(sm == doctest::Approx(sp).epsilon(0.05));
}

TEST_CASE("S stays unitary on the real axis next to a pole") {
  const ChannelEigenBasis basis = solve(0.0, 0.01);
  const PoleSearch found = find_poles(basis, gamma_window());
  REQUIRE(!found.poles.empty());
  for (const Pole& p : found.poles) {
    for (double d : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
      const double E = p.energy.real() + d * std::abs(p.energy.imag());
      CHECK(unitarity_defect(scatter(basis, E, 1).s_prop) < 1e-8);
    }
  }
}

TEST_CASE("lifetime fit recovers a synthetic power law") {
  std::vector<PoleTrackPoint> pts;
  for (double b : {0.005, 0.01, 0.02, 0.04, 0.08}) pts.push_back({b, {1.0, -0.3 * b * b}});
  const LifetimeFit f = lifetime_scaling(pts);
  CHECK(f.prefactor == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(f.exponent == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(f.used_points == 5);
  CHECK(f.rms_residual < 1e-10);

  pts.push_back({0.1, {1.0, 0.0}});
  const LifetimeFit bounded = lifetime_scaling(pts, true);
  CHECK(bounded.used_points == 5);
  CHECK(bounded.partial);

  pts.resize(3);
  CHECK_THROWS_AS(lifetime_scaling(pts), InvalidConfig);
}

TEST_CASE("decay rate and lifetime") {
  const cplx pole{0.5, -2e-4};
  CHECK(lifetime_gamma(pole) == doctest::Approx(5000.0));
  CHECK(lifetime_tau(pole) == doctest::Approx(2500.0));
}
