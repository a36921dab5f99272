#include <algorithm>
#include <array>
#include <cmath>

#include "bicscat/validation.hpp"
#include "doctest.h"

using namespace bicscat;

namespace {

// -psi''/2 - V0 psi = E psi integrated by RK4 from z0 to z1.
std::array<double, 2> shoot(double E, double depth, double z0, double z1, std::array<double, 2> y,
                            int steps = 4000) {
  const double h = (z1 - z0) / steps;
  auto f = [&](const std::array<double, 2>& s) {
    return std::array<double, 2>{s[1], -2.0 * (E + depth) * s[0]};
  };
  for (int i = 0; i < steps; ++i) {
    const auto k1 = f(y);
    const auto k2 = f({y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
    const auto k3 = f({y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
    const auto k4 = f({y[0] + h * k3[0], y[1] + h * k3[1]});
    for (int c = 0; c < 2; ++c) y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
  }
  return y;
}

// R = Psi D^-1 from two solutions with zero slope at either wall; D holds
// the inward normal derivatives.
RMatrix shooting_r(double E, double depth, double L) {
  const auto up = shoot(E, depth, -L, L, {1.0, 0.0});
  const auto down = shoot(E, depth, L, -L, {1.0, 0.0});
  RMatrix psi(2, 2), d(2, 2);
  psi << 1.0, down[0], up[0], 1.0;
  d << 0.0, down[1], -up[1], 0.0;
  return psi * d.inverse();
}

}  // namespace

TEST_CASE("square well at 2 L k0 = pi/2") {
  const SquareWellConfig well{1.0, 3.0, 40};
  const double k0 = kPi / (4.0 * well.half_width);
  const SquareWellR r = square_well_exact(0.5 * k0 * k0 - well.depth, well);
  CHECK(std::abs(r.bb) < 1e-14);
  CHECK(r.bt.real() == doctest::Approx(1.0 / k0).epsilon(1e-13));
}

TEST_CASE("closed form agrees with RK4 shooting") {
  const SquareWellConfig well{1.0, 3.0, 40};
  for (double E : {-0.73, -0.2, 0.31, 2.2}) {
    const RMatrix R = shooting_r(E, well.depth, well.half_width);
    const SquareWellR exact = square_well_exact(E, well);
    CHECK(R(0, 0) == doctest::Approx(exact.bb.real()).epsilon(1e-9));
    CHECK(R(0, 1) == doctest::Approx(exact.bt.real()).epsilon(1e-9));
    CHECK(R(1, 0) == doctest::Approx(R(0, 1)).epsilon(1e-9));
  }
}

TEST_CASE("eigenfunction series, plain and with the tail") {
  for (double depth : {1.0, 0.0}) {
    SquareWellConfig well{depth, 3.0, 10000};
    for (double E : {-0.2, 0.05, 0.9, 5.7}) {
      if (E + depth <= 0.0) continue;
      const SquareWellR exact = square_well_exact(E, well);
      const SquareWellR plain = square_well_series(E, well, false);
      const SquareWellR fast = square_well_series(E, well, true);
      if (depth > 0.0) {
        CHECK(std::abs(plain.bb - exact.bb) / std::abs(exact.bb) < 1e-3);
        CHECK(std::abs(plain.bt - exact.bt) / std::abs(exact.bt) < 1e-3);
      }
      CHECK(std::abs(fast.bb - exact.bb) / std::abs(exact.bb) < 1e-8);
      CHECK(std::abs(fast.bt - exact.bt) / std::abs(exact.bt) < 1e-8);
    }
  }
}

TEST_CASE("square well through the reaction-matrix pipeline") {
  const SquareWellConfig well{1.0, 3.0, 40};
  for (double E : {-0.73, 0.05, 2.2}) {
    const SquareWellR exact = square_well_exact(E, well);
    const SquareWellR p = square_well_pipeline(E, well);
    CHECK(std::abs(p.bb - exact.bb) / std::abs(exact.bb) < 1e-6);
    CHECK(std::abs(p.bt - exact.bt) / std::abs(exact.bt) < 1e-6);
  }
}

TEST_CASE("square well inputs") {
  CHECK_THROWS_AS(square_well_exact(0.0, {1.0, 0.0, 40}), InvalidConfig);
  CHECK_THROWS_AS(square_well_series(0.0, {1.0, 3.0, 0}), InvalidConfig);
  const double k0 = kPi / 6.0;  // sin(2 L k0) = 0
  CHECK_THROWS_AS(square_well_exact(0.5 * k0 * k0 - 1.0, {1.0, 3.0, 40}), PoleProximityError);
}

TEST_CASE("finite differences reproduce the discrete free dispersion") {
  LatticeConfig free;
  free.well_depth = 0.0;
  FdOptions o;
  o.spacing = 0.1;
  o.half_width = 3.0;
  o.target = -0.3;
  o.count = 6;
  for (double K : {0.0, kPi / 5.0}) {
    const std::vector<double> fd = fd_eigen_oracle(free, BlochChannel::from_momentum(K), o);
    const double hx = 0.1, hz = 0.1;
    std::vector<double> exact;
    for (int m = -4; m <= 4; ++m) {
      for (int n = 0; n < 10; ++n) {
        const double kx = K + kPi * m;
        const double kz = n * kPi / (2.0 * o.half_width);
        exact.push_back((1.0 - std::cos(kx * hx)) / (hx * hx) + (1.0 - std::cos(kz * hz)) / (hz * hz));
      }
    }
    std::sort(exact.begin(), exact.end());
    exact.resize(6);
    REQUIRE(fd.size() == 6);
    for (int i = 0; i < 6; ++i) CHECK(fd[i] == doctest::Approx(exact[i]).epsilon(1e-10));
  }
}

TEST_CASE("finite-difference error falls as h^2") {
  LatticeConfig cfg;
  FdOptions o;
  o.target = 0.6;
  o.count = 1;
  const double ref = 0.656436;  // converged level of the default lattice
  o.spacing = 0.1;
  const double e1 = fd_eigen_oracle(cfg, BlochChannel::from_momentum(0.0), o).front();
  o.spacing = 0.05;
  const double e2 = fd_eigen_oracle(cfg, BlochChannel::from_momentum(0.0), o).front();
  const double ratio = (e1 - ref) / (e2 - ref);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
  CHECK(std::abs(richardson({e1}, {e2}).front() - ref) < 0.5 * std::abs(e2 - ref));
  CHECK_THROWS_AS(richardson({1.0}, {1.0, 2.0}), InvalidConfig);
}

TEST_CASE("finite-difference memory guard") {
  FdOptions o;
  o.spacing = 1e-4;
  CHECK_THROWS_AS(fd_eigen_oracle(LatticeConfig{}, BlochChannel::from_momentum(0.0), o), InvalidConfig);
}
