#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <array>
#include <cmath>

#include "bicscat/bloch_basis.hpp"
#include "bicscat/potential.hpp"
#include "bicscat/reaction_region.hpp"
#include "doctest.h"

using namespace bicscat;

TEST_CASE("potential at the origin") {
  // Frozen from the closed form with U = 30, eps = sigma = 0.4, a = 1.
  CHECK(potential_value(LatticeConfig{}, 0.0, 0.0) == doctest::Approx(-29.841774).epsilon(1e-7));
}

TEST_CASE("theta series matches the Gaussian comb and a 1000-term sum") {
  for (double eps : {0.25, 0.4, 0.9}) {
    LatticeConfig cfg;
    cfg.theta_width = eps;
    const double q = cfg.nome();
    const double tau = -std::log(q);
    for (double u = -2.0; u <= 2.0; u += 0.093) {
      double comb = 0.0;
      for (int m = -30; m <= 30; ++m) comb += std::exp(-(u - m * M_PI) * (u - m * M_PI) / tau);
      comb *= std::sqrt(M_PI / tau);
      CHECK(std::abs(theta3(u, q) - comb) < 1e-10);
      CHECK(std::abs(theta3(u, q) - theta3(u, q, 1000)) < 1e-14);
    }
  }
}

TEST_CASE("lattice symmetries") {
  LatticeConfig cfg;
  for (double x : {0.1, 0.37, 0.8}) {
    for (double z : {-0.6, 0.0, 0.45}) {
      CHECK(potential_value(cfg, x, z) == doctest::Approx(potential_value(cfg, -x, z)).epsilon(1e-14));
      CHECK(potential_value(cfg, x + 2.0, z) == doctest::Approx(potential_value(cfg, x, z)).epsilon(1e-12));
    }
  }
  cfg.asymmetry = 0.3;
  CHECK(std::abs(potential_value(cfg, 0.3, 0.2) - potential_value(cfg, -0.3, 0.2)) > 1e-3);
}

TEST_CASE("config validation") {
  LatticeConfig bad;
  bad.gauss_width = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = LatticeConfig{};
  bad.theta_truncation = 1;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  RegionConfig narrow;
  narrow.half_width = 1.0;
  CHECK_THROWS_AS(narrow.validate(LatticeConfig{}), InvalidConfig);
}

namespace {

// (1 / 2a) int dx e^{-i d pi x / a} int dz V(x, z) xi_n1(z) xi_n2(z) by nested Gauss-Kronrod.
cplx quadrature_element(const LatticeConfig& cfg, double L, int d, int n1, int n2) {
  using boost::math::quadrature::gauss_kronrod;
  auto inner = [&](double x, bool imag) {
    auto f = [&](double z) {
      return potential_value(cfg, x, z) * neumann_mode(n1, z, L) * neumann_mode(n2, z, L);
    };
    const double zint = gauss_kronrod<double, 61>::integrate(f, -L, L, 12, 1e-13);
    const double phase = -d * M_PI * x / cfg.half_cell;
    return zint * (imag ? std::sin(phase) : std::cos(phase));
  };
  const double a = cfg.half_cell;
  const double re = gauss_kronrod<double, 61>::integrate([&](double x) { return inner(x, false); }, -a, a, 12, 1e-12);
  const double im = gauss_kronrod<double, 61>::integrate([&](double x) { return inner(x, true); }, -a, a, 12, 1e-12);
  return cplx{re, im} / (2.0 * a);
}

}  // namespace

TEST_CASE("channel matrix elements against 2D quadrature") {
  LatticeConfig cfg;
  cfg.asymmetry = 0.2;
  const RegionConfig region;
  const BlochChannel ch = BlochChannel::from_momentum(0.0);
  for (auto [nu1, n1, nu2, n2] : {std::array{0, 0, 0, 0}, std::array{1, 2, 0, 1}, std::array{-2, 5, 1, 3}}) {
    const cplx analytic = channel_matrix_element(cfg, region, ch, nu1, n1, nu2, n2);
    const cplx numeric = quadrature_element(cfg, region.half_width, nu1 - nu2, n1, n2);
    CHECK(std::abs(analytic - numeric) < 1e-9 * std::max(1.0, std::abs(numeric)));
  }
}

TEST_CASE("channel Hamiltonian is Hermitian and parity-symmetric at beta = 0") {
  LatticeConfig cfg;
  RegionConfig region;
  region.fourier_cutoff = 4;
  region.transverse_cutoff = 20;
  cfg.asymmetry = 0.05;
  for (double K : {0.0, 0.7}) {
    const CMatrix H = build_channel_hamiltonian(cfg, region, BlochChannel::from_momentum(K));
    CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * H.cwiseAbs().maxCoeff());
  }
  cfg.asymmetry = 0.0;
  const CMatrix H = build_channel_hamiltonian(cfg, region, BlochChannel::from_momentum(0.0));
  // x -> -x maps nu -> -nu
  const int size = region.basis_size();
  CMatrix P = CMatrix::Zero(size, size);
  for (int nu = -region.fourier_cutoff; nu <= region.fourier_cutoff; ++nu) {
    for (int n = 0; n <= region.transverse_cutoff; ++n) P(region.index(-nu, n), region.index(nu, n)) = 1.0;
  }
  CHECK((P * H - H * P).cwiseAbs().maxCoeff() < 1e-12 * H.cwiseAbs().maxCoeff());
}
