#include <cmath>

#include "bicscat/bloch_basis.hpp"
#include "bicscat/reaction_region.hpp"
#include "doctest.h"

using namespace bicscat;

TEST_CASE("channels and transverse momenta") {
  const BlochChannel c = BlochChannel::from_index(2, 5, 1.0);
  CHECK(c.momentum == doctest::Approx(2.0 * M_PI / 5.0));
  CHECK(transverse_momentum(c, -1, 1.0) == doctest::Approx(2.0 * M_PI / 5.0 - M_PI));
  CHECK_THROWS_AS(BlochChannel::from_index(5, 5, 1.0), InvalidConfig);
  CHECK_THROWS_AS(BlochChannel::from_momentum(-0.1), InvalidConfig);
}

TEST_CASE("mode enumeration at the Gamma point") {
  const BlochChannel g = BlochChannel::from_momentum(0.0);
  const ModeSet low = enumerate_modes(3.0, g, 2, 1.0);
  CHECK(low.size() == 5);
  CHECK(low.propagating_count() == 1);
  CHECK(low.modes[low.position(0)].k.real() == doctest::Approx(std::sqrt(6.0)));
  const ChannelMode& closed = low.modes[low.position(1)];
  CHECK_FALSE(closed.propagating);
  CHECK(closed.decay_rate() == doctest::Approx(std::sqrt(M_PI * M_PI - 6.0)));
  CHECK(enumerate_modes(6.0, g, 2, 1.0).propagating_count() == 3);
}

TEST_CASE("band edges") {
  for (const BandPoint& p : band_structure(11, -2, 2, 1.0)) {
    const double kappa = p.momentum + p.nu * M_PI;
    CHECK(p.energy == doctest::Approx(0.5 * kappa * kappa));
    CHECK(p.momentum <= M_PI / 2.0 + 1e-12);
  }
}

TEST_CASE("continued wavenumber matches the physical sheet on the real axis") {
  const BlochChannel g = BlochChannel::from_momentum(0.3);
  for (double E : {0.2, 3.0, 7.5}) {
    for (int nu : {-1, 0, 1}) {
      const cplx phys = mode_wavenumber(cplx{E, 0.0}, g, nu, 1.0);
      const cplx cont = continued_wavenumber(cplx{E, 0.0}, g, nu, 1.0, E);
      CHECK(std::abs(phys - cont) < 1e-14);
      CHECK(std::abs(phys * phys - (2.0 * E - std::pow(transverse_momentum(g, nu, 1.0), 2))) < 1e-12);
    }
  }
  // Below the axis an open mode continues onto the second sheet.
  const cplx k = continued_wavenumber(cplx{3.0, -0.1}, g, 0, 1.0, 3.0);
  CHECK(k.imag() < 0.0);
}

namespace {

const ChannelEigenBasis& gamma_basis() {
  static const ChannelEigenBasis b =
      solve_channel(LatticeConfig{}, RegionConfig{}, BlochChannel::from_momentum(0.0));
  return b;
}

}  // namespace

TEST_CASE("eigenbasis is orthonormal, ascending and solves H") {
  const LatticeConfig cfg;
  const RegionConfig region;
  const CMatrix H = build_channel_hamiltonian(cfg, region, BlochChannel::from_momentum(0.0));
  const ChannelEigenBasis& b = gamma_basis();
  const CMatrix& C = b.coefficients;
  CHECK((C.adjoint() * C - CMatrix::Identity(C.cols(), C.cols())).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((H * C - C * b.eigenvalues.cast<cplx>().asDiagonal()).cwiseAbs().maxCoeff() < 1e-9);
  for (int j = 1; j < b.size(); ++j) CHECK(b.eigenvalues(j) >= b.eigenvalues(j - 1));
}

TEST_CASE("Gamma-point spectrum at L = 3") {
  // Frozen from this implementation at the default truncation.
  const RVector& e = gamma_basis().eigenvalues;
  CHECK(e(0) == doctest::Approx(-17.8031893).epsilon(1e-8));
  auto near = [&](double x) {
    Eigen::Index j = 0;
    (e.array() - x).abs().minCoeff(&j);
    return int(j);
  };
  CHECK(e(near(0.656436)) == doctest::Approx(0.656436).epsilon(1e-6));
  CHECK(e(near(4.698820)) == doctest::Approx(4.698820).epsilon(1e-6));
  CHECK(x_parity(gamma_basis().coefficients.col(near(0.656436)), RegionConfig{}) == Parity::odd);
  CHECK(x_parity(gamma_basis().coefficients.col(near(10.136893)), RegionConfig{}) == Parity::even);
}

TEST_CASE("Parseval: mode profiles carry unit norm") {
  const ChannelEigenBasis& b = gamma_basis();
  const double L = b.region.half_width;
  for (int j : {0, 5, 17}) {
    double total = 0.0;
    const int steps = 2000;
    for (int nu = -b.fourier_cutoff(); nu <= b.fourier_cutoff(); ++nu) {
      for (int i = 0; i <= steps; ++i) {
        const double z = -L + 2.0 * L * i / steps;
        const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        total += w * std::norm(b.mode_profile(j, nu, z));
      }
    }
    CHECK(total * (2.0 * L / steps) / 3.0 == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("surface amplitudes equal the profiles at the walls") {
  const ChannelEigenBasis& b = gamma_basis();
  const double L = b.region.half_width;
  for (int j : {3, 11}) {
    for (int nu : {-1, 0, 2}) {
      CHECK(std::abs(b.surface(false, j, nu) - b.mode_profile(j, nu, -L)) < 1e-12);
      CHECK(std::abs(b.surface(true, j, nu) - b.mode_profile(j, nu, L)) < 1e-12);
    }
  }
}

TEST_CASE("energy ceiling drops the upper states") {
  SolveOptions o;
  o.energy_ceiling = 5.0;
  const ChannelEigenBasis b =
      solve_channel(LatticeConfig{}, RegionConfig{}, BlochChannel::from_momentum(0.0), o);
  CHECK(b.eigenvalues.maxCoeff() <= 5.0);
  CHECK(b.size() == (gamma_basis().eigenvalues.array() <= 5.0).count());
}

TEST_CASE("classification of the first window") {
  std::vector<double> Ls;
  for (int i = 0; i <= 10; ++i) Ls.push_back(2.5 + 0.25 * i);
  const ClassifyResult r = classify_states(LatticeConfig{}, RegionConfig{},
                                           BlochChannel::from_momentum(0.0), Ls, 0.0, M_PI * M_PI / 2);
  const auto loc = localized_in(r.tags, 0.0, M_PI * M_PI / 2);
  REQUIRE(loc.size() == 2);
  CHECK(loc[0].energy == doctest::Approx(0.656436).epsilon(1e-6));
  CHECK(loc[1].energy == doctest::Approx(4.698820).epsilon(1e-6));
  CHECK(loc[0].parity == Parity::odd);
  CHECK(loc[1].parity == Parity::odd);
  CHECK(std::abs(loc[0].drift) < 0.1);
  CHECK(r.spectra.size() == Ls.size());
  CHECK_THROWS_AS(classify_states(LatticeConfig{}, RegionConfig{}, BlochChannel::from_momentum(0.0),
                                  {3.0, 3.5}, 0.0, 1.0),
                  InvalidConfig);
}
