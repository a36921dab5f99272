#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>

#include "bicscat/special.hpp"
#include "doctest.h"

using namespace bicscat;

TEST_CASE("digamma and trigamma agree with Boost on the real axis") {
  for (double x : {0.013, 0.5, 1.0, 2.7, 9.99, 13.0, 150.5, -0.5, -2.3}) {
    const double d = boost::math::digamma(x);
    const double t = boost::math::trigamma(x);
    CHECK(std::abs(digamma(cplx{x, 0.0}) - d) <= 1e-13 * std::max(1.0, std::abs(d)));
    CHECK(std::abs(trigamma(cplx{x, 0.0}) - t) <= 1e-12 * std::max(1.0, std::abs(t)));
  }
}

TEST_CASE("digamma off the real axis") {
  for (double y : {0.1, 1.0, 3.7, 25.0}) {
    // Im psi(1/2 + iy) = (pi / 2) tanh(pi y)
    CHECK(digamma(cplx{0.5, y}).imag() == doctest::Approx(0.5 * kPi * std::tanh(kPi * y)).epsilon(1e-13));
    // psi(z + 1) = psi(z) + 1 / z
    const cplx z{-1.3, y};
    CHECK(std::abs(digamma(z + 1.0) - digamma(z) - 1.0 / z) < 1e-13);
  }
}

TEST_CASE("inverse-square tails against the cot and csc partial fractions") {
  for (cplx y : {cplx{0.37, 0.0}, cplx{4.6, 0.0}, cplx{2.2, -0.3}, cplx{0.0, 1.7}, cplx{11.5, 0.02}}) {
    const cplx y2 = y * y;
    const cplx same = (kPi * y * std::cos(kPi * y) / std::sin(kPi * y) - 1.0) / (2.0 * y2);
    const cplx alt = (kPi * y / std::sin(kPi * y) - 1.0) / (2.0 * y2);
    CHECK(std::abs(inverse_square_tail(y, 1) - same) < 1e-12 * std::max(1.0, std::abs(same)));
    CHECK(std::abs(alternating_inverse_square_tail(y, 1) - alt) < 1e-12 * std::max(1.0, std::abs(alt)));
    // Shifting the first index removes the leading terms.
    cplx head = 0.0, head_alt = 0.0;
    for (long n = 1; n < 37; ++n) {
      head += 1.0 / (y2 - double(n * n));
      head_alt += (n % 2 ? -1.0 : 1.0) / (y2 - double(n * n));
    }
    CHECK(std::abs(inverse_square_tail(y, 37) - (same - head)) < 1e-12 * std::max(1.0, std::abs(same)));
    CHECK(std::abs(alternating_inverse_square_tail(y, 37) - (alt - head_alt)) < 1e-12 * std::max(1.0, std::abs(alt)));
  }
}

TEST_CASE("tails at y = 0 use the trigamma limit") {
  // sum_{n >= 41} 1 / (-n^2) = -psi'(41)
  CHECK(inverse_square_tail(cplx{0.0, 0.0}, 41).real() ==
        doctest::Approx(-boost::math::trigamma(41.0)).epsilon(1e-13));
}
