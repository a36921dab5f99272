#include "bicscat/special.hpp"

#include <cmath>

namespace bicscat {

namespace {

constexpr double kShiftThreshold = 12.0;
constexpr double kSmallY = 1e-6;

bool is_pole(cplx z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

}  // namespace

cplx digamma(cplx z) {
  if (is_pole(z)) throw DomainError("digamma evaluated at a pole");
  cplx shift{0.0, 0.0};
  while (z.real() < kShiftThreshold) {
    shift -= 1.0 / z;
    z += 1.0;
  }
  const cplx w = 1.0 / (z * z);
  // Bernoulli terms B_2k / (2k z^2k), k = 1..7
  const cplx series =
      w * (1.0 / 12 -
           w * (1.0 / 120 -
                w * (1.0 / 252 -
                     w * (1.0 / 240 - w * (1.0 / 132 - w * (691.0 / 32760 - w / 12.0))))));
  return shift + std::log(z) - 0.5 / z - series;
}

cplx trigamma(cplx z) {
  if (is_pole(z)) throw DomainError("trigamma evaluated at a pole");
  cplx shift{0.0, 0.0};
  while (z.real() < kShiftThreshold) {
    shift += 1.0 / (z * z);
    z += 1.0;
  }
  const cplx w = 1.0 / (z * z);
  const cplx series =
      w * (1.0 / 6 -
           w * (1.0 / 30 -
                w * (1.0 / 42 - w * (1.0 / 30 - w * (5.0 / 66 - w * (691.0 / 2730 - w * (7.0 / 6)))))));
  return shift + 1.0 / z + 0.5 * w + series / z;
}

cplx inverse_square_tail(cplx y, long first) {
  if (first < 1) throw InvalidConfig("series tail must start at n >= 1");
  const double f = static_cast<double>(first);
  if (std::abs(y) < kSmallY) return -trigamma(cplx{f, 0.0});
  return (digamma(f - y) - digamma(f + y)) / (2.0 * y);
}

namespace {

// Sum_{m>=0} (-1)^m / (m + z)
cplx alternating_harmonic(cplx z) { return 0.5 * (digamma(0.5 * (z + 1.0)) - digamma(0.5 * z)); }

cplx alternating_harmonic_derivative(cplx z) {
  return 0.25 * (trigamma(0.5 * z) - trigamma(0.5 * (z + 1.0)));
}

}  // namespace

cplx alternating_inverse_square_tail(cplx y, long first) {
  if (first < 1) throw InvalidConfig("series tail must start at n >= 1");
  const double f = static_cast<double>(first);
  const double sign = (first % 2 == 0) ? 1.0 : -1.0;
  if (std::abs(y) < kSmallY) {
    // d/dc of Sum (-1)^n/(n+c) at c=0 equals -Sum (-1)^n/n^2
    return -sign * alternating_harmonic_derivative(cplx{f, 0.0});
  }
  const cplx plus = sign * alternating_harmonic(f + y);
  const cplx minus = sign * alternating_harmonic(f - y);
  return (plus - minus) / (2.0 * y);
}

}  // namespace bicscat
