#pragma once

#include "bicscat/common.hpp"

namespace bicscat {

// Digamma function for complex argument. Recurrence up to Re z >= 12 followed
// by the Stirling-type asymptotic series; poles at non-positive integers.
cplx digamma(cplx z);

// Trigamma, same strategy. Used for the y -> 0 limit of the cosine-series tails.
cplx trigamma(cplx z);

// Sum_{n = first}^{inf} 1 / (y^2 - n^2), first >= 1.
cplx inverse_square_tail(cplx y, long first);

// Sum_{n = first}^{inf} (-1)^n / (y^2 - n^2), first >= 1.
cplx alternating_inverse_square_tail(cplx y, long first);

}  // namespace bicscat
