#ifndef OPLAB_EXPM_HPP
#define OPLAB_EXPM_HPP

#include "oplab/types.hpp"

namespace oplab {

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant.
Matrix expm(const Matrix& A);

/// integral of the semigroup, int_0^t e^{sA} ds, read off the top-right
/// block of exp(t [[A, I], [0, 0]]).
Matrix semigroup_integral(const Matrix& A, double t);

/// M^n by binary exponentiation (n >= 0).
Matrix matrix_power(const Matrix& M, long long n);

}  // namespace oplab

#endif
