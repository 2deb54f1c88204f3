#include "oplab/expm.hpp"

#include <Eigen/LU>
#include <cmath>

namespace oplab {

Matrix expm(const Matrix& A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("expm: square matrix");
  const int n = static_cast<int>(A.rows());
  if (n == 0) return Matrix(0, 0);
  if (!A.allFinite()) throw EvaluationOverflow("expm: non-finite input");

  static const double b[] = {64764752532480000.0, 32382376266240000.0,
                             7771770303897600.0,  1187353796428800.0,
                             129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,
                             1323241920.0,        40840800.0,
                             960960.0,            16380.0,
                             182.0,               1.0};
  const double theta13 = 5.371920351148152;

  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  Matrix As = A / std::pow(2.0, s);

  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = As * As;
  const Matrix A4 = A2 * A2;
  const Matrix A6 = A2 * A4;
  Matrix U = As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 +
                   b[5] * A4 + b[3] * A2 + b[1] * I);
  Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 +
             b[4] * A4 + b[2] * A2 + b[0] * I;
  Matrix F = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k) F = F * F;
  if (!F.allFinite()) throw EvaluationOverflow("expm: overflow");
  return F;
}

Matrix semigroup_integral(const Matrix& A, double t) {
  if (A.rows() != A.cols()) throw DimensionMismatch("semigroup_integral");
  const int n = static_cast<int>(A.rows());
  Matrix blk = Matrix::Zero(2 * n, 2 * n);
  blk.topLeftCorner(n, n) = A;
  blk.topRightCorner(n, n) = Matrix::Identity(n, n);
  Matrix E = expm(t * blk);
  return E.topRightCorner(n, n);
}

Matrix matrix_power(const Matrix& M, long long n) {
  if (M.rows() != M.cols()) throw DimensionMismatch("matrix_power");
  if (n < 0) throw PreconditionViolation("matrix_power: n >= 0");
  Matrix result = Matrix::Identity(M.rows(), M.cols());
  Matrix base = M;
  long long e = n;
  while (e > 0) {
    if (e & 1) result = result * base;
    base = base * base;
    e >>= 1;
    if (!result.allFinite() || (e > 0 && !base.allFinite()))
      throw EvaluationOverflow("matrix_power: overflow at large exponent");
  }
  return result;
}

}  // namespace oplab
