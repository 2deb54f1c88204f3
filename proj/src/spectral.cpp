#include "oplab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace oplab {

namespace {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Swap the diagonal entries at positions (k, k+1) of the upper triangular T
// by a unitary similarity, updating U accordingly.
void swap_adjacent(CMatrix& T, CMatrix& U, int k) {
  const Complex a = T(k, k);
  const Complex b = T(k, k + 1);
  const Complex c = T(k + 1, k + 1);
  // eigenvector of [[a, b], [0, c]] for eigenvalue c
  Complex w0 = b;
  Complex w1 = c - a;
  const double r = std::sqrt(std::norm(w0) + std::norm(w1));
  if (r < 1e-300) return;  // equal eigenvalues, nothing to move
  w0 /= r;
  w1 /= r;
  CMatrix G(2, 2);
  G << w0, -std::conj(w1), w1, std::conj(w0);
  const int n = static_cast<int>(T.rows());
  T.block(k, 0, 2, n) = G.adjoint() * T.block(k, 0, 2, n);
  T.block(0, k, n, 2) = T.block(0, k, n, 2) * G;
  U.block(0, k, n, 2) = U.block(0, k, n, 2) * G;
  T(k + 1, k) = Complex(0, 0);
}

}  // namespace

OrderedSchur ordered_schur(const Matrix& A, const EigSelector& select) {
  if (A.rows() != A.cols()) throw DimensionMismatch("ordered_schur");
  Eigen::ComplexSchur<CMatrix> schur(A.cast<Complex>());
  OrderedSchur out;
  out.T = schur.matrixT();
  out.U = schur.matrixU();
  const int n = static_cast<int>(A.rows());
  int front = 0;
  for (int i = 0; i < n; ++i) {
    if (select(out.T(i, i))) {
      for (int k = i; k > front; --k) swap_adjacent(out.T, out.U, k - 1);
      ++front;
    }
  }
  out.selected = front;
  return out;
}

Matrix spectral_projector(const Matrix& A, const EigSelector& select) {
  const int n = static_cast<int>(A.rows());
  OrderedSchur os = ordered_schur(A, select);
  const int p = os.selected;
  if (p == 0) return Matrix::Zero(n, n);
  if (p == n) return Matrix::Identity(n, n);
  const int q = n - p;
  CMatrix T11 = os.T.topLeftCorner(p, p);
  CMatrix T12 = os.T.topRightCorner(p, q);
  CMatrix T22 = os.T.bottomRightCorner(q, q);
  // T11 X - X T22 = T12, solved column by column (both blocks triangular)
  CMatrix X(p, q);
  for (int j = 0; j < q; ++j) {
    CVector rhs = T12.col(j);
    for (int i = 0; i < j; ++i) rhs += X.col(i) * T22(i, j);
    CMatrix M = T11 - T22(j, j) * CMatrix::Identity(p, p);
    X.col(j) = M.triangularView<Eigen::Upper>().solve(rhs);
  }
  CMatrix core = CMatrix::Zero(n, n);
  core.topLeftCorner(p, p) = CMatrix::Identity(p, p);
  core.topRightCorner(p, q) = X;
  CMatrix P = os.U * core * os.U.adjoint();
  if (P.imag().cwiseAbs().maxCoeff() > 1e-7 * (1.0 + P.real().cwiseAbs().maxCoeff()))
    throw Error("spectral_projector: projector has a large imaginary part");
  return P.real();
}

std::vector<EigenClusterInfo> eigen_clusters(const Matrix& A, double tol) {
  const int n = static_cast<int>(A.rows());
  Eigen::ComplexEigenSolver<CMatrix> es(A.cast<Complex>(), false);
  CVector ev = es.eigenvalues();
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  const double cluster_radius = std::max(1e-7, 100.0 * tol) * scale;

  std::vector<bool> used(n, false);
  std::vector<EigenClusterInfo> clusters;
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    EigenClusterInfo info;
    Complex sum(0, 0);
    std::vector<int> members;
    for (int j = i; j < n; ++j) {
      if (!used[j] && std::abs(ev[j] - ev[i]) <= cluster_radius) {
        used[j] = true;
        members.push_back(j);
        sum += ev[j];
      }
    }
    info.algebraic = static_cast<int>(members.size());
    info.lambda = sum / static_cast<double>(members.size());
    CMatrix M = A.cast<Complex>() - info.lambda * CMatrix::Identity(n, n);
    Eigen::JacobiSVD<CMatrix> svd(M);
    const auto& sv = svd.singularValues();
    auto rank_at = [&](double thr) {
      int r = 0;
      for (int k = 0; k < sv.size(); ++k)
        if (sv[k] > thr) ++r;
      return r;
    };
    const double base = std::max(tol, 1e-12) * scale;
    info.geometric = n - rank_at(base);
    info.geometric_alt = n - rank_at(10.0 * base);
    info.borderline = info.geometric != info.geometric_alt;
    info.semisimple = !info.borderline && info.geometric == info.algebraic;
    clusters.push_back(info);
  }
  return clusters;
}

}  // namespace oplab
