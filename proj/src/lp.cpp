#include "oplab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oplab {

StandardFormLP to_standard_form(const LPProblem& p) {
  const int n = p.num_vars();
  const int m_eq = static_cast<int>(p.b_eq.size());
  const int m_ge = static_cast<int>(p.b_ge.size());
  if (p.A_eq.size() > 0 && (p.A_eq.rows() != m_eq || p.A_eq.cols() != n))
    throw DimensionMismatch("lp: A_eq shape");
  if (p.A_ge.size() > 0 && (p.A_ge.rows() != m_ge || p.A_ge.cols() != n))
    throw DimensionMismatch("lp: A_ge shape");

  int n_std = 0;
  std::vector<int> pos_col(n), neg_col(n, -1);
  for (int j = 0; j < n; ++j) {
    pos_col[j] = n_std++;
    if (!p.free_vars.empty() && p.free_vars[j]) neg_col[j] = n_std++;
  }
  const int slack0 = n_std;
  n_std += m_ge;  // surplus variables for >= rows

  const int m = m_eq + m_ge;
  StandardFormLP s;
  s.c = Vector::Zero(n_std);
  s.A = Matrix::Zero(m, n_std);
  s.b = Vector::Zero(m);
  s.recover = Matrix::Zero(n, n_std);

  for (int j = 0; j < n; ++j) {
    s.c[pos_col[j]] = p.c[j];
    s.recover(j, pos_col[j]) = 1.0;
    if (neg_col[j] >= 0) {
      s.c[neg_col[j]] = -p.c[j];
      s.recover(j, neg_col[j]) = -1.0;
    }
  }
  for (int i = 0; i < m_eq; ++i) {
    for (int j = 0; j < n; ++j) {
      s.A(i, pos_col[j]) = p.A_eq(i, j);
      if (neg_col[j] >= 0) s.A(i, neg_col[j]) = -p.A_eq(i, j);
    }
    s.b[i] = p.b_eq[i];
  }
  for (int i = 0; i < m_ge; ++i) {
    const int r = m_eq + i;
    for (int j = 0; j < n; ++j) {
      s.A(r, pos_col[j]) = p.A_ge(i, j);
      if (neg_col[j] >= 0) s.A(r, neg_col[j]) = -p.A_ge(i, j);
    }
    s.A(r, slack0 + i) = -1.0;
    s.b[r] = p.b_ge[i];
  }
  // flip rows so b >= 0 (phase-1 start needs it)
  for (int i = 0; i < m; ++i) {
    if (s.b[i] < 0) {
      s.A.row(i) *= -1.0;
      s.b[i] *= -1.0;
    }
  }
  return s;
}

namespace {

struct Tableau {
  // basis holds column indices into A (columns >= n_total are artificials)
  Matrix A;
  Vector b;
  std::vector<int> basis;
};

// One simplex phase on  min c'x  with the given starting basis. Returns
// true when optimal, false when unbounded. Bland's rule throughout.
bool simplex_phase(Matrix& A, Vector& b, const Vector& c, std::vector<int>& basis,
                   Vector& x, double feastol) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  const double pivtol = 1e-11;

  Eigen::PartialPivLU<Matrix> lu;
  Matrix B(m, m);

  auto refactor = [&]() {
    for (int i = 0; i < m; ++i) B.col(i) = A.col(basis[i]);
    lu.compute(B);
  };

  const int max_iter = 20000;
  for (int iter = 0; iter < max_iter; ++iter) {
    refactor();
    Vector xb = lu.solve(b);
    // simplex multipliers y' = c_B' B^{-1}
    Vector cb(m);
    for (int i = 0; i < m; ++i) cb[i] = c[basis[i]];
    Vector y = lu.transpose().solve(cb);

    // Bland: entering = smallest index with negative reduced cost
    int entering = -1;
    std::vector<char> in_basis(n, 0);
    for (int i = 0; i < m; ++i)
      if (basis[i] < n) in_basis[basis[i]] = 1;
    for (int j = 0; j < n; ++j) {
      if (in_basis[j]) continue;
      const double red = c[j] - y.dot(A.col(j));
      if (red < -feastol) {
        entering = j;
        break;
      }
    }
    if (entering < 0) {
      x = Vector::Zero(n);
      for (int i = 0; i < m; ++i)
        if (basis[i] < n) x[basis[i]] = xb[i];
      return true;
    }

    Vector d = lu.solve(A.col(entering));
    // ratio test; ties resolved by smallest basis variable index (Bland)
    int leaving = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (d[i] > pivtol) {
        const double ratio = std::max(xb[i], 0.0) / d[i];
        if (ratio < best_ratio - 1e-13 ||
            (ratio < best_ratio + 1e-13 &&
             (leaving < 0 || basis[i] < basis[leaving]))) {
          best_ratio = ratio;
          leaving = i;
        }
      }
    }
    if (leaving < 0) return false;  // unbounded direction
    basis[leaving] = entering;
  }
  throw Error("lp: simplex iteration limit exceeded");
}

}  // namespace

LPSolution solve_lp(const LPProblem& p, double feastol) {
  StandardFormLP s = to_standard_form(p);
  const int m = static_cast<int>(s.A.rows());
  const int n = static_cast<int>(s.A.cols());

  LPSolution out;
  if (m == 0) {
    // no constraints: optimum at 0 unless some cost is negative
    for (int j = 0; j < n; ++j)
      if (s.c[j] < -feastol) {
        out.status = LPStatus::unbounded;
        return out;
      }
    out.status = LPStatus::optimal;
    out.x = Vector::Zero(p.num_vars());
    out.objective = 0.0;
    return out;
  }

  // phase 1: artificials
  Matrix A1(m, n + m);
  A1.leftCols(n) = s.A;
  A1.rightCols(m) = Matrix::Identity(m, m);
  Vector c1 = Vector::Zero(n + m);
  c1.tail(m).setOnes();
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  Vector x1;
  if (!simplex_phase(A1, s.b, c1, basis, x1, feastol))
    throw Error("lp: phase 1 unbounded (internal)");
  const double phase1 = c1.dot(x1);
  const double scale = 1.0 + s.b.cwiseAbs().maxCoeff();
  if (phase1 > feastol * scale * 10) {
    out.status = LPStatus::infeasible;
    return out;
  }

  // drive artificials out of the basis where possible; redundant rows keep
  // a zero-valued artificial which no longer moves
  {
    Eigen::PartialPivLU<Matrix> lu;
    for (int i = 0; i < m; ++i) {
      if (basis[i] < n) continue;
      Matrix B(m, m);
      for (int k = 0; k < m; ++k) B.col(k) = A1.col(basis[k]);
      lu.compute(B);
      bool replaced = false;
      for (int j = 0; j < n && !replaced; ++j) {
        bool in_basis = false;
        for (int k = 0; k < m; ++k)
          if (basis[k] == j) in_basis = true;
        if (in_basis) continue;
        Vector d = lu.solve(A1.col(j));
        if (std::abs(d[i]) > 1e-8) {
          basis[i] = j;
          replaced = true;
        }
      }
    }
  }

  // phase 2 on the extended matrix with artificials pinned by +inf-ish cost
  Vector c2 = Vector::Zero(n + m);
  c2.head(n) = s.c;
  const double big = 1e12 * (1.0 + s.c.cwiseAbs().maxCoeff());
  for (int j = n; j < n + m; ++j) c2[j] = big;

  Vector x2;
  if (!simplex_phase(A1, s.b, c2, basis, x2, feastol)) {
    out.status = LPStatus::unbounded;
    return out;
  }
  if (x2.tail(m).cwiseAbs().maxCoeff() > feastol * scale * 10) {
    out.status = LPStatus::infeasible;
    return out;
  }

  Vector xs = x2.head(n);
  out.status = LPStatus::optimal;
  out.x = s.recover * xs;
  out.objective = s.c.dot(xs);
  out.primal_residual = (s.A * xs - s.b).cwiseAbs().maxCoeff();
  // duality diagnostics from the final basis
  {
    Matrix B(m, m);
    Vector cb(m);
    for (int i = 0; i < m; ++i) {
      B.col(i) = A1.col(basis[i]);
      cb[i] = c2[basis[i]];
    }
    Vector y = B.transpose().partialPivLu().solve(cb);
    double worst_dual = 0.0;
    for (int j = 0; j < n; ++j)
      worst_dual = std::max(worst_dual, y.dot(s.A.col(j)) - s.c[j]);
    const double gap = std::abs(out.objective - y.dot(s.b));
    out.complementary_residual = std::max(worst_dual, gap) /
                                 (1.0 + std::abs(out.objective));
  }
  return out;
}

}  // namespace oplab
