#include "oplab/cone.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "oplab/norm.hpp"

namespace oplab {

namespace {

Matrix normalize_rows(Matrix H) {
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    const double n = H.row(i).norm();
    if (n > 0) H.row(i) /= n;
  }
  return H;
}

bool is_nonneg_combination(const Vector& r, const Matrix& others, double tol) {
  if (others.cols() == 0) return false;
  LPProblem p;
  const int g = static_cast<int>(others.cols());
  const int d = static_cast<int>(r.size());
  // r = others * lambda + s+ - s-, minimize sum of slacks
  p.c = Vector::Zero(g + 2 * d);
  p.c.segment(g, 2 * d).setOnes();
  p.A_eq = Matrix::Zero(d, g + 2 * d);
  p.A_eq.leftCols(g) = others;
  p.A_eq.block(0, g, d, d) = Matrix::Identity(d, d);
  p.A_eq.block(0, g + d, d, d) = -Matrix::Identity(d, d);
  p.b_eq = r;
  LPSolution s = solve_lp(p);
  return s.status == LPStatus::optimal && s.objective < tol * (1.0 + r.norm());
}

// Incremental double description: cut the cone spanned by `gens` with the
// halfspace <phi, x> >= 0, then prune non-extreme rays.
Matrix cut_with_halfspace(const Matrix& gens, const Vector& phi) {
  const int d = static_cast<int>(gens.rows());
  std::vector<Vector> keep;
  std::vector<int> pos, neg;
  const double tol = 1e-12;
  for (int i = 0; i < gens.cols(); ++i) {
    const double v = phi.dot(gens.col(i));
    const double s = tol * (1.0 + gens.col(i).norm() * phi.norm());
    if (v >= -s) keep.push_back(gens.col(i));
    if (v > s) pos.push_back(i);
    else if (v < -s) neg.push_back(i);
  }
  for (int i : pos)
    for (int j : neg) {
      const double vi = phi.dot(gens.col(i));
      const double vj = phi.dot(gens.col(j));
      Vector r = vi * gens.col(j) - vj * gens.col(i);
      if (r.cwiseAbs().maxCoeff() > tol) keep.push_back(r);
    }
  // prune rays expressible as nonnegative combinations of the others
  std::vector<Vector> extreme;
  for (size_t i = 0; i < keep.size(); ++i) {
    Matrix others(d, keep.size() - 1);
    int c = 0;
    for (size_t j = 0; j < keep.size(); ++j)
      if (j != i) others.col(c++) = keep[j];
    if (!is_nonneg_combination(keep[i], others, 1e-9)) extreme.push_back(keep[i]);
  }
  Matrix out(d, extreme.size());
  for (size_t i = 0; i < extreme.size(); ++i) out.col(i) = extreme[i];
  return out;
}

Matrix centred_ray_net(const Vector& u, const Vector& u_prime) {
  // boundary rays u + q with q spanning ker(u'), plus u itself
  const int d = static_cast<int>(u.size());
  Matrix basis(d, d);
  basis.col(0) = u_prime.normalized();
  // complete to an orthonormal basis, columns 1.. span ker(u')
  Eigen::HouseholderQR<Matrix> qr(basis.col(0));
  Matrix Q = qr.householderQ();
  std::vector<Vector> rays;
  rays.push_back(u);
  for (int k = 1; k < d; ++k) {
    Vector q = Q.col(k);
    q -= u_prime * (u_prime.dot(q) / u_prime.squaredNorm());
    const double n = q.norm();
    if (n < 1e-12) continue;
    q /= n;
    rays.push_back(u + q);
    rays.push_back(u - q);
  }
  Matrix out(d, rays.size());
  for (size_t i = 0; i < rays.size(); ++i) out.col(i) = rays[i];
  return out;
}

Matrix psd_ray_net(int n) {
  // rank-one frames v v^T spanning Sym(n): axes, pairwise sums/differences
  std::vector<Vector> rays;
  Matrix I = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    rays.push_back(Cone::sym_to_coords(I.col(i) * I.col(i).transpose()));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vector a = (I.col(i) + I.col(j)).normalized();
      Vector b = (I.col(i) - I.col(j)).normalized();
      rays.push_back(Cone::sym_to_coords(a * a.transpose()));
      rays.push_back(Cone::sym_to_coords(b * b.transpose()));
    }
  Matrix out(Cone::sym_coord_dim(n), rays.size());
  for (size_t i = 0; i < rays.size(); ++i) out.col(i) = rays[i];
  return out;
}

}  // namespace

Cone Cone::orthant(int d) {
  if (d <= 0) throw PreconditionViolation("cone: dimension must be positive");
  Cone c;
  c.kind_ = Kind::orthant;
  c.dim_ = d;
  c.generators_ = Matrix::Identity(d, d);
  c.halfspaces_ = Matrix::Identity(d, d);
  return c;
}

Cone Cone::polyhedral(Matrix generators, Matrix halfspaces) {
  Cone c;
  c.kind_ = Kind::polyhedral;
  if (generators.cols() == 0) throw PreconditionViolation("cone: no generators");
  c.dim_ = static_cast<int>(generators.rows());
  c.generators_ = std::move(generators);
  if (halfspaces.size() > 0) {
    if (halfspaces.cols() != c.dim_) throw DimensionMismatch("cone: halfspaces");
    c.halfspaces_ = normalize_rows(std::move(halfspaces));
  }
  // properness: K ∩ -K = {0} iff no generator's negative lies in the cone
  for (int i = 0; i < c.generators_.cols(); ++i) {
    Matrix all = c.generators_;
    if (is_nonneg_combination(-c.generators_.col(i), all, 1e-9))
      throw PreconditionViolation("cone: not proper (contains a line)");
  }
  return c;
}

Cone Cone::centred(Vector u, Vector u_prime) {
  if (u.size() != u_prime.size()) throw DimensionMismatch("cone: centred u/u'");
  if (std::abs(u_prime.dot(u) - 1.0) > 1e-12)
    throw PreconditionViolation("cone: centred requires <u', u> = 1");
  Cone c;
  c.kind_ = Kind::centred;
  c.dim_ = static_cast<int>(u.size());
  c.u_ = std::move(u);
  c.u_prime_ = std::move(u_prime);
  c.generators_ = centred_ray_net(c.u_, c.u_prime_);
  c.generators_exact_ = false;
  return c;
}

Cone Cone::psd(int n) {
  if (n <= 0) throw PreconditionViolation("cone: psd side must be positive");
  Cone c;
  c.kind_ = Kind::psd;
  c.dim_ = sym_coord_dim(n);
  c.psd_n_ = n;
  c.generators_ = psd_ray_net(n);
  c.generators_exact_ = false;
  return c;
}

Cone Cone::sliced(const Cone& base, const Vector& phi) {
  if (phi.size() != base.dim()) throw DimensionMismatch("cone: slice functional");
  if (base.kind_ != Kind::orthant && base.kind_ != Kind::polyhedral &&
      base.kind_ != Kind::sliced)
    throw UnsupportedPair("cone: slicing needs a polyhedral base");
  if (!base.generators_exact_)
    throw UnsupportedPair("cone: slicing needs exact base generators");
  Cone c;
  c.kind_ = Kind::sliced;
  c.dim_ = base.dim();
  c.phi_ = phi;
  c.generators_ = cut_with_halfspace(base.generators_, phi);
  if (c.generators_.cols() == 0)
    throw PreconditionViolation("cone: slice leaves only the origin");
  Matrix H(base.halfspaces_.rows() + 1, c.dim_);
  H.topRows(base.halfspaces_.rows()) = base.halfspaces_;
  H.row(base.halfspaces_.rows()) = phi.transpose();
  c.halfspaces_ = normalize_rows(H);
  return c;
}

const Matrix& Cone::generators() const {
  if (generators_.cols() == 0) throw UnsupportedPair("cone: no generators");
  return generators_;
}

const Matrix& Cone::halfspaces() const {
  if (!has_halfspaces()) throw UnsupportedPair("cone: no halfspace description");
  return halfspaces_;
}

bool Cone::contains(const Vector& x, double tol) const {
  require_dim(x, dim_, "cone::contains");
  const double scale = 1.0 + x.norm();
  switch (kind_) {
    case Kind::orthant:
      return x.minCoeff() >= -tol * scale;
    case Kind::sliced:
    case Kind::polyhedral: {
      if (has_halfspaces()) {
        return (halfspaces_ * x).minCoeff() >= -tol * scale;
      }
      // generator representation: minimal l1 deviation from the span
      LPProblem p;
      const int g = static_cast<int>(generators_.cols());
      const int d = dim_;
      p.c = Vector::Zero(g + 2 * d);
      p.c.segment(g, 2 * d).setOnes();
      p.A_eq = Matrix::Zero(d, g + 2 * d);
      p.A_eq.leftCols(g) = generators_;
      p.A_eq.block(0, g, d, d) = Matrix::Identity(d, d);
      p.A_eq.block(0, g + d, d, d) = -Matrix::Identity(d, d);
      p.b_eq = x;
      LPSolution s = solve_lp(p);
      return s.status == LPStatus::optimal && s.objective <= tol * scale;
    }
    case Kind::centred: {
      const double t = u_prime_.dot(x);
      const Vector q = x - t * u_;
      return t >= q.norm() - tol * scale;
    }
    case Kind::psd: {
      Eigen::SelfAdjointEigenSolver<Matrix> es(coords_to_sym(x, psd_n_));
      return es.eigenvalues().minCoeff() >= -tol * scale;
    }
  }
  return false;
}

bool Cone::dual_contains(const Vector& phi, double tol) const {
  require_dim(phi, dim_, "cone::dual_contains");
  const double scale = 1.0 + phi.norm();
  switch (kind_) {
    case Kind::orthant:
      return phi.minCoeff() >= -tol * scale;
    case Kind::sliced:
    case Kind::polyhedral: {
      const Matrix& G = generators();
      for (int i = 0; i < G.cols(); ++i)
        if (phi.dot(G.col(i)) < -tol * scale * G.col(i).norm()) return false;
      return true;
    }
    case Kind::centred: {
      // <phi, u> must dominate the l2 norm of phi's component in ker(u')
      const Vector proj = phi - u_prime_ * (u_prime_.dot(phi) / u_prime_.squaredNorm());
      return phi.dot(u_) >= proj.norm() - tol * scale;
    }
    case Kind::psd: {
      Eigen::SelfAdjointEigenSolver<Matrix> es(coords_to_sym(phi, psd_n_));
      return es.eigenvalues().minCoeff() >= -tol * scale;
    }
  }
  return false;
}

bool Cone::is_generating(double tol) const {
  if (kind_ == Kind::centred || kind_ == Kind::psd || kind_ == Kind::orthant)
    return true;
  Eigen::ColPivHouseholderQR<Matrix> qr(generators_);
  qr.setThreshold(tol);
  return qr.rank() == dim_;
}

Matrix Cone::dual_generators() const {
  switch (kind_) {
    case Kind::orthant:
      return Matrix::Identity(dim_, dim_);
    case Kind::sliced:
    case Kind::polyhedral:
      if (has_halfspaces()) return halfspaces_.transpose();
      throw UnsupportedPair("cone: dual generators need halfspaces");
    case Kind::centred:
      // dual cone swaps the roles of u and u': rays u' + q, q in ker(u)
      return centred_ray_net(u_prime_, u_);
    case Kind::psd:
      return generators_;  // self-dual under the trace pairing
  }
  throw UnsupportedPair("cone: dual generators");
}

Vector Cone::sample(Rng& rng, double scale) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  switch (kind_) {
    case Kind::psd: {
      std::normal_distribution<double> gauss(0.0, 1.0);
      Matrix A(psd_n_, psd_n_);
      for (int i = 0; i < psd_n_; ++i)
        for (int j = 0; j < psd_n_; ++j) A(i, j) = gauss(rng);
      return sym_to_coords(scale * A * A.transpose() / psd_n_);
    }
    case Kind::centred: {
      std::normal_distribution<double> gauss(0.0, 1.0);
      Vector q(dim_);
      for (int i = 0; i < dim_; ++i) q[i] = gauss(rng);
      q -= u_prime_ * (u_prime_.dot(q) / u_prime_.squaredNorm());
      const double qn = q.norm();
      const double t = scale * (0.2 + unif(rng));
      const double rho = unif(rng);
      Vector x = t * u_;
      if (qn > 1e-14) x += (rho * t / qn) * q;
      return x;
    }
    default: {
      const Matrix& G = generators();
      Vector lambda(G.cols());
      for (int i = 0; i < lambda.size(); ++i) lambda[i] = unif(rng) * scale;
      return G * lambda;
    }
  }
}

Vector Cone::dual_sample(Rng& rng, double scale) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  switch (kind_) {
    case Kind::orthant: {
      Vector v(dim_);
      for (int i = 0; i < dim_; ++i) v[i] = unif(rng) * scale;
      return v;
    }
    case Kind::psd:
      return sample(rng, scale);
    case Kind::centred: {
      Cone dual = Cone::centred(u_prime_, u_);
      return dual.sample(rng, scale);
    }
    default: {
      Matrix D = dual_generators();
      Vector lambda(D.cols());
      for (int i = 0; i < lambda.size(); ++i) lambda[i] = unif(rng) * scale;
      return D * lambda;
    }
  }
}

Vector Cone::sym_to_coords(const Matrix& S) {
  const int n = static_cast<int>(S.rows());
  if (S.cols() != n) throw DimensionMismatch("sym_to_coords: square expected");
  Vector v(sym_coord_dim(n));
  int k = 0;
  const double r2 = std::sqrt(2.0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      v[k++] = (i == j) ? S(i, i) : r2 * 0.5 * (S(i, j) + S(j, i));
  return v;
}

Matrix Cone::coords_to_sym(const Vector& v, int n) {
  if (v.size() != sym_coord_dim(n)) throw DimensionMismatch("coords_to_sym");
  Matrix S(n, n);
  int k = 0;
  const double inv_r2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      S(i, j) = (i == j) ? v[k] : inv_r2 * v[k];
      S(j, i) = S(i, j);
      ++k;
    }
  return S;
}

// ---------------------------------------------------------------------------
// distance, decomposition, supremum feasibility
// ---------------------------------------------------------------------------

namespace {

bool lp_norm_kind(const NormSpec& n) {
  return n.kind() == NormSpec::Kind::l1 || n.kind() == NormSpec::Kind::linf ||
         n.kind() == NormSpec::Kind::weighted_l1;
}

Vector l1_weights(const NormSpec& n, int d) {
  if (n.kind() == NormSpec::Kind::weighted_l1) return n.weights();
  return Vector::Ones(d);
}

DistanceResult distance_lp_impl(const Vector& x, const Cone& cone,
                                const NormSpec& norm) {
  const Matrix& G = cone.generators();
  const int g = static_cast<int>(G.cols());
  const int d = cone.dim();
  LPProblem p;
  if (norm.kind() == NormSpec::Kind::linf) {
    // variables (lambda, tau); |x - G lambda| <= tau componentwise
    p.c = Vector::Zero(g + 1);
    p.c[g] = 1.0;
    p.A_ge = Matrix::Zero(2 * d, g + 1);
    p.b_ge = Vector::Zero(2 * d);
    p.A_ge.block(0, 0, d, g) = G;
    p.A_ge.block(0, g, d, 1).setOnes();
    p.b_ge.head(d) = x;
    p.A_ge.block(d, 0, d, g) = -G;
    p.A_ge.block(d, g, d, 1).setOnes();
    p.b_ge.tail(d) = -x;
    LPSolution s = solve_lp(p);
    if (s.status != LPStatus::optimal)
      throw Error("distance_to_cone: LP failed");
    DistanceResult r;
    r.minimizer = G * s.x.head(g);
    r.distance = s.objective;
    return r;
  }
  // l1 / weighted l1: variables (lambda, r+, r-)
  const Vector w = l1_weights(norm, d);
  p.c = Vector::Zero(g + 2 * d);
  p.c.segment(g, d) = w;
  p.c.segment(g + d, d) = w;
  p.A_eq = Matrix::Zero(d, g + 2 * d);
  p.A_eq.leftCols(g) = G;
  p.A_eq.block(0, g, d, d) = Matrix::Identity(d, d);
  p.A_eq.block(0, g + d, d, d) = -Matrix::Identity(d, d);
  p.b_eq = x;
  LPSolution s = solve_lp(p);
  if (s.status != LPStatus::optimal) throw Error("distance_to_cone: LP failed");
  DistanceResult r;
  r.minimizer = G * s.x.head(g);
  r.distance = s.objective;
  return r;
}

}  // namespace

DistanceResult distance_to_cone(const Vector& x, const Cone& cone,
                                const NormSpec& norm) {
  require_dim(x, cone.dim(), "distance_to_cone");
  switch (cone.kind()) {
    case Cone::Kind::orthant: {
      if (!norm.monotone_on_orthant())
        throw UnsupportedPair("distance_to_cone: orthant needs a monotone norm");
      DistanceResult r;
      r.minimizer = x.cwiseMax(0.0);
      r.distance = norm.eval(x - r.minimizer);
      return r;
    }
    case Cone::Kind::centred: {
      if (norm.kind() != NormSpec::Kind::l2)
        throw UnsupportedPair("distance_to_cone: centred cone dispatches to l2");
      const Vector& u = cone.centre_u();
      const Vector& up = cone.centre_u_prime();
      const double un2 = u.squaredNorm();
      if ((up - u / un2).norm() > 1e-10 * (1.0 + up.norm()))
        throw UnsupportedPair(
            "distance_to_cone: centred projection needs u' parallel to u");
      const double alpha = u.norm();
      const Vector e = u / alpha;
      const double xi = e.dot(x);
      const Vector w = x - xi * e;
      const double s = w.norm();
      DistanceResult r;
      if (xi >= alpha * s) {
        r.minimizer = x;
        r.distance = 0.0;
        return r;
      }
      if (alpha * xi <= -s) {
        r.minimizer = Vector::Zero(x.size());
        r.distance = x.norm();
        return r;
      }
      const double rad = (alpha * xi + s) / (alpha * alpha + 1.0);
      Vector y = (alpha * rad) * e;
      if (s > 1e-15) y += rad * (w / s);
      r.minimizer = y;
      r.distance = (x - y).norm();
      return r;
    }
    case Cone::Kind::psd: {
      if (norm.kind() != NormSpec::Kind::trace &&
          norm.kind() != NormSpec::Kind::l2)
        throw UnsupportedPair("distance_to_cone: psd dispatches to trace/l2");
      const int n = cone.psd_side();
      Eigen::SelfAdjointEigenSolver<Matrix> es(Cone::coords_to_sym(x, n));
      Matrix pos = es.eigenvectors() *
                   es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                   es.eigenvectors().transpose();
      DistanceResult r;
      r.minimizer = Cone::sym_to_coords(pos);
      r.distance = norm.eval(x - r.minimizer);
      return r;
    }
    case Cone::Kind::polyhedral:
    case Cone::Kind::sliced: {
      if (!lp_norm_kind(norm))
        throw UnsupportedPair("distance_to_cone: polyhedral cones use l1/linf");
      return distance_lp_impl(x, cone, norm);
    }
  }
  throw UnsupportedPair("distance_to_cone: unsupported cone");
}

DistanceResult distance_to_cone_lp(const Vector& x, const Cone& cone,
                                   const NormSpec& norm) {
  if (!lp_norm_kind(norm))
    throw UnsupportedPair("distance_to_cone_lp: needs an LP-representable norm");
  return distance_lp_impl(x, cone, norm);
}

Decomposition positive_decompose(const Vector& x, const Cone& cone,
                                 const NormSpec& norm) {
  require_dim(x, cone.dim(), "positive_decompose");
  if (!cone.is_generating())
    throw InfeasibleDecomposition("positive_decompose: cone not generating");
  Decomposition out;
  const double xnorm = norm.eval(x);
  switch (cone.kind()) {
    case Cone::Kind::orthant: {
      if (!norm.monotone_on_orthant())
        throw UnsupportedPair("positive_decompose: needs a monotone norm");
      out.y = x.cwiseMax(0.0);
      out.z = out.y - x;
      break;
    }
    case Cone::Kind::psd: {
      const int n = cone.psd_side();
      Eigen::SelfAdjointEigenSolver<Matrix> es(Cone::coords_to_sym(x, n));
      Matrix pos = es.eigenvectors() *
                   es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                   es.eigenvectors().transpose();
      out.y = Cone::sym_to_coords(pos);
      out.z = out.y - x;
      break;
    }
    case Cone::Kind::centred: {
      if (norm.kind() != NormSpec::Kind::l2 &&
          norm.kind() != NormSpec::Kind::centred_max)
        throw UnsupportedPair("positive_decompose: centred cone norms");
      // Moreau split along the self-dual second-order cone
      DistanceResult proj = distance_to_cone(x, cone, NormSpec::l2());
      out.y = proj.minimizer;
      out.z = out.y - x;
      break;
    }
    case Cone::Kind::polyhedral:
    case Cone::Kind::sliced: {
      if (!lp_norm_kind(norm))
        throw UnsupportedPair("positive_decompose: polyhedral cones use l1/linf");
      const Matrix& G = cone.generators();
      const int g = static_cast<int>(G.cols());
      const int d = cone.dim();
      const Vector w = l1_weights(norm, d);
      LPProblem p;
      if (norm.kind() == NormSpec::Kind::linf) {
        // variables (lambda, mu, ty, tz)
        p.c = Vector::Zero(2 * g + 2);
        p.c[2 * g] = 1.0;
        p.c[2 * g + 1] = 1.0;
        p.A_eq = Matrix::Zero(d, 2 * g + 2);
        p.A_eq.leftCols(g) = G;
        p.A_eq.block(0, g, d, g) = -G;
        p.b_eq = x;
        p.A_ge = Matrix::Zero(4 * d, 2 * g + 2);
        p.b_ge = Vector::Zero(4 * d);
        // |(G lambda)_i| <= ty, |(G mu)_i| <= tz
        p.A_ge.block(0, 0, d, g) = -G;
        p.A_ge.block(0, 2 * g, d, 1).setOnes();
        p.A_ge.block(d, 0, d, g) = G;
        p.A_ge.block(d, 2 * g, d, 1).setOnes();
        p.A_ge.block(2 * d, g, d, g) = -G;
        p.A_ge.block(2 * d, 2 * g + 1, d, 1).setOnes();
        p.A_ge.block(3 * d, g, d, g) = G;
        p.A_ge.block(3 * d, 2 * g + 1, d, 1).setOnes();
        LPSolution s = solve_lp(p);
        if (s.status != LPStatus::optimal)
          throw InfeasibleDecomposition("positive_decompose: LP failed");
        out.y = G * s.x.head(g);
      } else {
        // variables (lambda, mu, p+, p-, q+, q-) with y = p+-p-, z = q+-q-
        const int nv = 2 * g + 4 * d;
        p.c = Vector::Zero(nv);
        p.c.segment(2 * g, d) = w;
        p.c.segment(2 * g + d, d) = w;
        p.c.segment(2 * g + 2 * d, d) = w;
        p.c.segment(2 * g + 3 * d, d) = w;
        p.A_eq = Matrix::Zero(3 * d, nv);
        p.b_eq = Vector::Zero(3 * d);
        // G lambda - G mu = x
        p.A_eq.block(0, 0, d, g) = G;
        p.A_eq.block(0, g, d, g) = -G;
        p.b_eq.head(d) = x;
        // p+ - p- = G lambda
        p.A_eq.block(d, 0, d, g) = -G;
        p.A_eq.block(d, 2 * g, d, d) = Matrix::Identity(d, d);
        p.A_eq.block(d, 2 * g + d, d, d) = -Matrix::Identity(d, d);
        // q+ - q- = G mu
        p.A_eq.block(2 * d, g, d, g) = -G;
        p.A_eq.block(2 * d, 2 * g + 2 * d, d, d) = Matrix::Identity(d, d);
        p.A_eq.block(2 * d, 2 * g + 3 * d, d, d) = -Matrix::Identity(d, d);
        LPSolution s = solve_lp(p);
        if (s.status != LPStatus::optimal)
          throw InfeasibleDecomposition("positive_decompose: LP failed");
        out.y = G * s.x.head(g);
      }
      out.z = out.y - x;
      break;
    }
  }
  out.cost = norm.eval(out.y) + norm.eval(out.z);
  out.constant =
      xnorm > 0 ? std::max(norm.eval(out.y), norm.eval(out.z)) / xnorm : 0.0;
  return out;
}

FeasibilityCertificate supremum_feasibility(const Cone& cone, const Vector& a,
                                            const Vector& b,
                                            const Vector& upper1,
                                            const Vector& upper2) {
  const double tol = 1e-9;
  for (const auto* v : {&upper1, &upper2})
    if (!cone.contains(*v - a, tol) || !cone.contains(*v - b, tol))
      throw PreconditionViolation(
          "supremum_feasibility: inputs are not upper bounds of {a, b}");

  const int d = cone.dim();
  FeasibilityCertificate cert;
  if (cone.has_halfspaces()) {
    const Matrix& H = cone.halfspaces();
    const int m = static_cast<int>(H.rows());
    LPProblem p;
    p.c = Vector::Zero(d);
    p.free_vars.assign(d, true);
    p.A_ge = Matrix::Zero(4 * m, d);
    p.b_ge = Vector::Zero(4 * m);
    p.A_ge.block(0, 0, m, d) = H;
    p.b_ge.segment(0, m) = H * a;
    p.A_ge.block(m, 0, m, d) = H;
    p.b_ge.segment(m, m) = H * b;
    p.A_ge.block(2 * m, 0, m, d) = -H;
    p.b_ge.segment(2 * m, m) = -(H * upper1);
    p.A_ge.block(3 * m, 0, m, d) = -H;
    p.b_ge.segment(3 * m, m) = -(H * upper2);
    LPSolution s = solve_lp(p);
    cert.feasible = s.status == LPStatus::optimal;
    if (cert.feasible) {
      cert.witness = s.x;
      cert.detail = "common bound found";
    } else {
      cert.detail =
          "no z with a, b <= z <= upper1, upper2 in the cone order; "
          "sup{a, b} does not exist below this pair of upper bounds";
    }
    return cert;
  }
  // generator route: z = a + G l1 = b + G l2, upper_i - z = G l_{2+i}
  const Matrix& G = cone.generators();
  const int g = static_cast<int>(G.cols());
  LPProblem p;
  p.c = Vector::Zero(d + 4 * g);
  p.free_vars.assign(d + 4 * g, false);
  for (int i = 0; i < d; ++i) p.free_vars[i] = true;
  p.A_eq = Matrix::Zero(4 * d, d + 4 * g);
  p.b_eq = Vector::Zero(4 * d);
  auto row_block = [&](int blk, double zsign, int lam, const Vector& rhs) {
    p.A_eq.block(blk * d, 0, d, d) = zsign * Matrix::Identity(d, d);
    p.A_eq.block(blk * d, d + lam * g, d, g) = -G;
    p.b_eq.segment(blk * d, d) = rhs;
  };
  row_block(0, 1.0, 0, a);
  row_block(1, 1.0, 1, b);
  row_block(2, -1.0, 2, -upper1);
  row_block(3, -1.0, 3, -upper2);
  LPSolution s = solve_lp(p);
  cert.feasible = s.status == LPStatus::optimal;
  if (cert.feasible) {
    cert.witness = s.x.head(d);
    cert.detail = "common bound found";
  } else {
    cert.detail = "sup{a, b} does not exist below this pair of upper bounds";
  }
  return cert;
}

}  // namespace oplab
