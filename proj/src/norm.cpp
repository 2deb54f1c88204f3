#include "oplab/norm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace oplab {

NormSpec NormSpec::weighted_l1(Vector weights) {
  if (weights.size() == 0 || weights.minCoeff() <= 0)
    throw PreconditionViolation("weighted_l1: weights must be positive");
  NormSpec n(Kind::weighted_l1);
  n.weights_ = std::move(weights);
  return n;
}

NormSpec NormSpec::trace(int n_side) {
  if (n_side <= 0) throw PreconditionViolation("trace norm: bad side");
  NormSpec n(Kind::trace);
  n.trace_n_ = n_side;
  return n;
}

NormSpec NormSpec::centred_max(Vector u, Vector u_prime) {
  if (u.size() != u_prime.size()) throw DimensionMismatch("centred_max");
  if (std::abs(u_prime.dot(u) - 1.0) > 1e-12)
    throw PreconditionViolation("centred_max: <u', u> = 1 required");
  if (std::abs(u.norm() - 1.0) > 1e-12)
    throw PreconditionViolation(
        "centred_max: additivity on the cone needs ||u||_2 = 1");
  NormSpec n(Kind::centred_max);
  n.u_ = std::move(u);
  n.u_prime_ = std::move(u_prime);
  return n;
}

NormSpec NormSpec::psi_base(Vector psi, const Cone& cone) {
  require_dim(psi, cone.dim(), "psi_base");
  if (!cone.dual_contains(psi, 1e-9))
    throw PreconditionViolation("psi_base: psi must lie in the dual cone");
  NormSpec n(Kind::psi_base);
  n.psi_ = std::move(psi);
  n.psi_orthant_ = cone.kind() == Cone::Kind::orthant;
  n.psi_generators_ = cone.generators();
  n.psi_gen_values_ = n.psi_generators_.transpose() * n.psi_;
  return n;
}

bool NormSpec::monotone_on_orthant() const {
  switch (kind_) {
    case Kind::l1:
    case Kind::l2:
    case Kind::linf:
    case Kind::weighted_l1:
      return true;
    case Kind::psi_base:
      return psi_orthant_;
    default:
      return false;
  }
}

std::string NormSpec::kind_name() const {
  switch (kind_) {
    case Kind::l1: return "l1";
    case Kind::l2: return "l2";
    case Kind::linf: return "linf";
    case Kind::weighted_l1: return "weighted_l1";
    case Kind::trace: return "trace";
    case Kind::centred_max: return "centred_max";
    case Kind::psi_base: return "psi_base_norm";
  }
  return "?";
}

double NormSpec::eval(const Vector& x) const {
  switch (kind_) {
    case Kind::l1:
      return x.lpNorm<1>();
    case Kind::l2:
      return x.norm();
    case Kind::linf:
      return x.size() ? x.lpNorm<Eigen::Infinity>() : 0.0;
    case Kind::weighted_l1:
      require_dim(x, weights_.size(), "weighted_l1");
      return weights_.dot(x.cwiseAbs());
    case Kind::trace: {
      Eigen::SelfAdjointEigenSolver<Matrix> es(
          Cone::coords_to_sym(x, trace_n_));
      return es.eigenvalues().cwiseAbs().sum();
    }
    case Kind::centred_max: {
      require_dim(x, u_.size(), "centred_max");
      const double p = std::abs(u_prime_.dot(x));  // = ||P x||_2, ||u|| = 1
      const Vector q = x - u_prime_.dot(x) * u_;
      return std::max(p, q.norm());
    }
    case Kind::psi_base: {
      require_dim(x, psi_.size(), "psi_base");
      if (psi_orthant_) return psi_.dot(x.cwiseAbs());
      // LP: min <psi, G(l + m)> s.t. G l - G m = x
      const Matrix& G = psi_generators_;
      const int g = static_cast<int>(G.cols());
      const int d = static_cast<int>(x.size());
      LPProblem p;
      p.c = Vector::Zero(2 * g);
      p.c.head(g) = psi_gen_values_;
      p.c.tail(g) = psi_gen_values_;
      p.A_eq = Matrix::Zero(d, 2 * g);
      p.A_eq.leftCols(g) = G;
      p.A_eq.rightCols(g) = -G;
      p.b_eq = x;
      LPSolution s = solve_lp(p);
      if (s.status != LPStatus::optimal)
        throw InfeasibleDecomposition("psi_base: no positive decomposition");
      return s.objective;
    }
  }
  return 0.0;
}

double NormSpec::dual_norm(const Vector& phi) const {
  switch (kind_) {
    case Kind::l1:
      return phi.size() ? phi.lpNorm<Eigen::Infinity>() : 0.0;
    case Kind::l2:
      return phi.norm();
    case Kind::linf:
      return phi.lpNorm<1>();
    case Kind::weighted_l1:
      return (phi.cwiseAbs().cwiseQuotient(weights_)).maxCoeff();
    case Kind::trace: {
      Eigen::SelfAdjointEigenSolver<Matrix> es(
          Cone::coords_to_sym(phi, trace_n_));
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    case Kind::centred_max: {
      const double along = std::abs(phi.dot(u_));
      const Vector perp = phi - phi.dot(u_) * u_prime_;
      return along + perp.norm();
    }
    case Kind::psi_base: {
      double m = 0.0;
      for (int i = 0; i < psi_generators_.cols(); ++i) {
        const double denom = psi_gen_values_[i];
        if (denom <= 0) throw DegeneratePsi("psi_base: psi vanishes on a ray");
        m = std::max(m, std::abs(phi.dot(psi_generators_.col(i))) / denom);
      }
      return m;
    }
  }
  return 0.0;
}

double additivity_defect(const NormSpec& norm, const Cone& cone, int samples,
                         std::uint64_t seed) {
  if (samples < 1) throw PreconditionViolation("additivity_defect: samples >= 1");
  double defect = 0.0;
  auto probe = [&](const Vector& x, const Vector& y) {
    defect = std::max(defect,
                      std::abs(norm.eval(x + y) - norm.eval(x) - norm.eval(y)));
  };
  const Matrix& G = cone.generators();
  const int g = static_cast<int>(G.cols());
  int budget = 200;
  for (int i = 0; i < g && budget > 0; ++i)
    for (int j = i + 1; j < g && budget > 0; ++j, --budget)
      probe(G.col(i), G.col(j));
  Rng rng(seed);
  for (int k = 0; k < samples; ++k)
    probe(cone.sample(rng), cone.sample(rng));
  return defect;
}

NormFunctionalResult norm_functional(const NormSpec& norm, const Cone& cone) {
  if (!cone.is_generating())
    throw PreconditionViolation("norm_functional: cone not generating");
  const Matrix& G = cone.generators();
  const int g = static_cast<int>(G.cols());
  Vector rhs(g);
  for (int i = 0; i < g; ++i) rhs[i] = norm.eval(G.col(i));
  Matrix A = G.transpose();
  Vector one = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
  NormFunctionalResult out;
  out.one = one;
  out.residual = (A * one - rhs).cwiseAbs().maxCoeff();
  if (out.residual > 1e-8)
    throw NotAdditive("norm_functional: residual " +
                      std::to_string(out.residual));
  return out;
}

double base_norm_value(const Vector& x, const Cone& cone,
                       const NormSpec& norm) {
  return positive_decompose(x, cone, norm).cost;
}

PsiRenormResult psi_renorm(const Vector& psi, const Cone& cone,
                           const NormSpec& original) {
  require_dim(psi, cone.dim(), "psi_renorm");
  if (!cone.dual_contains(psi, 1e-9))
    throw PreconditionViolation("psi_renorm: psi not in the dual cone");
  const Matrix& G = cone.generators();
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < G.cols(); ++i) {
    const double gn = original.eval(G.col(i));
    if (gn <= 0) continue;
    m = std::min(m, psi.dot(G.col(i)) / gn);
  }
  const double feastol = 1e-9;
  if (!(m > feastol))
    throw DegeneratePsi("psi_renorm: inf <psi, f> over the unit cone is " +
                        std::to_string(m));
  PsiRenormResult out{NormSpec::psi_base(psi, cone), psi, m,
                      original.dual_norm(psi), 0.0};
  // empirical decomposition constant for the equivalence bound
  Rng rng(0xC0FFEE);
  double C = 1.0;
  for (int k = 0; k < 20; ++k) {
    Vector x = cone.sample(rng) - cone.sample(rng);
    const double xn = original.eval(x);
    if (xn < 1e-12) continue;
    Decomposition d = positive_decompose(x, cone, original);
    C = std::max(C, d.constant);
  }
  out.upper_constant = 2.0 * C * out.psi_dual_norm;
  return out;
}

double operator_norm(const Matrix& M, const NormSpec& norm, bool positive_map) {
  switch (norm.kind()) {
    case NormSpec::Kind::l1:
      return M.cwiseAbs().colwise().sum().maxCoeff();
    case NormSpec::Kind::linf:
      return M.cwiseAbs().rowwise().sum().maxCoeff();
    case NormSpec::Kind::weighted_l1: {
      const Vector& w = norm.weights();
      double best = 0.0;
      for (int j = 0; j < M.cols(); ++j)
        best = std::max(best, w.dot(M.col(j).cwiseAbs()) / w[j]);
      return best;
    }
    case NormSpec::Kind::l2:
      return M.jacobiSvd().singularValues()[0];
    case NormSpec::Kind::trace: {
      const int n = norm.trace_side();
      if (positive_map) {
        // for positive maps the induced trace norm is the operator norm of
        // the adjoint applied to the identity
        Vector id = Cone::sym_to_coords(Matrix::Identity(n, n));
        Vector v = M.transpose() * id;
        Eigen::SelfAdjointEigenSolver<Matrix> es(Cone::coords_to_sym(v, n));
        return es.eigenvalues().cwiseAbs().maxCoeff();
      }
      // sampled estimate over rank-one directions
      Rng rng(12345);
      std::normal_distribution<double> gauss(0.0, 1.0);
      double best = 0.0;
      for (int k = 0; k < 256; ++k) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = gauss(rng);
        v.normalize();
        Vector x = Cone::sym_to_coords(v * v.transpose());
        best = std::max(best, norm.eval(M * x));
      }
      return best;
    }
    default: {
      // seeded estimate on the unit sphere of the norm
      Rng rng(98765);
      std::normal_distribution<double> gauss(0.0, 1.0);
      double best = 0.0;
      for (int k = 0; k < 512; ++k) {
        Vector v(M.cols());
        for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
        const double n = norm.eval(v);
        if (n < 1e-14) continue;
        best = std::max(best, norm.eval(M * (v / n)));
      }
      return best;
    }
  }
}

}  // namespace oplab
