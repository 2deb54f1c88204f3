#include "oplab/lower_bounds.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace oplab {

namespace {

double max_abs(const Matrix& M) {
  return M.size() ? M.cwiseAbs().maxCoeff() : 0.0;
}

TimeDomain domain_of(const Semigroup& sg) {
  return sg.is_discrete() ? TimeDomain::discrete : TimeDomain::continuous;
}

Matrix normalized_rays(const Cone& K, const NormSpec& norm) {
  const Matrix& G = K.generators();
  Matrix out = G;
  for (int i = 0; i < out.cols(); ++i) {
    const double n = norm.eval(out.col(i));
    if (n > 1e-14) out.col(i) /= n;
  }
  return out;
}

// strictly positive fixed direction for minorization searches
std::optional<Vector> positive_fixed_direction(const Semigroup& sg,
                                               const NormSpec& norm) {
  const Cone& K = *sg.cone;
  Matrix F = fixed_space(sg, 1e-9);
  if (F.cols() == 0) return std::nullopt;
  // project a strictly interior template onto the fixed space
  Vector interior;
  switch (K.kind()) {
    case Cone::Kind::psd:
      interior = Cone::sym_to_coords(
          Matrix::Identity(K.psd_side(), K.psd_side()));
      break;
    case Cone::Kind::centred:
      interior = K.centre_u();
      break;
    default:
      interior = Vector::Ones(K.dim());
      break;
  }
  Vector w = F * (F.transpose() * interior);
  const double n = norm.eval(w);
  if (n < 1e-12) return std::nullopt;
  w /= n;
  if (!K.contains(w, 1e-9)) return std::nullopt;
  return w;
}

// largest mu with M - mu * W in the cone (W a strictly positive direction)
double minorization_level(const Cone& K, const Vector& m, const Vector& W) {
  switch (K.kind()) {
    case Cone::Kind::psd: {
      const int n = K.psd_side();
      Matrix Wm = Cone::coords_to_sym(W, n);
      Matrix Mm = Cone::coords_to_sym(m, n);
      Eigen::SelfAdjointEigenSolver<Matrix> esw(Wm);
      Matrix Wsqrt_inv = esw.operatorInverseSqrt();
      Eigen::SelfAdjointEigenSolver<Matrix> es(Wsqrt_inv * Mm * Wsqrt_inv);
      return es.eigenvalues().minCoeff();
    }
    case Cone::Kind::centred: {
      // (u-component of m) - mu >= ||Q m||, Q m unchanged by the shift
      const double t = K.centre_u_prime().dot(m);
      const Vector q = m - t * K.centre_u();
      const double wt = K.centre_u_prime().dot(W);
      return (t - q.norm()) / wt;
    }
    case Cone::Kind::orthant:
      return (m.cwiseQuotient(W)).minCoeff();
    default: {
      // bisection against cone membership
      double lo = 0.0, hi = 1.0;
      while (K.contains(m - hi * W, 1e-12) && hi < 1e6) hi *= 2.0;
      if (hi >= 1e6) return hi;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (K.contains(m - mid * W, 1e-12)) lo = mid;
        else hi = mid;
      }
      return lo;
    }
  }
}

}  // namespace

std::string bound_kind_name(BoundKind k) {
  switch (k) {
    case BoundKind::individual: return "individual";
    case BoundKind::universal: return "universal";
    case BoundKind::individual_mean: return "individual-mean";
    case BoundKind::universal_mean: return "universal-mean";
  }
  return "?";
}

IsLowerBoundResult is_lower_bound(const Vector& h, const Semigroup& sg,
                                  const Vector& f, bool mean,
                                  std::pair<double, double> window, double tol,
                                  const NormSpec& norm,
                                  std::optional<NormSpec> dplus_norm) {
  if (!sg.cone) throw PreconditionViolation("is_lower_bound: no cone");
  const Cone& K = *sg.cone;
  if (std::abs(norm.eval(f) - 1.0) > 1e-9)
    throw PreconditionViolation("is_lower_bound: ||f|| = 1 required, got " +
                                std::to_string(norm.eval(f)));
  if (!K.contains(f, 1e-9))
    throw PreconditionViolation("is_lower_bound: f not in the cone");
  if (!K.contains(h, 1e-9))
    throw PreconditionViolation("is_lower_bound: h not in the cone");
  if (norm.eval(h) <= 0)
    throw PreconditionViolation("is_lower_bound: h > 0 required");

  Trajectory orbit = mean ? Trajectory::cesaro_orbit(sg, f, norm, dplus_norm)
                          : Trajectory::orbit(sg, f, norm, dplus_norm);
  Trajectory consth = Trajectory::constant(h, domain_of(sg), sg.cone, norm,
                                           dplus_norm);
  IsLowerBoundResult out;
  out.report = check_asymptotic_domination(consth, orbit, window, tol, false);
  out.accepted = out.report.verdict == DominationReport::Verdict::dominated;
  return out;
}

std::optional<LowerBoundCertificate> find_universal_lower_bound(
    const Semigroup& sg, const NormSpec& norm, std::pair<double, double> window,
    double tol, bool mean, std::optional<NormSpec> dplus_norm) {
  if (!sg.cone) throw PreconditionViolation("find_universal_lower_bound: cone");
  const Cone& K = *sg.cone;
  // the reduction to extreme rays needs an additive norm
  NormFunctionalResult nf = norm_functional(norm, K);

  Matrix rays = normalized_rays(K, norm);
  auto grid = geometric_grid(sg, window.first, window.second);
  if (grid.empty()) return std::nullopt;

  auto orbit_at = [&](double t, int ray) -> Vector {
    Matrix M = mean ? cesaro_mean(sg, t).mean : evaluate(sg, t);
    return M * rays.col(ray);
  };

  Vector h;
  const double shrink = 1.0 - tol;
  switch (K.kind()) {
    case Cone::Kind::orthant: {
      Vector inf_vec = Vector::Constant(K.dim(),
                                        std::numeric_limits<double>::infinity());
      for (double t : grid)
        for (int i = 0; i < rays.cols(); ++i)
          inf_vec = inf_vec.cwiseMin(orbit_at(t, i));
      h = shrink * inf_vec.cwiseMax(0.0);
      break;
    }
    case Cone::Kind::psd:
    case Cone::Kind::centred: {
      auto W = positive_fixed_direction(sg, norm);
      if (!W) return std::nullopt;
      double mu = std::numeric_limits<double>::infinity();
      for (double t : grid)
        for (int i = 0; i < rays.cols(); ++i)
          mu = std::min(mu, minorization_level(K, orbit_at(t, i), *W));
      if (!(mu > 0)) return std::nullopt;
      h = shrink * mu * (*W);
      break;
    }
    default: {
      // LP over the halfspace description: maximize <one, h> with
      // H h >= 0 and H (M g_i - h) >= 0 for every sample
      const Matrix& H = K.halfspaces();
      const int d = K.dim();
      const int m = static_cast<int>(H.rows());
      const int S = static_cast<int>(grid.size()) * static_cast<int>(rays.cols());
      LPProblem p;
      p.c = -nf.one;  // maximize the norm of h on the cone
      p.free_vars.assign(d, true);
      p.A_ge = Matrix::Zero(m + m * S, d);
      p.b_ge = Vector::Zero(m + m * S);
      p.A_ge.topRows(m) = H;
      int blk = 1;
      for (double t : grid)
        for (int i = 0; i < rays.cols(); ++i, ++blk) {
          p.A_ge.block(m * blk, 0, m, d) = -H;
          p.b_ge.segment(m * blk, m) = -(H * orbit_at(t, i));
        }
      LPSolution s = solve_lp(p);
      if (s.status != LPStatus::optimal) return std::nullopt;
      h = shrink * s.x;
      break;
    }
  }

  const double beta = norm.eval(h);
  if (!(beta > 1e-10) || !K.contains(h, 1e-9)) return std::nullopt;

  LowerBoundCertificate cert;
  cert.h = h;
  cert.kind = mean ? BoundKind::universal_mean : BoundKind::universal;
  cert.beta = beta;
  for (int i = 0; i < rays.cols(); ++i) {
    auto res = is_lower_bound(h, sg, rays.col(i), mean, window, tol, norm,
                              dplus_norm);
    cert.tested_rays.push_back(rays.col(i));
    cert.residuals.push_back(res.report.sup_tail);
    if (!res.accepted) return std::nullopt;
  }
  // spot checks on random unit-norm cone elements (exact for additive norms
  // by convexity, probed anyway)
  Rng rng(7);
  for (int k = 0; k < 20; ++k) {
    Vector f = K.sample(rng);
    const double n = norm.eval(f);
    if (n < 1e-10) continue;
    f /= n;
    auto res = is_lower_bound(h, sg, f, mean, window, tol, norm, dplus_norm);
    if (!res.accepted) return std::nullopt;
  }
  cert.accepted = true;
  cert.detail = "verified on " + std::to_string(cert.tested_rays.size()) +
                " rays and 20 random unit vectors";
  return cert;
}

MarkovRenormResult markov_renorm(const Semigroup& sg, const Vector& phi,
                                 std::pair<double, double> window, double tol,
                                 const NormSpec& original) {
  if (!sg.cone) throw PreconditionViolation("markov_renorm: no cone");
  const Cone& K = *sg.cone;
  if (!K.dual_contains(phi, 1e-9))
    throw PreconditionViolation("markov_renorm: phi not in the dual cone");

  // dual Cesaro means on the doubling grid; the horizon extends well past
  // the window so the 1/t tail sits below the Cauchy tolerance
  const double cauchy_tol = std::min(tol, 1e-10);
  const int doublings = 48;
  auto means = cesaro_geometric(sg, doublings);
  Vector psi;
  bool settled = false;
  double diff = std::numeric_limits<double>::infinity();
  Vector prev = means.front().second.transpose() * phi;
  for (size_t k = 1; k < means.size(); ++k) {
    Vector cur = means[k].second.transpose() * phi;
    diff = (cur - prev).cwiseAbs().maxCoeff();
    prev = cur;
    if (diff < cauchy_tol) {
      psi = cur;
      settled = true;
      break;
    }
  }
  if (!settled)
    throw NoCesaroLimit("markov_renorm: dual Cesaro means do not stabilize "
                        "(last increment " + std::to_string(diff) + ")");

  MarkovRenormResult out;
  out.psi = psi;
  // invariance on the window
  double inv = 0.0;
  for (double t : geometric_grid(sg, window.first, window.second)) {
    Vector Tpsi = evaluate(sg, t).transpose() * psi;
    inv = std::max(inv, (Tpsi - psi).cwiseAbs().maxCoeff());
  }
  out.invariance_residual = inv;
  if (inv > tol * (1.0 + psi.cwiseAbs().maxCoeff()))
    throw NoCesaroLimit("markov_renorm: limit is not dual-invariant, residual " +
                        std::to_string(inv));

  PsiRenormResult rr = psi_renorm(psi, K, original);
  out.norm = rr.norm;
  out.lower_constant = rr.lower_constant;
  out.upper_constant = rr.upper_constant;

  // Markov defect on sampled (f, t)
  Rng rng(99);
  double defect = 0.0;
  auto grid = geometric_grid(sg, window.first, window.second);
  for (int k = 0; k < 200; ++k) {
    Vector f = K.sample(rng);
    const double nf = rr.norm.eval(f);
    if (nf < 1e-12) continue;
    f /= nf;  // unit psi-norm, so the defect is absolute
    const double t = grid[k % grid.size()];
    defect = std::max(defect, std::abs(rr.norm.eval(evaluate(sg, t) * f) - 1.0));
  }
  out.markov_defect = defect;
  return out;
}

IterationTrace fixed_point_iteration(const Semigroup& sg, const NormSpec& norm,
                                     const Vector& f, const BoundOracle& oracle,
                                     double beta, double eps, double horizon) {
  if (!sg.cone) throw PreconditionViolation("fixed_point_iteration: no cone");
  const Cone& K = *sg.cone;
  if (std::abs(norm.eval(f) - 1.0) > 1e-9)
    throw PreconditionViolation("fixed_point_iteration: ||f|| = 1 required");
  if (!K.contains(f, 1e-9))
    throw PreconditionViolation("fixed_point_iteration: f not in the cone");

  auto fixed_residual = [&](const Vector& h) {
    if (sg.is_discrete()) return (sg.matrix * h - h).cwiseAbs().maxCoeff();
    return (sg.matrix * h).cwiseAbs().maxCoeff();
  };
  auto call_oracle = [&](const Vector& g) {
    Vector h = oracle(g);
    const double scale = 1.0 + h.cwiseAbs().maxCoeff();
    if (fixed_residual(h) > 1e-7 * scale)
      throw OracleNotFixed("fixed_point_iteration: oracle output is not a "
                           "fixed point (residual " +
                           std::to_string(fixed_residual(h)) + ")");
    if (norm.eval(h) < beta * norm.eval(g) * (1.0 - 1e-9) - 1e-12)
      throw PreconditionViolation(
          "fixed_point_iteration: oracle bound below beta");
    return h;
  };

  IterationTrace trace;
  Vector h = call_oracle(f);
  trace.beta = beta;
  trace.delta = 1.0 - norm.eval(h);
  trace.norms.push_back(norm.eval(h));

  const int max_steps = 200;
  for (int n = 0; n < max_steps && norm.eval(h) < 1.0 - eps; ++n) {
    // first time on the geometric grid with d_+(T_t f - h) < eps
    double t0 = -1.0;
    for (double t : geometric_grid(sg, 1.0, horizon)) {
      Vector diff = evaluate(sg, t) * f - h;
      if (distance_to_cone(diff, K, norm).distance < eps) {
        t0 = t;
        break;
      }
    }
    if (t0 < 0)
      throw HorizonTooShort("fixed_point_iteration: no time with "
                            "d_+(T_t f - h_n) < eps before the horizon");
    trace.times.push_back(t0);
    Vector w = evaluate(sg, t0) * f - h;
    DistanceResult proj = distance_to_cone(w, K, norm);
    Vector rem = proj.minimizer - w;          // ||rem|| = d_+ < eps
    Decomposition split = positive_decompose(rem, K, norm);
    Vector e_n = split.y;                     // w = (minimizer + z) - e_n
    Vector g_n = w + e_n;
    const double gn = norm.eval(g_n);
    if (gn < 1e-14) break;
    Vector a_n = gn * call_oracle(g_n / gn);
    h += a_n;
    trace.norms.push_back(norm.eval(h));
  }
  trace.h = h;
  return trace;
}

namespace {

int numerical_rank(const Matrix& M, double tol) {
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > tol * std::max(1.0, sv[0])) ++r;
  return r;
}

}  // namespace

ConvergencePipelineReport converge_via_lower_bounds(
    const Semigroup& sg, BoundKind mode, std::pair<double, double> window,
    double tol, const NormSpec& norm, const std::optional<BoundOracle>& oracle,
    std::optional<NormSpec> dplus_norm) {
  ConvergencePipelineReport rep;
  rep.certificate_kind = bound_kind_name(mode);
  const Cone& K = *sg.cone;
  Matrix rays = normalized_rays(K, norm);

  // stage 1: obtain / verify the lower-bound certificate
  const bool mean_mode = mode == BoundKind::universal_mean ||
                         mode == BoundKind::individual_mean;
  if (mode == BoundKind::universal || mode == BoundKind::universal_mean) {
    auto cert = find_universal_lower_bound(sg, norm, window, tol, mean_mode,
                                           dplus_norm);
    if (!cert) {
      rep.stages.push_back({"certificate", false,
                            "no universal " + std::string(mean_mode ? "mean " : "") +
                                "lower bound found on the window"});
      return rep;
    }
    rep.certificate = *cert;
    rep.beta = cert->beta;
    rep.stages.push_back({"certificate", true,
                          "beta = " + std::to_string(cert->beta)});
  } else {
    if (!oracle) {
      rep.stages.push_back({"certificate", false, "no bound family supplied"});
      return rep;
    }
    double family_inf = std::numeric_limits<double>::infinity();
    bool all_ok = true;
    std::string why;
    LowerBoundCertificate cert;
    cert.kind = mode;
    for (int i = 0; i < rays.cols() && all_ok; ++i) {
      Vector hf = (*oracle)(rays.col(i));
      const double hn = norm.eval(hf);
      cert.tested_rays.push_back(rays.col(i));
      if (hn <= 1e-12 || !K.contains(hf, 1e-9)) {
        all_ok = false;
        why = "family member is zero or leaves the cone (inf ||h_f|| = 0)";
        break;
      }
      family_inf = std::min(family_inf, hn);
      auto res = is_lower_bound(hf, sg, rays.col(i), mean_mode, window, tol,
                                norm, dplus_norm);
      cert.residuals.push_back(res.report.sup_tail);
      if (!res.accepted) {
        all_ok = false;
        why = "family member is not dominated by its orbit";
      }
    }
    if (!all_ok) {
      rep.stages.push_back({"certificate", false, why});
      return rep;
    }
    cert.beta = family_inf;
    cert.accepted = true;
    rep.certificate = cert;
    rep.beta = family_inf;
    rep.stages.push_back({"certificate", true,
                          "family infimum = " + std::to_string(family_inf)});
  }

  // stage 2: Markov renorming when the norm is not already invariant
  NormSpec work_norm = norm;
  NormFunctionalResult nf = norm_functional(norm, K);
  Vector one = nf.one;
  double markov_gap = 0.0;
  {
    Vector Tone = sg.is_discrete() ? Vector(sg.matrix.transpose() * one - one)
                                   : Vector(sg.matrix.transpose() * one);
    markov_gap = Tone.cwiseAbs().maxCoeff();
  }
  if (markov_gap > 1e-9 * (1.0 + one.cwiseAbs().maxCoeff())) {
    try {
      MarkovRenormResult mr = markov_renorm(sg, one, window, tol, norm);
      rep.renormed = true;
      rep.psi = mr.psi;
      rep.markov_defect = mr.markov_defect;
      work_norm = mr.norm;
      one = mr.psi;
      rep.stages.push_back({"renorm", true,
                            "markov defect " + std::to_string(mr.markov_defect)});
    } catch (const Error& e) {
      rep.stages.push_back({"renorm", false, e.what()});
      return rep;
    }
  } else {
    rep.stages.push_back({"renorm", true, "already Markov"});
  }

  // stage 3: limit
  Matrix P;
  if (mode == BoundKind::universal_mean) {
    ErgodicResult er = mean_ergodic_projection(sg, std::min(tol, 1e-8));
    if (er.status != ErgodicResult::Status::converged) {
      rep.stages.push_back({"limit", false, "Cesaro means do not converge"});
      return rep;
    }
    P = *er.projection;
    rep.stages.push_back({"limit", true, "mean ergodic projection found"});
  } else {
    ConvergenceReport cr = strong_limit(sg, std::min(tol, 1e-9), 1 << 22);
    if (!cr.converged) {
      rep.stages.push_back({"limit", false, cr.diagnostic});
      return rep;
    }
    P = *cr.limit;
    rep.stages.push_back({"limit", true, "strong limit found"});
  }
  rep.limit = P;
  rep.limit_rank = numerical_rank(P, 1e-8);

  // stage 4: verification
  const double scale = 1.0 + max_abs(P);
  const double proj_res = max_abs(P * P - P);
  Matrix T1 = evaluate(sg, sg.is_discrete() ? 1.0 : 0.5);
  const double comm_res = std::max(max_abs(T1 * P - P * T1),
                                   mode == BoundKind::universal_mean
                                       ? 0.0
                                       : max_abs(T1 * P - P));
  double gamma = std::numeric_limits<double>::infinity();
  for (int i = 0; i < rays.cols(); ++i)
    gamma = std::min(gamma, norm.eval(P * rays.col(i)));
  rep.gamma = gamma;

  bool ok = proj_res < 1e-7 * scale && comm_res < 1e-7 * scale;
  std::string msg;
  if (!ok) msg = "projection/commutation residuals too large";
  if (ok && gamma < rep.beta - tol) {
    ok = false;
    msg = "gamma below the certificate mass";
  }
  if (ok && (mode == BoundKind::universal || mode == BoundKind::universal_mean)) {
    if (rep.limit_rank != 1) {
      ok = false;
      msg = "limit rank is " + std::to_string(rep.limit_rank);
    } else {
      // dual fixed space spanned by the norm functional
      Semigroup dual = sg;
      dual.matrix = sg.matrix.transpose();
      Matrix F = fixed_space(dual, 1e-9);
      if (F.cols() != 1) {
        ok = false;
        msg = "dual fixed space dimension " + std::to_string(F.cols());
      } else {
        const double c = std::abs(F.col(0).normalized().dot(one.normalized()));
        rep.dual_fixed_angle = std::acos(std::min(1.0, c));
        if (rep.dual_fixed_angle > 1e-6) {
          ok = false;
          msg = "dual fixed space misaligned with the norm functional";
        }
      }
    }
  }
  rep.stages.push_back({"verify", ok, ok ? "projection verified" : msg});
  rep.succeeded = ok;
  return rep;
}

ConstantConvergenceReport dominated_constant_convergence(
    const Trajectory& f, const Vector& x, std::pair<double, double> window,
    double tol) {
  ConstantConvergenceReport out;
  const Cone& K = f.cone();
  NormFunctionalResult nf;
  try {
    nf = norm_functional(f.norm(), K);
  } catch (const NotAdditive& e) {
    out.failure = std::string("norm not additive on the cone: ") + e.what();
    return out;
  }
  if (std::abs(f.norm().eval(x) - 1.0) > 1e-9) {
    out.failure = "||x|| = " + std::to_string(f.norm().eval(x)) + ", expected 1";
    return out;
  }
  auto grid = geometric_grid(f.domain() == TimeDomain::discrete, window.first,
                             window.second);
  double tail_sup = 0.0;
  for (size_t i = grid.size() / 2; i < grid.size(); ++i)
    tail_sup = std::max(tail_sup, f.norm().eval(f(grid[i])));
  if (tail_sup > 1.0 + tol) {
    out.failure = "tail sup of ||f(t)|| is " + std::to_string(tail_sup);
    return out;
  }
  Trajectory cx = Trajectory::constant(x, f.domain(), f.cone_ptr(), f.norm(),
                                       f.dplus_norm());
  DominationReport rep = check_asymptotic_domination(cx, f, window, tol, false);
  if (rep.verdict != DominationReport::Verdict::dominated) {
    out.failure = "x is not asymptotically dominated by f (tail sup " +
                  std::to_string(rep.sup_tail) + ")";
    return out;
  }
  bool bound_ok = true;
  double last_lhs = 0.0;
  for (double t : grid) {
    Vector r = error_decomposition(cx, f, t);
    const double lhs = f.norm().eval(f(t) - x);
    const double rhs =
        f.norm().eval(f(t)) - 1.0 + 2.0 * f.norm().eval(r) + tol;
    out.trace.emplace_back(t, lhs, rhs);
    if (lhs > rhs + 1e-9) bound_ok = false;
    last_lhs = lhs;
  }
  if (!bound_ok) {
    out.failure = "norm-functional bound violated";
    return out;
  }
  if (last_lhs > 10.0 * tol) {
    out.failure = "||f(t) - x|| does not vanish on the window (last " +
                  std::to_string(last_lhs) + ")";
    return out;
  }
  out.ok = true;
  return out;
}

ConvergencePipelineReport dominating_semigroup_convergence(
    const Semigroup& T_sg, const Semigroup& S_sg,
    std::pair<double, double> window, double tol, const NormSpec& norm,
    std::optional<NormSpec> dplus_norm) {
  ConvergencePipelineReport rep;
  rep.certificate_kind = "dominating-pair";
  const Cone& K = *T_sg.cone;
  Matrix rays = normalized_rays(K, norm);

  ConvergenceReport crT = strong_limit(T_sg, std::min(tol, 1e-9), 1 << 22);
  if (!crT.converged) {
    rep.stages.push_back({"limit-of-dominated", false, crT.diagnostic});
    return rep;
  }
  Matrix PT = *crT.limit;
  double beta = std::numeric_limits<double>::infinity();
  for (int i = 0; i < rays.cols(); ++i)
    beta = std::min(beta, norm.eval(PT * rays.col(i)));
  rep.beta = beta;
  if (!(beta > tol)) {
    rep.stages.push_back({"limit-of-dominated", false,
                          "limit not bounded below on the cone"});
    return rep;
  }
  rep.stages.push_back({"limit-of-dominated", true,
                        "gamma_T = " + std::to_string(beta)});

  // S dominates T on the cone rays
  for (int i = 0; i < rays.cols(); ++i) {
    Trajectory ft = Trajectory::orbit(T_sg, rays.col(i), norm, dplus_norm);
    Trajectory gs = Trajectory::orbit(S_sg, rays.col(i), norm, dplus_norm);
    DominationReport dr = check_asymptotic_domination(ft, gs, window, tol, false);
    if (dr.verdict != DominationReport::Verdict::dominated) {
      rep.stages.push_back({"domination", false,
                            "S does not dominate T on a cone ray (tail sup " +
                                std::to_string(dr.sup_tail) + ")"});
      return rep;
    }
  }
  rep.stages.push_back({"domination", true, "S dominates T on all rays"});

  // P_T images are fixed by S
  double fix_res = 0.0;
  auto grid = geometric_grid(S_sg, window.first, window.second);
  for (int i = 0; i < rays.cols(); ++i) {
    Vector v = PT * rays.col(i);
    for (size_t k = grid.size() / 2; k < grid.size(); ++k)
      fix_res = std::max(
          fix_res, norm.eval(evaluate(S_sg, grid[k]) * v - v));
  }
  if (fix_res > 10.0 * tol * (1.0 + max_abs(PT))) {
    rep.stages.push_back({"fixed-points", false,
                          "P_T range not fixed by S, residual " +
                              std::to_string(fix_res)});
    return rep;
  }
  rep.stages.push_back({"fixed-points", true,
                        "residual " + std::to_string(fix_res)});

  ConvergenceReport crS = strong_limit(S_sg, std::min(tol, 1e-9), 1 << 22);
  if (!crS.converged) {
    rep.stages.push_back({"limit", false, crS.diagnostic});
    return rep;
  }
  rep.limit = *crS.limit;
  rep.limit_rank = numerical_rank(*crS.limit, 1e-8);
  rep.limit_gap = max_abs(*crS.limit - PT);
  double gammaS = std::numeric_limits<double>::infinity();
  for (int i = 0; i < rays.cols(); ++i)
    gammaS = std::min(gammaS, norm.eval((*crS.limit) * rays.col(i)));
  rep.gamma = gammaS;
  rep.stages.push_back({"limit", true,
                        "limit gap " + std::to_string(rep.limit_gap)});
  rep.succeeded = true;
  return rep;
}

}  // namespace oplab
