#include "oplab/semigroup.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace oplab {

namespace {

double max_abs(const Matrix& M) {
  return M.size() ? M.cwiseAbs().maxCoeff() : 0.0;
}

long long as_integer_time(double t) {
  const double r = std::round(t);
  if (t < 0 || std::abs(t - r) > 1e-9)
    throw PreconditionViolation("discrete semigroup: time must be a "
                                "nonnegative integer, got " + std::to_string(t));
  return static_cast<long long>(r);
}

}  // namespace

Semigroup Semigroup::discrete(Matrix T, std::shared_ptr<const Cone> cone,
                              std::string label) {
  if (T.rows() != T.cols()) throw DimensionMismatch("semigroup: square matrix");
  if (cone && cone->dim() != T.rows())
    throw DimensionMismatch("semigroup: cone dimension");
  Semigroup sg;
  sg.kind = Kind::discrete;
  sg.matrix = std::move(T);
  sg.cone = std::move(cone);
  sg.label = std::move(label);
  return sg;
}

Semigroup Semigroup::continuous(Matrix A, std::shared_ptr<const Cone> cone,
                                std::string label) {
  Semigroup sg = discrete(std::move(A), std::move(cone), std::move(label));
  sg.kind = Kind::continuous;
  return sg;
}

Matrix evaluate(const Semigroup& sg, double t) {
  if (t < 0) throw PreconditionViolation("evaluate: t >= 0");
  if (sg.is_discrete()) return matrix_power(sg.matrix, as_integer_time(t));
  Matrix E = expm(t * sg.matrix);
  if (!E.allFinite()) throw EvaluationOverflow("evaluate: overflow");
  return E;
}

std::vector<double> geometric_grid(bool discrete, double t0, double t1) {
  std::vector<double> grid;
  if (discrete) {
    double t = 1.0;
    while (t < t0) t *= 2.0;
    for (; t <= t1; t *= 2.0) grid.push_back(t);
    const double last = std::floor(t1);
    if (last >= std::max(1.0, t0) && (grid.empty() || grid.back() < last))
      grid.push_back(last);
  } else {
    double start = t0 > 0 ? t0 : 0.5;
    for (double t = start; t <= t1; t *= 2.0) grid.push_back(t);
    if (grid.empty() || grid.back() < t1) grid.push_back(t1);
  }
  return grid;
}

std::vector<double> geometric_grid(const Semigroup& sg, double t0, double t1) {
  return geometric_grid(sg.is_discrete(), t0, t1);
}

namespace {

// (sum_{k<n} T^k, T^n) by the halving recursion
std::pair<Matrix, Matrix> partial_geometric(const Matrix& T, long long n) {
  const int d = static_cast<int>(T.rows());
  if (n == 0) return {Matrix::Zero(d, d), Matrix::Identity(d, d)};
  if (n % 2 == 0) {
    auto [S, P] = partial_geometric(T, n / 2);
    return {S + P * S, P * P};
  }
  auto [S, P] = partial_geometric(T, n - 1);
  return {S + P, P * T};
}

}  // namespace

CesaroState cesaro_mean(const Semigroup& sg, double t,
                        const NormSpec& reference_norm) {
  if (t <= 0) throw PreconditionViolation("cesaro_mean: t > 0");
  CesaroState st;
  st.t = t;
  if (sg.is_discrete()) {
    const long long n = as_integer_time(t);
    st.mean = partial_geometric(sg.matrix, n).first / static_cast<double>(n);
  } else {
    st.mean = semigroup_integral(sg.matrix, t) / t;
  }
  st.tail_norm = operator_norm(evaluate(sg, t), reference_norm, false) / t;
  return st;
}

std::vector<std::pair<double, Matrix>> cesaro_geometric(const Semigroup& sg,
                                                        int doublings,
                                                        double t0) {
  std::vector<std::pair<double, Matrix>> out;
  double t = t0 > 0 ? t0 : (sg.is_discrete() ? 1.0 : 0.5);
  if (sg.is_discrete()) t = std::max(1.0, std::round(t));
  Matrix E = evaluate(sg, t);
  Matrix S;  // integral / partial sum over [0, t)
  if (sg.is_discrete())
    S = partial_geometric(sg.matrix, as_integer_time(t)).first;
  else
    S = semigroup_integral(sg.matrix, t);
  out.emplace_back(t, S / t);
  for (int k = 0; k < doublings; ++k) {
    S = S + E * S;
    E = E * E;
    t *= 2.0;
    if (!S.allFinite() || !E.allFinite())
      throw EvaluationOverflow("cesaro_geometric: overflow");
    out.emplace_back(t, S / t);
  }
  return out;
}

PositivityWitness positivity_check(const Semigroup& sg,
                                   const std::vector<double>& grid,
                                   double tol) {
  if (!sg.cone) throw PreconditionViolation("positivity_check: no cone");
  const Cone& K = *sg.cone;
  PositivityWitness w;
  if (sg.is_discrete()) {
    const Matrix& G = K.generators();
    for (int i = 0; i < G.cols(); ++i) {
      if (!K.contains(sg.matrix * G.col(i), tol)) {
        w.positive = false;
        w.t = 1.0;
        w.generator = G.col(i);
        w.detail = "T maps a generator outside the cone";
        return w;
      }
    }
    return w;
  }
  if (K.kind() == Cone::Kind::orthant) {
    const Matrix& A = sg.matrix;
    for (int i = 0; i < A.rows(); ++i)
      for (int j = 0; j < A.cols(); ++j)
        if (i != j && A(i, j) < -tol) {
          w.positive = false;
          w.t = 0.0;
          w.generator = Vector::Unit(A.cols(), j);
          w.detail = "generator is not Metzler";
          return w;
        }
    return w;
  }
  std::vector<double> ts = grid;
  if (ts.empty()) ts = geometric_grid(sg, 0.5, 64.0);
  const Matrix& G = K.generators();
  for (double t : ts) {
    Matrix E = evaluate(sg, t);
    for (int i = 0; i < G.cols(); ++i) {
      if (!K.contains(E * G.col(i), tol)) {
        w.positive = false;
        w.t = t;
        w.generator = G.col(i);
        w.detail = "flow leaves the cone on the sampled grid";
        return w;
      }
    }
  }
  return w;
}

ErgodicResult mean_ergodic_projection(const Semigroup& sg, double tol,
                                      double horizon) {
  ErgodicResult res;
  const int d = sg.dim();
  const double scale = 1.0 + max_abs(sg.matrix);

  // numeric evidence: Cauchy test for the Cesaro means on the doubling grid
  const double t0 = sg.is_discrete() ? 1.0 : 0.5;
  const int doublings =
      std::min(60, static_cast<int>(std::ceil(std::log2(std::max(2.0, horizon / t0)))));
  bool numeric_ok = false, numeric_diverged = false;
  Matrix numeric_limit;
  double cauchy = std::numeric_limits<double>::infinity();
  try {
    auto means = cesaro_geometric(sg, doublings);
    double prev_norm = max_abs(means.front().second);
    for (size_t k = 1; k < means.size(); ++k) {
      cauchy = max_abs(means[k].second - means[k - 1].second);
      const double cur_norm = max_abs(means[k].second);
      if (cur_norm > 1e9 * (1.0 + prev_norm)) {
        numeric_diverged = true;
        break;
      }
      if (cauchy < tol) {
        numeric_ok = true;
        numeric_limit = means[k].second;
        break;
      }
    }
    if (!numeric_ok && !numeric_diverged && max_abs(means.back().second) > 1e6 * scale)
      numeric_diverged = true;
  } catch (const EvaluationOverflow&) {
    numeric_diverged = true;
  }
  res.numeric_converged = numeric_ok;
  res.cauchy_residual = cauchy;

  // spectral evidence
  const Matrix& M = sg.matrix;
  auto clusters = eigen_clusters(M, tol);
  bool spectral_ok = true, spectral_borderline = false;
  const double band = std::max(1e-7, 10.0 * tol);
  for (const auto& c : clusters) {
    EigenvalueEvidence ev;
    ev.lambda = c.lambda;
    ev.multiplicity = c.algebraic;
    const bool peripheral = sg.is_discrete()
                                ? std::abs(c.lambda) >= 1.0 - band
                                : c.lambda.real() >= -band;
    ev.peripheral = peripheral;
    ev.semisimple = c.borderline ? -1 : (c.semisimple ? 1 : 0);
    res.spectral_evidence.push_back(ev);
    const bool outside = sg.is_discrete() ? std::abs(c.lambda) > 1.0 + band
                                          : c.lambda.real() > band;
    if (outside) spectral_ok = false;
    if (peripheral && !outside) {
      if (c.borderline) spectral_borderline = true;
      else if (!c.semisimple) spectral_ok = false;
    }
  }
  res.spectral_converged = spectral_ok && !spectral_borderline;

  if (spectral_borderline) {
    res.status = ErgodicResult::Status::undecided;
    res.detail = "borderline semisimplicity at the peripheral spectrum";
    return res;
  }

  if (res.spectral_converged && numeric_ok) {
    // limit projection: spectral projector for the fixed part
    EigSelector at_one = sg.is_discrete()
        ? EigSelector([band](std::complex<double> z) {
            return std::abs(z - 1.0) <= band;
          })
        : EigSelector([band](std::complex<double> z) {
            return std::abs(z) <= band;
          });
    Matrix P = spectral_projector(M, at_one);
    if (max_abs(P - numeric_limit) <= std::max(1e-7, 1e3 * tol) * (1.0 + max_abs(P))) {
      res.status = ErgodicResult::Status::converged;
      res.projection = P;
      return res;
    }
    res.status = ErgodicResult::Status::undecided;
    res.detail = "numeric and spectral limits disagree";
    return res;
  }
  if (!res.spectral_converged && (numeric_diverged || !numeric_ok)) {
    res.status = ErgodicResult::Status::diverged;
    return res;
  }
  res.status = ErgodicResult::Status::undecided;
  res.detail = "numeric and spectral evidence disagree";
  return res;
}

Matrix fixed_space(const Semigroup& sg, double tol) {
  const int d = sg.dim();
  Matrix M = sg.matrix;
  if (sg.is_discrete()) M -= Matrix::Identity(d, d);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double thr = std::max(tol, sv.size() ? sv[0] * 1e-12 : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > thr) ++rank;
  return svd.matrixV().rightCols(d - rank);
}

ConvergenceReport strong_limit(const Semigroup& sg, double tol,
                               double horizon) {
  ConvergenceReport rep;
  const double t0 = sg.is_discrete() ? 1.0 : 0.5;
  double t = t0;
  Matrix E;
  try {
    E = evaluate(sg, t);
  } catch (const EvaluationOverflow&) {
    rep.diagnostic = "overflow at the first grid point";
    return rep;
  }
  Matrix prev = E;
  bool cauchy_ok = false;
  double last_diff = std::numeric_limits<double>::infinity();
  while (t <= horizon) {
    Matrix next = prev * prev;  // T_{2t}
    t *= 2.0;
    if (!next.allFinite() || max_abs(next) > 1e12) {
      rep.diagnostic = "divergence: operator norms grow along the grid";
      return rep;
    }
    last_diff = max_abs(next - prev);
    rep.residual_trace.emplace_back(t, last_diff);
    prev = next;
    if (last_diff < tol) {
      cauchy_ok = true;
      break;
    }
  }
  if (!cauchy_ok) {
    rep.diagnostic = "no Cauchy decay on the geometric grid (oscillation or "
                     "slow convergence); last increment " +
                     std::to_string(last_diff);
    return rep;
  }
  Matrix P = prev;
  rep.final_residual = last_diff;
  rep.idempotency_residual = max_abs(P * P - P);
  double comm = 0.0;
  for (double s : {t0, 3.0 * t0}) {
    Matrix Ts = evaluate(sg, s);
    comm = std::max(comm, max_abs(Ts * P - P));
  }
  rep.commutation_residual = comm;
  if (rep.idempotency_residual > 10.0 * std::max(tol, 1e-12) * (1.0 + max_abs(P)) ||
      comm > 10.0 * std::max(tol, 1e-9) * (1.0 + max_abs(P))) {
    rep.diagnostic =
        "geometric subsequence stabilized but the candidate is not a "
        "semigroup-fixed projection (oscillation)";
    return rep;
  }
  rep.converged = true;
  rep.limit = P;
  return rep;
}

Matrix jdlg_reversible_projection(const Semigroup& sg, double tol) {
  auto clusters = eigen_clusters(sg.matrix, tol);
  const double band = std::max(1e-7, 10.0 * tol);
  for (const auto& c : clusters) {
    const double level = sg.is_discrete() ? std::abs(c.lambda) : c.lambda.real();
    const double bound = sg.is_discrete() ? 1.0 + band : band;
    if (level > bound)
      throw Unbounded("jdlg: spectral growth detected");
    if (level >= (sg.is_discrete() ? 1.0 - band : -band) && !c.semisimple)
      throw Unbounded("jdlg: defective peripheral eigenvalue, semigroup "
                      "not power bounded");
  }
  EigSelector peripheral = sg.is_discrete()
      ? EigSelector([band](std::complex<double> z) {
          return std::abs(z) >= 1.0 - band;
        })
      : EigSelector([band](std::complex<double> z) {
          return z.real() >= -band;
        });
  return spectral_projector(sg.matrix, peripheral);
}

std::optional<OrderBound> asymptotic_order_bound(
    const Semigroup& sg, const Vector& x, std::pair<double, double> window,
    double budget) {
  if (!sg.cone) throw PreconditionViolation("asymptotic_order_bound: no cone");
  const Cone& K = *sg.cone;
  if (!K.contains(x, 1e-9))
    throw PreconditionViolation("asymptotic_order_bound: x not in the cone");
  auto grid = geometric_grid(sg, window.first, window.second);
  std::vector<Vector> samples;
  const double cap = 1e8 * (1.0 + x.cwiseAbs().maxCoeff());
  for (double t : grid) {
    Vector v;
    try {
      v = evaluate(sg, t) * x;
    } catch (const EvaluationOverflow&) {
      return std::nullopt;
    }
    if (v.cwiseAbs().maxCoeff() > cap) return std::nullopt;
    samples.push_back(v);
  }
  if (samples.empty()) return std::nullopt;

  Vector y;
  switch (K.kind()) {
    case Cone::Kind::orthant: {
      y = samples.front();
      for (const auto& v : samples) y = y.cwiseMax(v);
      break;
    }
    case Cone::Kind::psd: {
      const int n = K.psd_side();
      double mu = 0.0;
      for (const auto& v : samples) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(Cone::coords_to_sym(v, n));
        mu = std::max(mu, es.eigenvalues().maxCoeff());
      }
      y = Cone::sym_to_coords(mu * Matrix::Identity(n, n));
      break;
    }
    case Cone::Kind::centred: {
      // smallest multiple of the axis dominating every sample
      const Vector& u = K.centre_u();
      const Vector& up = K.centre_u_prime();
      double mu = 0.0;
      for (const auto& v : samples) {
        const double t = up.dot(v);
        const Vector q = v - t * u;
        mu = std::max(mu, t + q.norm());
      }
      y = mu * u;
      break;
    }
    default: {
      // LP: minimize <1, eta> with G eta - sample in the cone for all samples
      const Matrix& G = K.generators();
      const Matrix& H = K.halfspaces();
      const int g = static_cast<int>(G.cols());
      const int m = static_cast<int>(H.rows());
      const int S = static_cast<int>(samples.size());
      LPProblem p;
      p.c = Vector::Zero(g);
      for (int i = 0; i < g; ++i) p.c[i] = G.col(i).cwiseAbs().sum();
      p.A_ge = Matrix::Zero(m * S, g);
      p.b_ge = Vector::Zero(m * S);
      for (int s = 0; s < S; ++s) {
        p.A_ge.block(m * s, 0, m, g) = H * G;
        p.b_ge.segment(m * s, m) = H * samples[s];
      }
      LPSolution sol = solve_lp(p);
      if (sol.status != LPStatus::optimal) return std::nullopt;
      y = G * sol.x;
      break;
    }
  }
  // residual over a denser verification grid, extended past the window so a
  // still-growing orbit cannot pass off a window supremum as an asymptotic
  // bound
  double residual = 0.0;
  const NormSpec l1 = NormSpec::l1();
  std::vector<double> fine = grid;
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    double mid = sg.is_discrete() ? std::round(0.5 * (grid[i] + grid[i + 1]))
                                  : 0.5 * (grid[i] + grid[i + 1]);
    if (mid > grid[i] && mid < grid[i + 1]) fine.push_back(mid);
  }
  fine.push_back(2.0 * grid.back());
  fine.push_back(4.0 * grid.back());
  for (double t : fine) {
    Vector v;
    try {
      v = evaluate(sg, t) * x;
    } catch (const EvaluationOverflow&) {
      return std::nullopt;
    }
    Vector gap = y - v;
    double dplus = 0.0;
    switch (K.kind()) {
      case Cone::Kind::orthant:
        dplus = (-gap).cwiseMax(0.0).lpNorm<1>();
        break;
      case Cone::Kind::psd: {
        Eigen::SelfAdjointEigenSolver<Matrix> es(
            Cone::coords_to_sym(gap, K.psd_side()));
        dplus = std::max(0.0, -es.eigenvalues().minCoeff());
        break;
      }
      case Cone::Kind::centred: {
        dplus = distance_to_cone(gap, K, NormSpec::l2()).distance;
        break;
      }
      default:
        dplus = distance_to_cone(gap, K, l1).distance;
        break;
    }
    residual = std::max(residual, dplus);
  }
  if (residual > budget * (1.0 + y.cwiseAbs().maxCoeff())) return std::nullopt;
  return OrderBound{y, residual};
}

}  // namespace oplab
