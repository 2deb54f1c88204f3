#ifndef OPLAB_LOWER_BOUNDS_HPP
#define OPLAB_LOWER_BOUNDS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oplab/domination.hpp"

namespace oplab {

enum class BoundKind { individual, universal, individual_mean, universal_mean };
std::string bound_kind_name(BoundKind k);

struct LowerBoundCertificate {
  Vector h;
  BoundKind kind = BoundKind::universal;
  double beta = 0.0;  // ||h|| (or the family infimum)
  std::vector<double> residuals;    // per tested ray: tail sup of d_+ errors
  std::vector<Vector> tested_rays;
  bool accepted = false;
  std::string detail;
};

struct IsLowerBoundResult {
  bool accepted = false;
  DominationReport report;
};

/// Checks that the constant h is asymptotically dominated by t -> T_t f
/// (or by the Cesaro means when mean = true).
IsLowerBoundResult is_lower_bound(const Vector& h, const Semigroup& sg,
                                  const Vector& f, bool mean,
                                  std::pair<double, double> window, double tol,
                                  const NormSpec& norm,
                                  std::optional<NormSpec> dplus_norm = {});

/// Universal (mean) lower bound search: componentwise tail infimum on the
/// orthant, LP over the halfspace description on polyhedral cones,
/// minorization along a strictly positive fixed direction on PSD/centred
/// cones; every candidate is re-verified ray by ray before acceptance.
std::optional<LowerBoundCertificate> find_universal_lower_bound(
    const Semigroup& sg, const NormSpec& norm, std::pair<double, double> window,
    double tol, bool mean = false,
    std::optional<NormSpec> dplus_norm = {});

struct MarkovRenormResult {
  Vector psi;
  NormSpec norm = NormSpec::l1();
  double markov_defect = 0.0;
  double lower_constant = 0.0;   // certified m > 0
  double upper_constant = 0.0;   // 2 C ||psi||
  double invariance_residual = 0.0;  // ||T' psi - psi||
};

/// Renorming route: psi = Cauchy limit of the dual Cesaro means A_t' phi
/// (refused with NoCesaroLimit when they do not stabilize), then the psi
/// base norm; the defect max |  ||T_t f||_psi - ||f||_psi | is sampled.
MarkovRenormResult markov_renorm(const Semigroup& sg, const Vector& phi,
                                 std::pair<double, double> window, double tol,
                                 const NormSpec& original);

using BoundOracle = std::function<Vector(const Vector&)>;

struct IterationTrace {
  std::vector<double> norms;   // ||h_n||
  std::vector<double> times;   // t_0 chosen at each step
  Vector h;                    // final h_{f,eps}
  double beta = 0.0;
  double delta = 0.0;          // 1 - ||h_f||
};

/// Constructive fixed-point iteration: h_{n+1} = h_n + ||g_n|| h_{g_n/||g_n||}
/// with the base-norm split T_{t_0} f - h_n = g_n - e_n, ||e_n|| < eps;
/// stops once ||h_n|| >= 1 - eps.
IterationTrace fixed_point_iteration(const Semigroup& sg, const NormSpec& norm,
                                     const Vector& f, const BoundOracle& oracle,
                                     double beta, double eps, double horizon);

struct StageDiagnostic {
  std::string stage;
  bool ok = false;
  std::string message;
};

struct ConvergencePipelineReport {
  bool succeeded = false;
  bool renormed = false;
  std::optional<Vector> psi;
  double markov_defect = 0.0;
  std::optional<Matrix> limit;
  int limit_rank = 0;
  double gamma = 0.0;  // inf over cone rays of ||P g|| / ||g||
  double beta = 0.0;
  double dual_fixed_angle = 0.0;
  double limit_gap = 0.0;  // dominating-pair route: ||P_S - P_T||
  std::string certificate_kind;
  std::optional<LowerBoundCertificate> certificate;
  std::vector<StageDiagnostic> stages;
};

/// Pipeline: certificate -> Markov renorming when needed -> strong limit
/// (mean ergodic projection in the universal_mean mode) -> verification
/// (projection, commutation, gamma >= beta - tol, rank-one limit and the
/// norm-functional dual fixed space in the universal modes).
ConvergencePipelineReport converge_via_lower_bounds(
    const Semigroup& sg, BoundKind mode, std::pair<double, double> window,
    double tol, const NormSpec& norm,
    const std::optional<BoundOracle>& oracle = std::nullopt,
    std::optional<NormSpec> dplus_norm = {});

struct ConstantConvergenceReport {
  bool ok = false;
  std::string failure;  // offending precondition / quantity when not ok
  // (t, ||f(t) - x||, ||f(t)|| - ||x|| + 2||r(t)|| + tol)
  std::vector<std::tuple<double, double, double>> trace;
};

/// Norm-functional argument: a unit vector x dominated by a path of norms
/// <= 1 + tol forces ||f(t) - x|| <= ||f(t)|| - ||x|| + 2||r(t)|| + tol -> 0.
ConstantConvergenceReport dominated_constant_convergence(
    const Trajectory& f, const Vector& x, std::pair<double, double> window,
    double tol);

/// Dominating-semigroup route: S asymptotically dominates a strongly
/// convergent T whose limit is bounded below on the cone; then P_T's ranges
/// are S-fixed and S converges with the same limit.
ConvergencePipelineReport dominating_semigroup_convergence(
    const Semigroup& T_sg, const Semigroup& S_sg,
    std::pair<double, double> window, double tol, const NormSpec& norm,
    std::optional<NormSpec> dplus_norm = {});

}  // namespace oplab

#endif
