#ifndef OPLAB_DOMINATION_HPP
#define OPLAB_DOMINATION_HPP

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "oplab/semigroup.hpp"

namespace oplab {

enum class TimeDomain { discrete, continuous };

/// Time-indexed positive vector path: a semigroup orbit, a Cesaro-mean
/// orbit, a constant, or a sampled table. Carries the cone and the norm
/// used for readings; `dplus_norm` is the (dispatchable) norm used for the
/// distance-to-cone functional and defaults to the reading norm.
class Trajectory {
 public:
  static Trajectory orbit(const Semigroup& sg, Vector x0, NormSpec norm,
                          std::optional<NormSpec> dplus_norm = std::nullopt);
  static Trajectory cesaro_orbit(const Semigroup& sg, Vector x0, NormSpec norm,
                                 std::optional<NormSpec> dplus = std::nullopt);
  static Trajectory constant(Vector x, TimeDomain domain,
                             std::shared_ptr<const Cone> cone, NormSpec norm,
                             std::optional<NormSpec> dplus = std::nullopt);
  static Trajectory table(std::vector<double> times, std::vector<Vector> values,
                          TimeDomain domain, std::shared_ptr<const Cone> cone,
                          NormSpec norm);

  Vector operator()(double t) const { return sampler_(t); }
  TimeDomain domain() const { return domain_; }
  const Cone& cone() const { return *cone_; }
  std::shared_ptr<const Cone> cone_ptr() const { return cone_; }
  const NormSpec& norm() const { return norm_; }
  const NormSpec& dplus_norm() const { return dplus_norm_; }

  /// Trajectory of running Cesaro means (exact for semigroup orbits,
  /// running average / trapezoid for tables, identity for constants).
  Trajectory cesaro() const;

 private:
  Trajectory(NormSpec n, NormSpec dn) : norm_(std::move(n)), dplus_norm_(std::move(dn)) {}
  std::function<Vector(double)> sampler_;
  TimeDomain domain_ = TimeDomain::discrete;
  std::shared_ptr<const Cone> cone_;
  NormSpec norm_;
  NormSpec dplus_norm_;
  // backing info so cesaro() stays exact for orbits
  std::optional<Semigroup> backing_sg_;
  Vector backing_x0_;
  bool is_cesaro_ = false;
  bool is_constant_ = false;
  std::vector<double> table_times_;
  std::vector<Vector> table_values_;
};

/// d_+(g(t) - f(t)) in the trajectories' d_+ norm.
double domination_error(const Trajectory& f, const Trajectory& g, double t);

struct DominationReport {
  enum class Verdict { dominated, not_dominated, inconclusive };
  std::vector<std::pair<double, double>> error_samples;  // (t, d_+)
  double sup_tail = 0.0;
  double trend = 0.0;  // fitted log-log decay exponent of the error curve
  Verdict verdict = Verdict::inconclusive;
  // symmetric run (g ⪯ f) when requested
  std::vector<std::pair<double, double>> reverse_samples;
  std::optional<Verdict> reverse_verdict;
  bool equivalent() const {
    return verdict == Verdict::dominated && reverse_verdict &&
           *reverse_verdict == Verdict::dominated;
  }
};

/// Samples d_+(g - f) on the geometric grid of the window; dominated when
/// the tail sup is below tol, not-dominated when the errors stay bounded
/// away from zero with a flat trend, inconclusive otherwise.
DominationReport check_asymptotic_domination(const Trajectory& f,
                                             const Trajectory& g,
                                             std::pair<double, double> window,
                                             double tol = 1e-6,
                                             bool symmetric = true);

/// Error function r(t) in the cone with f(t) <= g(t) + r(t) exactly,
/// built from the d_+ minimizer of g(t) - f(t) (residual decomposed when
/// it is not already in the cone).
Vector error_decomposition(const Trajectory& f, const Trajectory& g, double t);

struct SummableSubsequence {
  std::vector<double> times;
  Vector q;
};

/// Strictly increasing times with ||r(t_k)|| <= 2^{-k} and the summed bound
/// q = sum_k r(t_k); verifies f(t_k) <= g(t_k) + q at every selected time.
SummableSubsequence extract_summable_subsequence(const Trajectory& f,
                                                 const Trajectory& g,
                                                 double horizon);

struct CesaroInheritance {
  DominationReport report;
  // (t, d_+ of mean difference, Cesaro mean of pointwise d_+ errors)
  std::vector<std::tuple<double, double, double>> bound_trace;
  bool bound_ok = true;
};

/// Runs the domination check on the Cesaro-mean trajectories and verifies
/// the subadditivity bound d_+(mean difference) <= mean of pointwise d_+.
CesaroInheritance cesaro_inheritance(const Trajectory& f, const Trajectory& g,
                                     std::pair<double, double> window,
                                     double tol = 1e-6);

}  // namespace oplab

#endif
