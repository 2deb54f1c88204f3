#ifndef OPLAB_SEMIGROUP_HPP
#define OPLAB_SEMIGROUP_HPP

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oplab/cone.hpp"
#include "oplab/expm.hpp"
#include "oplab/norm.hpp"
#include "oplab/spectral.hpp"
#include "oplab/types.hpp"

namespace oplab {

/// One-parameter positive operator semigroup: powers of a matrix (discrete
/// time) or the flow of a generator (continuous time), with the ordering
/// cone attached.
struct Semigroup {
  enum class Kind { discrete, continuous };
  Kind kind = Kind::discrete;
  Matrix matrix;  // transition matrix T or generator A
  std::shared_ptr<const Cone> cone;
  std::string label;

  static Semigroup discrete(Matrix T, std::shared_ptr<const Cone> cone,
                            std::string label = "");
  static Semigroup continuous(Matrix A, std::shared_ptr<const Cone> cone,
                              std::string label = "");
  int dim() const { return static_cast<int>(matrix.rows()); }
  bool is_discrete() const { return kind == Kind::discrete; }
};

/// T_t (binary exponentiation / scaling-and-squaring exponential).
Matrix evaluate(const Semigroup& sg, double t);

/// Geometric time grid intersected with [t0, t1]: {1, 2, 4, ...} for
/// discrete time, {start * 2^k} for continuous time.
std::vector<double> geometric_grid(const Semigroup& sg, double t0, double t1);
std::vector<double> geometric_grid(bool discrete, double t0, double t1);

struct CesaroState {
  double t = 0.0;
  Matrix mean;
  double tail_norm = 0.0;  // ||T_t|| / t in the reference norm
};

/// Exact running average (discrete) / block-exponential integral
/// (continuous), scaled by 1/t.
CesaroState cesaro_mean(const Semigroup& sg, double t,
                        const NormSpec& reference_norm = NormSpec::l1());

/// Means along the doubling grid t0 * 2^k, k = 0..doublings, computed by the
/// pair recursion S_{2t} = S_t + T_t S_t; cheap even at t ~ 2^40.
std::vector<std::pair<double, Matrix>> cesaro_geometric(const Semigroup& sg,
                                                        int doublings,
                                                        double t0 = -1.0);

struct PositivityWitness {
  bool positive = true;
  double t = 0.0;
  Vector generator;
  std::string detail;
};

/// Discrete: T maps cone generators into the cone. Continuous on the
/// orthant: Metzler test on the generator. Other cones: e^{tA} on the
/// generators over the grid.
PositivityWitness positivity_check(const Semigroup& sg,
                                   const std::vector<double>& grid,
                                   double tol = 1e-9);

struct EigenvalueEvidence {
  std::complex<double> lambda;
  bool peripheral = false;
  int semisimple = 1;  // 1 yes, 0 no, -1 borderline
  int multiplicity = 1;
};

struct ErgodicResult {
  enum class Status { converged, diverged, undecided };
  Status status = Status::undecided;
  std::optional<Matrix> projection;
  std::vector<EigenvalueEvidence> spectral_evidence;
  bool numeric_converged = false;
  bool spectral_converged = false;
  double cauchy_residual = 0.0;
  std::string detail;
};

/// Dual-evidence mean ergodicity: Cesaro Cauchy test on the doubling grid
/// and the spectral criterion (spectral radius <= 1, peripheral eigenvalues
/// semisimple). The verdicts must agree; disagreement is `undecided`.
ErgodicResult mean_ergodic_projection(const Semigroup& sg, double tol = 1e-8,
                                      double horizon = 1e9);

/// Orthonormal basis of ker(T - I) / ker(A).
Matrix fixed_space(const Semigroup& sg, double tol = 1e-9);

struct ConvergenceReport {
  bool converged = false;
  std::optional<Matrix> limit;
  double final_residual = 0.0;
  double idempotency_residual = 0.0;
  double commutation_residual = 0.0;
  std::string diagnostic;
  std::vector<std::pair<double, double>> residual_trace;  // (t, ||T_2t - T_t||)
};

/// Cauchy test for lim T_t on the geometric grid; the candidate limit must
/// also pass P^2 = P and T_s P = P at off-grid times s.
ConvergenceReport strong_limit(const Semigroup& sg, double tol = 1e-9,
                               double horizon = 1 << 20);

/// Spectral projection onto the eigenspaces of unimodular eigenvalues (the
/// finite-dimensional reversible part). Throws Unbounded when the semigroup
/// is not power bounded.
Matrix jdlg_reversible_projection(const Semigroup& sg, double tol = 1e-9);

struct OrderBound {
  Vector y;
  double residual = 0.0;
};

/// Searches the tail window for y in the cone with T_t x <= y + r(t), small
/// r. Componentwise supremum on the orthant, LP on polyhedral cones,
/// identity-direction bound on the PSD cone. Empty when the orbit looks
/// unbounded or the residual exceeds the budget.
std::optional<OrderBound> asymptotic_order_bound(
    const Semigroup& sg, const Vector& x, std::pair<double, double> window,
    double budget = 1e-6);

}  // namespace oplab

#endif
