#ifndef OPLAB_LP_HPP
#define OPLAB_LP_HPP

#include <vector>

#include "oplab/types.hpp"

namespace oplab {

/// Linear program  min c'x  s.t.  A_eq x = b_eq,  A_ge x >= b_ge,
/// x_i >= 0 unless marked free.
struct LPProblem {
  Vector c;
  Matrix A_eq;
  Vector b_eq;
  Matrix A_ge;
  Vector b_ge;
  std::vector<bool> free_vars;  // empty = all nonnegative

  int num_vars() const { return static_cast<int>(c.size()); }
};

enum class LPStatus { optimal, infeasible, unbounded };

struct LPSolution {
  LPStatus status = LPStatus::infeasible;
  Vector x;
  double objective = 0.0;
  double primal_residual = 0.0;      // max constraint violation at the solution
  double complementary_residual = 0.0;  // duality gap + worst dual infeasibility
};

/// Standard-form image of an LPProblem (min c'x, Ax = b, x >= 0) plus the
/// linear map recovering the original variables. Exposed so tests can run
/// independent oracles on exactly the solved instance.
struct StandardFormLP {
  Vector c;
  Matrix A;
  Vector b;
  // original x = recover * x_std
  Matrix recover;
};

StandardFormLP to_standard_form(const LPProblem& p);

/// Dense two-phase primal simplex with Bland's anti-cycling rule.
LPSolution solve_lp(const LPProblem& p, double feastol = 1e-9);

}  // namespace oplab

#endif
