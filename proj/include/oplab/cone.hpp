#ifndef OPLAB_CONE_HPP
#define OPLAB_CONE_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oplab/lp.hpp"
#include "oplab/types.hpp"

namespace oplab {

class NormSpec;

/// Closed proper convex cone in R^d. Variants: nonnegative orthant,
/// polyhedral (generator and/or halfspace representation), centred
/// second-order cone {y : <u',y> >= ||(I - u u'^T) y||_2}, the PSD cone in
/// symmetric-matrix coordinates, and a base cone sliced by one functional.
///
/// Symmetric matrices are stored as vectors of dimension n(n+1)/2 with
/// off-diagonal entries scaled by sqrt(2), so the Euclidean pairing of
/// coordinate vectors equals the trace pairing of the matrices.
class Cone {
 public:
  enum class Kind { orthant, polyhedral, centred, psd, sliced };

  static Cone orthant(int d);
  static Cone polyhedral(Matrix generators, Matrix halfspaces = Matrix());
  static Cone centred(Vector u, Vector u_prime);
  static Cone psd(int n);
  static Cone sliced(const Cone& base, const Vector& phi);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  bool contains(const Vector& x, double tol = 1e-9) const;
  bool dual_contains(const Vector& phi, double tol = 1e-9) const;
  bool is_generating(double tol = 1e-9) const;

  /// Extreme rays for polyhedral variants; a deterministic spanning net of
  /// rays for the centred and PSD cones (generators_exact() tells which).
  const Matrix& generators() const;
  bool generators_exact() const { return generators_exact_; }
  bool has_halfspaces() const { return halfspaces_.rows() > 0; }
  /// Rows h with <h, x> >= 0; rows are unit vectors.
  const Matrix& halfspaces() const;
  /// Rays of the dual cone (exact for halfspace-described cones, net else).
  Matrix dual_generators() const;

  const Vector& centre_u() const { return u_; }
  const Vector& centre_u_prime() const { return u_prime_; }
  int psd_side() const { return psd_n_; }
  const Vector& slice_functional() const { return phi_; }

  Vector sample(Rng& rng, double scale = 1.0) const;
  Vector dual_sample(Rng& rng, double scale = 1.0) const;

  static Vector sym_to_coords(const Matrix& S);
  static Matrix coords_to_sym(const Vector& v, int n);
  static int sym_coord_dim(int n) { return n * (n + 1) / 2; }

 private:
  Kind kind_ = Kind::orthant;
  int dim_ = 0;
  Matrix generators_;   // columns
  Matrix halfspaces_;   // rows, unit norm
  bool generators_exact_ = true;
  Vector u_, u_prime_;  // centred
  int psd_n_ = 0;
  Vector phi_;          // slicing functional (sliced only)
};

struct DistanceResult {
  double distance = 0.0;
  Vector minimizer;
};

/// d_+(x) = inf{||x - y|| : y in cone} together with the minimizing y.
/// Dispatch: (orthant, monotone norm) positive part; (centred, l2)
/// second-order cone projection; (psd, trace/l2) eigenvalue positive part;
/// (generator cones, l1/linf/weighted_l1) LP. Throws UnsupportedPair else.
DistanceResult distance_to_cone(const Vector& x, const Cone& cone,
                                const NormSpec& norm);

/// Forces the LP route (generator representation required); used to
/// cross-check the closed forms.
DistanceResult distance_to_cone_lp(const Vector& x, const Cone& cone,
                                   const NormSpec& norm);

struct Decomposition {
  Vector y, z;
  double cost = 0.0;
  double constant = 0.0;  // empirical max(||y||,||z||)/||x||
};

/// x = y - z with y, z in the cone and ||y|| + ||z|| minimal.
Decomposition positive_decompose(const Vector& x, const Cone& cone,
                                 const NormSpec& norm);

struct FeasibilityCertificate {
  bool feasible = false;
  Vector witness;
  std::string detail;
};

/// Decides by LP whether some z satisfies a <= z <= upper1, upper2 and
/// b <= z in the cone order; infeasibility certifies that sup{a,b} does not
/// exist below the given pair of upper bounds (non-lattice evidence).
FeasibilityCertificate supremum_feasibility(const Cone& cone, const Vector& a,
                                            const Vector& b,
                                            const Vector& upper1,
                                            const Vector& upper2);

}  // namespace oplab

#endif
