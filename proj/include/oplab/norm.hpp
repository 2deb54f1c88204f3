#ifndef OPLAB_NORM_HPP
#define OPLAB_NORM_HPP

#include <optional>
#include <string>

#include "oplab/cone.hpp"
#include "oplab/types.hpp"

namespace oplab {

/// Evaluable norm description. psi_base is the base-type renorming
/// ||f||_psi = inf{<psi, g+h> : g,h in cone, f = g-h}, realized as an LP
/// over the cone's generator matrix (closed form on the orthant).
class NormSpec {
 public:
  enum class Kind { l1, l2, linf, weighted_l1, trace, centred_max, psi_base };

  static NormSpec l1() { return NormSpec(Kind::l1); }
  static NormSpec l2() { return NormSpec(Kind::l2); }
  static NormSpec linf() { return NormSpec(Kind::linf); }
  static NormSpec weighted_l1(Vector weights);
  static NormSpec trace(int n);
  static NormSpec centred_max(Vector u, Vector u_prime);
  static NormSpec psi_base(Vector psi, const Cone& cone);

  Kind kind() const { return kind_; }
  double eval(const Vector& x) const;
  double dual_norm(const Vector& phi) const;

  /// True when eval respects the componentwise order on the orthant.
  bool monotone_on_orthant() const;

  int trace_side() const { return trace_n_; }
  const Vector& weights() const { return weights_; }
  const Vector& psi() const { return psi_; }
  const Vector& centre_u() const { return u_; }
  const Vector& centre_u_prime() const { return u_prime_; }

  std::string kind_name() const;

 private:
  explicit NormSpec(Kind k) : kind_(k) {}
  Kind kind_;
  Vector weights_;
  int trace_n_ = 0;
  Vector u_, u_prime_;
  Vector psi_;
  Matrix psi_generators_;    // cone generators cached at construction
  Vector psi_gen_values_;    // <psi, g_i>
  bool psi_orthant_ = false;
};

/// max over sampled cone pairs of | ||x+y|| - ||x|| - ||y|| |. All generator
/// pairs are probed first, then `samples` seeded random pairs.
double additivity_defect(const NormSpec& norm, const Cone& cone, int samples,
                         std::uint64_t seed);

struct NormFunctionalResult {
  Vector one;
  double residual = 0.0;
};

/// Solves <one, g_i> = ||g_i|| over the cone's generators in least squares;
/// the residual doubles as the additivity test. Throws NotAdditive when the
/// residual exceeds 1e-8.
NormFunctionalResult norm_functional(const NormSpec& norm, const Cone& cone);

/// ||x||_1 = inf{||y|| + ||z|| : y,z in cone, x = y - z}.
double base_norm_value(const Vector& x, const Cone& cone, const NormSpec& norm);

struct PsiRenormResult {
  NormSpec norm;
  Vector psi;
  double lower_constant = 0.0;  // certified m with m||f|| <= ||f||_psi
  double psi_dual_norm = 0.0;
  double upper_constant = 0.0;  // empirical 2C||psi||
};

/// Lemma-style renorming: builds the psi base norm and certifies
/// m = min over normalized generators of <psi, g> > 0; DegeneratePsi when
/// the result would only be a seminorm.
PsiRenormResult psi_renorm(const Vector& psi, const Cone& cone,
                           const NormSpec& original);

/// Induced operator norm of the matrix acting on (R^d, norm). Exact for
/// l1/weighted_l1/linf/l2, and for the trace norm when the map is positive
/// (dual Russo-Dye route); otherwise a seeded sampling estimate.
double operator_norm(const Matrix& M, const NormSpec& norm,
                     bool positive_map = false);

}  // namespace oplab

#endif
