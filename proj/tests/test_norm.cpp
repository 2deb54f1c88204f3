#include <doctest.h>

#include <cmath>

#include "oplab/norm.hpp"
#include "oracles.hpp"

using namespace oplab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(v.size());
  int i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

}  // namespace

TEST_CASE("norm evaluation") {
  CHECK(NormSpec::l1().eval(vec({1, -2, 3})) == doctest::Approx(6.0));
  CHECK(NormSpec::linf().eval(vec({1, -2, 3})) == doctest::Approx(3.0));
  CHECK(NormSpec::weighted_l1(vec({2, 1})).eval(vec({-1, 3})) ==
        doctest::Approx(5.0));

  Matrix S(2, 2);
  S << 1, 0, 0, -2;
  CHECK(NormSpec::trace(2).eval(Cone::sym_to_coords(S)) == doctest::Approx(3.0));

  auto cm = NormSpec::centred_max(vec({1, 0, 0}), vec({1, 0, 0}));
  CHECK(cm.eval(vec({2, 1, 0})) == doctest::Approx(2.0));
  CHECK(cm.eval(vec({1, 3, 4})) == doctest::Approx(5.0));
}

TEST_CASE("additivity defect") {
  Cone o3 = Cone::orthant(3);
  CHECK(additivity_defect(NormSpec::l1(), o3, 1000, 1) < 1e-12);
  // the generator pair (e1, e2) is always probed, so the l2 defect is at
  // least 2 - sqrt(2)
  CHECK(additivity_defect(NormSpec::l2(), Cone::orthant(2), 10, 1) >=
        2.0 - std::sqrt(2.0) - 1e-12);

  Cone centred = Cone::centred(vec({1, 0, 0}), vec({1, 0, 0}));
  auto cm = NormSpec::centred_max(vec({1, 0, 0}), vec({1, 0, 0}));
  CHECK(additivity_defect(cm, centred, 1000, 1) < 1e-12);

  Cone psd = Cone::psd(2);
  CHECK(additivity_defect(NormSpec::trace(2), psd, 1000, 1) < 1e-12);
}

TEST_CASE("norm functional") {
  auto r1 = norm_functional(NormSpec::l1(), Cone::orthant(4));
  CHECK((r1.one - Vector::Ones(4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r1.residual < 1e-12);

  auto rt = norm_functional(NormSpec::trace(3), Cone::psd(3));
  CHECK((rt.one - Cone::sym_to_coords(Matrix::Identity(3, 3)))
            .cwiseAbs()
            .maxCoeff() < 1e-10);

  Cone centred = Cone::centred(vec({1, 0, 0}), vec({1, 0, 0}));
  auto cm = NormSpec::centred_max(vec({1, 0, 0}), vec({1, 0, 0}));
  auto rc = norm_functional(cm, centred);
  CHECK((rc.one - vec({1, 0, 0})).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(norm_functional(NormSpec::l2(), Cone::orthant(2)),
                  NotAdditive);
}

TEST_CASE("norm functional against the dual ball") {
  // ||one||_* = 1 and the dual unit ball sits inside [-one, one]
  struct Setup {
    Cone cone;
    NormSpec norm;
  };
  std::vector<Setup> setups;
  setups.push_back({Cone::orthant(4), NormSpec::l1()});
  setups.push_back({Cone::orthant(3), NormSpec::weighted_l1(vec({1, 2, 0.5}))});
  setups.push_back({Cone::psd(2), NormSpec::trace(2)});
  setups.push_back({Cone::centred(vec({1, 0, 0}), vec({1, 0, 0})),
                    NormSpec::centred_max(vec({1, 0, 0}), vec({1, 0, 0}))});
  Rng rng(2024);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& s : setups) {
    auto nf = norm_functional(s.norm, s.cone);
    CHECK(s.norm.dual_norm(nf.one) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.cone.dual_contains(nf.one, 1e-9));
    for (int k = 0; k < 200; ++k) {
      Vector phi(s.cone.dim());
      for (int i = 0; i < phi.size(); ++i) phi[i] = gauss(rng);
      const double dn = s.norm.dual_norm(phi);
      if (dn < 1e-12) continue;
      phi /= dn;  // now ||phi||_* = 1
      CHECK(s.cone.dual_contains(nf.one - phi, 1e-8));
      CHECK(s.cone.dual_contains(nf.one + phi, 1e-8));
    }
  }
}

TEST_CASE("dual norm of l1 via LP maximization") {
  // cross-check: max <one, x> over the l1 ball equals the linf norm
  Cone o3 = Cone::orthant(3);
  auto nf = norm_functional(NormSpec::l1(), o3);
  LPProblem p;
  // max <one, x> s.t. sum |x_i| <= 1; encode x = u - v, u, v >= 0
  p.c = Vector(6);
  p.c.head(3) = -nf.one;
  p.c.tail(3) = nf.one;
  p.A_ge = Matrix(1, 6);
  p.A_ge << -1, -1, -1, -1, -1, -1;
  p.b_ge = Vector(1);
  p.b_ge << -1;
  auto s = solve_lp(p);
  REQUIRE(s.status == LPStatus::optimal);
  CHECK(-s.objective == doctest::Approx(NormSpec::l1().dual_norm(nf.one)));
}

TEST_CASE("base norm values") {
  auto l1 = NormSpec::l1();
  CHECK(base_norm_value(vec({1, -1}), Cone::orthant(2), l1) ==
        doctest::Approx(2.0));
  CHECK(base_norm_value(vec({2, 3}), Cone::orthant(2), l1) ==
        doctest::Approx(5.0));
  Cone K = Cone::sliced(Cone::orthant(3), vec({1, 1, -1}));
  CHECK(base_norm_value(vec({0, 0, 1}), K, l1) == doctest::Approx(3.0));

  // base norm never drops below the original norm and agrees on the cone
  Rng rng(55);
  for (int k = 0; k < 50; ++k) {
    Vector x = K.sample(rng) - K.sample(rng);
    CHECK(base_norm_value(x, K, l1) >= l1.eval(x) - 1e-9);
    Vector c = K.sample(rng);
    CHECK(base_norm_value(c, K, l1) == doctest::Approx(l1.eval(c)).epsilon(1e-10));
  }
}

TEST_CASE("psi renorming") {
  Cone o2 = Cone::orthant(2);
  auto l1 = NormSpec::l1();

  auto r = psi_renorm(vec({1, 1}), o2, l1);
  Rng rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    Vector x(2);
    x << gauss(rng), gauss(rng);
    CHECK(r.norm.eval(x) == doctest::Approx(l1.eval(x)).epsilon(1e-12));
  }

  auto r12 = psi_renorm(vec({1, 2}), o2, l1);
  CHECK(r12.norm.eval(vec({1, 0})) == doctest::Approx(1.0));
  CHECK(r12.norm.eval(vec({0, 1})) == doctest::Approx(2.0));
  CHECK(r12.norm.eval(vec({1, -1})) == doctest::Approx(3.0));

  CHECK_THROWS_AS(psi_renorm(vec({1, 0}), o2, l1), DegeneratePsi);

  // renormed norm: additive on the cone, equivalent with the certified
  // constants
  Cone K = Cone::sliced(Cone::orthant(3), vec({1, 1, -1}));
  Vector psi = vec({1, 2, 1});
  auto rk = psi_renorm(psi, K, l1);
  CHECK(additivity_defect(rk.norm, K, 1000, 3) < 1e-10);
  for (int k = 0; k < 200; ++k) {
    Vector x = K.sample(rng) - K.sample(rng);
    const double npsi = rk.norm.eval(x);
    CHECK(npsi >= rk.lower_constant * l1.eval(x) - 1e-9);
    CHECK(npsi <= rk.upper_constant * l1.eval(x) + 1e-9);
  }
}

TEST_CASE("monotonicity of additive norms on the cone") {
  struct Setup {
    Cone cone;
    NormSpec norm;
  };
  std::vector<Setup> setups;
  setups.push_back({Cone::orthant(3), NormSpec::l1()});
  setups.push_back({Cone::psd(2), NormSpec::trace(2)});
  setups.push_back({Cone::centred(vec({1, 0, 0}), vec({1, 0, 0})),
                    NormSpec::centred_max(vec({1, 0, 0}), vec({1, 0, 0}))});
  Rng rng(808);
  for (auto& s : setups) {
    for (int k = 0; k < 200; ++k) {
      Vector x = s.cone.sample(rng);
      Vector y = x + s.cone.sample(rng);
      CHECK(s.norm.eval(x) <= s.norm.eval(y) + 1e-10);
    }
  }
}

TEST_CASE("induced operator norms") {
  Matrix M(2, 2);
  M << 1, -2, 3, 0.5;
  CHECK(operator_norm(M, NormSpec::l1()) == doctest::Approx(4.0));
  CHECK(operator_norm(M, NormSpec::linf()) == doctest::Approx(3.5));
  // trace-norm induced value for a positive trace-preserving map is 1
  const int n = 2;
  Vector id = Cone::sym_to_coords(Matrix::Identity(n, n));
  Matrix dep = 0.7 * Matrix::Identity(3, 3) + (0.3 / n) * (id * id.transpose());
  CHECK(operator_norm(dep, NormSpec::trace(2), true) == doctest::Approx(1.0));
}
