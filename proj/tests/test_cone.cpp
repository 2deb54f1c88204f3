#include <doctest.h>

#include <cmath>

#include "oplab/cone.hpp"
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

Cone example_sliced() {
  return Cone::sliced(Cone::orthant(3), vec({1, 1, -1}));
}

bool same_ray(const Vector& a, const Vector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na < 1e-14 || nb < 1e-14) return false;
  return (a / na - b / nb).cwiseAbs().maxCoeff() < 1e-9;
}

}  // namespace

TEST_CASE("membership across the cone variants") {
  CHECK(Cone::orthant(2).contains(vec({3, 4}), 1e-9));
  CHECK_FALSE(Cone::orthant(2).contains(vec({3, -1e-3}), 1e-9));

  Cone centred = Cone::centred(vec({1, 0, 0}), vec({1, 0, 0}));
  CHECK(centred.contains(vec({1, 1, 0})));  // 1 >= ||(1,0)||_2
  CHECK_FALSE(centred.contains(vec({1, 1, 1})));

  Cone K = example_sliced();
  CHECK_FALSE(K.contains(vec({0, 0, 1})));  // <phi, e3> = -1
  CHECK(K.contains(vec({1, 0, 1})));
  CHECK(K.contains(vec({0.3, 0.4, 0.5})));

  Cone psd = Cone::psd(2);
  Matrix S(2, 2);
  S << 1, 0, 0, -2;
  CHECK_FALSE(psd.contains(Cone::sym_to_coords(S)));
  CHECK(psd.contains(Cone::sym_to_coords(Matrix::Identity(2, 2))));

  CHECK_THROWS_AS(Cone::orthant(2).contains(vec({1, 2, 3})),
                  DimensionMismatch);
}

TEST_CASE("sliced generators match the hand enumeration") {
  Cone K = example_sliced();
  const Matrix& G = K.generators();
  REQUIRE(G.cols() == 4);
  std::vector<Vector> expected = {vec({1, 0, 0}), vec({0, 1, 0}),
                                  vec({1, 0, 1}), vec({0, 1, 1})};
  for (const auto& e : expected) {
    bool found = false;
    for (int i = 0; i < G.cols(); ++i)
      if (same_ray(G.col(i), e)) found = true;
    CHECK(found);
  }
  // every generator is extreme: not a nonnegative combination of the rest,
  // and all satisfy the halfspace description
  for (int i = 0; i < G.cols(); ++i)
    CHECK((K.halfspaces() * G.col(i)).minCoeff() >= -1e-12);
}

TEST_CASE("dual membership") {
  CHECK(Cone::orthant(3).dual_contains(vec({1, 1, 1})));
  CHECK_FALSE(Cone::orthant(2).dual_contains(vec({1, -1})));

  Cone K = example_sliced();
  CHECK(K.dual_contains(vec({0, 0, 1})));   // pairs >= 0 with all 4 rays
  CHECK_FALSE(K.dual_contains(vec({-1, 0, 0})));
  CHECK(K.dual_contains(vec({1, 1, -1})));  // the slicing functional itself

  Cone centred = Cone::centred(vec({1, 0, 0}), vec({1, 0, 0}));
  CHECK(centred.dual_contains(vec({1, 0.5, 0.5})));
  CHECK_FALSE(centred.dual_contains(vec({1, 2, 0})));

  // duality characterization on the sliced cone: x in K iff all dual
  // generators pair nonnegatively
  Rng rng(11);
  Matrix D = K.dual_generators();
  for (int k = 0; k < 200; ++k) {
    Vector x = K.sample(rng) - K.sample(rng, 0.3);
    bool in_cone = K.contains(x, 1e-9);
    double worst = (D.transpose() * x).minCoeff();
    CHECK(in_cone == (worst >= -1e-9 * (1.0 + x.norm())));
  }
}

TEST_CASE("distance to cone: closed forms") {
  auto l2 = NormSpec::l2();
  auto l1 = NormSpec::l1();

  auto r = distance_to_cone(vec({-3, 4}), Cone::orthant(2), l2);
  CHECK(r.distance == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(same_ray(r.minimizer, vec({0, 4})));

  auto r1 = distance_to_cone(vec({-1, -1}), Cone::orthant(2), l1);
  CHECK(r1.distance == doctest::Approx(2.0).epsilon(1e-12));

  Cone centred = Cone::centred(vec({1, 0, 0}), vec({1, 0, 0}));
  auto rc = distance_to_cone(vec({0, 1, 0}), centred, l2);
  CHECK(rc.distance == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
  CHECK((rc.minimizer - vec({0.5, 0.5, 0})).cwiseAbs().maxCoeff() < 1e-12);

  Matrix S(2, 2);
  S << 1, 0, 0, -2;
  auto rp = distance_to_cone(Cone::sym_to_coords(S), Cone::psd(2),
                             NormSpec::trace(2));
  CHECK(rp.distance == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(distance_to_cone(vec({1, 1}), Cone::orthant(2),
                                   NormSpec::trace(2)),
                  UnsupportedPair);
}

TEST_CASE("distance LP path agrees with the positive-part oracle") {
  Rng rng(77);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Cone orthant = Cone::orthant(3);
  auto l1 = NormSpec::l1();
  for (int k = 0; k < 100; ++k) {
    Vector x(3);
    for (int i = 0; i < 3; ++i) x[i] = gauss(rng);
    auto lp = distance_to_cone_lp(x, orthant, l1);
    const double oracle = (-x).cwiseMax(0.0).lpNorm<1>();
    CHECK(std::abs(lp.distance - oracle) < 1e-9);
  }
}

TEST_CASE("d_+ properties: homogeneity, subadditivity, Lipschitz") {
  Rng rng(5150);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.0, 10.0);
  Cone K = example_sliced();
  auto l1 = NormSpec::l1();
  for (int k = 0; k < 200; ++k) {
    Vector x(3), y(3);
    for (int i = 0; i < 3; ++i) {
      x[i] = gauss(rng);
      y[i] = gauss(rng);
    }
    const double a = scale(rng);
    const double dx = distance_to_cone(x, K, l1).distance;
    const double dy = distance_to_cone(y, K, l1).distance;
    CHECK(std::abs(distance_to_cone(a * x, K, l1).distance - a * dx) < 1e-8);
    CHECK(distance_to_cone(x + y, K, l1).distance <= dx + dy + 1e-8);
    CHECK(std::abs(dx - dy) <= l1.eval(x - y) + 1e-8);
  }
}

TEST_CASE("positive operators contract d_+ up to their norm") {
  Rng rng(31337);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Cone K = example_sliced();
  auto l1 = NormSpec::l1();
  const Matrix& G = K.generators();
  Matrix D = K.dual_generators();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    // positive map as a sum of (ray) (dual ray)^T terms
    Matrix T = Matrix::Zero(3, 3);
    for (int r = 0; r < 4; ++r)
      T += unif(rng) * G.col(rng() % G.cols()) *
           D.col(rng() % D.cols()).transpose();
    const double tnorm = operator_norm(T, l1);
    for (int k = 0; k < 20; ++k) {
      Vector x(3);
      for (int i = 0; i < 3; ++i) x[i] = gauss(rng);
      const double lhs = distance_to_cone(T * x, K, l1).distance;
      const double rhs = tnorm * distance_to_cone(x, K, l1).distance;
      CHECK(lhs <= rhs + 1e-8);
    }
  }
}

TEST_CASE("positive decomposition") {
  auto l1 = NormSpec::l1();
  Cone o2 = Cone::orthant(2);

  auto d0 = positive_decompose(vec({5, 0}), o2, l1);
  CHECK(d0.cost == doctest::Approx(5.0));
  CHECK(d0.z.cwiseAbs().maxCoeff() < 1e-12);

  auto d1 = positive_decompose(vec({1, -1}), o2, l1);
  CHECK(d1.cost == doctest::Approx(2.0));

  Cone K = example_sliced();
  auto d2 = positive_decompose(vec({0, 0, 1}), K, l1);
  CHECK(d2.cost == doctest::Approx(3.0).epsilon(1e-9));
  CHECK((d2.y - d2.z - vec({0, 0, 1})).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(K.contains(d2.y, 1e-9));
  CHECK(K.contains(d2.z, 1e-9));

  // exact reconstruction and membership on random inputs
  Rng rng(99);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    Vector x(3);
    for (int i = 0; i < 3; ++i) x[i] = gauss(rng);
    auto d = positive_decompose(x, K, l1);
    CHECK((x - (d.y - d.z)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(K.contains(d.y, 1e-9));
    CHECK(K.contains(d.z, 1e-9));
    CHECK(d.cost >= l1.eval(x) - 1e-9);
  }
}

TEST_CASE("supremum feasibility and the non-lattice certificate") {
  Cone o2 = Cone::orthant(2);
  auto cert = supremum_feasibility(o2, vec({0, 0}), vec({-1, 1}), vec({0, 1}),
                                   vec({0, 1}));
  CHECK(cert.feasible);
  CHECK((cert.witness - vec({0, 1})).cwiseAbs().maxCoeff() < 1e-9);

  Cone o3 = Cone::orthant(3);
  auto cert3 = supremum_feasibility(o3, vec({0, 0, 0}), vec({1, 0, 0}),
                                    vec({1, 0, 0}), vec({1, 1, 0}));
  CHECK(cert3.feasible);

  Cone K = example_sliced();
  auto certK = supremum_feasibility(K, vec({0, 0, 0}), vec({-1, 0, 1}),
                                    vec({1, 0, 1}), vec({0, 1, 1}));
  CHECK_FALSE(certK.feasible);

  CHECK_THROWS_AS(
      supremum_feasibility(o2, vec({0, 0}), vec({2, 2}), vec({1, 1}),
                           vec({3, 3})),
      PreconditionViolation);
}

TEST_CASE("properness is rejected at construction") {
  Matrix G(2, 2);
  G << 1, -1, 0, 0;  // contains the line span{e1}
  CHECK_THROWS_AS(Cone::polyhedral(G), PreconditionViolation);
}

TEST_CASE("centred cone construction validates the pairing") {
  CHECK_THROWS_AS(Cone::centred(vec({2, 0}), vec({1, 0})),
                  PreconditionViolation);
}

TEST_CASE("sym coordinates preserve the trace pairing") {
  Rng rng(123);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    Matrix A(3, 3), B(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        A(i, j) = gauss(rng);
        B(i, j) = gauss(rng);
      }
    Matrix S = 0.5 * (A + A.transpose());
    Matrix R = 0.5 * (B + B.transpose());
    const double trace_pair = (S * R).trace();
    const double coord_pair = Cone::sym_to_coords(S).dot(Cone::sym_to_coords(R));
    CHECK(trace_pair == doctest::Approx(coord_pair).epsilon(1e-12));
    CHECK((Cone::coords_to_sym(Cone::sym_to_coords(S), 3) - S)
              .cwiseAbs()
              .maxCoeff() < 1e-14);
  }
}
