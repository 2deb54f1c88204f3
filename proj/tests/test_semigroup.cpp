#include <doctest.h>

#include <cmath>

#include "oplab/semigroup.hpp"
#include "oracles.hpp"

using namespace oplab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(v.size());
  int i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

Matrix heat_generator(double alpha) {
  Matrix A(2, 2);
  A << -alpha, alpha, alpha, -alpha;
  return A;
}

Matrix heat_closed_form(double alpha, double t) {
  Matrix E(2, 2);
  const double diag = 0.5 * (1.0 + std::exp(-2.0 * alpha * t));
  const double off = 0.5 * (1.0 - std::exp(-2.0 * alpha * t));
  E << diag, off, off, diag;
  return E;
}

std::shared_ptr<const Cone> orthant(int d) {
  return std::make_shared<Cone>(Cone::orthant(d));
}

Matrix swap2() {
  Matrix T(2, 2);
  T << 0, 1, 1, 0;
  return T;
}

}  // namespace

TEST_CASE("expm matches a Taylor-series oracle") {
  Rng rng(1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < 25; ++k) {
    const int d = 2 + static_cast<int>(rng() % 4);
    Matrix A(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) A(i, j) = gauss(rng);
    Matrix E = expm(A);
    Matrix O = testing::taylor_expm(A);
    CHECK((E - O).cwiseAbs().maxCoeff() < 1e-11 * (1.0 + O.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("evaluate: powers and flows") {
  auto sg = Semigroup::continuous(heat_generator(1.0), orthant(2));
  for (double t : {0.0, 0.25, 1.0, 7.5, 50.0}) {
    CHECK((evaluate(sg, t) - heat_closed_form(1.0, t)).cwiseAbs().maxCoeff() <
          1e-10);
  }

  auto disc = Semigroup::discrete(swap2(), orthant(2));
  CHECK((evaluate(disc, 0) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0);
  CHECK((evaluate(disc, 7) - swap2()).cwiseAbs().maxCoeff() == 0);
  CHECK_THROWS_AS(evaluate(disc, 2.5), PreconditionViolation);

  // spectrally unstable inputs overflow loudly at huge times
  Matrix G(1, 1);
  G << 2.0;
  auto grow = Semigroup::continuous(G, orthant(1));
  CHECK_THROWS_AS(evaluate(grow, 1e6), EvaluationOverflow);
}

TEST_CASE("semigroup law on random times") {
  Rng rng(2);
  std::uniform_real_distribution<double> unif(0.0, 6.0);
  auto cont = Semigroup::continuous(heat_generator(0.7), orthant(2));
  auto disc = Semigroup::discrete(testing::random_stochastic(rng, 4), orthant(4));
  for (int k = 0; k < 30; ++k) {
    double s = unif(rng), t = unif(rng);
    CHECK((evaluate(cont, s + t) - evaluate(cont, s) * evaluate(cont, t))
              .cwiseAbs()
              .maxCoeff() < 1e-9);
    double si = std::floor(s), ti = std::floor(t);
    CHECK((evaluate(disc, si + ti) - evaluate(disc, si) * evaluate(disc, ti))
              .cwiseAbs()
              .maxCoeff() < 1e-9);
  }
}

TEST_CASE("positivity checks") {
  auto metzler = Semigroup::continuous(heat_generator(1.0), orthant(2));
  CHECK(positivity_check(metzler, {}).positive);

  Matrix bad(2, 2);
  bad << 1, 0, 0, -1;
  auto nonpos = Semigroup::discrete(bad, orthant(2));
  auto w = positivity_check(nonpos, {});
  CHECK_FALSE(w.positive);
  CHECK((w.generator - vec({0, 1})).cwiseAbs().maxCoeff() < 1e-12);

  // depolarizing channel preserves the PSD cone
  const int n = 2;
  Vector id = Cone::sym_to_coords(Matrix::Identity(n, n));
  Matrix dep = 0.7 * Matrix::Identity(3, 3) + (0.3 / n) * (id * id.transpose());
  auto psd_sg = Semigroup::discrete(dep, std::make_shared<Cone>(Cone::psd(2)));
  CHECK(positivity_check(psd_sg, {}).positive);
}

TEST_CASE("Cesaro means") {
  auto ident = Semigroup::discrete(Matrix::Identity(2, 2), orthant(2));
  CHECK((cesaro_mean(ident, 17).mean - Matrix::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  auto sw = Semigroup::discrete(swap2(), orthant(2));
  Matrix half = Matrix::Constant(2, 2, 0.5);
  CHECK((cesaro_mean(sw, 10).mean - half).cwiseAbs().maxCoeff() < 1e-14);

  auto heat = Semigroup::continuous(heat_generator(1.0), orthant(2));
  CHECK((cesaro_mean(heat, 4000.0).mean - half).cwiseAbs().maxCoeff() < 1e-3);

  // continuous Cesaro identity: A * int_0^t e^{sA} ds = e^{tA} - I
  Rng rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    Matrix A(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) A(i, j) = gauss(rng);
    const double t = 0.5 + (k % 4);
    Matrix I3 = Matrix::Identity(3, 3);
    Matrix lhs = A * semigroup_integral(A, t);
    Matrix rhs = expm(t * A) - I3;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <
          1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff()));
  }

  // doubling recursion matches the direct mean
  auto doeblin = Semigroup::discrete(testing::random_stochastic(rng, 3), orthant(3));
  auto geo = cesaro_geometric(doeblin, 5);
  for (auto& [t, mean] : geo) {
    CHECK((mean - cesaro_mean(doeblin, t).mean).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("mean ergodic projections with dual evidence") {
  auto sw = Semigroup::discrete(swap2(), orthant(2));
  auto r1 = mean_ergodic_projection(sw);
  REQUIRE(r1.status == ErgodicResult::Status::converged);
  CHECK((*r1.projection - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() <
        1e-9);
  CHECK(r1.numeric_converged);
  CHECK(r1.spectral_converged);

  auto shrink = Semigroup::discrete(0.5 * Matrix::Identity(2, 2), orthant(2));
  auto r2 = mean_ergodic_projection(shrink);
  REQUIRE(r2.status == ErgodicResult::Status::converged);
  CHECK(r2.projection->cwiseAbs().maxCoeff() < 1e-9);

  Matrix J(2, 2);
  J << 1, 1, 0, 1;
  auto jordan = Semigroup::discrete(J, orthant(2));
  auto r3 = mean_ergodic_projection(jordan);
  CHECK(r3.status == ErgodicResult::Status::diverged);
  bool found_defective = false;
  for (auto& ev : r3.spectral_evidence)
    if (ev.peripheral && ev.semisimple == 0) found_defective = true;
  CHECK(found_defective);
}

TEST_CASE("fixed spaces") {
  auto ident = Semigroup::discrete(Matrix::Identity(2, 2), orthant(2));
  CHECK(fixed_space(ident).cols() == 2);

  auto heat = Semigroup::continuous(heat_generator(1.0), orthant(2));
  Matrix F = fixed_space(heat);
  REQUIRE(F.cols() == 1);
  CHECK(std::abs(std::abs(F.col(0).dot(vec({1, 1}).normalized())) - 1.0) <
        1e-10);

  Rng rng(4);
  Matrix T = testing::random_stochastic(rng, 5);
  auto chain = Semigroup::discrete(T, orthant(5));
  Matrix Fc = fixed_space(chain);
  REQUIRE(Fc.cols() == 1);
  Vector pi = testing::perron_vector(T);
  CHECK(std::abs(std::abs(Fc.col(0).normalized().dot(pi.normalized())) - 1.0) <
        1e-9);
}

TEST_CASE("strong limits") {
  auto heat = Semigroup::continuous(heat_generator(1.0), orthant(2));
  auto r = strong_limit(heat);
  REQUIRE(r.converged);
  CHECK((*r.limit - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() < 1e-8);

  auto sw = Semigroup::discrete(swap2(), orthant(2));
  auto rs = strong_limit(sw);
  CHECK_FALSE(rs.converged);
  CHECK(rs.diagnostic.find("oscillat") != std::string::npos);

  Rng rng(5);
  Matrix T = testing::random_stochastic(rng, 4);
  auto chain = Semigroup::discrete(T, orthant(4));
  auto rc = strong_limit(chain);
  REQUIRE(rc.converged);
  Vector pi = testing::perron_vector(T);
  Matrix expected = pi * Vector::Ones(4).transpose();
  CHECK((*rc.limit - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("reversible-part projections") {
  auto sw = Semigroup::discrete(swap2(), orthant(2));
  Matrix P = jdlg_reversible_projection(sw);
  CHECK((P - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);

  auto shrink = Semigroup::discrete(0.5 * Matrix::Identity(2, 2), orthant(2));
  CHECK(jdlg_reversible_projection(shrink).cwiseAbs().maxCoeff() < 1e-10);

  Rng rng(6);
  Matrix T = testing::random_stochastic(rng, 4);
  auto chain = Semigroup::discrete(T, orthant(4));
  Matrix Pc = jdlg_reversible_projection(chain);
  Vector pi = testing::perron_vector(T);
  CHECK((Pc - pi * Vector::Ones(4).transpose()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((Pc * Pc - Pc).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((T * Pc - Pc * T).cwiseAbs().maxCoeff() < 1e-8);

  Matrix J(2, 2);
  J << 1, 1, 0, 1;
  CHECK_THROWS_AS(jdlg_reversible_projection(
                      Semigroup::discrete(J, orthant(2))),
                  Unbounded);
}

TEST_CASE("asymptotic order bounds") {
  Rng rng(7);
  Matrix T = testing::random_stochastic(rng, 3);
  auto chain = Semigroup::discrete(T, orthant(3));
  auto b = asymptotic_order_bound(chain, vec({1, 0, 0}), {1.0, 4096.0});
  REQUIRE(b.has_value());
  Vector pi = testing::perron_vector(T);
  CHECK(((b->y - pi).minCoeff()) > -1e-6);  // bound dominates the limit

  auto ident = Semigroup::discrete(Matrix::Identity(2, 2), orthant(2));
  auto bi = asymptotic_order_bound(ident, vec({0.3, 0.7}), {1.0, 64.0});
  REQUIRE(bi.has_value());
  CHECK((bi->y - vec({0.3, 0.7})).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(bi->residual == 0.0);

  Matrix J(2, 2);
  J << 1, 1, 0, 1;
  auto jordan = Semigroup::discrete(J, orthant(2));
  CHECK_FALSE(asymptotic_order_bound(jordan, vec({0, 1}), {1.0, 4096.0}));
}

TEST_CASE("powers of mean ergodic positive operators stay mean ergodic") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 5);
    Matrix T = testing::random_stochastic(rng, d);
    auto base = Semigroup::discrete(T, orthant(d));
    REQUIRE(mean_ergodic_projection(base).status ==
            ErgodicResult::Status::converged);
    for (int r = 2; r <= 5; ++r) {
      auto power = Semigroup::discrete(matrix_power(T, r), orthant(d));
      auto res = mean_ergodic_projection(power);
      CHECK(res.status == ErgodicResult::Status::converged);
      CHECK(res.numeric_converged);
      CHECK(res.spectral_converged);
    }
  }
}

TEST_CASE("mean ergodic flows kill the normalized tail") {
  // (1/t) T_t int_0^1 T_s x ds -> 0 for mean ergodic continuous semigroups
  auto heat = Semigroup::continuous(heat_generator(1.0), orthant(2));
  Vector x = vec({1, 0});
  Vector acc = semigroup_integral(heat.matrix, 1.0) * x;
  for (double t : {8.0, 32.0, 128.0}) {
    Vector v = evaluate(heat, t) * acc / t;
    CHECK(v.cwiseAbs().maxCoeff() < 2.0 / t);
  }
}

TEST_CASE("order-bounded orbits force mean ergodicity") {
  Rng rng(9);
  Matrix T = testing::random_stochastic(rng, 4);
  auto chain = Semigroup::discrete(T, orthant(4));
  bool all_bounded = true;
  for (int i = 0; i < 4; ++i) {
    auto b = asymptotic_order_bound(chain, Vector::Unit(4, i), {1.0, 4096.0});
    if (!b) all_bounded = false;
  }
  REQUIRE(all_bounded);
  CHECK(mean_ergodic_projection(chain).status ==
        ErgodicResult::Status::converged);
}
