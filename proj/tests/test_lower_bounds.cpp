#include <doctest.h>

#include <cmath>

#include "oplab/lower_bounds.hpp"
#include "oracles.hpp"

using namespace oplab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(v.size());
  int i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

std::shared_ptr<const Cone> orthant(int d) {
  return std::make_shared<Cone>(Cone::orthant(d));
}

Matrix doeblin3(double delta = 0.1) {
  Matrix T = Matrix::Constant(3, 3, delta);
  for (int i = 0; i < 3; ++i) T(i, i) = 1.0 - 2.0 * delta;
  return T;
}

Semigroup doeblin_sg(double delta = 0.1) {
  return Semigroup::discrete(doeblin3(delta), orthant(3), "doeblin");
}

const std::pair<double, double> kWindow{1.0, 256.0};

}  // namespace

TEST_CASE("individual lower bounds") {
  auto sg = doeblin_sg();
  NormSpec l1 = NormSpec::l1();
  Vector f = vec({1, 0, 0});
  Vector pi = testing::perron_vector(sg.matrix);

  // one-step minorization: orbits stay above delta * (1,1,1)
  CHECK(is_lower_bound(vec({0.1, 0.1, 0.1}), sg, f, false, kWindow, 1e-6, l1)
            .accepted);
  CHECK(is_lower_bound(0.9 * pi, sg, f, false, kWindow, 1e-6, l1).accepted);
  auto rejected = is_lower_bound(2.0 * pi, sg, f, false, kWindow, 1e-6, l1);
  CHECK_FALSE(rejected.accepted);
  CHECK(rejected.report.sup_tail > 0.9);  // error settles at d_+(-pi) = 1

  CHECK_THROWS_AS(
      is_lower_bound(pi, sg, vec({2, 0, 0}), false, kWindow, 1e-6, l1),
      PreconditionViolation);
}

TEST_CASE("universal lower bound search") {
  NormSpec l1 = NormSpec::l1();
  auto cert = find_universal_lower_bound(doeblin_sg(), l1, kWindow, 1e-8);
  REQUIRE(cert.has_value());
  CHECK(cert->beta == doctest::Approx(0.3).epsilon(1e-6));
  CHECK((cert->h - vec({0.1, 0.1, 0.1})).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(cert->accepted);

  Matrix sw(2, 2);
  sw << 0, 1, 1, 0;
  auto none = find_universal_lower_bound(
      Semigroup::discrete(sw, orthant(2)), l1, kWindow, 1e-8);
  CHECK_FALSE(none.has_value());

  // depolarizing channel: h = p I / n in the trace norm
  const int n = 2;
  const double p = 0.3;
  Vector id = Cone::sym_to_coords(Matrix::Identity(n, n));
  Matrix dep = (1.0 - p) * Matrix::Identity(3, 3) +
               (p / n) * (id * id.transpose());
  auto psd_sg = Semigroup::discrete(dep, std::make_shared<Cone>(Cone::psd(2)));
  auto pc = find_universal_lower_bound(psd_sg, NormSpec::trace(2), kWindow, 1e-8);
  REQUIRE(pc.has_value());
  CHECK(pc->beta == doctest::Approx(p).epsilon(1e-6));
  Matrix H = Cone::coords_to_sym(pc->h, 2);
  CHECK((H - 0.15 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("markov renorming") {
  NormSpec l1 = NormSpec::l1();
  Rng rng(12);
  Matrix T = testing::random_stochastic(rng, 3);
  auto chain = Semigroup::discrete(T, orthant(3));
  Vector pi = testing::perron_vector(T);

  // dual Cesaro limit of phi is <phi, pi> * (1,...,1)
  Vector phi = vec({1, 2, 1});
  auto mr = markov_renorm(chain, phi, kWindow, 1e-9, l1);
  const double mass = phi.dot(pi);
  CHECK((mr.psi - mass * Vector::Ones(3)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(mr.markov_defect < 1e-9);
  CHECK(mr.invariance_residual < 1e-9);

  // already Markov + phi = norm functional: psi = the functional itself
  auto mr2 = markov_renorm(chain, Vector::Ones(3), kWindow, 1e-9, l1);
  CHECK((mr2.psi - Vector::Ones(3)).cwiseAbs().maxCoeff() < 1e-9);

  // transient block: psi vanishes on the decaying ray
  Matrix Tt(2, 2);
  Tt << 1, 0, 0, 0.5;
  auto transient = Semigroup::discrete(Tt, orthant(2));
  CHECK_THROWS_AS(markov_renorm(transient, Vector::Ones(2), kWindow, 1e-9, l1),
                  DegeneratePsi);
}

TEST_CASE("non-Markov similarity transforms renorm cleanly") {
  NormSpec l1 = NormSpec::l1();
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 3);
    Matrix S = testing::random_stochastic(rng, d);
    std::uniform_real_distribution<double> unif(0.5, 2.0);
    Vector diag(d);
    for (int i = 0; i < d; ++i) diag[i] = unif(rng);
    Matrix D = diag.asDiagonal();
    Matrix T = D.inverse() * S * D;  // positive, bounded, generally not Markov
    auto sg = Semigroup::discrete(T, orthant(d));
    auto mr = markov_renorm(sg, Vector::Ones(d), kWindow, 1e-8, l1);
    CHECK(mr.markov_defect < 1e-8);
    CHECK(additivity_defect(mr.norm, *sg.cone, 500, trial) < 1e-10);
    // equivalence with the certified constants
    for (int k = 0; k < 100; ++k) {
      Vector x = sg.cone->sample(rng) - sg.cone->sample(rng);
      const double v = mr.norm.eval(x);
      CHECK(v >= mr.lower_constant * l1.eval(x) - 1e-9);
      CHECK(v <= mr.upper_constant * l1.eval(x) + 1e-9);
    }
  }
}

TEST_CASE("fixed point iteration on the Doeblin chain") {
  auto sg = doeblin_sg();
  NormSpec l1 = NormSpec::l1();
  Vector pi = Vector::Constant(3, 1.0 / 3.0);
  const double beta = 0.3;
  BoundOracle oracle = [&](const Vector&) { return Vector(beta * pi); };

  // ||h_f|| = 1 already: immediate exit
  BoundOracle full = [&](const Vector&) { return pi; };
  auto t0 = fixed_point_iteration(sg, l1, vec({1, 0, 0}), full, 1.0, 1e-2, 256.0);
  CHECK(t0.norms.size() == 1);
  CHECK((t0.h - pi).cwiseAbs().maxCoeff() < 1e-12);

  auto tr = fixed_point_iteration(sg, l1, vec({1, 0, 0}), oracle, beta, 1e-4,
                                  1024.0);
  CHECK(tr.h.size() == 3);
  CHECK(l1.eval(tr.h) >= 1.0 - 1e-4 - 1e-12);
  // recorded norms: nondecreasing, following 1 - delta (1-beta)^n
  for (size_t n = 0; n < tr.norms.size(); ++n) {
    CHECK(tr.norms[n] >= 1.0 - tr.delta * std::pow(1.0 - beta, n) - 1e-8);
    if (n > 0) CHECK(tr.norms[n] >= tr.norms[n - 1] - 1e-12);
  }
  // the limit bound is the stationary vector
  CHECK((tr.h - l1.eval(tr.h) * pi).cwiseAbs().maxCoeff() < 1e-8);

  // rank-one Markov projection: a single step reaches the fixed vector
  Vector v = vec({0.2, 0.5, 0.3});
  Matrix P1 = v * Vector::Ones(3).transpose();
  auto proj_sg = Semigroup::discrete(P1, orthant(3));
  BoundOracle half = [&](const Vector& g) { return Vector(0.5 * v * g.sum()); };
  auto tp = fixed_point_iteration(proj_sg, l1, vec({1, 0, 0}), half, 0.5, 1e-6,
                                  64.0);
  CHECK(l1.eval(tp.h) >= 1.0 - 1e-6);
  CHECK(tp.norms.size() <= 40);

  // oracle outputs that are not fixed points are rejected
  BoundOracle broken = [&](const Vector&) { return vec({0.3, 0.0, 0.0}); };
  CHECK_THROWS_AS(
      fixed_point_iteration(sg, l1, vec({1, 0, 0}), broken, 0.3, 1e-2, 256.0),
      OracleNotFixed);
}

TEST_CASE("tail oscillation obeys the Cauchy bound after the iteration") {
  auto sg = doeblin_sg();
  NormSpec l1 = NormSpec::l1();
  Vector pi = Vector::Constant(3, 1.0 / 3.0);
  BoundOracle oracle = [&](const Vector&) { return Vector(0.3 * pi); };
  Vector f = vec({1, 0, 0});
  for (double eps : {1e-2, 1e-4}) {
    auto tr = fixed_point_iteration(sg, l1, f, oracle, 0.3, eps, 1024.0);
    // find t0 with d_+(T_t f - h) < 2 eps on the tail, then oscillation < 8 eps
    double t0 = -1;
    for (double t : geometric_grid(sg, 1.0, 4096.0)) {
      Vector diff = evaluate(sg, t) * f - tr.h;
      if (distance_to_cone(diff, *sg.cone, l1).distance < 2.0 * eps) {
        t0 = t;
        break;
      }
    }
    REQUIRE(t0 > 0);
    for (double s : geometric_grid(sg, t0, 4096.0)) {
      for (double t : geometric_grid(sg, t0, 4096.0)) {
        const double osc = l1.eval(evaluate(sg, t) * f - evaluate(sg, s) * f);
        CHECK(osc < 8.0 * eps + 1e-8);
      }
    }
  }
}

TEST_CASE("pipeline: Doeblin chain converges through the certificate") {
  auto rep = converge_via_lower_bounds(doeblin_sg(), BoundKind::universal,
                                       kWindow, 1e-6, NormSpec::l1());
  REQUIRE(rep.succeeded);
  CHECK(rep.beta == doctest::Approx(0.3).epsilon(1e-5));
  CHECK(rep.gamma >= rep.beta - 1e-6);
  CHECK(rep.limit_rank == 1);
  CHECK(rep.dual_fixed_angle < 1e-6);
  Matrix expected = Vector::Constant(3, 1.0 / 3.0) * Vector::Ones(3).transpose();
  CHECK((*rep.limit - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("pipeline: failure is reported stage by stage") {
  Matrix sw(2, 2);
  sw << 0, 1, 1, 0;
  auto rep = converge_via_lower_bounds(Semigroup::discrete(sw, orthant(2)),
                                       BoundKind::universal, kWindow, 1e-6,
                                       NormSpec::l1());
  CHECK_FALSE(rep.succeeded);
  REQUIRE(!rep.stages.empty());
  CHECK(rep.stages.front().stage == "certificate");
  CHECK_FALSE(rep.stages.front().ok);
}

TEST_CASE("pipeline rejects families with vanishing mass") {
  // swap block + fixed coordinate: h_f = f_3 e_3 is valid on some rays and
  // zero on others; the certificate must be refused and no convergence
  // claimed (the semigroup indeed oscillates)
  Matrix T = Matrix::Zero(3, 3);
  T(0, 1) = 1;
  T(1, 0) = 1;
  T(2, 2) = 1;
  auto sg = Semigroup::discrete(T, orthant(3));
  BoundOracle scaled = [](const Vector& f) {
    return Vector(f[2] * Vector::Unit(3, 2));
  };
  auto rep = converge_via_lower_bounds(sg, BoundKind::individual, kWindow,
                                       1e-6, NormSpec::l1(), scaled);
  CHECK_FALSE(rep.succeeded);
  CHECK(rep.stages.front().stage == "certificate");
  CHECK_FALSE(rep.stages.front().ok);
  CHECK_FALSE(strong_limit(sg).converged);
}

TEST_CASE("renorming does not flip lower-bound verdicts") {
  auto sg = doeblin_sg();
  NormSpec l1 = NormSpec::l1();
  auto mr = markov_renorm(sg, vec({1, 0.5, 1.5}), kWindow, 1e-9, l1);
  Vector pi = Vector::Constant(3, 1.0 / 3.0);
  for (const Vector& h : {Vector(0.5 * pi), Vector(2.0 * pi)}) {
    for (int i = 0; i < 3; ++i) {
      Vector f = Vector::Unit(3, i);
      const bool before =
          is_lower_bound(h, sg, f, false, kWindow, 1e-6, l1).accepted;
      Vector fr = f / mr.norm.eval(f);
      const bool after =
          is_lower_bound(h, sg, fr, false, kWindow, 1e-6, mr.norm).accepted;
      CHECK(before == after);
    }
  }
}

TEST_CASE("ray certificates extend to the whole unit base") {
  auto sg = doeblin_sg();
  NormSpec l1 = NormSpec::l1();
  auto cert = find_universal_lower_bound(sg, l1, kWindow, 1e-8);
  REQUIRE(cert.has_value());
  Rng rng(77);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    Vector f(3);
    for (int i = 0; i < 3; ++i) f[i] = unif(rng);
    f /= l1.eval(f);
    CHECK(is_lower_bound(cert->h, sg, f, false, kWindow, 1e-6, l1).accepted);
  }
}

TEST_CASE("mean lower bounds: the cyclic shift") {
  // pure cyclic shift: mean lower bound exists, pointwise bound does not
  Matrix shift = Matrix::Zero(3, 3);
  shift(1, 0) = shift(2, 1) = shift(0, 2) = 1.0;
  auto sg = Semigroup::discrete(shift, orthant(3));
  NormSpec l1 = NormSpec::l1();
  std::pair<double, double> tail_window{64.0, 1048576.0};
  auto mean_cert =
      find_universal_lower_bound(sg, l1, tail_window, 1e-8, true);
  REQUIRE(mean_cert.has_value());
  CHECK(mean_cert->beta > 0.9);
  auto point_cert = find_universal_lower_bound(sg, l1, tail_window, 1e-8);
  CHECK_FALSE(point_cert.has_value());

  // mean ergodic with a rank-one projection and the dual fixed space on
  // the norm functional
  auto er = mean_ergodic_projection(sg, 1e-8, 1e12);
  REQUIRE(er.status == ErgodicResult::Status::converged);
  Eigen::JacobiSVD<Matrix> svd(*er.projection);
  int rank = 0;
  for (int i = 0; i < 3; ++i)
    if (svd.singularValues()[i] > 1e-8) ++rank;
  CHECK(rank == 1);

  Semigroup dual = sg;
  dual.matrix = shift.transpose();
  Matrix F = fixed_space(dual);
  REQUIRE(F.cols() == 1);
  const double c =
      std::abs(F.col(0).normalized().dot(Vector::Ones(3).normalized()));
  CHECK(std::acos(std::min(1.0, c)) < 1e-6);
}

TEST_CASE("dominated constant convergence") {
  auto sg = doeblin_sg();
  NormSpec l1 = NormSpec::l1();
  Vector pi = Vector::Constant(3, 1.0 / 3.0);

  // f(t) = x exactly
  Trajectory cx = Trajectory::constant(pi, TimeDomain::discrete, sg.cone, l1);
  auto r0 = dominated_constant_convergence(cx, pi, kWindow, 1e-6);
  CHECK(r0.ok);

  // Markov orbit with the universal bound: certified convergence to pi
  Trajectory orbit = Trajectory::orbit(sg, vec({1, 0, 0}), l1);
  auto r1 = dominated_constant_convergence(orbit, pi, kWindow, 1e-6);
  CHECK(r1.ok);
  for (auto& [t, lhs, rhs] : r1.trace) CHECK(lhs <= rhs + 1e-9);

  // tail norm above 1: precondition failure with the offending quantity
  Trajectory fat = Trajectory::constant(pi + vec({1, 0, 0}),
                                        TimeDomain::discrete, sg.cone, l1);
  auto r2 = dominated_constant_convergence(fat, pi, kWindow, 1e-6);
  CHECK_FALSE(r2.ok);
  CHECK(r2.failure.find("tail sup") != std::string::npos);
}

TEST_CASE("convergence passes to dominating semigroups") {
  NormSpec l1 = NormSpec::l1();
  auto T = doeblin_sg();

  // self-domination
  auto self = dominating_semigroup_convergence(T, T, {1.0, 65536.0}, 1e-6, l1);
  REQUIRE(self.succeeded);
  CHECK(self.limit_gap < 1e-9);

  // mixture with the rank-one limit dominates and converges to the same P
  Matrix P = Matrix::Constant(3, 3, 1.0 / 3.0);
  Matrix S = 0.7 * T.matrix + 0.3 * P;
  auto Ssg = Semigroup::discrete(S, orthant(3));
  auto rep = dominating_semigroup_convergence(T, Ssg, {1.0, 65536.0}, 1e-6, l1);
  REQUIRE(rep.succeeded);
  CHECK(rep.limit_gap < 1e-7);

  // the swap matrix does not dominate a converging chain
  Matrix sw3 = Matrix::Zero(3, 3);
  sw3(0, 1) = sw3(1, 0) = sw3(2, 2) = 1.0;
  auto swsg = Semigroup::discrete(sw3, orthant(3));
  auto bad = dominating_semigroup_convergence(T, swsg, {1.0, 65536.0}, 1e-6, l1);
  CHECK_FALSE(bad.succeeded);
  bool saw_domination_failure = false;
  for (auto& s : bad.stages)
    if (s.stage == "domination" && !s.ok) saw_domination_failure = true;
  CHECK(saw_domination_failure);
}
