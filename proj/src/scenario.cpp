#include "oplab/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace oplab {

std::string artifact_version() { return "0.1.0"; }

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError("matrix: expected an array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols)
      throw ConfigError("matrix: ragged rows");
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

namespace {

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("vector: expected an array");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

Json cone_to_json(const Cone& cone) {
  Json j;
  switch (cone.kind()) {
    case Cone::Kind::orthant:
      j["type"] = "orthant";
      j["dim"] = cone.dim();
      break;
    case Cone::Kind::polyhedral: {
      j["type"] = "polyhedral";
      Json gens = Json::array();
      const Matrix& G = cone.generators();
      for (int i = 0; i < G.cols(); ++i) gens.push_back(vector_to_json(G.col(i)));
      j["generators"] = gens;
      if (cone.has_halfspaces()) {
        Json hs = Json::array();
        const Matrix& H = cone.halfspaces();
        for (int i = 0; i < H.rows(); ++i)
          hs.push_back(vector_to_json(H.row(i).transpose()));
        j["halfspaces"] = hs;
      }
      break;
    }
    case Cone::Kind::centred:
      j["type"] = "centred";
      j["u"] = vector_to_json(cone.centre_u());
      j["u_prime"] = vector_to_json(cone.centre_u_prime());
      break;
    case Cone::Kind::psd:
      j["type"] = "psd";
      j["n"] = cone.psd_side();
      break;
    case Cone::Kind::sliced:
      j["type"] = "sliced";
      j["base"] = Json{{"type", "orthant"}, {"dim", cone.dim()}};
      j["phi"] = vector_to_json(cone.slice_functional());
      break;
  }
  return j;
}

std::shared_ptr<const Cone> cone_from_json(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "orthant")
    return std::make_shared<Cone>(Cone::orthant(j.at("dim").get<int>()));
  if (type == "polyhedral") {
    const Json& g = j.at("generators");
    if (g.empty()) throw ConfigError("polyhedral cone: no generators");
    const int d = static_cast<int>(g[0].size());
    Matrix G(d, g.size());
    for (size_t i = 0; i < g.size(); ++i) G.col(i) = vector_from_json(g[i]);
    Matrix H;
    if (j.contains("halfspaces")) {
      const Json& h = j.at("halfspaces");
      H.resize(h.size(), d);
      for (size_t i = 0; i < h.size(); ++i)
        H.row(i) = vector_from_json(h[i]).transpose();
    }
    return std::make_shared<Cone>(Cone::polyhedral(G, H));
  }
  if (type == "centred")
    return std::make_shared<Cone>(Cone::centred(
        vector_from_json(j.at("u")), vector_from_json(j.at("u_prime"))));
  if (type == "psd")
    return std::make_shared<Cone>(Cone::psd(j.at("n").get<int>()));
  if (type == "sliced") {
    auto base = cone_from_json(j.at("base"));
    return std::make_shared<Cone>(
        Cone::sliced(*base, vector_from_json(j.at("phi"))));
  }
  throw ConfigError("cone: unknown type '" + type + "'");
}

Json norm_to_json(const NormSpec& norm) {
  Json j;
  j["type"] = norm.kind_name();
  switch (norm.kind()) {
    case NormSpec::Kind::weighted_l1:
      j["weights"] = vector_to_json(norm.weights());
      break;
    case NormSpec::Kind::trace:
      j["n"] = norm.trace_side();
      break;
    case NormSpec::Kind::centred_max:
      j["u"] = vector_to_json(norm.centre_u());
      j["u_prime"] = vector_to_json(norm.centre_u_prime());
      break;
    case NormSpec::Kind::psi_base:
      j["psi"] = vector_to_json(norm.psi());
      break;
    default:
      break;
  }
  return j;
}

NormSpec norm_from_json(const Json& j, const Cone& cone) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "l1") return NormSpec::l1();
  if (type == "l2") return NormSpec::l2();
  if (type == "linf") return NormSpec::linf();
  if (type == "weighted_l1")
    return NormSpec::weighted_l1(vector_from_json(j.at("weights")));
  if (type == "trace") return NormSpec::trace(j.at("n").get<int>());
  if (type == "centred_max")
    return NormSpec::centred_max(vector_from_json(j.at("u")),
                                 vector_from_json(j.at("u_prime")));
  if (type == "psi_base_norm")
    return NormSpec::psi_base(vector_from_json(j.at("psi")), cone);
  throw ConfigError("norm: unknown type '" + type + "'");
}

Json semigroup_to_json(const Semigroup& sg) {
  Json j;
  j["label"] = sg.label;
  j["kind"] = sg.is_discrete() ? "discrete" : "continuous";
  j["matrix"] = matrix_to_json(sg.matrix);
  return j;
}

Json domination_report_to_json(const DominationReport& r) {
  auto verdict_name = [](DominationReport::Verdict v) {
    switch (v) {
      case DominationReport::Verdict::dominated: return "dominated";
      case DominationReport::Verdict::not_dominated: return "not-dominated";
      default: return "inconclusive";
    }
  };
  Json j;
  Json samples = Json::array();
  for (auto& [t, e] : r.error_samples) samples.push_back(Json::array({t, e}));
  j["error_samples"] = samples;
  j["sup_tail"] = r.sup_tail;
  j["trend"] = r.trend;
  j["verdict"] = verdict_name(r.verdict);
  if (r.reverse_verdict) {
    j["reverse_verdict"] = verdict_name(*r.reverse_verdict);
    j["equivalent"] = r.equivalent();
  }
  return j;
}

Json pipeline_report_to_json(const ConvergencePipelineReport& r) {
  Json j;
  j["succeeded"] = r.succeeded;
  j["renormed"] = r.renormed;
  if (r.psi) j["psi"] = vector_to_json(*r.psi);
  j["markov_defect"] = r.markov_defect;
  if (r.limit) j["limit"] = matrix_to_json(*r.limit);
  j["limit_rank"] = r.limit_rank;
  j["gamma"] = r.gamma;
  j["beta"] = r.beta;
  j["limit_gap"] = r.limit_gap;
  j["certificate_kind"] = r.certificate_kind;
  Json stages = Json::array();
  for (auto& s : r.stages)
    stages.push_back(Json{{"stage", s.stage}, {"ok", s.ok}, {"message", s.message}});
  j["stages"] = stages;
  return j;
}

// ---------------------------------------------------------------------------
// config parsing and validation
// ---------------------------------------------------------------------------

ScenarioConfig config_from_json(const Json& j) {
  std::vector<std::string> errors;
  ScenarioConfig cfg;
  cfg.raw = j;
  if (!j.contains("name") || !j["name"].is_string())
    errors.push_back("missing scenario name");
  else
    cfg.name = j["name"].get<std::string>();

  if (!j.contains("cone")) {
    errors.push_back("missing cone");
  } else {
    try {
      cfg.cone = cone_from_json(j["cone"]);
    } catch (const Error& e) {
      errors.push_back(std::string("cone: ") + e.what());
    }
  }
  if (cfg.cone) {
    if (!j.contains("norm")) {
      errors.push_back("missing norm");
    } else {
      try {
        cfg.norm = norm_from_json(j["norm"], *cfg.cone);
      } catch (const Error& e) {
        errors.push_back(std::string("norm: ") + e.what());
      }
    }
    if (j.contains("dplus_norm")) {
      try {
        cfg.dplus_norm = norm_from_json(j["dplus_norm"], *cfg.cone);
      } catch (const Error& e) {
        errors.push_back(std::string("dplus_norm: ") + e.what());
      }
    }
  }
  if (j.contains("semigroups")) {
    for (const auto& sj : j["semigroups"]) {
      try {
        Matrix m = matrix_from_json(sj.at("matrix"));
        if (m.rows() != m.cols())
          throw ConfigError("semigroup matrix must be square");
        if (cfg.cone && m.rows() != cfg.cone->dim())
          throw ConfigError(
              "semigroup matrix is " + std::to_string(m.rows()) + "x" +
              std::to_string(m.cols()) + " but the cone has dimension " +
              std::to_string(cfg.cone->dim()) + " (field 'matrix' of '" +
              sj.value("label", "?") + "')");
        const std::string kind = sj.value("kind", "discrete");
        Semigroup sg = kind == "continuous"
                           ? Semigroup::continuous(m, cfg.cone,
                                                   sj.value("label", ""))
                           : Semigroup::discrete(m, cfg.cone,
                                                 sj.value("label", ""));
        cfg.semigroups.push_back(std::move(sg));
      } catch (const Error& e) {
        errors.push_back(std::string("semigroup: ") + e.what());
      }
    }
  }
  if (j.contains("checks")) {
    for (const auto& cj : j["checks"]) {
      CheckSpec cs;
      if (cj.is_string()) {
        cs.name = cj.get<std::string>();
      } else {
        cs.name = cj.value("name", "");
        cs.tol = cj.value("tol", 1e-6);
        if (cj.contains("params")) cs.params = cj["params"];
      }
      if (cs.name.empty()) errors.push_back("check without a name");
      cfg.checks.push_back(std::move(cs));
    }
  }
  cfg.horizon = j.value("horizon", 256.0);
  if (j.contains("window")) {
    if (!j["window"].is_array() || j["window"].size() != 2)
      errors.push_back("window must be [t0, t1]");
    else {
      cfg.window = {j["window"][0].get<double>(), j["window"][1].get<double>()};
      if (!(cfg.window.second > cfg.window.first))
        errors.push_back("window must satisfy t1 > t0");
    }
  } else {
    cfg.window = {1.0, cfg.horizon};
  }
  cfg.seed = j.value("seed", 1ULL);
  const bool needs_seed = !cfg.checks.empty();
  if (needs_seed && !j.contains("seed"))
    cfg.raw["seed"] = cfg.seed;  // seed is part of the digest either way

  if (!errors.empty()) {
    std::string msg = "config validation failed:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  if (is_builtin_scenario(path)) return builtin_scenario(path);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// builtin scenarios
// ---------------------------------------------------------------------------

namespace {

Json doubly_stochastic_json(double alpha, double beta) {
  Json j;
  j["name"] = "doubly-stochastic";
  j["cone"] = {{"type", "orthant"}, {"dim", 2}};
  j["norm"] = {{"type", "l1"}};
  j["semigroups"] = Json::array(
      {Json{{"label", "S_alpha"},
            {"kind", "continuous"},
            {"matrix", matrix_to_json(alpha * (Matrix(2, 2) << -1, 1, 1, -1)
                                                  .finished())}},
       Json{{"label", "S_beta"},
            {"kind", "continuous"},
            {"matrix", matrix_to_json(beta * (Matrix(2, 2) << -1, 1, 1, -1)
                                                 .finished())}}});
  j["checks"] = Json::array(
      {Json{{"name", "positivity"}, {"tol", 1e-9}},
       Json{{"name", "semigroup-law"}, {"tol", 1e-9}},
       Json{{"name", "closed-form-matrix"}, {"tol", 1e-10},
            {"params", {{"alpha", alpha}, {"beta", beta}}}},
       Json{{"name", "asymptotic-equivalence"}, {"tol", 1e-6},
            {"params", {{"window", Json::array({10.0, 50.0})}}}},
       Json{{"name", "mixed-signs-at-unit-time"}, {"tol", 1e-12}},
       Json{{"name", "strong-limit"}, {"tol", 1e-9}},
       Json{{"name", "mean-ergodic"}, {"tol", 1e-8}}});
  j["horizon"] = 64.0;
  j["window"] = Json::array({0.5, 64.0});
  j["seed"] = 1;
  return j;
}

Json doeblin_json(double delta, int d) {
  Matrix T = Matrix::Constant(d, d, delta);
  for (int i = 0; i < d; ++i) T(i, i) = 1.0 - (d - 1) * delta;
  Json j;
  j["name"] = "doeblin-chain";
  j["cone"] = {{"type", "orthant"}, {"dim", d}};
  j["norm"] = {{"type", "l1"}};
  j["semigroups"] = Json::array(
      {Json{{"label", "doeblin"}, {"kind", "discrete"},
            {"matrix", matrix_to_json(T)}}});
  j["checks"] = Json::array(
      {Json{{"name", "positivity"}, {"tol", 1e-9}},
       Json{{"name", "universal-lower-bound"}, {"tol", 1e-8},
            {"params", {{"min_beta", d * delta * (1.0 - 1e-6)}}}},
       Json{{"name", "pipeline"}, {"tol", 1e-6}},
       Json{{"name", "iteration"}, {"tol", 1e-8},
            {"params", {{"beta", d * delta}, {"eps", 1e-2}}}}});
  j["horizon"] = 256.0;
  j["window"] = Json::array({1.0, 256.0});
  j["seed"] = 2;
  return j;
}

Json swap_json() {
  Json j;
  j["name"] = "swap-matrix";
  j["cone"] = {{"type", "orthant"}, {"dim", 2}};
  j["norm"] = {{"type", "l1"}};
  j["semigroups"] = Json::array(
      {Json{{"label", "swap"}, {"kind", "discrete"},
            {"matrix", Json::array({Json::array({0.0, 1.0}),
                                    Json::array({1.0, 0.0})})}}});
  // the strong-limit and universal-lower-bound checks fail by design here;
  // the scenario demonstrates honest failure reporting
  j["checks"] = Json::array(
      {Json{{"name", "positivity"}, {"tol", 1e-9}},
       Json{{"name", "mean-ergodic"}, {"tol", 1e-8}},
       Json{{"name", "jdlg"}, {"tol", 1e-9}},
       Json{{"name", "strong-limit"}, {"tol", 1e-9}},
       Json{{"name", "universal-lower-bound"}, {"tol", 1e-8}}});
  j["horizon"] = 256.0;
  j["window"] = Json::array({1.0, 256.0});
  j["seed"] = 3;
  return j;
}

Json jordan_json() {
  Json j;
  j["name"] = "jordan-block";
  j["cone"] = {{"type", "orthant"}, {"dim", 2}};
  j["norm"] = {{"type", "l1"}};
  j["semigroups"] = Json::array(
      {Json{{"label", "jordan"}, {"kind", "discrete"},
            {"matrix", Json::array({Json::array({1.0, 1.0}),
                                    Json::array({0.0, 1.0})})}}});
  j["checks"] = Json::array(
      {Json{{"name", "positivity"}, {"tol", 1e-9}},
       Json{{"name", "cesaro-divergence"}, {"tol", 1e-8}},
       Json{{"name", "no-order-bound"}, {"tol", 1e-6},
            {"params", {{"x", Json::array({0.0, 1.0})}}}}});
  j["horizon"] = 4096.0;
  j["window"] = Json::array({1.0, 4096.0});
  j["seed"] = 4;
  return j;
}

Json centred_json(int d, double contraction, double angle) {
  Matrix T = Matrix::Zero(d, d);
  T(0, 0) = 1.0;
  // block rotation scaled by the contraction on the q-part
  for (int i = 1; i < d; ++i) T(i, i) = contraction;
  if (d >= 3) {
    T(1, 1) = contraction * std::cos(angle);
    T(1, 2) = -contraction * std::sin(angle);
    T(2, 1) = contraction * std::sin(angle);
    T(2, 2) = contraction * std::cos(angle);
  }
  Json u = Json::array(), up = Json::array();
  for (int i = 0; i < d; ++i) {
    u.push_back(i == 0 ? 1.0 : 0.0);
    up.push_back(i == 0 ? 1.0 : 0.0);
  }
  Json j;
  j["name"] = "centred-cone";
  j["cone"] = {{"type", "centred"}, {"u", u}, {"u_prime", up}};
  j["norm"] = {{"type", "centred_max"}, {"u", u}, {"u_prime", up}};
  j["dplus_norm"] = {{"type", "l2"}};
  j["semigroups"] = Json::array(
      {Json{{"label", "axis-contraction"}, {"kind", "discrete"},
            {"matrix", matrix_to_json(T)}}});
  j["checks"] = Json::array(
      {Json{{"name", "positivity"}, {"tol", 1e-9}},
       Json{{"name", "centred-additivity"}, {"tol", 1e-12}},
       Json{{"name", "markov-defect"}, {"tol", 1e-10}},
       Json{{"name", "universal-lower-bound"}, {"tol", 1e-8},
            {"params", {{"min_beta", (1.0 - contraction) * 0.99}}}},
       Json{{"name", "pipeline"}, {"tol", 1e-6}}});
  j["horizon"] = 256.0;
  j["window"] = Json::array({1.0, 256.0});
  j["seed"] = 5;
  return j;
}

Json sliced_json() {
  Json j;
  j["name"] = "sliced-AL-non-lattice";
  j["cone"] = {{"type", "sliced"},
               {"base", {{"type", "orthant"}, {"dim", 3}}},
               {"phi", Json::array({1.0, 1.0, -1.0})}};
  j["norm"] = {{"type", "l1"}};
  j["semigroups"] = Json::array();
  j["checks"] = Json::array(
      {Json{{"name", "non-lattice-certificate"}, {"tol", 1e-9},
            {"params",
             {{"a", Json::array({0.0, 0.0, 0.0})},
              {"b", Json::array({-1.0, 0.0, 1.0})},
              {"upper1", Json::array({1.0, 0.0, 1.0})},
              {"upper2", Json::array({0.0, 1.0, 1.0})}}}},
       Json{{"name", "order-interval-inclusion"}, {"tol", 1e-9},
            {"params", {{"pairs", 200}}}}});
  j["horizon"] = 1.0;
  j["window"] = Json::array({0.5, 1.0});
  j["seed"] = 6;
  return j;
}

Matrix depolarizing_matrix(double p, int n) {
  const int d = Cone::sym_coord_dim(n);
  Vector id = Cone::sym_to_coords(Matrix::Identity(n, n));
  return (1.0 - p) * Matrix::Identity(d, d) +
         (p / n) * (id * id.transpose());
}

Json depolarizing_json(double p, int n) {
  Json j;
  j["name"] = "depolarizing-channel";
  j["cone"] = {{"type", "psd"}, {"n", n}};
  j["norm"] = {{"type", "trace"}, {"n", n}};
  j["semigroups"] = Json::array(
      {Json{{"label", "depolarizing"}, {"kind", "discrete"},
            {"matrix", matrix_to_json(depolarizing_matrix(p, n))}}});
  j["checks"] = Json::array(
      {Json{{"name", "positivity"}, {"tol", 1e-9}},
       Json{{"name", "universal-lower-bound"}, {"tol", 1e-8},
            {"params", {{"min_beta", p * (1.0 - 1e-6)}}}},
       Json{{"name", "pipeline"}, {"tol", 1e-6}}});
  j["horizon"] = 256.0;
  j["window"] = Json::array({1.0, 256.0});
  j["seed"] = 7;
  return j;
}

Matrix cyclic_mix_matrix(double p, int d) {
  Matrix shift = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) shift((i + 1) % d, i) = 1.0;
  Matrix ones = Matrix::Constant(d, d, 1.0 / d);
  return (1.0 - p) * shift + p * ones;
}

Json mean_bound_json(const std::string& name, double p, int d) {
  Json j;
  j["name"] = name;
  j["cone"] = {{"type", "orthant"}, {"dim", d}};
  j["norm"] = {{"type", "l1"}};
  j["semigroups"] = Json::array(
      {Json{{"label", "cyclic-mix"}, {"kind", "discrete"},
            {"matrix", matrix_to_json(cyclic_mix_matrix(p, d))}}});
  j["checks"] = Json::array(
      {Json{{"name", "positivity"}, {"tol", 1e-9}},
       Json{{"name", "universal-mean-lower-bound"}, {"tol", 1e-8},
            {"params", {{"window", Json::array({64.0, 1048576.0})}}}},
       Json{{"name", "no-universal-lower-bound"}, {"tol", 1e-8}},
       Json{{"name", "mean-ergodic-rank-one"}, {"tol", 1e-8}},
       Json{{"name", "dual-fixed-space"}, {"tol", 1e-6}}});
  j["horizon"] = 1048576.0;
  j["window"] = Json::array({1.0, 1024.0});
  j["seed"] = 8;
  return j;
}

Json dominating_json(double delta, int d, double eps) {
  Matrix T = Matrix::Constant(d, d, delta);
  for (int i = 0; i < d; ++i) T(i, i) = 1.0 - (d - 1) * delta;
  Matrix P = Matrix::Constant(d, d, 1.0 / d);  // pi (x) one for uniform pi
  Matrix S = (1.0 - eps) * T + eps * P;
  Json j;
  j["name"] = "dominating-converges";
  j["cone"] = {{"type", "orthant"}, {"dim", d}};
  j["norm"] = {{"type", "l1"}};
  j["semigroups"] = Json::array(
      {Json{{"label", "dominated"}, {"kind", "discrete"},
            {"matrix", matrix_to_json(T)}},
       Json{{"label", "dominating"}, {"kind", "discrete"},
            {"matrix", matrix_to_json(S)}}});
  j["checks"] = Json::array(
      {Json{{"name", "positivity"}, {"tol", 1e-9}},
       Json{{"name", "dominating-pair"}, {"tol", 1e-7}}});
  j["horizon"] = 65536.0;
  j["window"] = Json::array({1.0, 65536.0});
  j["seed"] = 9;
  return j;
}

Json guard_json() {
  // swap block plus a fixed coordinate; the supplied family h_f = f_3 e_3
  // has inf ||h_f|| = 0 and the pipeline must refuse it
  Json j;
  j["name"] = "scaled-bounds-counterexample-guard";
  j["cone"] = {{"type", "orthant"}, {"dim", 3}};
  j["norm"] = {{"type", "l1"}};
  j["semigroups"] = Json::array(
      {Json{{"label", "swap-plus-fixed"}, {"kind", "discrete"},
            {"matrix", Json::array({Json::array({0.0, 1.0, 0.0}),
                                    Json::array({1.0, 0.0, 0.0}),
                                    Json::array({0.0, 0.0, 1.0})})}}});
  j["checks"] = Json::array(
      {Json{{"name", "positivity"}, {"tol", 1e-9}},
       Json{{"name", "guard-no-certificate"}, {"tol", 1e-6}}});
  j["horizon"] = 256.0;
  j["window"] = Json::array({1.0, 256.0});
  j["seed"] = 10;
  return j;
}

}  // namespace

std::vector<std::string> builtin_scenarios() {
  return {"doubly-stochastic",        "doeblin-chain",
          "swap-matrix",              "jordan-block",
          "centred-cone",             "sliced-AL-non-lattice",
          "depolarizing-channel",     "mean-lower-bound-only",
          "cyclic-shift",             "dominating-converges",
          "scaled-bounds-counterexample-guard"};
}

bool is_builtin_scenario(const std::string& name) {
  for (const auto& s : builtin_scenarios())
    if (s == name) return true;
  return false;
}

ScenarioConfig builtin_scenario(const std::string& name, const Json& overrides) {
  auto get = [&](const std::string& key, double dflt) {
    return overrides.contains(key) ? overrides[key].get<double>() : dflt;
  };
  Json j;
  if (name == "doubly-stochastic")
    j = doubly_stochastic_json(get("alpha", 1.0), get("beta", 2.0));
  else if (name == "doeblin-chain")
    j = doeblin_json(get("delta", 0.1), static_cast<int>(get("d", 3)));
  else if (name == "swap-matrix")
    j = swap_json();
  else if (name == "jordan-block")
    j = jordan_json();
  else if (name == "centred-cone")
    j = centred_json(static_cast<int>(get("d", 3)), get("contraction", 0.6),
                     get("angle", 0.7));
  else if (name == "sliced-AL-non-lattice")
    j = sliced_json();
  else if (name == "depolarizing-channel")
    j = depolarizing_json(get("p", 0.3), static_cast<int>(get("n", 2)));
  else if (name == "mean-lower-bound-only")
    j = mean_bound_json(name, get("p", 0.2), static_cast<int>(get("d", 3)));
  else if (name == "cyclic-shift")
    j = mean_bound_json(name, get("p", 0.0), static_cast<int>(get("d", 3)));
  else if (name == "dominating-converges")
    j = dominating_json(get("delta", 0.1), static_cast<int>(get("d", 3)),
                        get("epsilon", 0.3));
  else if (name == "scaled-bounds-counterexample-guard")
    j = guard_json();
  else
    throw ConfigError("unknown builtin scenario: " + name);
  for (auto& [key, value] : overrides.items())
    if (key == "horizon" || key == "seed") j[key] = value;
  if (overrides.contains("window")) j["window"] = overrides["window"];
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// checks
// ---------------------------------------------------------------------------

namespace {

struct CheckContext {
  const ScenarioConfig& cfg;
  const CheckSpec& spec;
  RunReport& report;
};

using CheckFn = std::function<CheckVerdict(CheckContext&)>;

const Semigroup& primary_sg(const CheckContext& ctx) {
  if (ctx.cfg.semigroups.empty())
    throw PreconditionViolation("check needs a semigroup");
  return ctx.cfg.semigroups.front();
}

CheckVerdict make_verdict(const CheckContext& ctx, bool pass, double metric,
                          const std::string& detail) {
  return {ctx.spec.name, pass ? "pass" : "fail", metric, ctx.spec.tol, detail};
}

std::pair<double, double> check_window(const CheckContext& ctx) {
  if (ctx.spec.params.contains("window"))
    return {ctx.spec.params["window"][0].get<double>(),
            ctx.spec.params["window"][1].get<double>()};
  return ctx.cfg.window;
}

CheckVerdict check_positivity(CheckContext& ctx) {
  bool all = true;
  std::string detail;
  for (const auto& sg : ctx.cfg.semigroups) {
    auto w = positivity_check(sg, {}, ctx.spec.tol);
    if (!w.positive) {
      all = false;
      detail = sg.label + ": " + w.detail;
    }
  }
  return make_verdict(ctx, all, all ? 0.0 : 1.0, detail);
}

CheckVerdict check_semigroup_law(CheckContext& ctx) {
  Rng rng(ctx.cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 8.0);
  double worst = 0.0;
  for (const auto& sg : ctx.cfg.semigroups) {
    for (int k = 0; k < 20; ++k) {
      double s = unif(rng), t = unif(rng);
      if (sg.is_discrete()) {
        s = std::floor(s);
        t = std::floor(t);
      }
      Matrix lhs = evaluate(sg, s + t);
      Matrix rhs = evaluate(sg, s) * evaluate(sg, t);
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  return make_verdict(ctx, worst < ctx.spec.tol, worst, "");
}

CheckVerdict check_closed_form(CheckContext& ctx) {
  // two-state heat-flow closed form: entries (1 +/- exp(-2 a t)) / 2
  double worst = 0.0;
  for (size_t s = 0; s < ctx.cfg.semigroups.size(); ++s) {
    const double a = s == 0 ? ctx.spec.params.value("alpha", 1.0)
                            : ctx.spec.params.value("beta", 2.0);
    for (double t = 0.0; t <= 50.0; t += 0.5) {
      Matrix E = evaluate(ctx.cfg.semigroups[s], t);
      const double diag = 0.5 * (1.0 + std::exp(-2.0 * a * t));
      const double off = 0.5 * (1.0 - std::exp(-2.0 * a * t));
      Matrix expect(2, 2);
      expect << diag, off, off, diag;
      worst = std::max(worst, (E - expect).cwiseAbs().maxCoeff());
    }
  }
  return make_verdict(ctx, worst < ctx.spec.tol, worst, "");
}

CheckVerdict check_equivalence(CheckContext& ctx) {
  if (ctx.cfg.semigroups.size() < 2)
    throw PreconditionViolation("asymptotic-equivalence needs two semigroups");
  auto window = check_window(ctx);
  const auto& A = ctx.cfg.semigroups[0];
  const auto& B = ctx.cfg.semigroups[1];
  double sup = 0.0;
  bool equiv = true;
  const Matrix& G = ctx.cfg.cone->generators();
  for (int i = 0; i < G.cols(); ++i) {
    Trajectory fa = Trajectory::orbit(A, G.col(i), ctx.cfg.norm, ctx.cfg.dplus_norm);
    Trajectory fb = Trajectory::orbit(B, G.col(i), ctx.cfg.norm, ctx.cfg.dplus_norm);
    DominationReport rep =
        check_asymptotic_domination(fa, fb, window, ctx.spec.tol, true);
    sup = std::max(sup, rep.sup_tail);
    for (size_t k = rep.reverse_samples.size() / 2;
         k < rep.reverse_samples.size(); ++k)
      sup = std::max(sup, rep.reverse_samples[k].second);
    if (!rep.equivalent()) equiv = false;
  }
  return make_verdict(ctx, equiv, sup, "");
}

CheckVerdict check_mixed_signs(CheckContext& ctx) {
  if (ctx.cfg.semigroups.size() < 2)
    throw PreconditionViolation("mixed-signs needs two semigroups");
  Matrix D = evaluate(ctx.cfg.semigroups[0], 1.0) -
             evaluate(ctx.cfg.semigroups[1], 1.0);
  const double tol = ctx.spec.tol;
  bool has_pos = (D.array() > tol).any();
  bool has_neg = (D.array() < -tol).any();
  bool all_nonzero = (D.array().abs() > tol).all();
  return make_verdict(ctx, has_pos && has_neg && all_nonzero,
                      D.cwiseAbs().minCoeff(),
                      "difference at t = 1 must have strictly mixed signs");
}

CheckVerdict check_mean_ergodic(CheckContext& ctx) {
  auto res = mean_ergodic_projection(primary_sg(ctx), ctx.spec.tol,
                                     std::max(1e12, ctx.cfg.horizon));
  const bool ok = res.status == ErgodicResult::Status::converged;
  return make_verdict(ctx, ok, res.cauchy_residual, res.detail);
}

CheckVerdict check_cesaro_divergence(CheckContext& ctx) {
  auto res = mean_ergodic_projection(primary_sg(ctx), ctx.spec.tol,
                                     std::max(1e12, ctx.cfg.horizon));
  const bool ok = res.status == ErgodicResult::Status::diverged;
  return make_verdict(ctx, ok, res.cauchy_residual,
                      "Cesaro means must diverge for this scenario");
}

CheckVerdict check_strong_limit(CheckContext& ctx) {
  auto rep = strong_limit(primary_sg(ctx), ctx.spec.tol, 1 << 22);
  return make_verdict(ctx, rep.converged, rep.final_residual, rep.diagnostic);
}

CheckVerdict check_jdlg(CheckContext& ctx) {
  try {
    Matrix P = jdlg_reversible_projection(primary_sg(ctx), ctx.spec.tol);
    const Matrix& T = primary_sg(ctx).matrix;
    const double res = std::max((P * P - P).cwiseAbs().maxCoeff(),
                                (T * P - P * T).cwiseAbs().maxCoeff());
    return make_verdict(ctx, res < 1e-8, res, "");
  } catch (const Unbounded& e) {
    return make_verdict(ctx, false, 1.0, e.what());
  }
}

CheckVerdict check_universal_bound(CheckContext& ctx, bool mean, bool expect) {
  auto window = check_window(ctx);
  auto cert = find_universal_lower_bound(primary_sg(ctx), ctx.cfg.norm, window,
                                         ctx.spec.tol, mean,
                                         ctx.cfg.dplus_norm);
  if (!expect)
    return make_verdict(ctx, !cert.has_value(), cert ? cert->beta : 0.0,
                        cert ? "a universal bound exists" : "");
  if (!cert) return make_verdict(ctx, false, 0.0, "no certificate found");
  ctx.report.metrics["beta"] = cert->beta;
  const double min_beta = ctx.spec.params.value("min_beta", 0.0);
  const bool ok = cert->beta >= min_beta;
  return make_verdict(ctx, ok, cert->beta,
                      ok ? "" : "beta below the expected mass");
}

CheckVerdict check_pipeline(CheckContext& ctx) {
  auto rep = converge_via_lower_bounds(primary_sg(ctx), BoundKind::universal,
                                       check_window(ctx), ctx.spec.tol,
                                       ctx.cfg.norm, std::nullopt,
                                       ctx.cfg.dplus_norm);
  ctx.report.metrics["gamma"] = rep.gamma;
  ctx.report.metrics["limit_rank"] = rep.limit_rank;
  std::string detail;
  for (auto& s : rep.stages)
    if (!s.ok) detail = s.stage + ": " + s.message;
  return make_verdict(ctx, rep.succeeded, rep.gamma, detail);
}

CheckVerdict check_mean_rank_one(CheckContext& ctx) {
  auto res = mean_ergodic_projection(primary_sg(ctx), ctx.spec.tol,
                                     std::max(1e12, ctx.cfg.horizon));
  if (res.status != ErgodicResult::Status::converged)
    return make_verdict(ctx, false, 0.0, "not mean ergodic");
  Eigen::JacobiSVD<Matrix> svd(*res.projection);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-8) ++rank;
  return make_verdict(ctx, rank == 1, rank, "");
}

CheckVerdict check_dual_fixed_space(CheckContext& ctx) {
  Semigroup dual = primary_sg(ctx);
  dual.matrix = dual.matrix.transpose().eval();
  Matrix F = fixed_space(dual, 1e-9);
  NormFunctionalResult nf = norm_functional(ctx.cfg.norm, *ctx.cfg.cone);
  if (F.cols() != 1)
    return make_verdict(ctx, false, F.cols(), "dual fixed space not a line");
  const double c = std::abs(F.col(0).normalized().dot(nf.one.normalized()));
  const double angle = std::acos(std::min(1.0, c));
  return make_verdict(ctx, angle <= ctx.spec.tol, angle, "");
}

CheckVerdict check_iteration(CheckContext& ctx) {
  const Semigroup& sg = primary_sg(ctx);
  const double beta = ctx.spec.params.value("beta", 0.3);
  const double eps = ctx.spec.params.value("eps", 1e-2);
  Matrix F = fixed_space(sg, 1e-10);
  if (F.cols() != 1)
    return make_verdict(ctx, false, F.cols(), "fixed space not a line");
  Vector pi = F.col(0);
  if (pi.sum() < 0) pi = -pi;
  pi /= ctx.cfg.norm.eval(pi);
  BoundOracle oracle = [pi, beta, &ctx](const Vector&) {
    return Vector(beta * pi);
  };
  auto trace = fixed_point_iteration(sg, ctx.cfg.norm, Vector::Unit(sg.dim(), 0),
                                     oracle, beta, eps, ctx.cfg.horizon);
  bool ok = trace.norms.back() >= 1.0 - eps - 1e-12;
  for (size_t n = 0; n < trace.norms.size() && ok; ++n) {
    const double bound = 1.0 - trace.delta * std::pow(1.0 - beta, n) - 1e-8;
    if (trace.norms[n] < bound) ok = false;
    if (n > 0 && trace.norms[n] < trace.norms[n - 1] - 1e-12) ok = false;
  }
  return make_verdict(ctx, ok, trace.norms.back(), "");
}

CheckVerdict check_markov_defect(CheckContext& ctx) {
  const Semigroup& sg = primary_sg(ctx);
  Rng rng(ctx.cfg.seed);
  auto grid = geometric_grid(sg, ctx.cfg.window.first, ctx.cfg.window.second);
  double defect = 0.0;
  for (int k = 0; k < 100; ++k) {
    Vector f = ctx.cfg.cone->sample(rng);
    const double nf = ctx.cfg.norm.eval(f);
    if (nf < 1e-12) continue;
    const double t = grid[k % grid.size()];
    defect = std::max(defect,
                      std::abs(ctx.cfg.norm.eval(evaluate(sg, t) * (f / nf)) - 1.0));
  }
  return make_verdict(ctx, defect < ctx.spec.tol, defect, "");
}

CheckVerdict check_centred_additivity(CheckContext& ctx) {
  const double defect =
      additivity_defect(ctx.cfg.norm, *ctx.cfg.cone, 1000, ctx.cfg.seed);
  return make_verdict(ctx, defect < ctx.spec.tol, defect, "");
}

CheckVerdict check_non_lattice(CheckContext& ctx) {
  const auto& p = ctx.spec.params;
  Vector a = vector_from_json(p.at("a"));
  Vector b = vector_from_json(p.at("b"));
  Vector u1 = vector_from_json(p.at("upper1"));
  Vector u2 = vector_from_json(p.at("upper2"));
  auto cert = supremum_feasibility(*ctx.cfg.cone, a, b, u1, u2);
  return make_verdict(ctx, !cert.feasible, cert.feasible ? 1.0 : 0.0,
                      cert.detail);
}

CheckVerdict check_order_interval_inclusion(CheckContext& ctx) {
  const Cone& K = *ctx.cfg.cone;
  const int pairs = ctx.spec.params.value("pairs", 200);
  Rng rng(ctx.cfg.seed);
  int tested = 0;
  bool ok = true;
  while (tested < pairs) {
    Vector x = K.sample(rng) - K.sample(rng);
    Vector k1 = K.sample(rng);
    Vector y = x + k1;
    // z in [x, y]_K by rejection: z = x + a, y - z must stay in K
    Vector a = 0.5 * k1 + 0.1 * K.sample(rng);
    Vector z = x + a;
    if (!K.contains(z - x, 1e-9) || !K.contains(y - z, 1e-9)) continue;
    ++tested;
    // K-interval membership must imply orthant-interval membership
    if ((z - x).minCoeff() < -1e-9 || (y - z).minCoeff() < -1e-9) ok = false;
  }
  return make_verdict(ctx, ok, tested, "");
}

CheckVerdict check_no_order_bound(CheckContext& ctx) {
  Vector x = vector_from_json(ctx.spec.params.at("x"));
  auto bound = asymptotic_order_bound(primary_sg(ctx), x,
                                      {ctx.cfg.window.first, ctx.cfg.horizon});
  return make_verdict(ctx, !bound.has_value(),
                      bound ? bound->residual : 0.0,
                      bound ? "an order bound exists" : "");
}

CheckVerdict check_dominating_pair(CheckContext& ctx) {
  if (ctx.cfg.semigroups.size() < 2)
    throw PreconditionViolation("dominating-pair needs two semigroups");
  const double dom_tol = ctx.spec.params.value("domination_tol", 1e-6);
  auto rep = dominating_semigroup_convergence(
      ctx.cfg.semigroups[0], ctx.cfg.semigroups[1], ctx.cfg.window, dom_tol,
      ctx.cfg.norm, ctx.cfg.dplus_norm);
  ctx.report.metrics["limit_gap"] = rep.limit_gap;
  std::string detail;
  for (auto& s : rep.stages)
    if (!s.ok) detail = s.stage + ": " + s.message;
  const bool ok = rep.succeeded && rep.limit_gap < ctx.spec.tol;
  return make_verdict(ctx, ok, rep.limit_gap, detail);
}

CheckVerdict check_guard(CheckContext& ctx) {
  const Semigroup& sg = primary_sg(ctx);
  const int d = sg.dim();
  // scaled family: h_f = <f, e_d> e_d; valid for some rays, vanishing on
  // others, so the family infimum is 0 and the certificate must be refused
  BoundOracle oracle = [d](const Vector& f) {
    return Vector(f[d - 1] * Vector::Unit(d, d - 1));
  };
  auto rep = converge_via_lower_bounds(sg, BoundKind::individual,
                                       ctx.cfg.window, ctx.spec.tol,
                                       ctx.cfg.norm, oracle,
                                       ctx.cfg.dplus_norm);
  const bool stage1_failed =
      !rep.stages.empty() && rep.stages.front().stage == "certificate" &&
      !rep.stages.front().ok;
  return make_verdict(ctx, stage1_failed && !rep.succeeded, rep.beta,
                      stage1_failed ? "certificate refused as required"
                                    : "pipeline accepted a degenerate family");
}

const std::map<std::string, CheckFn>& check_registry() {
  static const std::map<std::string, CheckFn> reg = {
      {"positivity", check_positivity},
      {"semigroup-law", check_semigroup_law},
      {"closed-form-matrix", check_closed_form},
      {"asymptotic-equivalence", check_equivalence},
      {"mixed-signs-at-unit-time", check_mixed_signs},
      {"mean-ergodic", check_mean_ergodic},
      {"cesaro-divergence", check_cesaro_divergence},
      {"strong-limit", check_strong_limit},
      {"jdlg", check_jdlg},
      {"universal-lower-bound",
       [](CheckContext& c) { return check_universal_bound(c, false, true); }},
      {"no-universal-lower-bound",
       [](CheckContext& c) { return check_universal_bound(c, false, false); }},
      {"universal-mean-lower-bound",
       [](CheckContext& c) { return check_universal_bound(c, true, true); }},
      {"pipeline", check_pipeline},
      {"mean-ergodic-rank-one", check_mean_rank_one},
      {"dual-fixed-space", check_dual_fixed_space},
      {"iteration", check_iteration},
      {"markov-defect", check_markov_defect},
      {"centred-additivity", check_centred_additivity},
      {"non-lattice-certificate", check_non_lattice},
      {"order-interval-inclusion", check_order_interval_inclusion},
      {"no-order-bound", check_no_order_bound},
      {"dominating-pair", check_dominating_pair},
      {"guard-no-certificate", check_guard},
  };
  return reg;
}

std::string fnv1a_digest(const std::string& payload) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg) {
  RunReport report;
  report.scenario = cfg.name;
  report.version = artifact_version();
  report.input_digest =
      fnv1a_digest(cfg.raw.dump() + "#" + std::to_string(cfg.seed));
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& spec : cfg.checks) {
    CheckContext ctx{cfg, spec, report};
    auto it = check_registry().find(spec.name);
    if (it == check_registry().end()) {
      report.verdicts.push_back(
          {spec.name, "fail", 0.0, spec.tol, "unknown check"});
      continue;
    }
    try {
      report.verdicts.push_back(it->second(ctx));
    } catch (const Error& e) {
      report.verdicts.push_back({spec.name, "fail", 0.0, spec.tol, e.what()});
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  report.wall_ms =
      std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count() /
      1000.0;
  return report;
}

Json run_report_to_json(const RunReport& r, bool include_volatile) {
  Json j;
  j["scenario"] = r.scenario;
  Json verdicts = Json::array();
  for (const auto& v : r.verdicts)
    verdicts.push_back(Json{{"check", v.check},
                            {"verdict", v.verdict},
                            {"metric", v.metric},
                            {"tolerance", v.tolerance},
                            {"detail", v.detail}});
  j["verdicts"] = verdicts;
  j["metrics"] = r.metrics;
  j["version"] = r.version;
  j["input_digest"] = r.input_digest;
  if (include_volatile) j["wall_ms"] = r.wall_ms;
  return j;
}

void emit_report(const RunReport& report, const std::string& format,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("emit_report: cannot write " + path);
  if (format == "json") {
    out << run_report_to_json(report).dump(2) << "\n";
  } else if (format == "csv") {
    out << "check,verdict,metric,tolerance\n";
    for (const auto& v : report.verdicts)
      out << v.check << "," << v.verdict << "," << v.metric << ","
          << v.tolerance << "\n";
  } else {
    throw Error("emit_report: unknown format " + format);
  }
}

}  // namespace oplab
