#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "oplab/scenario.hpp"

namespace {

int worker_pool_size() {
  if (const char* env = std::getenv("OPLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

void print_report(const oplab::RunReport& rep) {
  std::cout << "scenario " << rep.scenario << " (digest " << rep.input_digest
            << ", " << rep.wall_ms << " ms)\n";
  for (const auto& v : rep.verdicts) {
    std::cout << "  [" << v.verdict << "] " << v.check
              << "  metric=" << v.metric << " tol=" << v.tolerance;
    if (!v.detail.empty()) std::cout << "  (" << v.detail << ")";
    std::cout << "\n";
  }
}

std::string default_out_name(const std::string& scenario,
                             const std::string& format) {
  std::string stem = scenario;
  for (auto& c : stem)
    if (c == '/' || c == '\\' || c == '.') c = '_';
  return stem + "_report." + format;
}

void write_domination_csv(const std::string& path,
                          const oplab::DominationReport& rep) {
  std::ofstream out(path);
  out << "t,error_fg,error_gf\n";
  for (size_t i = 0; i < rep.error_samples.size(); ++i) {
    out << rep.error_samples[i].first << "," << rep.error_samples[i].second;
    if (i < rep.reverse_samples.size())
      out << "," << rep.reverse_samples[i].second;
    else
      out << ",";
    out << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for positive operator semigroups"};
  app.require_subcommand(1);

  std::vector<std::string> run_targets;
  double horizon = -1.0;
  double tol = -1.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_path, format = "json";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--horizon", horizon, "time horizon override");
    cmd->add_option("--tol", tol, "tolerance override for the checks");
    cmd->add_option("--seed", seed, "random seed override")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--out", out_path, "output report path");
    cmd->add_option("--format", format, "report format: json | csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  auto* run_cmd = app.add_subcommand("run", "run scenarios or config files");
  run_cmd->add_option("targets", run_targets, "builtin names or config paths")
      ->required();
  add_common(run_cmd);

  auto* list_cmd = app.add_subcommand("list", "list builtin scenarios");

  std::string dom_target;
  auto* dom_cmd = app.add_subcommand(
      "check-domination", "per-generator domination report for a two-"
                          "semigroup scenario");
  dom_cmd->add_option("scenario", dom_target, "builtin name or config path")
      ->required();
  add_common(dom_cmd);

  std::string lb_target;
  bool lb_mean = false;
  auto* lb_cmd = app.add_subcommand("check-lower-bound",
                                    "universal lower-bound search");
  lb_cmd->add_option("scenario", lb_target, "builtin name or config path")
      ->required();
  lb_cmd->add_flag("--mean", lb_mean, "search for a mean lower bound");
  add_common(lb_cmd);

  CLI11_PARSE(app, argc, argv);

  auto load = [&](const std::string& target) {
    oplab::Json overrides = oplab::Json::object();
    if (horizon > 0) overrides["horizon"] = horizon;
    if (seed_set) overrides["seed"] = seed;
    oplab::ScenarioConfig cfg =
        oplab::is_builtin_scenario(target)
            ? oplab::builtin_scenario(target, overrides)
            : oplab::load_config(target);
    if (!oplab::is_builtin_scenario(target)) {
      if (horizon > 0) cfg.horizon = horizon;
      if (seed_set) cfg.seed = seed;
    }
    if (tol > 0)
      for (auto& c : cfg.checks) c.tol = tol;
    return cfg;
  };

  try {
    if (list_cmd->parsed()) {
      for (const auto& name : oplab::builtin_scenarios())
        std::cout << name << "\n";
      return 0;
    }

    if (run_cmd->parsed()) {
      std::vector<oplab::ScenarioConfig> cfgs;
      for (const auto& t : run_targets) cfgs.push_back(load(t));
      std::vector<oplab::RunReport> reports(cfgs.size());
      const int pool = std::min<int>(worker_pool_size(),
                                     static_cast<int>(cfgs.size()));
      if (pool <= 1) {
        for (size_t i = 0; i < cfgs.size(); ++i)
          reports[i] = oplab::run_scenario(cfgs[i]);
      } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < pool; ++w)
          workers.emplace_back([&]() {
            for (size_t i = next++; i < cfgs.size(); i = next++)
              reports[i] = oplab::run_scenario(cfgs[i]);
          });
        for (auto& th : workers) th.join();
      }
      bool all_pass = true;
      for (size_t i = 0; i < reports.size(); ++i) {
        print_report(reports[i]);
        if (!reports[i].all_passed()) all_pass = false;
        const std::string path =
            out_path.empty()
                ? default_out_name(reports[i].scenario, format)
                : (reports.size() == 1 ? out_path
                                       : out_path + "." + std::to_string(i));
        oplab::emit_report(reports[i], format, path);
      }
      return all_pass ? 0 : 1;
    }

    if (dom_cmd->parsed()) {
      oplab::ScenarioConfig cfg = load(dom_target);
      if (cfg.semigroups.size() < 2) {
        std::cerr << "check-domination needs a scenario with two semigroups\n";
        return 2;
      }
      const double use_tol = tol > 0 ? tol : 1e-6;
      bool dominated = true;
      const oplab::Matrix& G = cfg.cone->generators();
      oplab::DominationReport last;
      for (int i = 0; i < G.cols(); ++i) {
        auto fa = oplab::Trajectory::orbit(cfg.semigroups[0], G.col(i),
                                           cfg.norm, cfg.dplus_norm);
        auto fb = oplab::Trajectory::orbit(cfg.semigroups[1], G.col(i),
                                           cfg.norm, cfg.dplus_norm);
        last = oplab::check_asymptotic_domination(fa, fb, cfg.window, use_tol,
                                                  true);
        std::cout << "ray " << i << ": forward sup_tail=" << last.sup_tail
                  << (last.equivalent() ? "  [equivalent]" : "") << "\n";
        if (last.verdict != oplab::DominationReport::Verdict::dominated)
          dominated = false;
      }
      if (!out_path.empty()) write_domination_csv(out_path, last);
      return dominated ? 0 : 1;
    }

    if (lb_cmd->parsed()) {
      oplab::ScenarioConfig cfg = load(lb_target);
      const double use_tol = tol > 0 ? tol : 1e-8;
      auto cert = oplab::find_universal_lower_bound(
          cfg.semigroups.at(0), cfg.norm, cfg.window, use_tol, lb_mean,
          cfg.dplus_norm);
      if (!cert) {
        std::cout << "no universal " << (lb_mean ? "mean " : "")
                  << "lower bound on the window\n";
        return 1;
      }
      std::cout << "beta = " << cert->beta << "\nh =";
      for (int i = 0; i < cert->h.size(); ++i) std::cout << " " << cert->h[i];
      std::cout << "\n";
      if (!out_path.empty()) {
        std::ofstream out(out_path);
        oplab::Json j;
        j["beta"] = cert->beta;
        j["kind"] = oplab::bound_kind_name(cert->kind);
        oplab::Json h = oplab::Json::array();
        for (int i = 0; i < cert->h.size(); ++i) h.push_back(cert->h[i]);
        j["h"] = h;
        j["residuals"] = cert->residuals;
        out << j.dump(2) << "\n";
      }
      return 0;
    }
  } catch (const oplab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
