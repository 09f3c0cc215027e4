#include "idips/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "idips/demo.hpp"
#include "idips/errors.hpp"
#include "idips/evaluator.hpp"
#include "idips/param_solver.hpp"
#include "idips/server.hpp"
#include "idips/sim.hpp"
#include "idips/synthesis.hpp"
#include "idips/syntax.hpp"

namespace idips {

namespace {

namespace fs = std::filesystem;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A bare name refers to a bundled scenario.
Scenario resolve_scenario(const std::string& arg) {
  if (fs::exists(arg)) return load_scenario(arg);
  std::string bundled = std::string(IDIPS_DATA_DIR) + "/scenarios/" + arg + ".json";
  if (arg.find('/') == std::string::npos && fs::exists(bundled)) return load_scenario(bundled);
  throw Error(ErrorCode::IoError, "no scenario file or bundled scenario named '" + arg + "'");
}

// NAME=PATH or PATH (named after the file stem).
NamedPolicy resolve_policy(const std::string& arg) {
  auto eq = arg.find('=');
  std::string path = eq == std::string::npos ? arg : arg.substr(eq + 1);
  std::string name = eq == std::string::npos ? fs::path(path).stem().string() : arg.substr(0, eq);
  return {name, load_policy(path, social_domain())};
}

struct SynthFlags {
  SynthConfig cfg;
  void add(CLI::App* app) {
    app->add_option("--min-score", cfg.min_score, "Acceptance threshold lambda")->capture_default_str();
    app->add_option("--max-depth", cfg.max_expr_depth, "Maximum expression depth")->capture_default_str();
    app->add_option("--max-literals", cfg.max_literals, "New literals per predicate")->capture_default_str();
    app->add_option("--max-params", cfg.max_params, "Parameter limit of the exact solver")->capture_default_str();
    app->add_option("--budget", cfg.budget, "Enumeration budget")->capture_default_str();
  }
};

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string score_table(const DemoSet& demos, const Policy& p) {
  std::string out = "from,to,branch,positives,negatives,score\n";
  for (const auto& f : find_predicates(demos, p, social_domain())) {
    double s = f.scaffold() ? 0.0 : score(*f.predicate, f.from, f.pos, f.neg);
    out += f.from + "," + f.to + "," + (f.scaffold() ? std::string("-") : std::to_string(f.branch_index)) + "," +
           std::to_string(f.pos.size()) + "," + std::to_string(f.neg.size()) + "," +
           (f.scaffold() ? std::string("missing") : format_score(s)) + "\n";
  }
  out += "accuracy," + format_score(policy_accuracy(p, demos)) + "\n";
  return out;
}

// Per-branch srtr_optimize, kept only where it raises the score.
Policy optimize_policy(const DemoSet& demos, Policy p, const SynthConfig& cfg, std::ostream& log) {
  for (const auto& f : find_predicates(demos, p, social_domain())) {
    if (f.scaffold()) continue;
    double s0 = score(*f.predicate, f.from, f.pos, f.neg);
    try {
      auto r = srtr_optimize(build_instance(*f.predicate, f.from, f.pos, f.neg), SolverConfig{cfg.max_params});
      PredPtr b = apply_assignment(f.predicate, r.assignment);
      double s1 = score(*b, f.from, f.pos, f.neg);
      if (s1 > s0) p.branches[static_cast<size_t>(f.branch_index)].guard = b;
      log << f.from << " -> " << f.to << ": " << format_score(s0) << " -> " << format_score(std::max(s0, s1)) << "\n";
    } catch (const Error& ex) {
      if (ex.code() != ErrorCode::TooManyParams) throw;
      log << f.from << " -> " << f.to << ": skipped (" << ex.what() << ")\n";
    }
  }
  return p;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Interactive synthesis and repair of action-selection policies"};
  app.require_subcommand(1);
  const auto& dom = social_domain();

  // synth
  std::string demos_path, sketch_path, out_path, policy_path, report_path;
  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "Synthesize a policy from demonstrations");
  synth->add_option("--demos", demos_path, "Demonstration file")->required()->check(CLI::ExistingFile);
  synth->add_option("--sketch", sketch_path, "Initial policy or sketch")->check(CLI::ExistingFile);
  synth->add_option("-o,--out", out_path, "Output policy file (default stdout)");
  synth_flags.add(synth);

  // optimize
  auto* optimize = app.add_subcommand("optimize", "Re-fit the parameters of an existing policy");
  optimize->add_option("--policy", policy_path, "Policy file")->required()->check(CLI::ExistingFile);
  optimize->add_option("--demos", demos_path, "Demonstration file")->required()->check(CLI::ExistingFile);
  optimize->add_option("-o,--out", out_path, "Output policy file (default stdout)");
  synth_flags.add(optimize);

  // repair
  auto* repair_cmd = app.add_subcommand("repair", "Repair a policy against new demonstrations");
  repair_cmd->add_option("--policy", policy_path, "Policy file")->required()->check(CLI::ExistingFile);
  repair_cmd->add_option("--demos", demos_path, "Demonstration file")->required()->check(CLI::ExistingFile);
  repair_cmd->add_option("-o,--out", out_path, "Output policy file (default stdout)");
  repair_cmd->add_option("--report", report_path, "Write the repair report as JSON");
  synth_flags.add(repair_cmd);

  // eval
  auto* eval = app.add_subcommand("eval", "Score every transition of a policy on demonstrations");
  eval->add_option("--policy", policy_path, "Policy file")->required()->check(CLI::ExistingFile);
  eval->add_option("--demos", demos_path, "Demonstration file")->required()->check(CLI::ExistingFile);

  // check
  auto* check = app.add_subcommand("check", "Parse and type-check a policy, print it canonically");
  check->add_option("policy", policy_path, "Policy file")->required()->check(CLI::ExistingFile);

  // sim
  std::vector<std::string> scenario_args, policy_args;
  int seeds = 10;
  uint64_t seed_start = 0;
  std::string metrics_path, summary_path, trace_path;
  auto* sim = app.add_subcommand("sim", "Run policies through simulator scenarios");
  sim->add_option("--scenario", scenario_args, "Scenario file or bundled name (repeatable)")->required();
  sim->add_option("--policy", policy_args, "Policy as PATH or NAME=PATH (repeatable)")->required();
  sim->add_option("--seeds", seeds, "Trials per policy and scenario")->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--seed-start", seed_start, "First seed")->capture_default_str();
  sim->add_option("--metrics", metrics_path, "Per-trial metrics CSV (default stdout)");
  sim->add_option("--summary", summary_path, "Per policy and scenario summary CSV");
  sim->add_option("--trace", trace_path, "Write every tick of every trial as demonstrations");

  // serve
  ServerConfig server_cfg;
  auto* serve = app.add_subcommand("serve", "Serve interactive sessions over HTTP");
  serve->add_option("--host", server_cfg.host, "Bind address")->capture_default_str();
  serve->add_option("--port", server_cfg.port, "Port (0 picks one)")->capture_default_str();
  serve->add_option("--web", server_cfg.web_root, "Directory of static UI files")->check(CLI::ExistingDirectory);
  serve->add_option("--scenarios", server_cfg.scenario_dir, "Scenario directory")->capture_default_str();
  serve->add_option("--rate", server_cfg.session.step_rate_hz, "Default step rate, Hz")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    int rc = app.exit(ex);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      DemoSet demos = load_demos(demos_path, dom);
      std::optional<Policy> sketch;
      if (!sketch_path.empty()) sketch = load_policy(sketch_path, dom);
      write_text(out_path, print_policy(synthesize(demos, sketch, synth_flags.cfg, dom)));
    } else if (*optimize) {
      validate(synth_flags.cfg);
      DemoSet demos = load_demos(demos_path, dom);
      Policy p = optimize_policy(demos, load_policy(policy_path, dom), synth_flags.cfg, std::cerr);
      write_text(out_path, print_policy(p));
    } else if (*repair_cmd) {
      DemoSet demos = load_demos(demos_path, dom);
      IdipsResult r = idips(demos, load_policy(policy_path, dom), synth_flags.cfg, dom);
      write_text(out_path, print_policy(r.policy));
      if (!report_path.empty()) write_text(report_path, r.report.to_json());
      if (r.report.no_faults()) std::cerr << "no faults\n";
    } else if (*eval) {
      std::cout << score_table(load_demos(demos_path, dom), load_policy(policy_path, dom));
    } else if (*check) {
      std::cout << print_policy(parse_policy(read_text(policy_path), dom));
    } else if (*sim) {
      std::vector<Scenario> scenarios;
      for (const auto& s : scenario_args) scenarios.push_back(resolve_scenario(s));
      std::vector<NamedPolicy> policies;
      for (const auto& p : policy_args) policies.push_back(resolve_policy(p));
      std::vector<uint64_t> seed_list;
      for (int i = 0; i < seeds; ++i) seed_list.push_back(seed_start + static_cast<uint64_t>(i));
      auto rows = run_suite(scenarios, policies, seed_list);
      write_text(metrics_path, metrics_csv(rows));
      if (!summary_path.empty()) write_text(summary_path, summary_csv(summarize(rows)));
      if (!trace_path.empty()) {
        DemoSet all;
        for (const auto& p : policies) {
          for (const auto& sc : scenarios) {
            for (uint64_t seed : seed_list) {
              Trial t = run_trial(sc, p.policy, seed, true);
              all.insert(all.end(), t.trace.begin(), t.trace.end());
            }
          }
        }
        write_text(trace_path, demos_to_json(all, dom));
      }
    } else if (*serve) {
      SessionServer server(server_cfg);
      server.serve([&](int port) {
        std::cerr << "serving on http://" << server_cfg.host << ":" << port << "\n";
      });
    }
  } catch (const Error& ex) {
    std::cerr << "error: " << error_code_name(ex.code()) << ": " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace idips
