#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "fluidspan/harness.hpp"

using namespace fluidspan;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kInstability = 3, kHypothesis = 4 };

int do_run(const std::string& config, const std::string& out) {
  const RunConfig cfg = load_config(config);
  const std::filesystem::path dir = out.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(out);
  const RunFiles f = cmd_run(cfg, dir);
  const auto& r = f.outcome;
  std::printf("%s: %d steps to t = %.6g (%s), %zu rows -> %s\n", to_string(cfg.model).c_str(), r.steps,
              r.final_state.t, r.termination.c_str(), r.rows.size(), (dir / "run.csv").c_str());
  if (f.monitor) std::printf("bootstrap window T_emp = %s (C_fit = %.6g)\n", f.monitor->T_emp_string().c_str(), f.C_fit);
  std::printf("Kato ratio sup = %.4g\n", r.kato_sup);
  return r.unstable ? kInstability : kOk;
}

int do_sweep(const std::string& config, const std::string& deltas, const std::string& out) {
  const RunConfig cfg = load_config(config);
  const auto list = parse_delta_list(deltas);
  const std::filesystem::path dir = out.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(out);
  const SweepResult res = cmd_sweep(cfg, list, dir);
  std::printf("C_fit = %.6g\n%-12s %-22s %-22s %-22s %s\n", res.C_fit, "delta", "T_emp", "T_resolution", "T_theory",
              "termination");
  bool unstable = false;
  for (const auto& r : res.rows) {
    std::printf("%-12.4g %-22s %-22s %-22s %s\n", r.delta, r.T_emp.c_str(),
                r.T_resolution ? std::to_string(*r.T_resolution).c_str() : "-",
                r.T_theory ? std::to_string(*r.T_theory).c_str() : r.theory_note.c_str(), r.termination.c_str());
    unstable = unstable || r.termination != "completed";
  }
  std::printf("T_emp %s as delta decreases -> %s\n", sweep_monotone(res) ? "nondecreasing" : "NOT monotone",
              (dir / "sweep.csv").c_str());
  return unstable ? kInstability : kOk;
}

int do_bounds(const BoundsRequest& req, const std::string& out) {
  const BoundsReport rep = cmd_bounds(req);
  std::fputs(rep.table.c_str(), stdout);
  const std::filesystem::path dir = out.empty() ? std::filesystem::path(".") : std::filesystem::path(out);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "bounds.json") << rep.json;
  return kOk;
}

int do_verify(const std::string& suite_name, const std::vector<std::string>& only) {
  const Suite suite = parse_suite(suite_name);
  const auto names = acceptance_criteria();
  for (const auto& n : only)
    if (std::find(names.begin(), names.end(), n) == names.end()) throw ConfigError("unknown criterion '" + n + "'");
  std::printf("verify --suite %s (%d threads)\n", suite_name.c_str(), thread_count());
  const auto results = run_acceptance(suite, [](const CriterionResult& r) {
    std::printf("%s\n", format_result(r).c_str());
    std::fflush(stdout);
  }, only);
  int failed = 0;
  for (const auto& r : results)
    if (!r.informational && !r.passed) ++failed;
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed ? kVerifyFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral solvers and lifespan bounds for nearly homogeneous 2D fluids"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config, out, deltas, suite = "fast";
  std::vector<std::string> only;
  BoundsRequest breq;
  double delta = 0.0;

  auto* run = app.add_subcommand("run", "integrate one configuration");
  run->add_option("--config", config, "key = value config file")->required();
  run->add_option("--out", out, "output directory (default: output_dir from the config)");

  auto* sweep = app.add_subcommand("sweep", "run a configuration over several delta values");
  sweep->add_option("--config", config, "key = value config file")->required();
  sweep->add_option("--deltas", deltas, "comma-separated delta values")->required();
  sweep->add_option("--out", out, "output directory");

  auto* bounds = app.add_subcommand("bounds", "print lifespan constants and thresholds");
  bounds->add_option("--model", breq.model, "bound to evaluate")
      ->check(CLI::IsMember({"generic", "boussinesq", "iie", "iie-continuation", "mhd"}));
  bounds->add_option("--c", breq.C, "growth constant C");
  auto* dopt = bounds->add_option("--delta", delta, "threshold to evaluate (default: a log grid below delta0)");
  bounds->add_option("--c1", breq.c1, "generic closure C1");
  bounds->add_option("--c2", breq.c2, "generic closure C2");
  bounds->add_option("--c3", breq.c3, "generic closure C3");
  bounds->add_option("--kappa", breq.kappa, "generic closure kappa_j")->delimiter(',');
  bounds->add_option("--zeta", breq.zeta, "generic closure zeta_j")->delimiter(',');
  bounds->add_option("--out", out, "directory for bounds.json (default: .)");

  auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
  verify->add_option("--suite", suite, "fast (grids up to 128^2) or full (256^2)");
  verify->add_option("--only", only, "restrict to the named criteria")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return do_run(config, out);
    if (*sweep) return do_sweep(config, deltas, out);
    if (*bounds) {
      if (*dopt) breq.delta = delta;
      return do_bounds(breq, out);
    }
    if (*verify) return do_verify(suite, only);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const HypothesisError& e) {
    std::fprintf(stderr, "hypothesis violated: %s\n", e.what());
    return kHypothesis;
  } catch (const InstabilityError& e) {
    std::fprintf(stderr, "instability: %s\n", e.what());
    return kInstability;
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "invalid parameter: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kVerifyFailed;
  }
  return kOk;
}
