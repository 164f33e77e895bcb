#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fluidspan/bootstrap.hpp"

namespace fluidspan {

struct RunConfig {
  ModelKind model = ModelKind::Boussinesq;
  int nx = 128, ny = 128;
  double p = kDefaultP;
  double delta = 0.0;
  std::optional<DeltaNorm> delta_norm;  // model default when unset
  double t_end = 1.0;
  double dt_max = 0.05;
  double cfl = 0.5;
  int particle_m = 64;  // 0 disables the flow-map ensemble
  VorticityProfile seed_profile = VorticityProfile::standard;
  std::string output_dir = "out";
  bool emit_svg = true;
  double C_M = 1.0, C_N = 1.0;
  double dealias = 2.0 / 3.0;
  double elliptic_tol = 1e-10;
  std::optional<double> C_fit;  // calibrated on a δ = 0 run when unset
};

/// Flat `key = value` lines; '#' starts a comment. Unknown keys and bad
/// values raise ConfigError naming the key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& c);
std::string config_hash(const RunConfig& c);

inline constexpr const char* kVersion = "fluidspan 0.3.0";

/// Number of worker threads: FLUIDSPAN_THREADS if set, else the OpenMP default.
int thread_count();

// ---- diagnostics rows -------------------------------------------------------

inline constexpr std::array<const char*, 21> kRunColumns = {
    "t",          "M",          "M_measured",     "N",    "Q",          "Y",          "Z",
    "omega_inf",  "omega_w1p",  "rho_w2p",        "u_inf", "u_w2p",     "B_w2p",      "E_kinetic",
    "E_model",    "cross_helicity", "mass",       "momentum_x", "momentum_y", "detJ_err", "tail_enstrophy"};

using DiagnosticsRow = std::array<std::optional<double>, kRunColumns.size()>;

std::string csv_header();
/// %.17g per value, empty fields for columns that do not apply.
std::string csv_line(const DiagnosticsRow& row);

// ---- single runs --------------------------------------------------------------

struct RunOutcome {
  RunOutcome(RunConfig c, FluidState s0) : config(std::move(c)), initial(s0), final_state(std::move(s0)) {}

  RunConfig config;
  std::string termination = "completed";
  bool unstable = false;
  FluidState initial;
  FluidState final_state;
  StretchingSeries series;
  std::optional<FlowMapEnsemble> ensemble;
  std::vector<DiagnosticsRow> rows;
  std::vector<double> tail_enstrophy;
  double kato_sup = 0.0;
  double wall_seconds = 0.0;
  int steps = 0;
};

/// Called with each row as soon as it is computed.
using RowSink = std::function<void(const DiagnosticsRow&)>;

/// Integrates the configured model with the flow map co-advanced and one
/// diagnostics row per step. An InstabilityError ends the run early with
/// `unstable` set; rows up to the last finite step are kept.
RunOutcome simulate(const RunConfig& cfg, const RowSink& sink = {});

/// Calibrated constant for the monitor: cfg.C_fit, or a fit on the δ = 0 run.
double resolve_c_fit(const RunConfig& cfg);

/// First time the tail-enstrophy fraction exceeds the threshold, if any.
std::optional<double> resolution_loss_time(const RunOutcome& r, double threshold = 1e-6);

struct RunFiles {
  explicit RunFiles(RunOutcome r) : outcome(std::move(r)) {}

  std::filesystem::path dir;
  RunOutcome outcome;
  std::optional<MonitorReport> monitor;
  double C_fit = 0.0;
};

/// run.csv (flushed per line), run_meta.json and optional SVG plots.
RunFiles cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir);

// ---- sweeps -------------------------------------------------------------------

struct SweepRow {
  double delta = 0.0;
  std::string T_emp;         // min(T_hypothesis, T_resolution): "unconditional", "none" or a time
  std::string T_hypothesis;  // first monitor violation, same spelling
  std::optional<double> T_emp_value;
  std::optional<double> T_resolution;
  std::optional<double> T_theory;
  std::string theory_note;  // why T_theory is missing
  std::string termination;
  bool hypothesis_on_theory_window = true;
  double kato_sup = 0.0;
};

struct SweepResult {
  double C_fit = 0.0;
  std::vector<SweepRow> rows;  // δ descending
};

/// Validates the δ list (non-negative, no duplicates), runs every member in a
/// small worker pool and writes sweep.csv plus one directory per member.
SweepResult cmd_sweep(const RunConfig& base, std::vector<double> deltas, const std::filesystem::path& out_dir);
std::vector<double> parse_delta_list(const std::string& s);

/// T_emp nondecreasing as δ decreases ("none"/"unconditional" count as +∞).
bool sweep_monotone(const SweepResult& r);

// ---- bounds ---------------------------------------------------------------------

struct BoundsRequest {
  std::string model = "generic";  // generic|boussinesq|iie|iie-continuation|mhd
  double C = 3.0;
  std::optional<double> delta;
  double c1 = 1.0, c2 = 1.0, c3 = 1.0;  // generic closure
  std::vector<double> kappa{1.0}, zeta{1.0};
};

struct BoundsReport {
  std::string json;
  std::string table;
};

/// Throws HypothesisError when C is outside the model's range.
BoundsReport cmd_bounds(const BoundsRequest& req);

// ---- verification ---------------------------------------------------------------

struct CriterionResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  bool informational = false;  // printed, never fails the suite
};

enum class Suite { fast, full };
Suite parse_suite(const std::string& s);

/// Runs the acceptance criteria (all, or those named in `only`); each result
/// is also passed to `report` as it finishes.
std::vector<CriterionResult> run_acceptance(Suite suite,
                                            const std::function<void(const CriterionResult&)>& report = {},
                                            const std::vector<std::string>& only = {});
/// Names accepted by the `only` filter.
std::vector<std::string> acceptance_criteria();
std::string format_result(const CriterionResult& r);

}  // namespace fluidspan
