#include "fluidspan/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "fluidspan/fft.hpp"
#include "fluidspan/kernels.hpp"
#include "json.hpp"

namespace fluidspan {

namespace {

using json = nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(d);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

DeltaNorm parse_norm_value(const std::string& v) {
  // long names are accepted as synonyms of the short ones
  static const std::map<std::string, DeltaNorm> alias{{"rho_minus_1_W2p", DeltaNorm::rho_w2p},
                                                      {"inv_rho_minus_1_W2p", DeltaNorm::mu_w2p},
                                                      {"rho_minus_1_W3p", DeltaNorm::rho_w3p}};
  if (auto it = alias.find(v); it != alias.end()) return it->second;
  return parse_delta_norm(v);
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void validate(const RunConfig& c) {
  auto bad = [](const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  if (!is_pow2(c.nx) || c.nx < 8) bad("nx", "must be a power of two >= 8");
  if (!is_pow2(c.ny) || c.ny < 8) bad("ny", "must be a power of two >= 8");
  if (!(c.p > 2.0)) bad("p", "must exceed 2");
  if (!(c.delta >= 0.0)) bad("delta", "must be >= 0");
  if (!(c.t_end >= 0.0)) bad("t_end", "must be >= 0");
  if (!(c.dt_max > 0.0)) bad("dt_max", "must be positive");
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) bad("cfl", "must lie in (0, 1]");
  if (c.particle_m < 0 || (c.particle_m > 0 && c.particle_m < 8)) bad("particle_m", "must be 0 or >= 8");
  if (!(c.C_M > 0.0)) bad("C_M", "must be positive");
  if (!(c.C_N > 0.0)) bad("C_N", "must be positive");
  if (!(c.dealias > 0.0 && c.dealias <= 1.0)) bad("dealias", "must lie in (0, 1]");
  if (!(c.elliptic_tol > 0.0)) bad("elliptic_tol", "must be positive");
  if (c.C_fit && !(*c.C_fit > std::exp(1.0))) bad("C_fit", "must exceed e");
  if (c.output_dir.empty()) bad("output_dir", "must not be empty");
}

ModelOptions model_options(const RunConfig& c) {
  ModelOptions o;
  o.cfl = c.cfl;
  o.elliptic.tol = c.elliptic_tol;
  return o;
}

enum Col : std::size_t {
  cT, cM, cMmeas, cN, cQ, cY, cZ, cWinf, cWw1p, cRhow2p, cUinf, cUw2p, cBw2p, cEkin, cEmod, cCross, cMass, cMomx,
  cMomy, cDetJ, cTail
};
static_assert(cTail + 1 == kRunColumns.size());

DiagnosticsRow make_row(const StretchingSample& s, const ConservedQuantities& q, double tail) {
  DiagnosticsRow r;
  r[cT] = s.t;
  r[cM] = s.M;
  r[cMmeas] = s.M_measured;
  r[cN] = s.N;
  r[cQ] = s.Q;
  r[cY] = s.Y;
  r[cZ] = s.Z;
  r[cWinf] = s.omega_inf;
  r[cWw1p] = s.omega_w1p;
  r[cRhow2p] = s.rho_w2p;
  r[cUinf] = s.u_inf;
  r[cUw2p] = s.u_w2p;
  r[cBw2p] = s.B_w2p;
  r[cEkin] = q.E_kinetic;
  r[cEmod] = q.E_model;
  r[cCross] = q.cross_helicity;
  r[cMass] = q.mass;
  r[cMomx] = q.momentum_x;
  r[cMomy] = q.momentum_y;
  r[cDetJ] = s.detJ_err;
  r[cTail] = tail;
  return r;
}

bool row_finite(const DiagnosticsRow& r) {
  return std::all_of(r.begin(), r.end(), [](const auto& v) { return !v || std::isfinite(*v); });
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// ---- SVG ---------------------------------------------------------------------

struct Series {
  std::string label;
  std::vector<double> x, y;
};

const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

// Minimal line plot. With log_y non-positive values are dropped.
std::string svg_plot(const std::string& title, const std::vector<Series>& series, bool log_y) {
  const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  double x0 = logspace::kInf, x1 = -logspace::kInf, y0 = logspace::kInf, y1 = -logspace::kInf;
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (log_y && s.y[i] <= 0.0)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << title << "</text>\n";
  if (!(x0 <= x1 && y0 <= y1)) {
    o << "<text x=\"" << W / 2 << "\" y=\"" << H / 2 << "\" text-anchor=\"middle\">no data</text>\n</svg>\n";
    return o.str();
  }
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  char buf[64];
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    std::snprintf(buf, sizeof buf, "%.3g", xv);
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\" font-size=\"11\">" << buf
      << "</text>\n";
    std::snprintf(buf, sizeof buf, log_y ? "1e%.3g" : "%.3g", yv);
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << buf
      << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">t</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = kColours[k % std::size(kColours)];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (log_y && s.y[i] <= 0.0)) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(ty(s.y[i])));
      o << buf;
    }
    o << "\"/>\n<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 15 * k << "\" fill=\"" << col
      << "\" font-size=\"12\">" << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

Series column(const std::vector<DiagnosticsRow>& rows, std::size_t c, const std::string& label) {
  Series s{label, {}, {}};
  for (const auto& r : rows)
    if (r[c]) {
      s.x.push_back(*r[cT]);
      s.y.push_back(*r[c]);
    }
  return s;
}

Series drift(const std::vector<DiagnosticsRow>& rows, std::size_t c, const std::string& label) {
  Series s = column(rows, c, label);
  if (s.y.empty()) return s;
  const double ref = s.y.front();
  const double scale = std::abs(ref) > 0.0 ? std::abs(ref) : 1.0;
  for (auto& v : s.y) v = std::abs(v - ref) / scale;
  return s;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw Error("cannot write " + p.string());
  f << text;
}

void write_plots(const std::filesystem::path& dir, const RunOutcome& r, const std::optional<MonitorReport>& mon) {
  const auto& rows = r.rows;
  write_file(dir / "growth.svg",
             svg_plot("stretching factors",
                      {column(rows, cM, "M"), column(rows, cN, "N"), column(rows, cMmeas, "M_measured")}, true));
  write_file(dir / "memory.svg",
             svg_plot("memory terms", {column(rows, cQ, "Q"), column(rows, cY, "Y"), column(rows, cZ, "Z")}, true));
  std::vector<Series> cons{drift(rows, cEmod, "E_model"), drift(rows, cCross, "cross_helicity"),
                           drift(rows, cMass, "mass")};
  std::erase_if(cons, [](const Series& s) { return s.y.empty(); });
  write_file(dir / "conserved.svg", svg_plot("relative drift of conserved quantities", cons, true));
  std::vector<Series> margins;
  if (mon)
    for (const auto& c : mon->components) {
      Series s{c.name + " / " + fmt17(c.threshold).substr(0, 6), mon->t, c.values};
      for (auto& v : s.y) v /= c.threshold;
      margins.push_back(std::move(s));
    }
  write_file(dir / "bootstrap.svg", svg_plot("hypothesis components relative to their thresholds", margins, false));
}

json config_json(const RunConfig& c) {
  json j;
  std::istringstream in(to_text(c));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    j[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return j;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

// ---- config --------------------------------------------------------------------

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    if (seen.count(key)) throw ConfigError("config key '" + key + "' given twice");
    seen[key] = lineno;
    try {
      if (key == "model") c.model = parse_model_kind(v);
      else if (key == "nx") c.nx = parse_int(key, v);
      else if (key == "ny") c.ny = parse_int(key, v);
      else if (key == "p") c.p = parse_real(key, v);
      else if (key == "delta") c.delta = parse_real(key, v);
      else if (key == "delta_norm") c.delta_norm = v == "default" ? std::nullopt : std::optional(parse_norm_value(v));
      else if (key == "t_end") c.t_end = parse_real(key, v);
      else if (key == "dt_max") c.dt_max = parse_real(key, v);
      else if (key == "cfl") c.cfl = parse_real(key, v);
      else if (key == "particle_m") c.particle_m = parse_int(key, v);
      else if (key == "seed_profile") c.seed_profile = parse_profile(v);
      else if (key == "output_dir") c.output_dir = v;
      else if (key == "emit_svg") c.emit_svg = parse_bool(key, v);
      else if (key == "C_M") c.C_M = parse_real(key, v);
      else if (key == "C_N") c.C_N = parse_real(key, v);
      else if (key == "dealias") c.dealias = parse_real(key, v);
      else if (key == "elliptic_tol") c.elliptic_tol = parse_real(key, v);
      else if (key == "C_fit") c.C_fit = v == "auto" ? std::nullopt : std::optional(parse_real(key, v));
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const ParameterError& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const RunConfig& c) {
  std::ostringstream o;
  o << "model = " << to_string(c.model) << "\n"
    << "nx = " << c.nx << "\nny = " << c.ny << "\n"
    << "p = " << fmt17(c.p) << "\n"
    << "delta = " << fmt17(c.delta) << "\n"
    << "delta_norm = " << (c.delta_norm ? to_string(*c.delta_norm) : "default") << "\n"
    << "t_end = " << fmt17(c.t_end) << "\n"
    << "dt_max = " << fmt17(c.dt_max) << "\n"
    << "cfl = " << fmt17(c.cfl) << "\n"
    << "particle_m = " << c.particle_m << "\n"
    << "seed_profile = " << to_string(c.seed_profile) << "\n"
    << "output_dir = " << c.output_dir << "\n"
    << "emit_svg = " << (c.emit_svg ? "true" : "false") << "\n"
    << "C_M = " << fmt17(c.C_M) << "\nC_N = " << fmt17(c.C_N) << "\n"
    << "dealias = " << fmt17(c.dealias) << "\n"
    << "elliptic_tol = " << fmt17(c.elliptic_tol) << "\n"
    << "C_fit = " << (c.C_fit ? fmt17(*c.C_fit) : "auto") << "\n";
  return o.str();
}

std::string config_hash(const RunConfig& c) {
  // output_dir does not change the physics
  RunConfig k = c;
  k.output_dir = "-";
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_text(k))));
  return buf;
}

int thread_count() { return kernels::thread_count(); }

// ---- rows ------------------------------------------------------------------------

std::string csv_header() {
  std::string h;
  for (std::size_t i = 0; i < kRunColumns.size(); ++i) {
    if (i) h += ',';
    h += kRunColumns[i];
  }
  return h;
}

std::string csv_line(const DiagnosticsRow& row) {
  std::string l;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) l += ',';
    if (row[i]) l += fmt17(*row[i]);
  }
  return l;
}

// ---- simulate ----------------------------------------------------------------------

RunOutcome simulate(const RunConfig& cfg, const RowSink& sink) {
  validate(cfg);
  const auto wall0 = std::chrono::steady_clock::now();
  const ModelOptions opt = model_options(cfg);
  Grid g(cfg.nx, cfg.ny, cfg.dealias);

  RunOutcome out(cfg, make_initial_state(cfg.model, g, {cfg.seed_profile, cfg.delta, cfg.delta_norm, cfg.p}));
  out.series = StretchingSeries{cfg.model, cfg.delta, {cfg.C_M, cfg.C_N, cfg.p}};
  if (cfg.particle_m > 0) out.ensemble = FlowMapEnsemble::identity(cfg.particle_m);

  // Appends the sample for `state`; false when the diagnostics are not finite.
  auto sample = [&](const FluidState& state, const DerivedFields& d) {
    record_sample(out.series, state, d, out.ensemble ? &*out.ensemble : nullptr);
    const auto q = conserved_quantities(state, opt, cfg.p, false);
    const double tail = tail_enstrophy_fraction(d.omega);
    DiagnosticsRow row = make_row(out.series.samples.back(), q, tail);
    if (!row_finite(row)) {
      out.series.samples.pop_back();
      return false;
    }
    out.kato_sup = std::max(out.kato_sup, kato_ratio(d.omega, cfg.p));
    out.rows.push_back(row);
    out.tail_enstrophy.push_back(tail);
    if (sink) sink(row);
    return true;
  };

  FluidState state = out.initial;
  try {
    DerivedFields d_cur = derive(state, opt);
    if (!sample(state, d_cur)) throw InstabilityError("non-finite initial diagnostics");
    while (state.t < cfg.t_end - 1e-12) {
      const double dt = std::min({cfl_limit(state, d_cur, opt.cfl), cfg.dt_max, cfg.t_end - state.t});
      if (!(dt > 0.0) || !std::isfinite(dt)) throw InstabilityError("time step collapsed at t = " + fmt17(state.t));
      StepRecord rec;
      FluidState next = step(state, dt, opt, out.ensemble ? &rec : nullptr);
      std::optional<FlowMapEnsemble> ens_next;
      if (out.ensemble) {
        ens_next = advect_flow_map(*out.ensemble, rec, dt);
        ens_next->t = next.t;
      }
      DerivedFields d = derive(next, opt);
      auto ens_prev = std::move(out.ensemble);
      out.ensemble = std::move(ens_next);
      if (!sample(next, d)) {
        out.ensemble = std::move(ens_prev);
        throw InstabilityError("non-finite diagnostics at t = " + fmt17(next.t));
      }
      state = std::move(next);
      d_cur = std::move(d);
      ++out.steps;
    }
  } catch (const InstabilityError& e) {
    out.unstable = true;
    out.termination = std::string("instability: ") + e.what();
  } catch (const ConvergenceError& e) {
    out.unstable = true;
    out.termination = std::string("instability: ") + e.what();
  }
  out.final_state = state;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return out;
}

double resolve_c_fit(const RunConfig& cfg) {
  if (cfg.C_fit) return *cfg.C_fit;
  RunConfig cal = cfg;
  cal.delta = 0.0;
  cal.particle_m = 0;
  cal.emit_svg = false;
  const RunOutcome r = simulate(cal);
  return calibrate_c_fit(r.series);
}

std::optional<double> resolution_loss_time(const RunOutcome& r, double threshold) {
  for (std::size_t i = 0; i < r.tail_enstrophy.size(); ++i)
    if (r.tail_enstrophy[i] > threshold) return *r.rows[i][cT];
  return std::nullopt;
}

// ---- cmd_run ------------------------------------------------------------------------

RunFiles cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  validate(cfg);
  std::filesystem::create_directories(out_dir);

  std::FILE* csv = std::fopen((out_dir / "run.csv").c_str(), "w");
  if (!csv) throw Error("cannot write " + (out_dir / "run.csv").string());
  std::fprintf(csv, "%s\n", csv_header().c_str());
  std::fflush(csv);
  // One write and one flush per row so a killed run leaves whole lines only.
  auto sink = [csv](const DiagnosticsRow& row) {
    const std::string l = csv_line(row) + "\n";
    std::fwrite(l.data(), 1, l.size(), csv);
    std::fflush(csv);
  };
  std::optional<RunOutcome> sim;
  try {
    sim.emplace(simulate(cfg, sink));
  } catch (...) {
    std::fclose(csv);
    throw;
  }
  std::fclose(csv);
  RunFiles files(std::move(*sim));
  files.dir = out_dir;

  const RunOutcome& r = files.outcome;
  json meta;
  meta["version"] = kVersion;
  meta["config"] = config_json(cfg);
  meta["config_hash"] = config_hash(cfg);
  meta["threads"] = thread_count();
  meta["termination"] = r.termination;
  meta["steps"] = r.steps;
  meta["t_final"] = r.final_state.t;
  meta["wall_seconds"] = r.wall_seconds;
  meta["kato_sup"] = r.kato_sup;
  meta["T_resolution"] = opt_json(resolution_loss_time(r));
  meta["experiment_design_note"] =
      "grid size, horizon, delta and seed profile are choices of this configuration; "
      "there is no reference experiment to reproduce";
  if (is_mhd(cfg.model)) {
    // sobolev_norm stops at order 3; add the fourth-order derivatives here
    double n = sobolev_norm(r.initial.rho, 3, cfg.p);
    for (int a = 0; a <= 4; ++a) n += lp_norm(derivative(r.initial.rho, a, 4 - a), cfg.p);
    meta["rho0_w4p"] = n;
    meta["rho0_w4p_within_100"] = n <= 100.0;
  }
  if (cfg.model != ModelKind::Euler && cfg.delta > 0.0) {
    files.C_fit = resolve_c_fit(cfg);
    files.monitor = bootstrap_monitor(r.series, cfg.model, cfg.delta, files.C_fit);
  } else if (cfg.model != ModelKind::Euler) {
    files.C_fit = cfg.C_fit.value_or(calibrate_c_fit(r.series));
    files.monitor = bootstrap_monitor(r.series, cfg.model, 0.0, files.C_fit);
  }
  if (files.monitor) {
    const auto& m = *files.monitor;
    json mj;
    mj["C_fit"] = files.C_fit;
    mj["C_fit_source"] = cfg.C_fit ? "config" : "calibrated on a delta = 0 run";
    mj["T_emp"] = m.T_emp_string();
    mj["unconditional"] = m.unconditional;
    json comps = json::array();
    for (const auto& c : m.components) {
      json cj;
      cj["name"] = c.name;
      cj["threshold"] = c.threshold;
      cj["first_violation"] = opt_json(c.first_violation);
      cj["max_value"] = c.values.empty() ? 0.0 : *std::max_element(c.values.begin(), c.values.end());
      comps.push_back(cj);
    }
    mj["components"] = comps;
    meta["monitor"] = mj;
  }
  write_file(out_dir / "run_meta.json", meta.dump(2) + "\n");
  if (cfg.emit_svg) write_plots(out_dir, r, files.monitor);
  return files;
}

// ---- sweep ---------------------------------------------------------------------------

std::vector<double> parse_delta_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("--deltas: empty entry");
    out.push_back(parse_real("deltas", item));
  }
  if (out.empty()) throw ConfigError("--deltas: no values");
  return out;
}

SweepResult cmd_sweep(const RunConfig& base, std::vector<double> deltas, const std::filesystem::path& out_dir) {
  validate(base);
  if (deltas.empty()) throw ConfigError("sweep: empty delta list");
  for (double d : deltas)
    if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("sweep: delta must be finite and >= 0, got " + fmt17(d));
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  if (std::adjacent_find(deltas.begin(), deltas.end()) != deltas.end())
    throw ConfigError("sweep: duplicate delta values");

  std::filesystem::create_directories(out_dir);
  SweepResult res;
  res.C_fit = resolve_c_fit(base);
  res.rows.resize(deltas.size());

  std::optional<LifespanBound> theory;
  std::string theory_note;
  try {
    theory = lifespan_for_model(base.model, res.C_fit);
  } catch (const Error& e) {
    theory_note = e.what();
  }

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= deltas.size()) return;
      {
        std::lock_guard lk(err_mu);
        if (first_error) return;
      }
      try {
        RunConfig c = base;
        c.delta = deltas[i];
        c.C_fit = res.C_fit;
        char name[48];
        std::snprintf(name, sizeof name, "delta_%.6e", deltas[i]);
        const RunFiles f = cmd_run(c, out_dir / name);
        SweepRow row;
        row.delta = deltas[i];
        row.termination = f.outcome.termination;
        row.kato_sup = f.outcome.kato_sup;
        row.T_resolution = resolution_loss_time(f.outcome);
        std::optional<double> T_hyp = f.monitor ? f.monitor->T_emp : std::nullopt;
        const bool unconditional = !f.monitor || f.monitor->unconditional;
        if (T_hyp && row.T_resolution) row.T_emp_value = std::min(*T_hyp, *row.T_resolution);
        else row.T_emp_value = T_hyp ? T_hyp : row.T_resolution;
        row.T_hypothesis = T_hyp ? fmt17(*T_hyp) : (unconditional ? "unconditional" : "none");
        if (row.T_emp_value) row.T_emp = fmt17(*row.T_emp_value);
        else row.T_emp = unconditional ? "unconditional" : "none";
        if (theory && deltas[i] > 0.0) {
          try {
            row.T_theory = theory->T_ln(std::log(deltas[i]));
          } catch (const DomainError& e) {
            row.theory_note = "undefined: nested log level " + std::to_string(e.level());
          }
        } else {
          row.theory_note = deltas[i] > 0.0 ? theory_note : "delta = 0";
        }
        if (row.T_theory && f.monitor && *row.T_theory <= c.t_end)
          row.hypothesis_on_theory_window = !(T_hyp && *T_hyp <= *row.T_theory);
        res.rows[i] = row;
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const std::size_t pool = std::min<std::size_t>(deltas.size(), static_cast<std::size_t>(std::max(1, thread_count())));
  std::vector<std::thread> threads;
  for (std::size_t k = 1; k < pool; ++k) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::ofstream csv(out_dir / "sweep.csv");
  csv << "delta,T_emp,T_hypothesis,T_resolution,T_theory,termination\n";
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& r = res.rows[i];
    if (r.termination.empty()) continue;  // not run: an earlier member failed
    csv << fmt17(r.delta) << ',' << r.T_emp << ',' << r.T_hypothesis << ','
        << (r.T_resolution ? fmt17(*r.T_resolution) : "") << ','
        << (r.T_theory ? fmt17(*r.T_theory) : "") << ',' << '"' << r.termination << '"' << '\n';
  }
  csv.close();
  if (first_error) std::rethrow_exception(first_error);
  return res;
}

bool sweep_monotone(const SweepResult& r) {
  auto value = [](const SweepRow& row) { return row.T_emp_value.value_or(logspace::kInf); };
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    if (value(r.rows[i]) < value(r.rows[i - 1])) return false;
  return true;
}

// ---- bounds -----------------------------------------------------------------------------

BoundsReport cmd_bounds(const BoundsRequest& req) {
  json j;
  j["model"] = req.model;
  std::ostringstream t;
  char buf[160];
  auto line = [&](const std::string& name, const std::string& v) {
    std::snprintf(buf, sizeof buf, "%-22s %s\n", name.c_str(), v.c_str());
    t << buf;
  };
  auto num = [](double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.15g", v);
    return std::string(b);
  };

  std::optional<LifespanBound> bound;
  if (req.model == "generic") {
    if (req.kappa.size() != req.zeta.size()) throw ConfigError("--kappa and --zeta need the same length");
    bound = closure_lifespan({req.kappa, req.zeta, req.c1, req.c2, req.c3});
    j["C1"] = req.c1;
    j["C2"] = req.c2;
    j["C3"] = req.c3;
    j["kappa"] = req.kappa;
    j["zeta"] = req.zeta;
    line("C1, C2, C3", num(req.c1) + ", " + num(req.c2) + ", " + num(req.c3));
  } else if (req.model == "boussinesq") {
    const auto L = growth_constants(req.C);
    bound = boussinesq_bound(L);
    j["Lambda"] = {L.Lambda1, L.Lambda2, L.Lambda3, L.Lambda4};
    line("C", num(req.C));
    line("Lambda1..4", num(L.Lambda1) + ", " + num(L.Lambda2) + ", " + num(L.Lambda3) + ", " + num(L.Lambda4));
  } else if (req.model == "iie") {
    bound = iie_bound(req.C);
    const auto L = growth_constants(9.0 * std::exp(2.0) * req.C);
    j["Lambda"] = {L.Lambda1, L.Lambda2, L.Lambda3, L.Lambda4};
    line("C", num(req.C));
    line("Lambda1..4 (9e^2 C)",
         num(L.Lambda1) + ", " + num(L.Lambda2) + ", " + num(L.Lambda3) + ", " + num(L.Lambda4));
  } else if (req.model == "iie-continuation") {
    const auto k = iie_continuation_budget(req.C);
    bound = k.U_budget;
    j["log10_delta0_bound"] = k.log10_delta0_bound();
    line("C", num(req.C));
    line("log10 delta0 bound", num(k.log10_delta0_bound()));
  } else if (req.model == "mhd") {
    const auto k = mhd_constants(req.C);
    bound = k.bound;
    j["C1"] = k.C1;
    j["C2"] = k.C2;
    j["C3"] = k.C3;
    j["C4"] = k.C4;
    j["C4_prime"] = k.C4p;
    j["alpha"] = k.alpha0;
    j["beta"] = k.beta0;
    j["gamma"] = k.gamma0;
    j["log_f_delta0"] = k.ln_f_delta0;
    j["certificate"] = k.certificate();
    line("C", num(req.C));
    line("C1, C2", num(k.C1) + ", " + num(k.C2));
    line("C3, C4, C4'", num(k.C3) + ", " + num(k.C4) + ", " + num(k.C4p));
    line("alpha, beta, gamma", num(k.alpha0) + ", " + num(k.beta0) + ", " + num(k.gamma0));
    line("log f(delta0)", num(k.ln_f_delta0) + (k.certificate() ? "  (f < 1)" : "  (f >= 1)"));
  } else {
    throw ConfigError("unknown bounds model '" + req.model + "'");
  }

  const LifespanBound& b = *bound;
  j["C0"] = b.C0();
  j["c1"] = b.c1();
  j["c2"] = b.c2();
  j["c3"] = b.c3();
  j["ln_delta0"] = b.ln_delta0();
  j["log10_delta0"] = b.log10_delta0();
  line("C0", num(b.C0()));
  line("nested-log c1, c2, c3", num(b.c1()) + ", " + num(b.c2()) + ", " + num(b.c3()));
  line("log10 delta0", num(b.log10_delta0()));

  std::vector<double> grid;
  if (req.delta) {
    if (!(*req.delta > 0.0)) throw ConfigError("--delta must be positive");
    grid.push_back(std::log(*req.delta));
  } else {
    for (int k = 0; k <= 8; ++k) grid.push_back(b.ln_delta0() - k * logspace::kLn10);
  }
  json rows = json::array();
  t << "\n" << (req.delta ? "delta" : "log10 delta") << "                    T\n";
  for (double ld : grid) {
    json r;
    r["log10_delta"] = logspace::to_log10(ld);
    std::string Ts;
    try {
      const double T = b.T_ln(ld);
      r["T"] = T;
      Ts = num(T);
    } catch (const DomainError& e) {
      r["T"] = nullptr;
      r["domain_level"] = e.level();
      Ts = "undefined (log level " + std::to_string(e.level()) + ")";
    }
    rows.push_back(r);
    std::snprintf(buf, sizeof buf, "%-24s %s\n", req.delta ? num(*req.delta).c_str() : num(logspace::to_log10(ld)).c_str(),
                  Ts.c_str());
    t << buf;
  }
  j["T"] = rows;
  return {j.dump(2) + "\n", t.str()};
}

// ---- verify helpers ------------------------------------------------------------------------

Suite parse_suite(const std::string& s) {
  if (s == "fast") return Suite::fast;
  if (s == "full") return Suite::full;
  throw ConfigError("unknown suite '" + s + "' (expected fast or full)");
}

std::string format_result(const CriterionResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1fs", r.seconds);
  const char* tag = r.informational ? "INFO" : (r.passed ? "PASS" : "FAIL");
  return std::string(tag) + "  " + r.name + "  [" + buf + "]  " + r.detail;
}

}  // namespace fluidspan
