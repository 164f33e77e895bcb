#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fluidspan/harness.hpp"
#include "json.hpp"

using namespace fluidspan;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("fluidspan_test_harness_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

RunConfig small(ModelKind kind, double delta, double t_end) {
  RunConfig c;
  c.model = kind;
  c.delta = delta;
  c.nx = c.ny = 32;
  c.t_end = t_end;
  c.particle_m = 16;
  c.emit_svg = false;
  return c;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(
      "# comment\nmodel = iie\nnx = 64\nny = 64\ndelta = 0.01  # trailing\ndelta_norm = inv_rho_minus_1_W2p\n"
      "t_end = 2.5\nseed_profile = eigen\nemit_svg = false\nC_fit = 5\n");
  CHECK(c.model == ModelKind::IIE);
  CHECK(c.nx == 64);
  CHECK(c.delta == 0.01);
  CHECK(c.delta_norm == DeltaNorm::mu_w2p);
  CHECK(c.t_end == 2.5);
  CHECK(c.seed_profile == VorticityProfile::eigen);
  CHECK_FALSE(c.emit_svg);
  CHECK(c.C_fit == 5.0);
  CHECK(c.particle_m == RunConfig{}.particle_m);

  SUBCASE("canonical text round-trips") {
    const auto d = parse_config(to_text(c));
    CHECK(to_text(d) == to_text(c));
    CHECK(config_hash(d) == config_hash(c));
    RunConfig e = d;
    e.delta = 0.02;
    CHECK(config_hash(e) != config_hash(c));
    e = d;
    e.output_dir = "elsewhere";
    CHECK(config_hash(e) == config_hash(c));
  }
  SUBCASE("errors name the offending key") {
    CHECK(config_error("model = bogus\n").find("'model'") != std::string::npos);
    CHECK(config_error("colour = red\n").find("'colour'") != std::string::npos);
    CHECK(config_error("nx = 48\n").find("'nx'") != std::string::npos);
    CHECK(config_error("delta = -1\n").find("'delta'") != std::string::npos);
    CHECK(config_error("delta = abc\n").find("'delta'") != std::string::npos);
    CHECK(config_error("t_end = -1\n").find("'t_end'") != std::string::npos);
    CHECK(config_error("seed_profile = spiral\n").find("'seed_profile'") != std::string::npos);
    CHECK(config_error("C_fit = 2\n").find("'C_fit'") != std::string::npos);
    CHECK(config_error("delta = 1\ndelta = 2\n").find("'delta'") != std::string::npos);
    CHECK(config_error("just words\n").find("line 1") != std::string::npos);
  }
}

TEST_CASE("CSV schema") {
  CHECK(csv_header() ==
        "t,M,M_measured,N,Q,Y,Z,omega_inf,omega_w1p,rho_w2p,u_inf,u_w2p,B_w2p,E_kinetic,E_model,cross_helicity,"
        "mass,momentum_x,momentum_y,detJ_err,tail_enstrophy");
  DiagnosticsRow r;
  r[0] = 0.1;
  r[3] = 2.0;
  const auto f = split(csv_line(r));
  REQUIRE(f.size() == kRunColumns.size());
  CHECK(f[0] == "0.10000000000000001");
  CHECK(f[1].empty());
  CHECK(f[3] == "2");
}

TEST_CASE("degenerate horizon writes exactly one row") {
  const auto dir = scratch("t0");
  auto c = small(ModelKind::Boussinesq, 0.1, 0.0);
  c.C_fit = 5.0;
  const auto f = cmd_run(c, dir);
  const auto l = lines(slurp(dir / "run.csv"));
  REQUIRE(l.size() == 2);
  CHECK(l[0] == csv_header());
  CHECK(split(l[1])[0] == "0");
  CHECK(f.outcome.termination == "completed");
  std::filesystem::remove_all(dir);
}

TEST_CASE("columns that do not apply stay empty") {
  const auto e = simulate(small(ModelKind::Euler, 0.0, 0.2));
  const auto m = simulate(small(ModelKind::MHD_VorticityCurrent, 0.1, 0.2));
  const auto i = simulate(small(ModelKind::IIE, 0.1, 0.2));
  auto col = [](const char* name) {
    return static_cast<std::size_t>(std::find(kRunColumns.begin(), kRunColumns.end(), std::string(name)) -
                                    kRunColumns.begin());
  };
  for (const auto& row : e.rows) {
    CHECK_FALSE(row[col("cross_helicity")]);
    CHECK_FALSE(row[col("B_w2p")]);
    CHECK_FALSE(row[col("momentum_x")]);
    CHECK(row[col("M_measured")]);
  }
  for (const auto& row : m.rows) {
    CHECK(row[col("cross_helicity")]);
    CHECK(row[col("B_w2p")]);
    CHECK_FALSE(row[col("momentum_x")]);
  }
  for (const auto& row : i.rows) {
    CHECK(row[col("momentum_x")]);
    CHECK(row[col("rho_w2p")]);
    CHECK_FALSE(row[col("B_w2p")]);
  }
  auto nop = small(ModelKind::Euler, 0.0, 0.2);
  nop.particle_m = 0;
  for (const auto& row : simulate(nop).rows) {
    CHECK_FALSE(row[col("M_measured")]);
    CHECK_FALSE(row[col("detJ_err")]);
  }
}

TEST_CASE("Euler eigenstate keeps its energy column constant") {
  auto c = small(ModelKind::Euler, 0.0, 1.0);
  c.seed_profile = VorticityProfile::eigen;
  const auto r = simulate(c);
  REQUIRE(r.rows.size() > 2);
  const double E0 = *r.rows.front()[14];
  for (const auto& row : r.rows) CHECK(std::abs(*row[14] - E0) <= 1e-8 * E0);
  // times strictly increase
  for (std::size_t k = 1; k < r.rows.size(); ++k) CHECK(*r.rows[k][0] > *r.rows[k - 1][0]);
}

TEST_CASE("identical configs give byte-identical run.csv") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  auto c = small(ModelKind::IIE, 0.1, 0.3);
  c.C_fit = 5.0;
  cmd_run(c, a);
  cmd_run(c, b);
  CHECK(slurp(a / "run.csv") == slurp(b / "run.csv"));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("run metadata and plots") {
  const auto dir = scratch("meta");
  auto c = small(ModelKind::MHD_VorticityCurrent, 0.05, 0.3);
  c.emit_svg = true;
  const auto f = cmd_run(c, dir);
  const auto meta = nlohmann::json::parse(slurp(dir / "run_meta.json"));
  CHECK(meta["version"] == kVersion);
  CHECK(meta["config_hash"] == config_hash(c));
  CHECK(meta["threads"].get<int>() >= 1);
  CHECK(meta["termination"] == "completed");
  CHECK(meta["rho0_w4p"].get<double>() > 0.0);
  CHECK(meta.contains("experiment_design_note"));
  CHECK(meta["monitor"]["C_fit"].get<double>() > std::exp(1.0));
  CHECK(meta["kato_sup"].get<double>() == doctest::Approx(f.outcome.kato_sup));
  for (const char* svg : {"growth.svg", "memory.svg", "conserved.svg", "bootstrap.svg"}) {
    const auto s = slurp(dir / svg);
    CHECK(s.rfind("<svg", 0) == 0);
    CHECK(s.find("</svg>") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("sweeps") {
  const auto dir = scratch("sweep");
  auto c = small(ModelKind::Boussinesq, 0.0, 1.0);
  SUBCASE("validation") {
    CHECK_THROWS_AS(cmd_sweep(c, {0.1, 0.01, 0.1}, dir), ConfigError);
    CHECK_THROWS_AS(cmd_sweep(c, {-0.1}, dir), ConfigError);
    CHECK_THROWS_AS(cmd_sweep(c, {}, dir), ConfigError);
    CHECK_THROWS_AS(parse_delta_list("0.1,,0.2"), ConfigError);
    CHECK(parse_delta_list("1e-1, 1e-2") == std::vector<double>{0.1, 0.01});
  }
  SUBCASE("delta = 0 is unconditional") {
    const auto r = cmd_sweep(c, {0.0}, dir);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].T_emp == "unconditional");
    const auto l = lines(slurp(dir / "sweep.csv"));
    REQUIRE(l.size() == 2);
    CHECK(split(l[1])[1] == "unconditional");
  }
  SUBCASE("members are sorted by decreasing delta and T_emp grows") {
    const auto r = cmd_sweep(c, {1e-3, 1e-1, 1e-2}, dir);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].delta == 0.1);
    CHECK(r.rows[2].delta == 1e-3);
    CHECK(sweep_monotone(r));
    CHECK(r.C_fit > std::exp(1.0));
    for (const auto& row : r.rows) CHECK(std::filesystem::exists(dir / ("delta_" + [&] {
                                                                            char b[32];
                                                                            std::snprintf(b, sizeof b, "%.6e", row.delta);
                                                                            return std::string(b);
                                                                          }()) / "run.csv"));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("sweep monotonicity treats missing windows as infinite") {
  SweepResult r;
  r.rows.resize(3);
  r.rows[0].T_emp_value = 0.5;
  r.rows[1].T_emp_value = 0.7;
  CHECK(sweep_monotone(r));
  r.rows[2].T_emp_value = 0.6;
  CHECK_FALSE(sweep_monotone(r));
  r.rows[1].T_emp_value.reset();
  CHECK_FALSE(sweep_monotone(r));
}

TEST_CASE("bounds reports") {
  BoundsRequest g;
  g.model = "generic";
  const auto b = closure_lifespan({{1.0}, {1.0}, 1.0, 1.0, 1.0});
  g.delta = std::exp(b.ln_delta0());
  auto rep = cmd_bounds(g);
  auto j = nlohmann::json::parse(rep.json);
  CHECK(j["T"][0]["T"].get<double>() == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(rep.table.find("0.69314") != std::string::npos);

  BoundsRequest m;
  m.model = "mhd";
  m.C = 1.0;
  rep = cmd_bounds(m);
  j = nlohmann::json::parse(rep.json);
  const double l10 = j["log10_delta0"].get<double>();
  CHECK(l10 < -3.6e12);
  CHECK(l10 > -3.8e12);
  CHECK(rep.table.find("-3667137") != std::string::npos);
  CHECK(j["T"].size() == 9);

  BoundsRequest bq;
  bq.model = "boussinesq";
  bq.C = std::exp(1.0);
  CHECK_THROWS_AS(cmd_bounds(bq), HypothesisError);
  bq.C = 3.0;
  bq.delta = 0.5;
  j = nlohmann::json::parse(cmd_bounds(bq).json);
  CHECK(j["T"][0]["T"].is_null());
  CHECK(j["T"][0]["domain_level"] == 1);

  BoundsRequest ic;
  ic.model = "iie-continuation";
  ic.C = 1.0;
  j = nlohmann::json::parse(cmd_bounds(ic).json);
  CHECK(j["log10_delta0_bound"].get<double>() == doctest::Approx(std::log10(2.045e-16)).epsilon(1e-3));

  BoundsRequest bad;
  bad.model = "nope";
  CHECK_THROWS_AS(cmd_bounds(bad), ConfigError);
}

TEST_CASE("verification entry points") {
  CHECK(parse_suite("fast") == Suite::fast);
  CHECK(parse_suite("full") == Suite::full);
  CHECK_THROWS_AS(parse_suite("quick"), ConfigError);
  std::vector<std::string> seen;
  const auto r = run_acceptance(Suite::fast, [&](const CriterionResult& c) { seen.push_back(c.name); },
                                {"exact_constants", "elliptic"});
  REQUIRE(r.size() == 2);
  CHECK(seen == std::vector<std::string>{"exact_constants", "elliptic"});
  for (const auto& c : r) {
    CAPTURE(format_result(c));
    CHECK(c.passed);
  }
  CHECK(format_result(r[0]).rfind("PASS  exact_constants", 0) == 0);
}
