#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mvar/rng.hpp"
#include "mvar/scenario.hpp"
#include "oracle_values.hpp"

using namespace mvar;

TEST_CASE("presets carry the benchmark parameter tables") {
  const auto t1 = preset_table1();
  CHECK(t1.market.mu == 0.05);
  CHECK(t1.market.sigma == 0.3);
  CHECK(t1.market.alpha == 0.01);
  CHECK(t1.market.beta == 0.14);
  CHECK(t1.market.rho == 0.2);
  CHECK(t1.pref.gamma == 1.0);
  CHECK(t1.pref.T == 10.0);
  CHECK(t1.pref.x0 == 1.0);
  CHECK(t1.p == 0.01);
  CHECK(t1.tau == 1.0 / 260.0);
  CHECK(t1.var_cap == 0.02);

  const auto t2 = preset_table2();
  CHECK(t2.market.mu == 0.8);
  CHECK(t2.market.sigma == 0.02);
  CHECK(t2.market.alpha == t1.market.alpha);  // only mu and sigma change
  CHECK(t2.market.beta == t1.market.beta);
  CHECK(t2.var_cap == t1.var_cap);

  CHECK(preset_by_name("table1").has_value());
  CHECK(preset_by_name("table2").has_value());
  CHECK_FALSE(preset_by_name("table3").has_value());
}

TEST_CASE("config parsing") {
  SUBCASE("key=value text with sections, comments and fractions") {
    const auto config = load_config_text(
        "# comment\n"
        "[market]\n"
        "mu = 0.07\n"
        "tau = 1/260\n"
        "nt = 11\n"
        "mode = rederived\n");
    CHECK(config.market.mu == 0.07);
    CHECK(config.tau == 1.0 / 260.0);
    CHECK(config.grid.nt == 11);
    CHECK(config.mode == ValueMode::Rederived);
    CHECK(config.market.sigma == 0.3);  // untouched defaults
  }
  SUBCASE("JSON object with the same keys") {
    const auto config = load_config_text(
        R"({"mu": 0.07, "tau": "1/260", "nx": 21, "format": "json"})");
    CHECK(config.market.mu == 0.07);
    CHECK(config.tau == 1.0 / 260.0);
    CHECK(config.grid.nx == 21);
    CHECK(config.format == "json");
  }
  SUBCASE("unknown keys are rejected with the line number") {
    CHECK_THROWS_WITH_AS(load_config_text("mu = 0.05\nmystery = 3\n"),
                         "config line 2: unknown key 'mystery'", std::runtime_error);
    CHECK_THROWS_AS(load_config_text(R"({"mystery": 3})"), std::runtime_error);
  }
  SUBCASE("invalid values are validation errors naming the field") {
    CHECK_THROWS_WITH_AS(load_config_text("rho = 1.5\n"),
                         "correlation must satisfy rho^2 < 1", std::domain_error);
    CHECK_THROWS_AS(load_config_text("nt = 1\n"), std::domain_error);
    CHECK_THROWS_AS(load_config_text("p = 0.7\n"), std::domain_error);
    CHECK_THROWS_AS(load_config_text("format = xml\n"), std::domain_error);
    CHECK_THROWS_AS(load_config_text("t_max = 99\n"), std::domain_error);
  }
  SUBCASE("malformed lines carry context") {
    CHECK_THROWS_AS(load_config_text("mu 0.05\n"), std::runtime_error);
    CHECK_THROWS_AS(load_config_text("mu = abc\n"), std::runtime_error);
  }
}

TEST_CASE("config round-trips through serialization") {
  ScenarioConfig config = preset_table2();
  config.mode = ValueMode::Rederived;
  config.format = "json";
  config.out = "surfaces.json";
  config.sim.master_seed = 918273645;
  config.grid.nt = 31;
  CHECK(load_config_text(serialize_config(config)) == config);

  // Randomized sweep over awkward floating values.
  NormalSampler rng(8);
  for (int k = 0; k < 30; ++k) {
    ScenarioConfig c = preset_table1();
    c.market.mu = 0.01 + NormalSampler::to_unit(rng.raw());
    c.market.rho = 1.9 * (NormalSampler::to_unit(rng.raw()) - 0.5);
    c.tau = 1.0 / (100.0 + 400.0 * NormalSampler::to_unit(rng.raw()));
    c.var_cap = NormalSampler::to_unit(rng.raw());
    c.pref.T = 1.0 + 20.0 * NormalSampler::to_unit(rng.raw());
    c.grid.t_max = c.pref.T;
    c.sim.dt = c.pref.T / 100.0;
    c.sim.master_seed = rng.raw();
    CHECK(load_config_text(serialize_config(c)) == c);
  }
}

TEST_CASE("run_scenario on the interval preset") {
  ScenarioConfig config = preset_table1();
  config.grid.nt = 21;
  config.grid.nx = 21;
  const auto result = run_scenario(config);
  CHECK(result.summary.diagnostics.tag == CaseTag::ClosedInterval);
  REQUIRE(result.surface.has_value());
  REQUIRE(result.summary.feasible.roots.has_value());
  CHECK(result.summary.feasible.roots->first ==
        doctest::Approx(oracle::kTable1F2).epsilon(1e-12));
  CHECK(result.summary.feasible.roots->second ==
        doctest::Approx(oracle::kTable1F1).epsilon(1e-12));

  const auto& s = *result.surface;
  CHECK(s.f_star.rows() == 21);
  CHECK(s.f_star.cols() == 21);
  // Clamped policy stays inside the interval; branch codes match the mask.
  for (int i = 0; i < 21; ++i)
    for (int j = 0; j < 21; ++j) {
      CHECK(s.f_var(i, j) >= result.summary.feasible.lower - 1e-15);
      CHECK(s.f_var(i, j) <= result.summary.feasible.upper + 1e-15);
      CHECK((s.branch(i, j) != 0) == (s.active(i, j) == 1));
      CHECK(s.v_constrained(i, j) <= s.v_unconstrained(i, j) + 1e-12);
    }
  CHECK(result.summary.active_fraction > 0.0);
  CHECK(result.summary.active_fraction < 1.0);
  REQUIRE(result.summary.inactive_window.has_value());
  CHECK(result.summary.inactive_window->x_min > 0.0);

  // Branch layer shows all three interval regimes across wealth at t = 0.
  CHECK(s.branch(0, 20) == 1);  // x = 1, lower clamp
  CHECK(s.branch(0, 9) == 0);   // x = 0.45, interior
  CHECK(s.branch(0, 4) == 2);   // x = 0.2, upper clamp
}

TEST_CASE("run_scenario on the half-line preset") {
  ScenarioConfig config = preset_table2();
  config.grid.nt = 21;
  config.grid.nx = 21;
  const auto result = run_scenario(config);
  CHECK(result.summary.diagnostics.tag == CaseTag::HalfLine);
  REQUIRE(result.surface.has_value());
  CHECK(result.summary.feasible.lower == doctest::Approx(oracle::kTable2F1).epsilon(1e-12));
  // Low wealth leaves the constraint inactive, high wealth activates it.
  CHECK(result.surface->active(0, 0) == 0);
  CHECK(result.surface->active(0, 20) == 1);
  CHECK(result.summary.active_fraction > 0.0);
  CHECK(result.summary.active_fraction < 1.0);
}

TEST_CASE("a vacuous ceiling reproduces the unconstrained policy everywhere") {
  ScenarioConfig config = preset_table1();
  config.var_cap = 1e6;
  config.grid.nt = 15;
  config.grid.nx = 15;
  const auto result = run_scenario(config);
  REQUIRE(result.surface.has_value());
  CHECK((result.surface->f_var == result.surface->f_star).all());
  CHECK((result.surface->active == 0).all());
  CHECK(result.summary.active_fraction == 0.0);
}

TEST_CASE("degenerate slope scenario surfaces carry the dedicated branch code") {
  ScenarioConfig config = preset_table1();
  config.market.mu = config.risk().N * config.market.sigma;  // N sigma = mu
  config.grid.nt = 9;
  config.grid.nx = 9;
  const auto result = run_scenario(config);
  CHECK(result.summary.diagnostics.tag == CaseTag::DegenerateHalfLine);
  REQUIRE(result.surface.has_value());
  bool saw_case1 = false;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      const int b = result.surface->branch(i, j);
      CHECK((b == 0 || b == 3));
      saw_case1 = saw_case1 || b == 3;
    }
  CHECK(saw_case1);
}

TEST_CASE("an empty feasible set yields a summary without surfaces") {
  ScenarioConfig config = preset_table1();
  config.var_cap = 0.0195;
  const auto result = run_scenario(config);
  CHECK(result.summary.diagnostics.tag == CaseTag::Empty);
  CHECK_FALSE(result.surface.has_value());
  CHECK_FALSE(result.summary.surface_computed);
  const auto j = summary_json(result.summary);
  CHECK(j.at("case") == "Empty");
}

TEST_CASE("surface export") {
  ScenarioConfig config = preset_table1();
  config.grid = {0.0, 10.0, 0.0, 1.0, 2, 2};
  const auto result = run_scenario(config);
  REQUIRE(result.surface.has_value());

  SUBCASE("csv has one header and one row per node, deterministically") {
    std::ostringstream a, b;
    export_surface_csv(*result.surface, a);
    export_surface_csv(*result.surface, b);
    CHECK(a.str() == b.str());
    std::istringstream lines(a.str());
    std::string line;
    int count = 0;
    std::getline(lines, line);
    CHECK(line == "t,x,f_star,f_var,V_unc,V_con,branch,active");
    while (std::getline(lines, line)) ++count;
    CHECK(count == 4);
  }
  SUBCASE("json carries axes and full layers") {
    std::ostringstream os;
    export_surface_json(*result.surface, os);
    const auto j = nlohmann::json::parse(os.str());
    CHECK(j.at("t").size() == 2);
    CHECK(j.at("x").size() == 2);
    CHECK(j.at("f_var").size() == 2);
    CHECK(j.at("f_var").at(0).size() == 2);
    CHECK(j.at("branch").at(1).at(1).is_number_integer());
  }
}

TEST_CASE("fast verification suite passes on both presets") {
  for (const auto& config : {preset_table1(), preset_table2()}) {
    const auto report = run_verification(config, VerifySuite::Fast);
    for (const auto& check : report.checks) {
      INFO(check.name, ": ", check.detail);
      CHECK(check.status != CheckStatus::Fail);
    }
    CHECK_FALSE(report.hard_failure());
    const auto j = verification_json(report);
    CHECK(j.at("hard_failure") == false);
  }
}

TEST_CASE("verification on an engineered empty set reports and passes") {
  ScenarioConfig config = preset_table1();
  // N sigma = mu with rho beta N = M: contradictory constraint set.
  const RiskSpec probe = config.risk();
  config.market.mu = probe.N * config.market.sigma;
  config.var_cap = config.tau * (config.market.rho * config.market.beta * probe.N -
                                 config.market.alpha);
  const auto report = run_verification(config, VerifySuite::Fast);
  CHECK_FALSE(report.hard_failure());
  bool saw_empty = false;
  int skipped = 0;
  for (const auto& check : report.checks) {
    if (check.name == "classification" && check.detail.find("Empty") != std::string::npos)
      saw_empty = true;
    if (check.status == CheckStatus::Skip) ++skipped;
  }
  CHECK(saw_empty);
  CHECK(skipped >= 3);  // feasibility-dependent suites stand down
}

TEST_CASE("export_surface reports I/O failures with the path") {
  ScenarioConfig config = preset_table1();
  config.grid = {0.0, 10.0, 0.0, 1.0, 2, 2};
  const auto result = run_scenario(config);
  REQUIRE(result.surface.has_value());
  try {
    export_surface(*result.surface, "csv", "/nonexistent_dir_zz/out.csv");
    FAIL("expected an I/O error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent_dir_zz/out.csv") != std::string::npos);
  }
  CHECK_THROWS_AS(export_surface(*result.surface, "xml", "/tmp/x.xml"), std::domain_error);
}

TEST_CASE("mode report serializes with residuals and match verdicts") {
  const auto config = preset_table1();
  SimConfig cfg{4000, 1.0 / 52.0, 5, 1024};
  const GridSpec grid{0.0, 10.0, 0.0, 1.0, 11, 11};
  const auto report = mode_discrimination_report(config.market, config.pref, cfg, grid);
  const auto j = mode_report_json(report);
  CHECK(j.at("residual_max_rederived").get<double>() < 1e-8);
  CHECK(j.at("residual_max_paper").get<double>() > 1e-4);
  CHECK(j.at("mc_paper").contains("match_4se"));
  CHECK(j.at("mc_rederived").contains("mc_se"));
  CHECK(j.at("value_paper").get<double>() > j.at("value_rederived").get<double>());
}

TEST_CASE("policy eval serializes to JSON with the documented fields") {
  const auto config = preset_table1();
  const auto eval = optimal_f_constrained(config.market, config.pref, config.risk(), 0.0,
                                          1.0, config.mode);
  const auto j = policy_eval_json(eval);
  CHECK(j.at("t") == 0.0);
  CHECK(j.at("x") == 1.0);
  CHECK(j.at("branch") == "ClampLower");
  CHECK(j.at("constraint_active") == true);
  CHECK(j.at("mode") == "paper");
  CHECK(j.at("f_var").get<double>() == doctest::Approx(oracle::kTable1F2).epsilon(1e-12));
}
