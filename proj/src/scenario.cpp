#include "mvar/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mvar/normal.hpp"

namespace mvar {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(std::string_view sv) {
  const auto* ws = " \t\r\n";
  const auto b = sv.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = sv.find_last_not_of(ws);
  return std::string(sv.substr(b, e - b + 1));
}

[[noreturn]] void config_error(int line, const std::string& what) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + what);
}

// Accepts plain decimals and simple fractions like 1/260.
double parse_number(const std::string& text, int line, const std::string& key) {
  const auto slash = text.find('/');
  auto to_double = [&](const std::string& part) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      config_error(line, "key '" + key + "': cannot parse number '" + part + "'");
    }
    if (used != part.size())
      config_error(line, "key '" + key + "': trailing characters in '" + part + "'");
    return v;
  };
  if (slash == std::string::npos) return to_double(text);
  const double num = to_double(trim(text.substr(0, slash)));
  const double den = to_double(trim(text.substr(slash + 1)));
  if (den == 0.0) config_error(line, "key '" + key + "': division by zero");
  return num / den;
}

std::int64_t parse_int(const std::string& text, int line, const std::string& key) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    config_error(line, "key '" + key + "': cannot parse integer '" + text + "'");
  }
  if (used != text.size())
    config_error(line, "key '" + key + "': trailing characters in '" + text + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& text, int line, const std::string& key) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    config_error(line, "key '" + key + "': cannot parse seed '" + text + "'");
  }
  if (used != text.size())
    config_error(line, "key '" + key + "': trailing characters in '" + text + "'");
  return v;
}

ValueMode parse_mode(const std::string& text, int line) {
  if (text == "paper") return ValueMode::Paper;
  if (text == "rederived") return ValueMode::Rederived;
  config_error(line, "mode must be 'paper' or 'rederived', got '" + text + "'");
}

void apply_key(ScenarioConfig& c, const std::string& key, const std::string& value,
               int line) {
  if (key == "mu") c.market.mu = parse_number(value, line, key);
  else if (key == "sigma") c.market.sigma = parse_number(value, line, key);
  else if (key == "alpha") c.market.alpha = parse_number(value, line, key);
  else if (key == "beta") c.market.beta = parse_number(value, line, key);
  else if (key == "rho") c.market.rho = parse_number(value, line, key);
  else if (key == "gamma") c.pref.gamma = parse_number(value, line, key);
  else if (key == "T") c.pref.T = parse_number(value, line, key);
  else if (key == "x0") c.pref.x0 = parse_number(value, line, key);
  else if (key == "p") c.p = parse_number(value, line, key);
  else if (key == "tau") c.tau = parse_number(value, line, key);
  else if (key == "var_cap") c.var_cap = parse_number(value, line, key);
  else if (key == "n_paths") c.sim.n_paths = parse_int(value, line, key);
  else if (key == "dt") c.sim.dt = parse_number(value, line, key);
  else if (key == "seed") c.sim.master_seed = parse_uint(value, line, key);
  else if (key == "chunk_size") c.sim.chunk_size = parse_int(value, line, key);
  else if (key == "t_min") c.grid.t_min = parse_number(value, line, key);
  else if (key == "t_max") c.grid.t_max = parse_number(value, line, key);
  else if (key == "x_min") c.grid.x_min = parse_number(value, line, key);
  else if (key == "x_max") c.grid.x_max = parse_number(value, line, key);
  else if (key == "nt") c.grid.nt = static_cast<int>(parse_int(value, line, key));
  else if (key == "nx") c.grid.nx = static_cast<int>(parse_int(value, line, key));
  else if (key == "mode") c.mode = parse_mode(value, line);
  else if (key == "format") c.format = value;
  else if (key == "out") c.out = value;
  else config_error(line, "unknown key '" + key + "'");
}

ScenarioConfig parse_kv(const std::string& text) {
  ScenarioConfig config;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') continue;  // section headers are cosmetic
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_error(line_no, "empty key");
    apply_key(config, key, value, line_no);
  }
  return config;
}

ScenarioConfig parse_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("config JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config JSON: top level must be an object");
  ScenarioConfig config;
  for (const auto& [key, value] : j.items()) {
    std::string text_value;
    if (value.is_string()) text_value = value.get<std::string>();
    else if (value.is_number_integer()) text_value = std::to_string(value.get<std::int64_t>());
    else if (value.is_number_unsigned()) text_value = std::to_string(value.get<std::uint64_t>());
    else if (value.is_number_float()) text_value = fmt17(value.get<double>());
    else throw std::runtime_error("config JSON: key '" + key + "' has unsupported type");
    apply_key(config, key, text_value, 0);
  }
  return config;
}

}  // namespace

ScenarioConfig preset_table1() {
  ScenarioConfig config;  // defaults are the table-1 scenario
  config.sim.master_seed = 20260809;
  return config;
}

ScenarioConfig preset_table2() {
  ScenarioConfig config = preset_table1();
  config.market.mu = 0.8;
  config.market.sigma = 0.02;
  return config;
}

std::optional<ScenarioConfig> preset_by_name(const std::string& name) {
  if (name == "table1") return preset_table1();
  if (name == "table2") return preset_table2();
  return std::nullopt;
}

void validate_config(const ScenarioConfig& config) {
  validate_params(config.market, config.pref);
  (void)config.risk();  // derives and validates N, M
  if (config.sim.n_paths < 1) throw std::domain_error("n_paths must be >= 1");
  if (!(config.sim.dt > 0.0) || config.sim.dt > config.pref.T)
    throw std::domain_error("dt must satisfy 0 < dt <= T");
  if (config.sim.chunk_size < 1) throw std::domain_error("chunk_size must be >= 1");
  if (config.grid.nt < 2 || config.grid.nx < 2)
    throw std::domain_error("grid needs nt >= 2 and nx >= 2");
  if (!std::isfinite(config.grid.t_min) || !std::isfinite(config.grid.t_max) ||
      !std::isfinite(config.grid.x_min) || !std::isfinite(config.grid.x_max))
    throw std::domain_error("grid ranges must be finite");
  if (!(config.grid.t_min < config.grid.t_max) || !(config.grid.x_min < config.grid.x_max))
    throw std::domain_error("grid ranges must be nonempty");
  if (config.grid.t_min < 0.0 || config.grid.t_max > config.pref.T)
    throw std::domain_error("grid t-range must lie within [0, T]");
  if (config.format != "csv" && config.format != "json")
    throw std::domain_error("format must be 'csv' or 'json'");
}

ScenarioConfig load_config_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  ScenarioConfig config = (first != std::string::npos && text[first] == '{')
                              ? parse_json(text)
                              : parse_kv(text);
  validate_config(config);
  return config;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config_text(buf.str());
}

std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream os;
  os << "# mvar scenario configuration\n";
  os << "mu = " << fmt17(c.market.mu) << "\n";
  os << "sigma = " << fmt17(c.market.sigma) << "\n";
  os << "alpha = " << fmt17(c.market.alpha) << "\n";
  os << "beta = " << fmt17(c.market.beta) << "\n";
  os << "rho = " << fmt17(c.market.rho) << "\n";
  os << "gamma = " << fmt17(c.pref.gamma) << "\n";
  os << "T = " << fmt17(c.pref.T) << "\n";
  os << "x0 = " << fmt17(c.pref.x0) << "\n";
  os << "p = " << fmt17(c.p) << "\n";
  os << "tau = " << fmt17(c.tau) << "\n";
  os << "var_cap = " << fmt17(c.var_cap) << "\n";
  os << "n_paths = " << c.sim.n_paths << "\n";
  os << "dt = " << fmt17(c.sim.dt) << "\n";
  os << "seed = " << c.sim.master_seed << "\n";
  os << "chunk_size = " << c.sim.chunk_size << "\n";
  os << "t_min = " << fmt17(c.grid.t_min) << "\n";
  os << "t_max = " << fmt17(c.grid.t_max) << "\n";
  os << "x_min = " << fmt17(c.grid.x_min) << "\n";
  os << "x_max = " << fmt17(c.grid.x_max) << "\n";
  os << "nt = " << c.grid.nt << "\n";
  os << "nx = " << c.grid.nx << "\n";
  os << "mode = " << to_string(c.mode) << "\n";
  os << "format = " << c.format << "\n";
  os << "out = " << c.out << "\n";
  return os.str();
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  validate_config(config);
  const RiskSpec spec = config.risk();

  ScenarioResult result;
  result.summary.diagnostics = classify_case(config.market, spec);
  result.summary.feasible = feasible_set(config.market, spec);
  result.summary.mode = config.mode;
  if (result.summary.feasible.case_tag == CaseTag::Empty) return result;

  SurfaceGrid grid;
  grid.t_values = config.grid.t_values();
  grid.x_values = config.grid.x_values();
  const int nt = config.grid.nt, nx = config.grid.nx;
  grid.f_star.resize(nt, nx);
  grid.f_var.resize(nt, nx);
  grid.v_unconstrained.resize(nt, nx);
  grid.v_constrained.resize(nt, nx);
  grid.branch.resize(nt, nx);
  grid.active.resize(nt, nx);

  std::int64_t n_active = 0;
  double in_t_min = std::numeric_limits<double>::infinity(), in_t_max = -in_t_min;
  double in_x_min = in_t_min, in_x_max = -in_t_min;
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < nx; ++j) {
      const PolicyEval eval = optimal_f_constrained(config.market, config.pref, spec,
                                                    grid.t_values[i], grid.x_values[j],
                                                    config.mode);
      grid.f_star(i, j) = eval.f_star;
      grid.f_var(i, j) = eval.f_var;
      grid.v_unconstrained(i, j) = eval.V_unconstrained;
      grid.v_constrained(i, j) = eval.V_constrained;
      grid.branch(i, j) = branch_code(eval.branch);
      grid.active(i, j) = eval.constraint_active ? 1 : 0;
      if (eval.constraint_active) {
        ++n_active;
      } else {
        in_t_min = std::min(in_t_min, grid.t_values[i]);
        in_t_max = std::max(in_t_max, grid.t_values[i]);
        in_x_min = std::min(in_x_min, grid.x_values[j]);
        in_x_max = std::max(in_x_max, grid.x_values[j]);
      }
    }
  }
  result.summary.surface_computed = true;
  result.summary.active_fraction =
      static_cast<double>(n_active) / (static_cast<double>(nt) * static_cast<double>(nx));
  if (n_active < static_cast<std::int64_t>(nt) * nx)
    result.summary.inactive_window = GridSpec{in_t_min, in_t_max, in_x_min, in_x_max, 0, 0};
  result.surface = std::move(grid);
  return result;
}

void export_surface_csv(const SurfaceGrid& grid, std::ostream& os) {
  os << "t,x,f_star,f_var,V_unc,V_con,branch,active\n";
  for (Eigen::Index i = 0; i < grid.t_values.size(); ++i) {
    for (Eigen::Index j = 0; j < grid.x_values.size(); ++j) {
      os << fmt17(grid.t_values[i]) << ',' << fmt17(grid.x_values[j]) << ','
         << fmt17(grid.f_star(i, j)) << ',' << fmt17(grid.f_var(i, j)) << ','
         << fmt17(grid.v_unconstrained(i, j)) << ',' << fmt17(grid.v_constrained(i, j)) << ','
         << grid.branch(i, j) << ',' << grid.active(i, j) << "\n";
    }
  }
}

namespace {

nlohmann::json axis_json(const Eigen::ArrayXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

template <class ArrayT>
nlohmann::json layer_json(const ArrayT& layer) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < layer.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < layer.cols(); ++j) row.push_back(layer(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void export_surface_json(const SurfaceGrid& grid, std::ostream& os) {
  nlohmann::json j;
  j["t"] = axis_json(grid.t_values);
  j["x"] = axis_json(grid.x_values);
  j["f_star"] = layer_json(grid.f_star);
  j["f_var"] = layer_json(grid.f_var);
  j["V_unc"] = layer_json(grid.v_unconstrained);
  j["V_con"] = layer_json(grid.v_constrained);
  j["branch"] = layer_json(grid.branch);
  j["active"] = layer_json(grid.active);
  os << j.dump(2) << "\n";
}

void export_surface(const SurfaceGrid& grid, const std::string& format,
                    const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  if (format == "csv") export_surface_csv(grid, os);
  else if (format == "json") export_surface_json(grid, os);
  else throw std::domain_error("format must be 'csv' or 'json'");
  if (!os) throw std::runtime_error("write failed: " + path);
}

const char* to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass:
      return "PASS";
    case CheckStatus::Fail:
      return "FAIL";
    case CheckStatus::Skip:
      return "SKIP";
    case CheckStatus::Info:
      return "INFO";
  }
  return "?";
}

bool VerificationReport::hard_failure() const {
  return std::any_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

// --- verification runner -----------------------------------------------------

namespace {

struct CheckRunner {
  VerificationReport& report;

  template <class Fn>
  void run(const std::string& name, Fn&& body) {
    try {
      report.checks.push_back(body());
      report.checks.back().name = name;
    } catch (const std::exception& e) {
      report.checks.push_back({name, CheckStatus::Fail, std::string("exception: ") + e.what()});
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Largest remaining horizon at which |V_xx| = 2 gamma e^{2 B s} stays above
// the 1e-10 curvature floor; limits grids for steeply discounted scenarios.
double healthy_horizon(const MarketParams& params, const Preference& pref) {
  const HJBConstants c = hjb_constants(params);
  const double cap = std::log(2.0 * pref.gamma * 1e10) / (-2.0 * c.B);
  return std::min(pref.T, 0.95 * cap);
}

GridSpec restricted_grid(const ScenarioConfig& config, int nt, int nx) {
  GridSpec g = config.grid;
  g.nt = nt;
  g.nx = nx;
  const double s_ok = healthy_horizon(config.market, config.pref);
  g.t_min = std::max(g.t_min, config.pref.T - s_ok);
  return g;
}

}  // namespace

VerificationReport run_verification(const ScenarioConfig& config, VerifySuite suite) {
  const bool full = suite == VerifySuite::Full;
  VerificationReport report;
  CheckRunner runner{report};

  // Validation first; everything else bails out if the config is broken.
  try {
    validate_config(config);
  } catch (const std::exception& e) {
    report.checks.push_back({"config-valid", CheckStatus::Fail, e.what()});
    return report;
  }
  report.checks.push_back({"config-valid", CheckStatus::Pass, "all invariants hold"});

  const MarketParams& mkt = config.market;
  const Preference& pref = config.pref;
  const RiskSpec spec = config.risk();
  const CaseDiagnostics diag = classify_case(mkt, spec);
  const FeasibleSet feasible = feasible_set(mkt, spec);
  const bool feasible_ok = feasible.case_tag != CaseTag::Empty;

  report.checks.push_back(
      {"classification", CheckStatus::Info,
       std::string(to_string(diag.tag)) + "  N=" + num(diag.N) + " M=" + num(diag.M) +
           " delta=" + num(diag.delta)});

  runner.run("set-equivalence", [&] {
    const std::int64_t n = full ? 10001 : 2001;
    double lo, hi;
    if (!feasible_ok) {
      lo = -10.0;
      hi = 10.0;
    } else if (std::isfinite(feasible.upper)) {
      lo = feasible.lower - 2.0;
      hi = feasible.upper + 2.0;
    } else {
      lo = feasible.lower - 2.0;
      hi = feasible.lower + 10.0;
    }
    for (std::int64_t k = 0; k < n; ++k) {
      const double f = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
      const double v = var_of_strategy(mkt, spec, f);
      if (feasible.contains(f)) {
        if (!(v <= spec.var_cap + 1e-12))
          return CheckResult{"", CheckStatus::Fail,
                             "member f=" + num(f) + " violates cap: VaR=" + num(v)};
      } else if (!(v > spec.var_cap - 1e-12)) {
        return CheckResult{"", CheckStatus::Fail,
                           "non-member f=" + num(f) + " satisfies cap: VaR=" + num(v)};
      }
    }
    return CheckResult{"", CheckStatus::Pass,
                       std::to_string(n) + " points on [" + num(lo) + ", " + num(hi) + "]"};
  });

  runner.run("root-identity", [&]() -> CheckResult {
    if (!feasible_ok || !feasible.roots)
      return {"", CheckStatus::Skip, "no boundary roots in this case"};
    const auto [f2, f1] = *feasible.roots;
    if (!(f2 <= f1)) return {"", CheckStatus::Fail, "root ordering violated"};
    // Endpoints of the feasible set must sit on the boundary parabola with
    // the drift-side sign condition.
    std::vector<double> endpoints{feasible.lower};
    if (std::isfinite(feasible.upper)) endpoints.push_back(feasible.upper);
    for (const double f : endpoints) {
      const double lhs = spec.N * spec.N * wealth_variance_rate(mkt, f);
      const double rhs = (f * mkt.mu + spec.M) * (f * mkt.mu + spec.M);
      if (std::abs(lhs - rhs) > 1e-9 * std::max(std::abs(lhs), std::abs(rhs)))
        return {"", CheckStatus::Fail, "boundary identity fails at f=" + num(f)};
      if (f * mkt.mu + spec.M < -1e-12)
        return {"", CheckStatus::Fail, "sign condition fails at f=" + num(f)};
    }
    return {"", CheckStatus::Pass, "f1=" + num(f1) + " f2=" + num(f2)};
  });

  runner.run("cap-monotonicity", [&]() -> CheckResult {
    const double caps[3] = {config.var_cap, config.var_cap + 0.01, config.var_cap + 0.1};
    FeasibleSet sets[3];
    for (int c = 0; c < 3; ++c)
      sets[c] = feasible_set(mkt, make_risk_spec(config.p, config.tau, caps[c], mkt));
    double lo = -10.0, hi = 10.0;
    for (const auto& s : sets) {
      if (s.case_tag == CaseTag::Empty) continue;
      lo = std::min(lo, s.lower - 2.0);
      hi = std::max(hi, std::isfinite(s.upper) ? s.upper + 2.0 : s.lower + 10.0);
    }
    for (int k = 0; k <= 400; ++k) {
      const double f = lo + (hi - lo) * k / 400.0;
      for (int c = 0; c + 1 < 3; ++c)
        if (sets[c].contains(f) && !sets[c + 1].contains(f))
          return {"", CheckStatus::Fail,
                  "raising the cap shrank the set at f=" + num(f)};
    }
    return {"", CheckStatus::Pass, "set inclusion holds across caps"};
  });

  runner.run("terminal-condition", [&]() -> CheckResult {
    NormalSampler rng(config.sim.master_seed ^ 0xfeed);
    for (int k = 0; k < 1000; ++k) {
      const double x = -1.0 + 3.0 * NormalSampler::to_unit(rng.raw());
      const double exact = x - pref.gamma * x * x;
      for (const ValueMode m : {ValueMode::Paper, ValueMode::Rederived}) {
        const double v = value_unconstrained(mkt, pref, pref.T, x, m);
        if (std::abs(v - exact) > 1e-14 * std::max(1.0, std::abs(exact)))
          return {"", CheckStatus::Fail, "unconstrained V(T,x) mismatch at x=" + num(x)};
        if (feasible_ok) {
          const double vc = value_constrained(mkt, pref, spec, pref.T, x, m);
          if (std::abs(vc - exact) > 1e-14 * std::max(1.0, std::abs(exact)))
            return {"", CheckStatus::Fail, "constrained V(T,x) mismatch at x=" + num(x)};
        }
      }
    }
    return {"", CheckStatus::Pass, "V(T,x) = x - gamma x^2 on 1000 samples"};
  });

  const GridSpec vgrid = restricted_grid(config, full ? 101 : 41, full ? 101 : 41);

  runner.run("stationarity", [&]() -> CheckResult {
    const Eigen::ArrayXd ts = vgrid.t_values();
    const Eigen::ArrayXd xs = vgrid.x_values();
    double worst = 0.0;
    for (const ValueMode m : {ValueMode::Paper, ValueMode::Rederived}) {
      for (Eigen::Index i = 0; i < ts.size(); ++i)
        for (Eigen::Index j = 0; j < xs.size(); ++j) {
          const auto pd = value_partials_unconstrained(mkt, pref, ts[i], xs[j], m);
          const double from_partials =
              -(mkt.mu / (mkt.sigma * mkt.sigma)) * pd.V_x / pd.V_xx -
              mkt.rho * mkt.beta / mkt.sigma;
          const double direct = optimal_f_unconstrained(mkt, pref, ts[i], xs[j], m);
          // f* crosses zero inside the domain, so the gap is scaled by
          // max(1, |f*|) rather than |f*| alone.
          const double rel = std::abs(from_partials - direct) /
                             std::max(1.0, std::abs(direct));
          worst = std::max(worst, rel);
        }
    }
    if (worst > 1e-10)
      return {"", CheckStatus::Fail, "worst relative gap " + num(worst)};
    return {"", CheckStatus::Pass, "worst relative gap " + num(worst)};
  });

  runner.run("concavity", [&]() -> CheckResult {
    const Eigen::ArrayXd ts = vgrid.t_values();
    const Eigen::ArrayXd xs = vgrid.x_values();
    for (const ValueMode m : {ValueMode::Paper, ValueMode::Rederived})
      for (Eigen::Index i = 0; i < ts.size(); ++i)
        for (Eigen::Index j = 0; j < xs.size(); ++j)
          if (!(value_partials_unconstrained(mkt, pref, ts[i], xs[j], m).V_xx < 0.0))
            return {"", CheckStatus::Fail, "V_xx >= 0 at t=" + num(ts[i]) + " x=" + num(xs[j])};
    return {"", CheckStatus::Pass, "V_xx < 0 everywhere on grid"};
  });

  runner.run("pde-residual-rederived", [&]() -> CheckResult {
    const auto res = hjb_residual(value_surface(mkt, pref, ValueMode::Rederived), mkt, vgrid);
    if (res.max_abs >= 1e-8)
      return {"", CheckStatus::Fail, "max |residual| = " + num(res.max_abs)};
    return {"", CheckStatus::Pass, "max |residual| = " + num(res.max_abs)};
  });

  runner.run("pde-residual-paper", [&]() -> CheckResult {
    const auto res = hjb_residual(value_surface(mkt, pref, ValueMode::Paper), mkt, vgrid);
    return {"", CheckStatus::Info,
            "max |residual| = " + num(res.max_abs) + ", mean = " + num(res.mean_abs) +
                " (documented, no threshold)"};
  });

  runner.run("constant-branch-identity", [&]() -> CheckResult {
    if (!feasible_ok) return {"", CheckStatus::Skip, "empty feasible set"};
    const auto clamp = clamp_constants(mkt, spec, feasible);
    NormalSampler rng(config.sim.master_seed ^ 0xbead);
    for (int k = 0; k < 1000; ++k) {
      const double t = pref.T * NormalSampler::to_unit(rng.raw());
      const double x = -1.0 + 3.0 * NormalSampler::to_unit(rng.raw());
      for (const auto& entry : {clamp.lower, clamp.upper}) {
        if (!entry) continue;
        const double direct = constant_clamp_value(pref.gamma, t, x, pref.T, *entry);
        const auto law = gaussian_terminal_law(mkt, entry->f, t, x, pref.T);
        const double via_moments =
            law.mean - pref.gamma * (law.mean * law.mean + law.variance);
        if (std::abs(direct - via_moments) > 1e-12 * std::max(1.0, std::abs(via_moments)))
          return {"", CheckStatus::Fail,
                  "identity fails at t=" + num(t) + " x=" + num(x) + " f=" + num(entry->f)};
      }
    }
    return {"", CheckStatus::Pass, "clamped value = Gaussian-moment utility, 1000 samples"};
  });

  runner.run("clamp-optimality", [&]() -> CheckResult {
    if (!feasible_ok) return {"", CheckStatus::Skip, "empty feasible set"};
    const int n_pts = full ? 400 : 100;
    const std::int64_t n_grid = full ? 100000 : 20000;
    NormalSampler rng(config.sim.master_seed ^ 0xc1a);
    const GridSpec g = restricted_grid(config, 2, 2);
    for (int k = 0; k < n_pts; ++k) {
      const double t = g.t_min + (g.t_max - g.t_min) * NormalSampler::to_unit(rng.raw());
      const double x = g.x_min + (g.x_max - g.x_min) * NormalSampler::to_unit(rng.raw());
      const auto eval = optimal_f_constrained(mkt, pref, spec, t, x, config.mode);
      const auto pd = value_partials_unconstrained(mkt, pref, t, x, config.mode);
      const auto oracle = static_quadratic_oracle(pd.V_x, pd.V_xx, mkt, feasible, n_grid);
      const double qa = 0.5 * pd.V_xx * mkt.sigma * mkt.sigma;
      const double qb = mkt.mu * pd.V_x + mkt.rho * mkt.sigma * mkt.beta * pd.V_xx;
      const double g_solver = qa * eval.f_var * eval.f_var + qb * eval.f_var;
      if (g_solver < oracle.g - 1e-9 * std::max(1.0, std::abs(oracle.g)))
        return {"", CheckStatus::Fail,
                "objective gap " + num(oracle.g - g_solver) + " at t=" + num(t) +
                    " x=" + num(x)};
      if (std::abs(eval.f_var - oracle.f) > std::max(1e-5, oracle.grid_step))
        return {"", CheckStatus::Fail,
                "argmax gap " + num(std::abs(eval.f_var - oracle.f)) + " at t=" + num(t) +
                    " x=" + num(x)};
    }
    return {"", CheckStatus::Pass, std::to_string(n_pts) + " random points match the oracle"};
  });

  runner.run("policy-feasibility", [&]() -> CheckResult {
    if (!feasible_ok) return {"", CheckStatus::Skip, "empty feasible set"};
    const Eigen::ArrayXd ts = config.grid.t_values();
    const Eigen::ArrayXd xs = config.grid.x_values();
    for (Eigen::Index i = 0; i < ts.size(); ++i)
      for (Eigen::Index j = 0; j < xs.size(); ++j) {
        const auto eval = optimal_f_constrained(mkt, pref, spec, ts[i], xs[j], config.mode);
        if (!(var_of_strategy(mkt, spec, eval.f_var) <= config.var_cap + 1e-12))
          return {"", CheckStatus::Fail,
                  "VaR exceeds cap at t=" + num(ts[i]) + " x=" + num(xs[j])};
      }
    return {"", CheckStatus::Pass, "VaR(f_var) <= cap on the full grid"};
  });

  runner.run("dominance", [&]() -> CheckResult {
    if (!feasible_ok) return {"", CheckStatus::Skip, "empty feasible set"};
    const Eigen::ArrayXd ts = config.grid.t_values();
    const Eigen::ArrayXd xs = config.grid.x_values();
    for (Eigen::Index i = 0; i < ts.size(); ++i)
      for (Eigen::Index j = 0; j < xs.size(); ++j) {
        const auto eval = optimal_f_constrained(mkt, pref, spec, ts[i], xs[j], config.mode);
        if (!(eval.V_constrained <= eval.V_unconstrained + 1e-12))
          return {"", CheckStatus::Fail,
                  "V_con > V_unc at t=" + num(ts[i]) + " x=" + num(xs[j])};
      }
    return {"", CheckStatus::Pass, "V_con <= V_unc on the full grid"};
  });

  runner.run("policy-continuity", [&]() -> CheckResult {
    if (!feasible_ok) return {"", CheckStatus::Skip, "empty feasible set"};
    // f_var is a max/min composition of Lipschitz functions of x.
    const double lip = mkt.mu / (mkt.sigma * mkt.sigma);
    const int n = 4001;
    const double h = (config.grid.x_max - config.grid.x_min) / (n - 1);
    for (const double t : {config.grid.t_min, 0.5 * (config.grid.t_min + config.grid.t_max)}) {
      double prev = optimal_f_constrained(mkt, pref, spec, t, config.grid.x_min, config.mode).f_var;
      for (int j = 1; j < n; ++j) {
        const double x = config.grid.x_min + h * j;
        const double cur = optimal_f_constrained(mkt, pref, spec, t, x, config.mode).f_var;
        if (std::abs(cur - prev) > lip * h * (1.0 + 1e-9) + 1e-12)
          return {"", CheckStatus::Fail,
                  "jump " + num(std::abs(cur - prev)) + " at t=" + num(t) + " x=" + num(x)};
        prev = cur;
      }
    }
    return {"", CheckStatus::Pass, "no jumps beyond the Lipschitz bound"};
  });

  runner.run("mc-constant-clamp", [&]() -> CheckResult {
    if (!feasible_ok) return {"", CheckStatus::Skip, "empty feasible set"};
    SimConfig cfg = config.sim;
    if (!full) cfg.n_paths = std::min<std::int64_t>(cfg.n_paths, 10000);
    const auto clamp = clamp_constants(mkt, spec, feasible);
    const ClampEntry entry = *clamp.lower;
    const double closed = constant_clamp_value(pref.gamma, 0.0, pref.x0, pref.T, entry);
    const auto cmp = mc_utility(
        mkt, pref, [f = entry.f](double, double) { return f; }, cfg, closed);
    const std::string detail = "closed=" + num(cmp.solver_value) +
                               " mc=" + num(cmp.oracle_value) + " se=" + num(cmp.std_error) +
                               " paths=" + std::to_string(cfg.n_paths);
    return CheckResult{"", cmp.pass ? CheckStatus::Pass : CheckStatus::Fail, detail};
  });

  runner.run("mc-gaussian-law", [&]() -> CheckResult {
    SimConfig cfg = config.sim;
    cfg.n_paths = std::min<std::int64_t>(cfg.n_paths, full ? 100000 : 10000);
    const auto law = gaussian_terminal_law(mkt, 0.0, 0.0, pref.x0, pref.T);
    const auto batch = simulate_paths(mkt, pref, [](double, double) { return 0.0; }, cfg);
    const double n = static_cast<double>(cfg.n_paths);
    const double mean = batch.terminal_wealth.mean();
    const double var = (batch.terminal_wealth - mean).square().sum() / (n - 1.0);
    const double se_mean = std::sqrt(var / n);
    const double se_var = var * std::sqrt(2.0 / (n - 1.0));
    if (std::abs(mean - law.mean) > 4.0 * se_mean)
      return {"", CheckStatus::Fail, "terminal mean off: " + num(mean) + " vs " + num(law.mean)};
    if (std::abs(var - law.variance) > 4.0 * se_var)
      return {"", CheckStatus::Fail,
              "terminal variance off: " + num(var) + " vs " + num(law.variance)};
    return {"", CheckStatus::Pass,
            "mean " + num(mean) + " ~ " + num(law.mean) + ", var " + num(var) + " ~ " +
                num(law.variance)};
  });

  // Mean-square stability of the explicit scheme under the affine optimal
  // policy requires dt < sigma^2 / mu^2; past that bound the feedback through
  // f*(t, x) makes simulated wealth explode.
  const double stable_dt = mkt.sigma * mkt.sigma / (mkt.mu * mkt.mu);
  const bool policy_sim_ok = config.sim.dt < 0.5 * stable_dt;
  const std::string stiff_note =
      "state-feedback policy is stiff at dt=" + num(config.sim.dt) +
      " (scheme needs dt < " + num(stable_dt) + "); skipped";

  if (full) {
    runner.run("mc-dynamic-vs-constant", [&]() -> CheckResult {
      if (!feasible_ok) return {"", CheckStatus::Skip, "empty feasible set"};
      if (!policy_sim_ok) return {"", CheckStatus::Skip, stiff_note};
      SimConfig cfg = config.sim;
      const auto clamp = clamp_constants(mkt, spec, feasible);
      const double f_const = clamp.lower->f;
      // Paired seeds: identical driving noise for both policies.
      const auto dynamic =
          simulate_paths(mkt, pref, constrained_policy(mkt, pref, spec, config.mode), cfg);
      const auto constant = simulate_paths(
          mkt, pref, [f_const](double, double) { return f_const; }, cfg);
      const Eigen::ArrayXd du =
          (dynamic.terminal_wealth - pref.gamma * dynamic.terminal_wealth.square()) -
          (constant.terminal_wealth - pref.gamma * constant.terminal_wealth.square());
      const double n = static_cast<double>(cfg.n_paths);
      const double mean = du.mean();
      const double se = std::sqrt((du - mean).square().sum() / (n - 1.0) / n);
      const std::string detail = "utility gap (dynamic - constant) = " + num(mean) +
                                 " +- " + num(se);
      if (mean < -4.0 * se)
        return {"", CheckStatus::Fail, detail + "; dynamic policy lost to its own clamp"};
      return {"", CheckStatus::Pass, detail};
    });

    runner.run("mode-discrimination", [&]() -> CheckResult {
      if (!policy_sim_ok) return {"", CheckStatus::Skip, stiff_note};
      SimConfig cfg = config.sim;
      const auto mr = mode_discrimination_report(mkt, pref, cfg, vgrid);
      std::string detail =
          "paper: V=" + num(mr.value_paper) + " mc=" + num(mr.mc_paper.oracle_value) +
          (mr.mc_paper.pass ? " (match)" : " (mismatch)") +
          "; rederived: V=" + num(mr.value_rederived) +
          " mc=" + num(mr.mc_rederived.oracle_value) +
          (mr.mc_rederived.pass ? " (match)" : " (mismatch)");
      return {"", CheckStatus::Info, detail};
    });
  }

  return report;
}

// --- JSON views ---------------------------------------------------------------

nlohmann::json policy_eval_json(const PolicyEval& eval) {
  return {{"t", eval.t},
          {"x", eval.x},
          {"f_star", eval.f_star},
          {"f_var", eval.f_var},
          {"branch", to_string(eval.branch)},
          {"branch_code", branch_code(eval.branch)},
          {"V_unconstrained", eval.V_unconstrained},
          {"V_constrained", eval.V_constrained},
          {"constraint_active", eval.constraint_active},
          {"mode", to_string(eval.mode)}};
}

nlohmann::json summary_json(const ScenarioSummary& summary) {
  const CaseDiagnostics& d = summary.diagnostics;
  nlohmann::json j{{"case", to_string(d.tag)},
                   {"N", d.N},
                   {"M", d.M},
                   {"delta", d.delta},
                   {"quad_a", d.quad_a},
                   {"quad_b", d.quad_b},
                   {"quad_c", d.quad_c},
                   {"tangency_bound", d.tangency_bound},
                   {"degenerate", d.degenerate},
                   {"slope_below", d.slope_below},
                   {"delta_nonneg", d.delta_nonneg},
                   {"axis_right_of_floor", d.axis_right_of_floor},
                   {"mode", to_string(summary.mode)},
                   {"surface_computed", summary.surface_computed}};
  if (d.roots) {
    j["f2"] = d.roots->first;
    j["f1"] = d.roots->second;
  }
  if (summary.feasible.case_tag != CaseTag::Empty) {
    j["feasible_lower"] = summary.feasible.lower;
    if (std::isfinite(summary.feasible.upper)) j["feasible_upper"] = summary.feasible.upper;
  }
  if (summary.surface_computed) {
    j["active_fraction"] = summary.active_fraction;
    if (summary.inactive_window) {
      j["inactive_t_min"] = summary.inactive_window->t_min;
      j["inactive_t_max"] = summary.inactive_window->t_max;
      j["inactive_x_min"] = summary.inactive_window->x_min;
      j["inactive_x_max"] = summary.inactive_window->x_max;
    }
  }
  return j;
}

nlohmann::json batch_json(const PathBatch& batch, const SimConfig& cfg) {
  const double n = static_cast<double>(batch.terminal_wealth.size());
  const double mean = batch.terminal_wealth.mean();
  const double var =
      n > 1 ? (batch.terminal_wealth - mean).square().sum() / (n - 1.0) : 0.0;
  return {{"n_paths", cfg.n_paths},
          {"dt", cfg.dt},
          {"seed", cfg.master_seed},
          {"chunk_size", cfg.chunk_size},
          {"mean_utility", batch.mean_utility},
          {"std_error", batch.std_error},
          {"terminal_mean", mean},
          {"terminal_variance", var},
          {"terminal_min", batch.terminal_wealth.minCoeff()},
          {"terminal_max", batch.terminal_wealth.maxCoeff()}};
}

nlohmann::json mode_report_json(const ModeReport& report) {
  auto cmp = [](const OracleComparison& c) {
    return nlohmann::json{{"closed_form", c.solver_value},
                          {"mc_mean", c.oracle_value},
                          {"mc_se", c.std_error},
                          {"abs_gap", c.abs_gap},
                          {"match_4se", c.pass}};
  };
  return {{"t", report.t},
          {"x", report.x},
          {"f_star_paper", report.f_star_paper},
          {"f_star_rederived", report.f_star_rederived},
          {"value_paper", report.value_paper},
          {"value_rederived", report.value_rederived},
          {"residual_max_paper", report.residual_max_paper},
          {"residual_mean_paper", report.residual_mean_paper},
          {"residual_max_rederived", report.residual_max_rederived},
          {"residual_mean_rederived", report.residual_mean_rederived},
          {"mc_paper", cmp(report.mc_paper)},
          {"mc_rederived", cmp(report.mc_rederived)}};
}

nlohmann::json verification_json(const VerificationReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name}, {"status", to_string(c.status)}, {"detail", c.detail}});
  return {{"checks", checks}, {"hard_failure", report.hard_failure()}};
}

}  // namespace mvar
