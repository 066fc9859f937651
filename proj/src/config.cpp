#include "coagsim/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace coagsim {

namespace {

const std::set<std::string> kKnownKeys = {
    "experiment", "epsilon",      "alpha",       "nu",      "nu_tilde",
    "mu",         "kappa",        "theta",       "margin",  "a",
    "rho",        "t_macro_end",  "sample_every", "dt_override",
    "delta",      "replicas",     "master_seed"};

const std::set<std::string> kOptionalKeys = {"dt_override"};

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& origin, std::size_t line,
                       const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw std::runtime_error(os.str());
}

double parse_double(const std::string& origin, std::size_t line,
                    const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    fail(origin, line, "unparsable value for key '" + key + "': '" + value + "'");
  }
  if (pos != value.size())
    fail(origin, line, "trailing characters in value for key '" + key + "'");
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
  std::map<std::string, std::pair<std::string, std::size_t>> raw;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!kKnownKeys.count(key)) fail(origin, line_no, "unknown key '" + key + "'");
    if (raw.count(key)) fail(origin, line_no, "duplicate key '" + key + "'");
    if (value.empty()) fail(origin, line_no, "empty value for key '" + key + "'");
    raw[key] = {value, line_no};
  }
  for (const auto& key : kKnownKeys)
    if (!kOptionalKeys.count(key) && !raw.count(key))
      throw std::runtime_error(origin + ": missing required key '" + key + "'");

  ExperimentConfig cfg;
  auto get = [&](const std::string& key) -> std::pair<std::string, std::size_t> {
    return raw.at(key);
  };
  {
    auto [v, ln] = get("experiment");
    if (v != "E1" && v != "E2" && v != "E3" && v != "E4" && v != "E5")
      fail(origin, ln, "experiment must be one of E1..E5");
    cfg.experiment = v;
  }
  auto num = [&](const std::string& key) {
    auto [v, ln] = get(key);
    return parse_double(origin, ln, key, v);
  };
  cfg.epsilon = num("epsilon");
  cfg.alpha = num("alpha");
  cfg.nu = num("nu");
  cfg.nu_tilde = num("nu_tilde");
  cfg.mu = num("mu");
  cfg.kappa = num("kappa");
  cfg.theta = num("theta");
  cfg.margin = num("margin");
  cfg.a = num("a");
  cfg.t_macro_end = num("t_macro_end");
  cfg.sample_every = num("sample_every");
  cfg.delta = num("delta");
  {
    auto [v, ln] = get("rho");
    std::istringstream rs(v);
    std::string item;
    while (std::getline(rs, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(origin, ln, "empty entry in rho list");
      cfg.rho.push_back(parse_double(origin, ln, "rho", item));
    }
    if (cfg.rho.empty()) fail(origin, ln, "rho list is empty");
  }
  if (raw.count("dt_override")) {
    auto [v, ln] = get("dt_override");
    const double dt = parse_double(origin, ln, "dt_override", v);
    if (!(dt > 0.0)) fail(origin, ln, "dt_override must be > 0");
    cfg.dt_override = dt;
  }
  {
    auto [v, ln] = get("replicas");
    const double d = parse_double(origin, ln, "replicas", v);
    if (!(d >= 1.0) || d != std::floor(d))
      fail(origin, ln, "replicas must be a positive integer");
    cfg.replicas = static_cast<std::int64_t>(d);
  }
  {
    auto [v, ln] = get("master_seed");
    try {
      std::size_t pos = 0;
      cfg.master_seed = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      fail(origin, ln, "master_seed must be a nonnegative integer");
    }
  }

  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
    throw std::runtime_error(origin + ": epsilon must be in (0,1)");
  if (!(cfg.alpha > 0.0)) throw std::runtime_error(origin + ": alpha must be > 0");
  if (!(cfg.margin > 0.0 && cfg.margin < 1.0))
    throw std::runtime_error(origin + ": margin must be in (0,1)");
  if (!(cfg.kappa > 0.5 && cfg.kappa < 1.0))
    throw std::runtime_error(origin + ": kappa must be in (1/2,1)");
  if (!(cfg.a >= 4.0)) throw std::runtime_error(origin + ": a must be >= 4");
  if (!(cfg.t_macro_end > 0.0))
    throw std::runtime_error(origin + ": t_macro_end must be > 0");
  if (!(cfg.sample_every > 0.0))
    throw std::runtime_error(origin + ": sample_every must be > 0");
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "experiment = " << cfg.experiment << "\n";
  os << "epsilon = " << format_double(cfg.epsilon) << "\n";
  os << "alpha = " << format_double(cfg.alpha) << "\n";
  os << "nu = " << format_double(cfg.nu) << "\n";
  os << "nu_tilde = " << format_double(cfg.nu_tilde) << "\n";
  os << "mu = " << format_double(cfg.mu) << "\n";
  os << "kappa = " << format_double(cfg.kappa) << "\n";
  os << "theta = " << format_double(cfg.theta) << "\n";
  os << "margin = " << format_double(cfg.margin) << "\n";
  os << "a = " << format_double(cfg.a) << "\n";
  os << "rho = ";
  for (std::size_t i = 0; i < cfg.rho.size(); ++i)
    os << (i ? "," : "") << format_double(cfg.rho[i]);
  os << "\n";
  os << "t_macro_end = " << format_double(cfg.t_macro_end) << "\n";
  os << "sample_every = " << format_double(cfg.sample_every) << "\n";
  if (cfg.dt_override)
    os << "dt_override = " << format_double(*cfg.dt_override) << "\n";
  os << "delta = " << format_double(cfg.delta) << "\n";
  os << "replicas = " << cfg.replicas << "\n";
  os << "master_seed = " << cfg.master_seed << "\n";
  return os.str();
}

ScalingParams scaling_params_for(const ExperimentConfig& cfg, double epsilon) {
  std::optional<double> dt = cfg.dt_override;
  if (dt && epsilon != cfg.epsilon) {
    // keep the stability margin constant across ladder rungs
    auto base = make_scaling_params(cfg.epsilon, cfg.alpha, cfg.rho, cfg.mu,
                                    cfg.nu, cfg.nu_tilde);
    auto rung = make_scaling_params(epsilon, cfg.alpha, cfg.rho, cfg.mu, cfg.nu,
                                    cfg.nu_tilde);
    dt = *dt * stable_dt(rung, 1.0) / stable_dt(base, 1.0);
  }
  return make_scaling_params(epsilon, cfg.alpha, cfg.rho, cfg.mu, cfg.nu,
                             cfg.nu_tilde, 1.0, dt);
}

}  // namespace coagsim
