#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "qfs/fock.hpp"
#include "qfs/scenario.hpp"

namespace qfs {

using nlohmann::json;

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::closed_form: return "closed_form";
    case RunMode::oracle: return "oracle";
    case RunMode::cross_validate: return "cross_validate";
  }
  return "unknown";
}

std::optional<RunMode> parse_run_mode(const std::string& s) {
  if (s == "closed_form") return RunMode::closed_form;
  if (s == "oracle") return RunMode::oracle;
  if (s == "cross_validate") return RunMode::cross_validate;
  return std::nullopt;
}

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "\n") + s;
  return out;
}

const std::set<std::string> kTopKeys = {"params",    "beta0",     "beta",   "mode",
                                        "t_max",     "sample_dt", "cutoff_M",
                                        "rk4_dt",    "probes",    "seed",   "tolerances"};
const std::set<std::string> kParamKeys = {"E",          "epsilon",     "eta", "tau",
                                          "sigma_plus", "sigma_minus", "N"};
const std::set<std::string> kTolKeys = {"tol_sv",    "tol_psd",      "tol_herm",
                                        "tol_cp",    "xval",         "tail_mass",
                                        "probe_radius", "trace_drift", "dimension_budget"};

// Collects problems instead of throwing on the first one.
class Reader {
 public:
  std::vector<std::string> problems;

  void unknown_keys(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key()))
        problems.push_back("unknown key '" + where + it.key() + "'");
  }

  std::optional<double> number(const json& obj, const std::string& key,
                               const std::string& where, bool required) {
    if (!obj.contains(key)) {
      if (required) problems.push_back("missing key '" + where + key + "'");
      return std::nullopt;
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) {
      problems.push_back("key '" + where + key + "' must be a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<long long> integer(const json& obj, const std::string& key,
                                   const std::string& where, bool required) {
    if (!obj.contains(key)) {
      if (required) problems.push_back("missing key '" + where + key + "'");
      return std::nullopt;
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) {
      problems.push_back("key '" + where + key + "' must be an integer");
      return std::nullopt;
    }
    return v.get<long long>();
  }
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

std::vector<CVector<double>> default_probes(int N, std::uint64_t seed) {
  std::vector<CVector<double>> probes;
  for (int k = 0; k < 2; ++k) {
    CVector<double> e = CVector<double>::Zero(N + 1);
    e(k) = 0.4;
    probes.push_back(e);
  }
  std::mt19937_64 rng(seed);
  for (int s = 0; s < 5; ++s) {
    CVector<double> v(N + 1);
    for (int k = 0; k <= N; ++k) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      v(k) = {re, im};
    }
    const double radius = 0.5 * (1.0 - unit_uniform(rng));  // (0, 0.5]
    probes.push_back(v * (radius / v.norm()));
  }
  return probes;
}

ScenarioConfig parse_config(const std::string& text, const ConfigOverrides& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("parse error: ") + e.what()});
  }
  if (!doc.is_object()) throw ConfigError({"config must be a JSON object"});

  Reader rd;
  ScenarioConfig cfg;
  rd.unknown_keys(doc, kTopKeys, "");

  if (!doc.contains("params") || !doc.at("params").is_object()) {
    rd.problems.push_back("missing object 'params'");
  } else {
    const auto& p = doc.at("params");
    rd.unknown_keys(p, kParamKeys, "params.");
    auto& mp = cfg.params;
    if (auto v = rd.number(p, "E", "params.", true)) mp.E = *v;
    if (auto v = rd.number(p, "epsilon", "params.", true)) mp.epsilon = *v;
    if (auto v = rd.number(p, "eta", "params.", true)) mp.eta = *v;
    if (auto v = rd.number(p, "tau", "params.", true)) mp.tau = *v;
    if (auto v = rd.number(p, "sigma_plus", "params.", true)) mp.sigma_plus = *v;
    if (auto v = rd.number(p, "sigma_minus", "params.", true)) mp.sigma_minus = *v;
    if (auto v = rd.integer(p, "N", "params.", true)) mp.N = static_cast<int>(*v);
    for (const auto& viol : validate_params(mp).violations)
      rd.problems.push_back("params violate " + viol.name + ": " + viol.detail);
  }

  if (auto v = rd.number(doc, "beta0", "", true)) cfg.beta0 = *v;
  if (auto v = rd.number(doc, "beta", "", true)) cfg.beta = *v;
  if (auto v = rd.number(doc, "t_max", "", true)) cfg.t_max = *v;
  if (auto v = rd.number(doc, "sample_dt", "", true)) cfg.sample_dt = *v;
  if (auto v = rd.number(doc, "rk4_dt", "", false)) cfg.rk4_dt = *v;
  if (auto v = rd.integer(doc, "cutoff_M", "", false)) cfg.cutoff_M = static_cast<int>(*v);
  if (auto v = rd.integer(doc, "seed", "", false)) {
    if (*v < 0) rd.problems.push_back("seed must be >= 0");
    else cfg.seed = static_cast<std::uint64_t>(*v);
  }

  std::optional<RunMode> mode;
  if (doc.contains("mode")) {
    if (!doc.at("mode").is_string() || !(mode = parse_run_mode(doc.at("mode").get<std::string>())))
      rd.problems.push_back("mode must be one of closed_form, oracle, cross_validate");
  }
  if (overrides.mode) mode = overrides.mode;
  if (!mode) {
    if (!doc.contains("mode")) rd.problems.push_back("missing key 'mode'");
  } else {
    cfg.mode = *mode;
  }
  if (overrides.seed) cfg.seed = *overrides.seed;

  if (doc.contains("tolerances")) {
    const auto& t = doc.at("tolerances");
    if (!t.is_object()) {
      rd.problems.push_back("'tolerances' must be an object");
    } else {
      rd.unknown_keys(t, kTolKeys, "tolerances.");
      auto set = [&](const char* key, double& field) {
        if (auto v = rd.number(t, key, "tolerances.", false)) {
          if (!(*v > 0)) rd.problems.push_back(std::string("tolerances.") + key + " must be > 0");
          field = *v;
        }
      };
      set("tol_sv", cfg.tol.sv);
      set("tol_psd", cfg.tol.psd);
      set("tol_herm", cfg.tol.herm);
      set("tol_cp", cfg.tol.cp);
      set("xval", cfg.tol.xval);
      set("tail_mass", cfg.tol.tail_mass);
      set("probe_radius", cfg.tol.probe_radius);
      set("trace_drift", cfg.tol.trace_drift);
      if (auto v = rd.integer(t, "dimension_budget", "tolerances.", false)) {
        if (*v < 1) rd.problems.push_back("tolerances.dimension_budget must be >= 1");
        cfg.dimension_budget = static_cast<long>(*v);
      }
    }
  }
  if (overrides.xval_tol) {
    if (!(*overrides.xval_tol > 0)) rd.problems.push_back("--tol must be > 0");
    cfg.tol.xval = *overrides.xval_tol;
  }

  const int dim = cfg.params.N + 1;
  if (doc.contains("probes")) {
    const auto& pr = doc.at("probes");
    if (!pr.is_array()) {
      rd.problems.push_back("'probes' must be an array of complex vectors");
    } else {
      for (std::size_t i = 0; i < pr.size(); ++i) {
        const auto& vec = pr[i];
        const std::string where = "probes[" + std::to_string(i) + "]";
        if (!vec.is_array() || static_cast<int>(vec.size()) != dim) {
          rd.problems.push_back(where + " must be an array of N+1 = " + std::to_string(dim) +
                                " [re, im] pairs");
          continue;
        }
        CVector<double> z(dim);
        bool good = true;
        for (int k = 0; k < dim; ++k) {
          const auto& c = vec[k];
          if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
            good = false;
            break;
          }
          z(k) = {c[0].get<double>(), c[1].get<double>()};
        }
        if (!good) {
          rd.problems.push_back(where + " entries must be [re, im] number pairs");
          continue;
        }
        cfg.probes.push_back(z);
      }
    }
  }

  // Cross-field checks.
  const double horizon = cfg.params.N * cfg.params.tau;
  if (doc.contains("t_max") && !(cfg.t_max >= 0 && cfg.t_max < horizon))
    rd.problems.push_back("t_max must lie in [0, N*tau) = [0, " + format_number(horizon) + ")");
  if (doc.contains("sample_dt") && !(cfg.sample_dt > 0))
    rd.problems.push_back("sample_dt must be > 0");
  if (doc.contains("beta0") && !(cfg.beta0 > 0)) rd.problems.push_back("beta0 must be > 0");
  if (doc.contains("beta") && !(cfg.beta > 0)) rd.problems.push_back("beta must be > 0");
  if (!(cfg.rk4_dt > 0)) rd.problems.push_back("rk4_dt must be > 0");

  const bool needs_oracle = mode && *mode != RunMode::closed_form;
  if (needs_oracle) {
    if (!cfg.cutoff_M) {
      rd.problems.push_back("mode " + to_string(*mode) + " requires 'cutoff_M'");
    } else if (*cfg.cutoff_M < 2) {
      rd.problems.push_back("cutoff_M must be >= 2");
    } else if (cfg.params.N >= 1) {
      const double required = std::pow(double(*cfg.cutoff_M), cfg.params.N + 1);
      if (required > double(cfg.dimension_budget))
        rd.problems.push_back("oracle dimension " + format_number(required) +
                              " exceeds budget " + std::to_string(cfg.dimension_budget));
    }
  }

  if (!rd.problems.empty()) throw ConfigError(rd.problems);

  if (cfg.probes.empty()) {
    cfg.probes = default_probes(cfg.params.N, cfg.seed);
    cfg.default_probes = true;
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

json config_to_json(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  json j;
  j["params"] = {{"E", p.E},         {"epsilon", p.epsilon},         {"eta", p.eta},
                 {"tau", p.tau},     {"sigma_plus", p.sigma_plus},   {"sigma_minus", p.sigma_minus},
                 {"N", p.N}};
  j["beta0"] = cfg.beta0;
  j["beta"] = cfg.beta;
  j["mode"] = to_string(cfg.mode);
  j["t_max"] = cfg.t_max;
  j["sample_dt"] = cfg.sample_dt;
  if (cfg.cutoff_M) j["cutoff_M"] = *cfg.cutoff_M;
  j["rk4_dt"] = cfg.rk4_dt;
  json probes = json::array();
  for (const auto& z : cfg.probes) {
    json v = json::array();
    for (Eigen::Index k = 0; k < z.size(); ++k) v.push_back({z(k).real(), z(k).imag()});
    probes.push_back(v);
  }
  j["probes"] = probes;
  j["seed"] = cfg.seed;
  j["tolerances"] = {{"tol_sv", cfg.tol.sv},
                     {"tol_psd", cfg.tol.psd},
                     {"tol_herm", cfg.tol.herm},
                     {"tol_cp", cfg.tol.cp},
                     {"xval", cfg.tol.xval},
                     {"tail_mass", cfg.tol.tail_mass},
                     {"probe_radius", cfg.tol.probe_radius},
                     {"trace_drift", cfg.tol.trace_drift},
                     {"dimension_budget", cfg.dimension_budget}};
  return j;
}

}  // namespace qfs
