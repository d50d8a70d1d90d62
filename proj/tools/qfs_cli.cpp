// qfs: batch front end for the quasi-free repeated-interaction model.
//
//   qfs run --config cfg.json --out results/ [--mode m] [--seed k] [--tol x]
//   qfs validate-config --config cfg.json
//   qfs cp-check --config cfg.json
//
// Exit codes: 0 success, 1 config error, 2 validation failure, 3 runtime
// invariant breach.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qfs/quasifree.hpp"
#include "qfs/scenario.hpp"

namespace {

enum Exit { kOk = 0, kConfigError = 1, kValidationFailure = 2, kInvariantBreach = 3 };

void print_config_error(const qfs::ConfigError& e) {
  std::cerr << "config error:\n";
  for (const auto& p : e.problems()) std::cerr << "  - " << p << '\n';
}

nlohmann::json certificate_json(const qfs::CpCertificate<double>& c) {
  return {{"completely_positive", c.completely_positive},
          {"min_defect_eigenvalue", c.min_defect_eigenvalue},
          {"defect_psd", c.defect_psd},
          {"kappa", c.kappa},
          {"kappa_ok", c.kappa_ok},
          {"defect_map_residual", c.defect_map_residual},
          {"reservoir_beta", std::isinf(c.reservoir_beta) ? nlohmann::json("inf")
                                                          : nlohmann::json(c.reservoir_beta)}};
}

int cmd_run(const std::string& config, const std::string& out_dir,
            const qfs::ConfigOverrides& overrides) {
  const auto cfg = qfs::load_config(config, overrides);
  std::filesystem::create_directories(out_dir);
  std::ofstream csv(std::filesystem::path(out_dir) / "trajectory.csv");
  if (!csv) throw std::runtime_error("cannot write trajectory.csv in " + out_dir);
  qfs::CsvTrajectoryWriter writer(csv, cfg.params.N + 1, static_cast<int>(cfg.probes.size()));
  const auto summary =
      qfs::run_scenario(cfg, [&writer](const qfs::TrajectoryRecord& r) { writer.write(r); });
  csv.close();

  std::ofstream js(std::filesystem::path(out_dir) / "summary.json");
  js << qfs::summary_to_json(cfg, summary).dump(2) << '\n';

  std::cout << qfs::to_string(cfg.mode) << ": " << summary.records << " records, verdict "
            << (summary.passed ? "pass" : "fail") << '\n';
  for (const auto& f : summary.failures) std::cout << "  failure: " << f << '\n';
  for (const auto& w : summary.warnings) std::cout << "  warning: " << w << '\n';
  return summary.passed ? kOk : kValidationFailure;
}

int cmd_validate(const std::string& config) {
  const auto cfg = qfs::load_config(config);
  std::cout << "config ok: mode " << qfs::to_string(cfg.mode) << ", N=" << cfg.params.N
            << ", kappa=" << qfs::format_number(qfs::kappa(cfg.params))
            << ", c=" << qfs::format_number(qfs::relative_bound_c(cfg.params)) << '\n';
  return kOk;
}

int cmd_cp_check(const std::string& config) {
  const auto cfg = qfs::load_config(config);
  const auto& p = cfg.params;
  nlohmann::json out;
  bool all = true;
  nlohmann::json steps = nlohmann::json::array();
  for (int n = 1; n <= p.N; ++n) {
    const auto c = qfs::cp_certificate(qfs::one_step_map(p, n, p.tau, cfg.tol.sv), cfg.tol.cp);
    all = all && c.completely_positive;
    auto j = certificate_json(c);
    j["window"] = n;
    steps.push_back(j);
  }
  const auto composite =
      qfs::cp_certificate(qfs::repeated_interaction_map(p, cfg.t_max, cfg.tol.sv), cfg.tol.cp);
  all = all && composite.completely_positive;
  out["one_step_maps"] = steps;
  out["composite"] = certificate_json(composite);
  out["composite"]["t"] = cfg.t_max;
  out["verdict"] = all ? "CP" : "NOT CP";
  std::cout << out.dump(2) << '\n';
  return all ? kOk : kValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-free dynamics of a repeatedly perturbed open boson system"};
  app.require_subcommand(1);

  std::string config, out_dir, mode;
  std::uint64_t seed = 0;
  double tol = 0;

  auto* run = app.add_subcommand("run", "Run a scenario and write trajectory.csv + summary.json");
  run->add_option("--config", config, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  auto* mode_opt = run->add_option("--mode", mode, "closed_form | oracle | cross_validate")
                       ->check(CLI::IsMember({"closed_form", "oracle", "cross_validate"}));
  auto* seed_opt = run->add_option("--seed", seed, "Seed for default probes");
  auto* tol_opt = run->add_option("--tol", tol, "Cross-validation tolerance");

  auto* validate = app.add_subcommand("validate-config", "Check a scenario file");
  validate->add_option("--config", config, "Scenario JSON file")->required();

  auto* cp = app.add_subcommand("cp-check", "Print the complete-positivity certificate");
  cp->add_option("--config", config, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      qfs::ConfigOverrides o;
      if (*mode_opt) o.mode = qfs::parse_run_mode(mode);
      if (*seed_opt) o.seed = seed;
      if (*tol_opt) o.xval_tol = tol;
      return cmd_run(config, out_dir, o);
    }
    if (*validate) return cmd_validate(config);
    if (*cp) return cmd_cp_check(config);
  } catch (const qfs::ConfigError& e) {
    print_config_error(e);
    return kConfigError;
  } catch (const qfs::InvariantBreach& e) {
    std::cerr << "invariant breach: " << e.what() << '\n';
    return kInvariantBreach;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvariantBreach;
  }
  return kOk;
}
