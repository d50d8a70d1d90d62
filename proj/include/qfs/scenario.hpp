#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qfs/model.hpp"
#include "qfs/types.hpp"

namespace qfs {

enum class RunMode { closed_form, oracle, cross_validate };

std::string to_string(RunMode mode);
std::optional<RunMode> parse_run_mode(const std::string& s);

struct ScenarioConfig {
  ModelParams<double> params;
  double beta0 = 0;
  double beta = 0;
  RunMode mode = RunMode::closed_form;
  double t_max = 0;
  double sample_dt = 0;
  std::optional<int> cutoff_M;
  double rk4_dt = 1e-3;
  std::vector<CVector<double>> probes;
  bool default_probes = false;
  std::uint64_t seed = 0;
  Tolerances tol;
  long dimension_budget = 4096;
};

/// Every problem found while reading or validating a config.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ConfigOverrides {
  std::optional<RunMode> mode;
  std::optional<std::uint64_t> seed;
  std::optional<double> xval_tol;
};

/// Parses and validates a JSON scenario document. Throws ConfigError.
ScenarioConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {});
ScenarioConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

/// e0 and e1 scaled to 0.4, then five seeded random vectors with norm in (0, 0.5].
std::vector<CVector<double>> default_probes(int N, std::uint64_t seed);

nlohmann::json config_to_json(const ScenarioConfig& cfg);

struct TrajectoryRecord {
  long step_index = 0;
  double time = 0;
  int window_n = 1;
  RVector<double> occ;
  RVector<double> gamma_probe;
  double trace_err = 0;
  double min_eig_X_minus_I = 0;
};

using RecordSink = std::function<void(const TrajectoryRecord&)>;

struct ProbeDeviation {
  double time = 0;
  int probe = 0;
  double closed_form = 0;
  Complex<double> oracle;
  double deviation = 0;
};

struct RunSummary {
  RunMode mode = RunMode::closed_form;
  long records = 0;
  double kappa = 1;
  double relative_bound_c = 0;
  bool cp_verdict = false;
  double cp_min_defect_eigenvalue = 0;
  double max_trace_drift = 0;       // max |Tr rho(t) - 1|
  double max_trace_drift_rate = 0;  // max |Tr rho(t) - 1| / t
  double max_tail_mass = 0;
  double max_unitarity_defect = 0;  // of the truncated Weyl matrices
  double max_char_deviation = 0;
  double max_occ_deviation = 0;
  std::vector<ProbeDeviation> deviations;
  std::vector<std::string> absent_columns;
  std::vector<std::string> warnings;
  std::vector<std::string> failures;
  bool passed = true;
};

/// Evolves the initial product Gibbs state and streams one record per sample time.
RunSummary run_scenario(const ScenarioConfig& cfg, const RecordSink& sink);

/// Runs both pipelines and compares characteristic functions at every probe.
RunSummary cross_validate(const ScenarioConfig& cfg, const RecordSink& sink = {});

nlohmann::json summary_to_json(const ScenarioConfig& cfg, const RunSummary& summary);

/// Writes trajectory.csv rows; numbers use 17 significant digits.
class CsvTrajectoryWriter {
 public:
  CsvTrajectoryWriter(std::ostream& out, int n_modes, int n_probes);
  void write(const TrajectoryRecord& r);

 private:
  std::ostream& out_;
  int n_modes_;
  int n_probes_;
};

std::string format_number(double x);

}  // namespace qfs
