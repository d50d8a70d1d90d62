#include <cstdio>

#include "qfs/scenario.hpp"

namespace qfs {

using nlohmann::json;

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTrajectoryWriter::CsvTrajectoryWriter(std::ostream& out, int n_modes, int n_probes)
    : out_(out), n_modes_(n_modes), n_probes_(n_probes) {
  out_ << "step,time,window_n";
  for (int k = 0; k < n_modes_; ++k) out_ << ",occ_" << k;
  for (int j = 0; j < n_probes_; ++j) out_ << ",gamma_probe_" << j;
  out_ << ",trace_err,min_eig_X_minus_I\n";
}

void CsvTrajectoryWriter::write(const TrajectoryRecord& r) {
  out_ << r.step_index << ',' << format_number(r.time) << ',' << r.window_n;
  for (int k = 0; k < n_modes_; ++k) out_ << ',' << format_number(r.occ(k));
  for (int j = 0; j < n_probes_; ++j) out_ << ',' << format_number(r.gamma_probe(j));
  out_ << ',' << format_number(r.trace_err) << ',' << format_number(r.min_eig_X_minus_I) << '\n';
}

json summary_to_json(const ScenarioConfig& cfg, const RunSummary& s) {
  json j;
  j["config"] = config_to_json(cfg);
  j["mode"] = to_string(s.mode);
  j["records"] = s.records;
  j["kappa"] = s.kappa;
  j["relative_bound_c"] = s.relative_bound_c;
  j["cp_certificate"] = {{"completely_positive", s.cp_verdict},
                         {"min_defect_eigenvalue", s.cp_min_defect_eigenvalue},
                         {"map", "composite dual evolution over [0, t_max)"}};
  j["max_trace_drift"] = s.max_trace_drift;
  j["max_trace_drift_rate"] = s.max_trace_drift_rate;
  j["max_tail_mass"] = s.max_tail_mass;
  j["max_weyl_unitarity_defect"] = s.max_unitarity_defect;
  j["max_char_deviation"] = s.max_char_deviation;
  j["max_occ_deviation"] = s.max_occ_deviation;
  j["absent_columns"] = s.absent_columns;
  j["warnings"] = s.warnings;
  j["failures"] = s.failures;
  j["verdict"] = s.passed ? "pass" : "fail";
  json devs = json::array();
  for (const auto& d : s.deviations)
    devs.push_back({{"time", d.time},
                    {"probe", d.probe},
                    {"closed_form", d.closed_form},
                    {"oracle_re", d.oracle.real()},
                    {"oracle_im", d.oracle.imag()},
                    {"deviation", d.deviation}});
  j["char_deviations"] = devs;
  return j;
}

}  // namespace qfs
