#include <algorithm>
#include <cmath>
#include <memory>

#include "qfs/fock.hpp"
#include "qfs/quasifree.hpp"
#include "qfs/scenario.hpp"

namespace qfs {

namespace {

std::vector<double> sample_times(const ScenarioConfig& cfg) {
  const auto last = static_cast<long>(std::floor(cfg.t_max / cfg.sample_dt * (1 + 1e-12)));
  std::vector<double> times;
  times.reserve(last + 1);
  for (long k = 0; k <= last; ++k) times.push_back(std::min(k * cfg.sample_dt, cfg.t_max));
  return times;
}

// Closed-form pipeline: Gibbs covariance pushed through the dual map.
class ClosedFormPipeline {
 public:
  explicit ClosedFormPipeline(const ScenarioConfig& cfg)
      : cfg_(cfg), initial_(gibbs_covariance(cfg.beta0, cfg.beta, cfg.params.N)) {}

  struct Sample {
    CovarianceState<double> state;
    RVector<double> gamma;
  };

  Sample at(double t) const {
    const auto map = repeated_interaction_map(cfg_.params, t, cfg_.tol.sv);
    auto state = evolve_covariance(map, initial_, cfg_.tol.psd);
    RVector<double> g(cfg_.probes.size());
    for (std::size_t j = 0; j < cfg_.probes.size(); ++j) g(j) = gamma(map, cfg_.probes[j]);
    return {std::move(state), std::move(g)};
  }

 private:
  const ScenarioConfig& cfg_;
  CovarianceState<double> initial_;
};

// Brute-force pipeline: truncated Gibbs density matrix integrated by RK4.
class OraclePipeline {
 public:
  explicit OraclePipeline(const ScenarioConfig& cfg)
      : modes_(build_modes<double>(cfg.params.N, *cfg.cutoff_M, cfg.dimension_budget)),
        rk_(cfg.params, modes_, cfg.rk4_dt),
        // Tail checks are reported per record rather than enforced at construction.
        rho_(gibbs_rho(cfg.beta0, cfg.beta, modes_, 1.0).rho()) {}

  void advance_to(double t) {
    rk_.advance(rho_, now_, t);
    now_ = t;
  }

  const TruncatedModes<double>& modes() const { return modes_; }
  const DenseOp<double>& rho() const { return rho_; }

 private:
  TruncatedModes<double> modes_;
  LindbladIntegrator<double> rk_;
  DenseOp<double> rho_;
  double now_ = 0;
};

void check_record(const TrajectoryRecord& r, double previous_time, bool first) {
  if (!first && !(r.time > previous_time))
    throw InvariantBreach("trajectory times not increasing at step " +
                          std::to_string(r.step_index));
  for (Eigen::Index k = 0; k < r.occ.size(); ++k)
    if (!(r.occ(k) >= -1e-8))
      throw InvariantBreach("negative occupation " + format_number(r.occ(k)) + " for mode " +
                            std::to_string(k) + " at t=" + format_number(r.time));
}

}  // namespace

RunSummary run_scenario(const ScenarioConfig& cfg, const RecordSink& sink) {
  const auto& p = cfg.params;
  require_valid(p);

  RunSummary s;
  s.mode = cfg.mode;
  s.kappa = kappa(p);
  s.relative_bound_c = relative_bound_c(p);
  {
    const auto cert = cp_certificate(repeated_interaction_map(p, cfg.t_max, cfg.tol.sv), cfg.tol.cp);
    s.cp_verdict = cert.completely_positive;
    s.cp_min_defect_eigenvalue = cert.min_defect_eigenvalue;
  }
  for (std::size_t j = 0; j < cfg.probes.size(); ++j)
    if (cfg.probes[j].norm() > cfg.tol.probe_radius)
      s.warnings.push_back("probe " + std::to_string(j) + " exceeds probe radius " +
                           format_number(cfg.tol.probe_radius));

  const bool closed = cfg.mode != RunMode::oracle;
  const bool oracle = cfg.mode != RunMode::closed_form;
  if (!closed) s.absent_columns = {"gamma_probe", "min_eig_X_minus_I"};
  if (!oracle) s.absent_columns = {"trace_err"};

  std::unique_ptr<ClosedFormPipeline> cf;
  std::unique_ptr<OraclePipeline> orc;
  if (closed) cf = std::make_unique<ClosedFormPipeline>(cfg);
  if (oracle) {
    if (!cfg.cutoff_M) throw DomainError("oracle pipeline requires cutoff_M");
    orc = std::make_unique<OraclePipeline>(cfg);
  }

  // Weyl matrices are fixed per probe; only rho changes in time.
  std::vector<DenseOp<double>> weyl;
  if (closed && oracle) {
    for (const auto& z : cfg.probes) {
      auto w = weyl_matrix(orc->modes(), z, cfg.tol.probe_radius);
      s.max_unitarity_defect = std::max(s.max_unitarity_defect, w.unitarity_defect);
      weyl.push_back(std::move(w.W));
    }
  }

  const auto times = sample_times(cfg);
  double previous = 0;
  for (std::size_t step = 0; step < times.size(); ++step) {
    const double t = times[step];
    TrajectoryRecord r;
    r.step_index = static_cast<long>(step);
    r.time = t;
    r.window_n = active_window(p, t);
    r.gamma_probe = RVector<double>::Zero(cfg.probes.size());

    std::optional<ClosedFormPipeline::Sample> cs;
    if (closed) {
      cs = cf->at(t);
      r.occ = occupations(cs->state);
      r.gamma_probe = cs->gamma;
      r.min_eig_X_minus_I = cs->state.min_eig_minus_identity();
    }
    if (oracle) {
      orc->advance_to(t);
      const auto& rho = orc->rho();
      // Full spectra get expensive quickly; beyond this size only the final state is checked.
      const bool last = step + 1 == times.size();
      const auto diag = DensityMatrix<double>::diagnose(rho, rho.rows() <= 1024 || last);
      r.trace_err = diag.trace_error;
      s.max_trace_drift = std::max(s.max_trace_drift, diag.trace_error);
      if (t > 0) s.max_trace_drift_rate = std::max(s.max_trace_drift_rate, diag.trace_error / t);
      if (diag.hermiticity > cfg.tol.herm || diag.min_eigenvalue < -1e-8)
        throw InvariantBreach("oracle state left the density-matrix set at t=" +
                              format_number(t) + " (hermiticity " +
                              format_number(diag.hermiticity) + ", min eigenvalue " +
                              format_number(diag.min_eigenvalue) + ")");
      s.max_tail_mass = std::max(s.max_tail_mass, tail_mass(rho, orc->modes()));
      const RVector<double> occ = mode_occupations(rho, orc->modes());
      if (closed) {
        s.max_occ_deviation = std::max(s.max_occ_deviation, (occ - r.occ).cwiseAbs().maxCoeff());
        for (std::size_t j = 0; j < cfg.probes.size(); ++j) {
          ProbeDeviation d;
          d.time = t;
          d.probe = static_cast<int>(j);
          d.closed_form = char_function(cs->state, cfg.probes[j]);
          d.oracle = trace_product(rho, weyl[j]);
          d.deviation = std::abs(d.oracle - Complex<double>(d.closed_form));
          s.max_char_deviation = std::max(s.max_char_deviation, d.deviation);
          s.deviations.push_back(d);
        }
      } else {
        r.occ = occ;
      }
    }

    check_record(r, previous, step == 0);
    previous = t;
    ++s.records;
    if (sink) sink(r);
  }

  if (oracle) {
    if (s.max_tail_mass > cfg.tol.tail_mass)
      s.failures.push_back("tail mass " + format_number(s.max_tail_mass) +
                           " exceeds " + format_number(cfg.tol.tail_mass) +
                           ": cutoff M=" + std::to_string(*cfg.cutoff_M) +
                           " too small for a trustworthy comparison");
    if (s.max_trace_drift_rate > cfg.tol.trace_drift)
      s.failures.push_back("trace drift rate " + format_number(s.max_trace_drift_rate) +
                           " exceeds " + format_number(cfg.tol.trace_drift));
  }
  if (closed && oracle && s.max_char_deviation > cfg.tol.xval)
    s.failures.push_back("characteristic-function deviation " +
                         format_number(s.max_char_deviation) + " exceeds " +
                         format_number(cfg.tol.xval));
  if (!s.cp_verdict) s.failures.push_back("composite map failed the CP certificate");
  s.passed = s.failures.empty();
  return s;
}

RunSummary cross_validate(const ScenarioConfig& cfg, const RecordSink& sink) {
  if (cfg.mode != RunMode::cross_validate)
    throw DomainError("cross_validate: config mode must be cross_validate");
  return run_scenario(cfg, sink);
}

}  // namespace qfs
