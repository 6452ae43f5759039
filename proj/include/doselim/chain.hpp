// The m-stage chain interferometer: exact propagation with dose accounting,
// quadratic-order J and d, the analytic optimal tau schedule, and large-m
// limits.
#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "doselim/core_model.hpp"
#include "doselim/qfi.hpp"
#include "doselim/report.hpp"

namespace doselim {

// One exact run: exit amplitudes plus the dose deposited in the sample,
// pass by pass.
struct CiRun {
  ProbeState exit_state;
  double dose;
  std::vector<double> per_pass_dose;
};

namespace detail {

// J to quadratic order in tau:
//   4 eta_p eta_rt^{m-1} eta_d | sum_k (m-k) eta^{(m-k)/2} tau_k |^2
inline double perturbative_j(std::span<const double> taus, const LossBudget& b) {
  const int m = static_cast<int>(taus.size());
  const double sqrt_eta = std::sqrt(b.eta);
  double acc = 0.0;
  for (int k = 0; k < m; ++k)
    acc += static_cast<double>(m - k) * std::pow(sqrt_eta, static_cast<double>(m - k)) * taus[k];
  return 4.0 * b.eta_p * std::pow(b.eta_rt, static_cast<double>(m - 1)) * b.eta_d * acc * acc;
}

// d to quadratic order in tau:
//   eta_p sum_k eta_rt^k | sum_{k'<=k} eta^{(k-k')/2} tau_{k'} |^2
inline double perturbative_d(std::span<const double> taus, const LossBudget& b) {
  const double sqrt_eta = std::sqrt(b.eta);
  double in_sample = 0.0;  // sum_{k'<=k} eta^{(k-k')/2} tau_{k'}
  double rt_pow = 1.0;     // eta_rt^k
  double d = 0.0;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    in_sample = sqrt_eta * in_sample + taus[k];
    d += rt_pow * in_sample * in_sample;
    rt_pow *= b.eta_rt;
  }
  return b.eta_p * d;
}

inline void require_perturbative(const TauSchedule& s, const char* op) {
  if (!s.perturbative_valid())
    throw std::domain_error(std::string(op) +
                            ": schedule is not perturbative-valid (max tau > 0.05)");
}

}  // namespace detail

// Exact all-orders propagation. Preparation loss acts up front; each stage
// applies the beamsplitter, records |psi_1|^2 incident on the sample, then the
// sample pass and reference phase, then round-trip loss (skipped after the
// final stage); detection loss acts last. Dose is read off the unnormalized
// amplitudes, so eta_p and eta_rt reduce later-pass dose while eta_d never
// affects it.
inline CiRun ci_exact_propagate(const TauSchedule& schedule, const LossBudget& budget,
                                const PhaseConfig& phases = {}) {
  const int m = schedule.stage_count();
  ProbeState state = uniform_loss_op(budget.eta_p) * ProbeState::initial();
  const Mat2 stage_phase =
      reference_phase_op(phases.gamma) * sample_op(budget.eta, phases.theta);
  const Mat2 rt_loss = uniform_loss_op(budget.eta_rt);

  std::vector<double> per_pass(static_cast<std::size_t>(m));
  double dose = 0.0;
  for (int k = 0; k < m; ++k) {
    state = beamsplitter_op(schedule.taus[static_cast<std::size_t>(k)]) * state;
    per_pass[static_cast<std::size_t>(k)] = std::norm(state.samp_amp);
    dose += per_pass[static_cast<std::size_t>(k)];
    state = stage_phase * state;
    if (k + 1 < m) state = rt_loss * state;
    if (state.norm_sq() > 1.0 + kNormSlack)
      throw std::logic_error("ci_exact_propagate: amplitude norm grew above 1");
  }
  state = uniform_loss_op(budget.eta_d) * state;
  return {state, dose, std::move(per_pass)};
}

inline double ci_perturbative_j(const TauSchedule& schedule, const LossBudget& budget) {
  detail::require_perturbative(schedule, "ci_perturbative_j");
  return detail::perturbative_j(schedule.taus, budget);
}

inline double ci_perturbative_d(const TauSchedule& schedule, const LossBudget& budget) {
  detail::require_perturbative(schedule, "ci_perturbative_d");
  return detail::perturbative_d(schedule.taus, budget);
}

// Analytic xi-maximizing schedule. With x = eta_rt * sqrt(eta):
//   tau_0 = eps x^m,  tau_{k>0} = eps (1 - eta_rt eta) x^{m-k}.
// The lossless prescription is the eta_rt = 1 special case.
inline TauSchedule ci_optimal_taus(int m, const LossBudget& budget, double epsilon) {
  if (m < 1) throw std::domain_error("ci_optimal_taus: m must be >= 1");
  if (!(epsilon > 0.0 && epsilon <= kPerturbativeTauMax))
    throw std::domain_error("ci_optimal_taus: epsilon must be in (0, 0.05]");
  const double x = budget.eta_rt * std::sqrt(budget.eta);
  std::vector<double> taus(static_cast<std::size_t>(m));
  taus[0] = epsilon * std::pow(x, static_cast<double>(m));
  for (int k = 1; k < m; ++k)
    taus[static_cast<std::size_t>(k)] =
        epsilon * (1.0 - budget.eta_rt * budget.eta) * std::pow(x, static_cast<double>(m - k));
  return TauSchedule(std::move(taus), epsilon);
}

// xi from the quadratic-order J and d. j_per_unit and dose_per_unit are
// reported per unit epsilon^2 of the schedule's scale; xi is scale-free.
// The spec echo tags the run as a CIO evaluation at this stage count.
inline EfficiencyReport ci_xi(const TauSchedule& schedule, const LossBudget& budget) {
  detail::require_perturbative(schedule, "ci_xi");
  if (schedule.all_zero())
    throw DegenerateScheduleError("ci_xi: all-zero tau schedule has zero dose");
  const double e2 = schedule.epsilon * schedule.epsilon;
  const double j = detail::perturbative_j(schedule.taus, budget) / e2;
  const double d = detail::perturbative_d(schedule.taus, budget) / e2;
  return make_report(SchemeSpec::cio(schedule.stage_count(), budget), j, d);
}

// Exact-route efficiency: QFI via finite differencing of the exact
// propagator, dose from the exact run.
struct CiExactXi {
  double j;
  double dose;
  double xi;
};

inline CiExactXi ci_exact_xi(const TauSchedule& schedule, const LossBudget& budget,
                             const PhaseConfig& phases = {}) {
  if (schedule.all_zero())
    throw DegenerateScheduleError("ci_exact_xi: all-zero tau schedule has zero dose");
  const CiRun run = ci_exact_propagate(schedule, budget, phases);
  const auto propagate = [&](double theta) {
    return ci_exact_propagate(schedule, budget, PhaseConfig(theta, phases.gamma)).exit_state;
  };
  const ProbeState derivative = fd_derivative(propagate, phases.theta);
  const QfiResult q = qfi_conditional(run.exit_state, derivative);
  return {q.j, run.dose, q.j / run.dose};
}

// Exact xi at a list of detunings delta = theta - gamma (gamma held at 0).
inline std::vector<std::pair<double, double>> ci_detuning_scan(
    const TauSchedule& schedule, const LossBudget& budget,
    std::span<const double> detunings) {
  if (schedule.all_zero())
    throw DegenerateScheduleError("ci_detuning_scan: all-zero tau schedule has zero dose");
  std::vector<std::pair<double, double>> out;
  out.reserve(detunings.size());
  for (double delta : detunings)
    out.emplace_back(delta, ci_exact_xi(schedule, budget, PhaseConfig(delta, 0.0)).xi);
  return out;
}

// Large-m limits of the optimal lossless schedule, per unit epsilon^2.
inline double ci_limit_j_per_eps2(double eta) {
  if (eta == 1.0) throw DivergentLimitError("ci_limit_j_per_eps2: diverges at eta = 1");
  if (!(eta >= 0.0 && eta < 1.0))
    throw std::domain_error("ci_limit_j_per_eps2: eta must be in [0, 1)");
  const double r = eta / (1.0 - eta);
  return 4.0 * r * r;
}

inline double ci_limit_d_per_eps2(double eta) {
  if (eta == 1.0) throw DivergentLimitError("ci_limit_d_per_eps2: diverges at eta = 1");
  if (!(eta >= 0.0 && eta < 1.0))
    throw std::domain_error("ci_limit_d_per_eps2: eta must be in [0, 1)");
  return eta / (1.0 - eta);
}

// Large-m efficiency of the optimal schedule under loss.
inline double ci_xi_limit(const LossBudget& budget) {
  const double denom = 1.0 - budget.eta * budget.eta_rt;
  if (!(denom > 0.0))
    throw DivergentLimitError("ci_xi_limit: diverges at eta * eta_rt = 1");
  return 4.0 * budget.eta * budget.eta_d / denom;
}

}  // namespace doselim
