// Self-check suites behind the `validate` CLI command: exact-vs-perturbative
// convergence, multi-pass equivalence, large-m limit recovery and
// prescription optimality.
#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "doselim/chain.hpp"
#include "doselim/optimizer.hpp"
#include "doselim/schemes.hpp"

namespace doselim {

struct ValidationGroup {
  std::string name;
  bool passed;
  std::string detail;
};

namespace detail {

inline std::string fmt_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

// |xi_exact - xi_pert| / xi_pert for the prescription schedule at scale eps.
inline double perturbative_gap(int m, const LossBudget& budget, double eps) {
  const TauSchedule schedule = ci_optimal_taus(m, budget, eps);
  const double xi_pert = ci_xi(schedule, budget).xi;
  const double xi_exact = ci_exact_xi(schedule, budget).xi;
  return std::abs(xi_exact - xi_pert) / xi_pert;
}

// Exact and perturbative xi agree to O(eps^2); full mode also checks that
// halving eps shrinks the gap fourfold.
inline ValidationGroup validate_perturbative_convergence(bool quick) {
  bool ok = true;
  double worst_gap = 0.0;
  double worst_ratio = 4.0;
  for (int m : {2, 4, 8}) {
    for (double eta : {0.5, 0.9}) {
      const LossBudget budget = LossBudget::lossless(eta);
      const double gap1 = perturbative_gap(m, budget, 1e-3);
      worst_gap = std::max(worst_gap, gap1);
      if (gap1 > 1e-4) ok = false;
      if (!quick) {
        const double gap2 = perturbative_gap(m, budget, 5e-4);
        const double ratio = gap1 / gap2;
        if (std::abs(ratio - 4.0) > std::abs(worst_ratio - 4.0)) worst_ratio = ratio;
        if (!(ratio >= 3.5 && ratio <= 4.5)) ok = false;
      }
    }
  }
  std::string detail = "max rel gap " + detail::fmt_sci(worst_gap) + " (limit 1e-4)";
  if (!quick)
    detail += ", worst eps-halving ratio " + detail::fmt_sci(worst_ratio) + " (expect ~4)";
  return {"perturbative-convergence", ok, detail};
}

// A chain with only tau_0 active is an m-pass interferometer; xi must match
// the closed form.
inline ValidationGroup validate_mp_equivalence() {
  bool ok = true;
  double worst = 0.0;
  const LossBudget budgets[] = {LossBudget::lossless(0.5), LossBudget::lossless(0.9),
                                LossBudget(0.5, 0.8, 0.95, 0.9),
                                LossBudget(0.9, 0.8, 0.95, 0.9)};
  for (const LossBudget& budget : budgets) {
    for (int m = 1; m <= 32; ++m) {
      std::vector<double> taus(static_cast<std::size_t>(m), 0.0);
      taus[0] = kDefaultEpsilon;
      const double xi_ci = ci_xi(TauSchedule(taus, kDefaultEpsilon), budget).xi;
      const double xi_closed = xi_mp(m, budget).xi;
      const double rel = std::abs(xi_ci - xi_closed) / xi_closed;
      worst = std::max(worst, rel);
      if (rel > 1e-10) ok = false;
    }
  }
  return {"mp-equivalence", ok,
          "max rel deviation " + detail::fmt_sci(worst) + " (limit 1e-10)"};
}

// The prescription's J and d approach their large-m values.
inline ValidationGroup validate_limit_recovery() {
  const double eta = 0.9;
  const LossBudget budget = LossBudget::lossless(eta);
  bool ok = true;
  std::string detail;

  const double j_limit = ci_limit_j_per_eps2(eta);  // 324 at eta = 0.9
  const double d_limit = ci_limit_d_per_eps2(eta);  // 9 at eta = 0.9
  {
    const TauSchedule s = ci_optimal_taus(200, budget, kDefaultEpsilon);
    const double e2 = s.epsilon * s.epsilon;
    const double j = ci_perturbative_j(s, budget) / e2;
    const double d = ci_perturbative_d(s, budget) / e2;
    if (std::abs(j - j_limit) > 0.01 * j_limit) ok = false;
    if (std::abs(d - d_limit) > 0.01 * d_limit) ok = false;
    detail = "m=200: J/eps^2 " + detail::fmt_sci(j) + ", d/eps^2 " + detail::fmt_sci(d);
  }
  {
    const TauSchedule s = ci_optimal_taus(500, budget, kDefaultEpsilon);
    const double e2 = s.epsilon * s.epsilon;
    const double j = ci_perturbative_j(s, budget) / e2;
    const double d = ci_perturbative_d(s, budget) / e2;
    if (std::abs(j - j_limit) > 0.5) ok = false;
    if (std::abs(d - d_limit) > 0.01) ok = false;
  }
  return {"limit-recovery", ok, detail};
}

// Numerical optimization must not beat the analytic schedule by more than
// the prescription tolerances.
inline ValidationGroup validate_prescription_optimality(bool quick) {
  bool ok = true;
  double worst_small = 0.0;  // m in {2, 3}
  double worst_large = 0.0;  // m in {4, 8}
  bool all_converged = true;
  for (double eta : {0.5, 0.9}) {
    const LossBudget budget = LossBudget::lossless(eta);
    const std::vector<int> small{2, 3};
    const PrescriptionReport a = verify_prescription(small, budget);
    worst_small = std::max(worst_small, a.max_shortfall);
    all_converged = all_converged && a.all_converged;
    if (a.max_shortfall > 1e-6) ok = false;
    if (!quick) {
      const std::vector<int> large{4, 8};
      const PrescriptionReport b = verify_prescription(large, budget);
      worst_large = std::max(worst_large, b.max_shortfall);
      all_converged = all_converged && b.all_converged;
      if (b.max_shortfall > 1e-4) ok = false;
    }
  }
  if (!all_converged) ok = false;
  std::string detail = "max shortfall m<=3: " + detail::fmt_sci(worst_small);
  if (!quick) detail += ", m in {4,8}: " + detail::fmt_sci(worst_large);
  if (!all_converged) detail += " [optimizer did not converge]";
  return {"prescription-optimality", ok, detail};
}

inline std::vector<ValidationGroup> run_validation(bool quick) {
  return {validate_perturbative_convergence(quick), validate_mp_equivalence(),
          validate_limit_recovery(), validate_prescription_optimality(quick)};
}

}  // namespace doselim
