// Numerical maximization of xi over tau schedules. Deterministic
// derivative-free coordinate search with seeded multiplicative restarts;
// xi is scale-invariant, so the search runs over directions and the result
// is gauge-fixed to ||tau|| = kDefaultEpsilon.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "doselim/chain.hpp"

namespace doselim {

struct OptimizerConfig {
  int max_iters = 400;     // coordinate sweeps per start
  double rel_tol = 1e-12;  // stop once a sweep improves xi by less, relatively
  int restarts = 4;
  std::uint64_t seed = 0x5eed5eed5eedull;
  std::vector<double> initial_direction;  // empty -> uniform
  std::vector<int> coordinate_order;      // empty -> 0..m-1
};

struct OptimizationResult {
  TauSchedule best_taus;
  double best_xi;
  int iterations_used;  // total sweeps across all restarts
  bool converged;       // flag of the run that produced best_xi
};

// Converged rows with shortfall above this fail the prescription check.
inline constexpr double kPrescriptionShortfallTol = 1e-6;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline double unit_double(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

// Golden-section maximization on [lo, hi]; assumes f is unimodal there.
template <typename F>
double golden_max(F&& f, double lo, double hi, int iters = 90) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

inline OptimizationResult optimize_taus(int m, const LossBudget& budget,
                                        const OptimizerConfig& config = {}) {
  if (m < 1) throw std::domain_error("optimize_taus: m must be >= 1");
  if (config.max_iters < 1)
    throw std::domain_error("optimize_taus: max_iters must be >= 1");
  if (!(config.rel_tol > 0.0))
    throw std::domain_error("optimize_taus: rel_tol must be > 0");
  if (config.restarts < 1)
    throw std::domain_error("optimize_taus: restarts must be >= 1");

  std::vector<int> order(static_cast<std::size_t>(m));
  if (config.coordinate_order.empty()) {
    std::iota(order.begin(), order.end(), 0);
  } else {
    if (static_cast<int>(config.coordinate_order.size()) != m)
      throw std::domain_error("optimize_taus: coordinate_order size must equal m");
    order = config.coordinate_order;
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < m; ++k)
      if (sorted[static_cast<std::size_t>(k)] != k)
        throw std::domain_error("optimize_taus: coordinate_order must permute 0..m-1");
  }

  const auto xi_of = [&](const std::vector<double>& taus) -> double {
    const double d = detail::perturbative_d(taus, budget);
    if (!(d > 0.0)) return 0.0;
    return detail::perturbative_j(taus, budget) / d;
  };

  struct RunOut {
    std::vector<double> taus;
    double xi;
    int sweeps;
    bool converged;
  };

  const auto run = [&](std::vector<double> taus) -> RunOut {
    double last = xi_of(taus);
    int sweeps = 0;
    bool converged = false;
    while (sweeps < config.max_iters) {
      ++sweeps;
      for (int k : order) {
        const auto along = [&](double t) {
          const double saved = taus[static_cast<std::size_t>(k)];
          taus[static_cast<std::size_t>(k)] = t;
          const double v = xi_of(taus);
          taus[static_cast<std::size_t>(k)] = saved;
          return v;
        };
        double scale = *std::max_element(taus.begin(), taus.end());
        if (!(scale > 0.0)) scale = 1.0;
        double hi = std::max(2.0 * taus[static_cast<std::size_t>(k)], 0.25 * scale);
        double f_hi = along(hi);
        for (int e = 0; e < 60; ++e) {
          const double f_next = along(2.0 * hi);
          if (f_next <= f_hi) break;
          hi *= 2.0;
          f_hi = f_next;
        }
        taus[static_cast<std::size_t>(k)] = detail::golden_max(along, 0.0, 2.0 * hi);
      }
      const double cur = xi_of(taus);
      if (cur - last <= config.rel_tol * std::max(last, 1e-300)) {
        last = std::max(cur, last);
        converged = true;
        break;
      }
      last = cur;
    }
    const double final_xi = xi_of(taus);
    return {std::move(taus), final_xi, sweeps, converged};
  };

  std::vector<double> start;
  if (config.initial_direction.empty()) {
    start.assign(static_cast<std::size_t>(m), 1.0);
  } else {
    if (static_cast<int>(config.initial_direction.size()) != m)
      throw std::domain_error("optimize_taus: initial_direction size must equal m");
    for (double t : config.initial_direction)
      if (!(t >= 0.0))
        throw std::domain_error("optimize_taus: initial_direction must be non-negative");
    start = config.initial_direction;
    if (std::all_of(start.begin(), start.end(), [](double t) { return t == 0.0; }))
      throw DegenerateScheduleError("optimize_taus: initial_direction is all zero");
  }

  RunOut best = run(std::move(start));
  int total_sweeps = best.sweeps;
  std::uint64_t rng = config.seed;
  for (int r = 1; r < config.restarts; ++r) {
    std::vector<double> perturbed = best.taus;
    for (double& t : perturbed) {
      const double u = 2.0 * detail::unit_double(rng) - 1.0;
      t *= std::exp(0.5 * u);
    }
    if (std::all_of(perturbed.begin(), perturbed.end(), [](double t) { return t == 0.0; }))
      perturbed.assign(static_cast<std::size_t>(m), 1.0);
    RunOut out = run(std::move(perturbed));
    total_sweeps += out.sweeps;
    if (out.xi > best.xi) best = std::move(out);  // ties keep the earlier restart
  }

  if (!(best.xi > 0.0))
    throw DegenerateScheduleError("optimize_taus: xi is identically zero for this budget");

  double norm_sq = 0.0;
  for (double t : best.taus) norm_sq += t * t;
  const double scale = kDefaultEpsilon / std::sqrt(norm_sq);
  for (double& t : best.taus) t *= scale;
  return {TauSchedule(std::move(best.taus), kDefaultEpsilon), best.xi, total_sweeps,
          best.converged};
}

struct PrescriptionCheckRow {
  int m;
  double xi_prescription;
  double xi_optimized;
  double shortfall;  // max(0, (optimized - prescription) / prescription)
  bool converged;
};

struct PrescriptionReport {
  std::vector<PrescriptionCheckRow> rows;
  double max_shortfall;
  bool all_converged;
  bool ok;  // every converged row within kPrescriptionShortfallTol
};

// Compares the analytic schedule against the numerical optimum for each m.
// Optimizer non-convergence flags the row instead of failing the report.
inline PrescriptionReport verify_prescription(std::span<const int> m_list,
                                              const LossBudget& budget,
                                              const OptimizerConfig& config = {}) {
  PrescriptionReport report{{}, 0.0, true, true};
  for (int m : m_list) {
    const double xi_presc = ci_xi(ci_optimal_taus(m, budget, kDefaultEpsilon), budget).xi;
    const OptimizationResult opt = optimize_taus(m, budget, config);
    const double shortfall = std::max(0.0, (opt.best_xi - xi_presc) / xi_presc);
    report.rows.push_back({m, xi_presc, opt.best_xi, shortfall, opt.converged});
    report.max_shortfall = std::max(report.max_shortfall, shortfall);
    report.all_converged = report.all_converged && opt.converged;
    if (opt.converged && shortfall > kPrescriptionShortfallTol) report.ok = false;
  }
  return report;
}

}  // namespace doselim
