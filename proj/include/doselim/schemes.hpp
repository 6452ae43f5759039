// Closed-form dose efficiencies for every measurement family, optimal
// integer-parameter search, and squeezing-equivalence conversions.
//
// Unit conventions for the reported J and d:
//   SP, NOON, SQZ, MPSQZ : per unit |alpha|^2 of sample-arm intensity
//   MP                   : per probe particle
//   CIC, CIO             : per unit epsilon^2 of the beamsplitter scale
// xi = J/d is unit-free in every case.
#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "doselim/chain.hpp"
#include "doselim/report.hpp"

namespace doselim {

namespace detail {

// sum_{k=0}^{m-1} y^k, exact at y == 1.
inline double geom_sum(double y, int m) {
  if (y == 1.0) return static_cast<double>(m);
  return (1.0 - std::pow(y, static_cast<double>(m))) / (1.0 - y);
}

// sqrt(n(n+1)) - n, evaluated without cancellation. Tends to 1/2 as n grows.
inline double sqz_gap(double n_sq) {
  if (n_sq <= 0.0) return 0.0;
  if (n_sq > 1e12) return 0.5 - 1.0 / (8.0 * n_sq);
  return n_sq / (std::sqrt(n_sq * (n_sq + 1.0)) + n_sq);
}

// Denominator of the squeezed-state efficiency with total transmissivity
// eta_tot: 2 eta_tot n - 2 eta_tot sqrt(n(n+1)) + 1 = 1 - 2 eta_tot g(n).
inline double sqz_denominator(double eta_tot, double n_sq) {
  return 1.0 - 2.0 * eta_tot * sqz_gap(n_sq);
}

}  // namespace detail

// Single-particle single-pass interferometer in the small sample-arm
// intensity limit.
inline EfficiencyReport xi_sp(const LossBudget& b) {
  const SchemeSpec spec = SchemeSpec::sp(b);
  const double j = 4.0 * b.eta_p * b.eta * b.eta_d;
  const double d = b.eta_p;
  return make_report(spec, j, d);
}

// Unbalanced NOON state of size n.
inline EfficiencyReport xi_noon(int n, const LossBudget& b) {
  const SchemeSpec spec = SchemeSpec::noon(n, b);
  const double nn = static_cast<double>(n);
  const double j = 4.0 * nn * nn * std::pow(b.eta_p * b.eta * b.eta_d, nn);
  const double d = b.eta_p * nn;
  return make_report(spec, j, d);
}

// Single particle passed m times through the sample.
inline EfficiencyReport xi_mp(int m, const LossBudget& b) {
  const SchemeSpec spec = SchemeSpec::mp(m, b);
  const double mm = static_cast<double>(m);
  const double j = 4.0 * mm * mm * b.eta_p * std::pow(b.eta, mm) *
                   std::pow(b.eta_rt, mm - 1.0) * b.eta_d;
  const double d = b.eta_p * detail::geom_sum(b.eta_rt * b.eta, m);
  return make_report(spec, j, d);
}

// Squeezed Gaussian probe with n_sq particles contributing to the squeezing.
// Loss enters through eta_tot = eta_p eta eta_d in the denominator; at
// n_sq -> infinity this reaches 4 eta eta_d / (1 - eta_p eta eta_d).
inline EfficiencyReport xi_sqz(double n_sq, const LossBudget& b) {
  const SchemeSpec spec = SchemeSpec::sqz(n_sq, b);
  const double eta_tot = b.eta_p * b.eta * b.eta_d;
  const double denom = detail::sqz_denominator(eta_tot, n_sq);
  const double j = 4.0 * b.eta_p * b.eta * b.eta_d / denom;
  const double d = b.eta_p;
  return make_report(spec, j, d);
}

// m-pass squeezed-state measurement at the n_sq -> infinity bound.
inline EfficiencyReport xi_mpsqz(int m, const LossBudget& b) {
  const SchemeSpec spec = SchemeSpec::mpsqz(m, b);
  const double mm = static_cast<double>(m);
  const double eta_tot = b.eta_p * std::pow(b.eta, mm) *
                         std::pow(b.eta_rt, mm - 1.0) * b.eta_d;
  if (!(eta_tot < 1.0))
    throw DivergentLimitError("xi_mpsqz: diverges at total transmissivity 1");
  const double j = 4.0 * mm * mm * eta_tot / (1.0 - eta_tot);
  const double d = b.eta_p * detail::geom_sum(b.eta_rt * b.eta, m);
  return make_report(spec, j, d);
}

// Single-particle squeezed bound: the m = 1 case of xi_mpsqz.
inline EfficiencyReport xi_sqz_limit(const LossBudget& b) { return xi_mpsqz(1, b); }

// Chain interferometer with a constant infinitesimal beamsplitter amplitude.
inline EfficiencyReport xi_cic(int m, const LossBudget& b) {
  const SchemeSpec spec = SchemeSpec::cic(m, b);
  const TauSchedule schedule(std::vector<double>(static_cast<std::size_t>(m), kDefaultEpsilon),
                             kDefaultEpsilon);
  const double e2 = schedule.epsilon * schedule.epsilon;
  const double j = ci_perturbative_j(schedule, b) / e2;
  const double d = ci_perturbative_d(schedule, b) / e2;
  return make_report(spec, j, d);
}

// Chain interferometer with the per-stage optimized beamsplitter amplitudes.
inline EfficiencyReport xi_cio(int m, const LossBudget& b) {
  const SchemeSpec spec = SchemeSpec::cio(m, b);
  const EfficiencyReport ci = ci_xi(ci_optimal_taus(m, b, kDefaultEpsilon), b);
  return {ci.j_per_unit, ci.dose_per_unit, ci.xi, ci.xi_ratio, spec};
}

inline EfficiencyReport evaluate_scheme(const SchemeSpec& spec) {
  switch (spec.family) {
    case SchemeFamily::Sp: return xi_sp(spec.budget);
    case SchemeFamily::Noon: return xi_noon(spec.n, spec.budget);
    case SchemeFamily::Mp: return xi_mp(spec.m, spec.budget);
    case SchemeFamily::Sqz: return xi_sqz(spec.n_sq, spec.budget);
    case SchemeFamily::MpSqz: return xi_mpsqz(spec.m, spec.budget);
    case SchemeFamily::Cic: return xi_cic(spec.m, spec.budget);
    case SchemeFamily::Cio: return xi_cio(spec.m, spec.budget);
  }
  throw std::domain_error("evaluate_scheme: unknown family");
}

// Squeezing strength conversions, standard convention:
// dB = 10 log10(e^{2r}) with r = asinh(sqrt(n_sq)).
inline double squeezing_db(double n_sq) {
  if (!(n_sq >= 0.0)) throw std::domain_error("squeezing_db: n_sq must be >= 0");
  const double r = std::asinh(std::sqrt(n_sq));
  return 20.0 * r / std::numbers::ln10;
}

inline double n_sq_from_db(double db) {
  if (!(db >= 0.0)) throw std::domain_error("n_sq_from_db: db must be >= 0");
  const double r = db * std::numbers::ln10 / 20.0;
  const double s = std::sinh(r);
  return s * s;
}

// Squeezing (in dB) a lossless Gaussian probe needs so that
// xi_sqz / xi_ql == target_ratio at this eta. Closed-form inversion:
// with g = (1 - (1-eta)/ratio) / (2 eta), n_sq = g^2 / (1 - 2g).
inline double equivalent_db_for_ratio(double target_ratio, double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::domain_error("equivalent_db_for_ratio: eta must be in (0, 1)");
  if (!(target_ratio > 0.0))
    throw std::domain_error("equivalent_db_for_ratio: target_ratio must be > 0");
  if (target_ratio >= 1.0)
    throw UnattainableError(
        "equivalent_db_for_ratio: only the n_sq -> infinity limit reaches ratio 1");
  const double baseline = 1.0 - eta;  // ratio at n_sq = 0
  if (target_ratio < baseline)
    throw std::domain_error(
        "equivalent_db_for_ratio: target_ratio below the coherent-state baseline 1-eta");
  const double g = (1.0 - baseline / target_ratio) / (2.0 * eta);
  const double n_sq = g * g / (1.0 - 2.0 * g);
  return squeezing_db(n_sq);
}

// Exhaustive integer argmax of f on [lo, hi]; ties keep the smaller argument.
template <typename F>
std::pair<int, double> argmax_int(F&& f, int lo, int hi) {
  int best = lo;
  double best_v = f(lo);
  for (int i = lo + 1; i <= hi; ++i) {
    const double v = f(i);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  return {best, best_v};
}

namespace detail {

// Exhaustive stage-count scan for the constant-tau chain. J and d are updated
// in O(1) per added stage; values agree with xi_cic to summation-order
// roundoff (~1e-13 relative).
inline std::pair<int, double> cic_scan(const LossBudget& b, int max_m) {
  const double sq = std::sqrt(b.eta);
  double j_sum = 0.0;   // sum_{j=1}^{m} j eta^{j/2}
  double j_pow = 1.0;   // eta^{m/2}
  double a_amp = 0.0;   // sum_{j=0}^{k} eta^{j/2}
  double a_pow = 1.0;   // eta^{k/2}
  double rt_pow = 1.0;  // eta_rt^k
  double rt_jpow = 1.0; // eta_rt^{m-1}
  double d_sum = 0.0;
  int best_m = 1;
  double best_xi = -1.0;
  for (int m = 1; m <= max_m; ++m) {
    if (m == 1) {
      a_amp = 1.0;
    } else {
      a_pow *= sq;
      a_amp += a_pow;
      rt_pow *= b.eta_rt;
      rt_jpow *= b.eta_rt;
    }
    d_sum += rt_pow * a_amp * a_amp;
    j_pow *= sq;
    j_sum += static_cast<double>(m) * j_pow;
    const double j = 4.0 * b.eta_p * rt_jpow * b.eta_d * j_sum * j_sum;
    const double xi = j / (b.eta_p * d_sum);
    if (xi > best_xi) {
      best_xi = xi;
      best_m = m;
    }
  }
  return {best_m, best_xi};
}

}  // namespace detail

struct IntOptimum {
  int param;
  EfficiencyReport report;
  bool on_boundary;  // argmax hit search_max; scan range likely too small
};

// Exhaustive scan over the family's integer parameter on [1, search_max].
inline IntOptimum optimal_int_param(SchemeFamily family, const LossBudget& budget,
                                    int search_max = 4096) {
  if (search_max < 1)
    throw std::domain_error("optimal_int_param: search_max must be >= 1");
  int best = 1;
  switch (family) {
    case SchemeFamily::Noon:
      best = argmax_int([&](int n) { return xi_noon(n, budget).xi; }, 1, search_max).first;
      return {best, xi_noon(best, budget), best == search_max};
    case SchemeFamily::Mp:
      best = argmax_int([&](int m) { return xi_mp(m, budget).xi; }, 1, search_max).first;
      return {best, xi_mp(best, budget), best == search_max};
    case SchemeFamily::MpSqz:
      best = argmax_int([&](int m) { return xi_mpsqz(m, budget).xi; }, 1, search_max).first;
      return {best, xi_mpsqz(best, budget), best == search_max};
    case SchemeFamily::Cic:
      best = detail::cic_scan(budget, search_max).first;
      return {best, xi_cic(best, budget), best == search_max};
    case SchemeFamily::Cio:
      best = argmax_int([&](int m) { return xi_cio(m, budget).xi; }, 1, search_max).first;
      return {best, xi_cio(best, budget), best == search_max};
    case SchemeFamily::Sp:
    case SchemeFamily::Sqz:
      throw std::domain_error("optimal_int_param: family has no integer parameter");
  }
  throw std::domain_error("optimal_int_param: unknown family");
}

}  // namespace doselim
