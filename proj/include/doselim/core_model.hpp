// Two-mode amplitude model: probe state, loss budget, tau schedules and the
// per-stage operators of the chain interferometer.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "doselim/errors.hpp"

namespace doselim {

using Complex = std::complex<double>;

// Schedules whose largest tau exceeds this are outside the regime where the
// quadratic-order expressions for J and d apply.
inline constexpr double kPerturbativeTauMax = 0.05;

// Default beamsplitter scale for generated schedules. xi is invariant under
// rescaling of the whole schedule, so this only fixes the gauge.
inline constexpr double kDefaultEpsilon = 1e-3;

// Slack on unit-norm checks; amplitudes only decay under the operators below.
inline constexpr double kNormSlack = 1e-12;

// Unnormalized two-mode amplitude pair (reference, sample). The survival
// probability rides along implicitly as the squared norm.
struct ProbeState {
  Complex ref_amp{0.0, 0.0};
  Complex samp_amp{0.0, 0.0};

  static ProbeState initial() { return {Complex{1.0, 0.0}, Complex{0.0, 0.0}}; }

  double norm_sq() const { return std::norm(ref_amp) + std::norm(samp_amp); }
};

inline ProbeState operator+(const ProbeState& a, const ProbeState& b) {
  return {a.ref_amp + b.ref_amp, a.samp_amp + b.samp_amp};
}

inline ProbeState operator-(const ProbeState& a, const ProbeState& b) {
  return {a.ref_amp - b.ref_amp, a.samp_amp - b.samp_amp};
}

inline ProbeState operator*(Complex c, const ProbeState& s) {
  return {c * s.ref_amp, c * s.samp_amp};
}

inline ProbeState operator*(double c, const ProbeState& s) {
  return {c * s.ref_amp, c * s.samp_amp};
}

// <a|b>, conjugation on the left argument.
inline Complex inner(const ProbeState& a, const ProbeState& b) {
  return std::conj(a.ref_amp) * b.ref_amp + std::conj(a.samp_amp) * b.samp_amp;
}

// 2x2 complex matrix, row-major.
struct Mat2 {
  Complex a00, a01, a10, a11;

  static Mat2 identity() { return {{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}; }
};

inline Mat2 operator*(const Mat2& l, const Mat2& r) {
  return {l.a00 * r.a00 + l.a01 * r.a10, l.a00 * r.a01 + l.a01 * r.a11,
          l.a10 * r.a00 + l.a11 * r.a10, l.a10 * r.a01 + l.a11 * r.a11};
}

inline ProbeState operator*(const Mat2& m, const ProbeState& s) {
  return {m.a00 * s.ref_amp + m.a01 * s.samp_amp,
          m.a10 * s.ref_amp + m.a11 * s.samp_amp};
}

// Transmissivities of the four loss channels: eta per pass through the
// sample, eta_p before the first stage, eta_rt between stages, eta_d at the
// detector.
struct LossBudget {
  double eta;
  double eta_p;
  double eta_rt;
  double eta_d;

  explicit LossBudget(double eta_, double eta_p_ = 1.0, double eta_rt_ = 1.0,
                      double eta_d_ = 1.0)
      : eta(eta_), eta_p(eta_p_), eta_rt(eta_rt_), eta_d(eta_d_) {
    if (!(eta >= 0.0 && eta <= 1.0))
      throw std::domain_error("LossBudget: eta must be in [0, 1]");
    if (!(eta_p > 0.0 && eta_p <= 1.0))
      throw std::domain_error("LossBudget: eta_p must be in (0, 1]");
    if (!(eta_rt > 0.0 && eta_rt <= 1.0))
      throw std::domain_error("LossBudget: eta_rt must be in (0, 1]");
    if (!(eta_d > 0.0 && eta_d <= 1.0))
      throw std::domain_error("LossBudget: eta_d must be in (0, 1]");
  }

  static LossBudget lossless(double eta_) { return LossBudget(eta_); }

  bool lossless_outside_sample() const {
    return eta_p == 1.0 && eta_rt == 1.0 && eta_d == 1.0;
  }
};

// Per-stage beamsplitter amplitudes tau_0..tau_{m-1} plus the scale epsilon
// used when the schedule was generated.
struct TauSchedule {
  std::vector<double> taus;
  double epsilon;

  explicit TauSchedule(std::vector<double> taus_, double epsilon_ = kDefaultEpsilon)
      : taus(std::move(taus_)), epsilon(epsilon_) {
    if (taus.empty()) throw std::domain_error("TauSchedule: m must be >= 1");
    for (double t : taus)
      if (!(t >= 0.0 && t < 1.0))
        throw std::domain_error("TauSchedule: every tau must be in [0, 1)");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw std::domain_error("TauSchedule: epsilon must be > 0");
  }

  int stage_count() const { return static_cast<int>(taus.size()); }

  double max_tau() const { return *std::max_element(taus.begin(), taus.end()); }

  // The quadratic-order formulas for J and d assume tau_k << 1.
  bool perturbative_valid() const { return max_tau() <= kPerturbativeTauMax; }

  bool all_zero() const {
    return std::all_of(taus.begin(), taus.end(), [](double t) { return t == 0.0; });
  }
};

// Unknown sample phase theta and programmed reference phase gamma, shared by
// every stage.
struct PhaseConfig {
  double theta = 0.0;
  double gamma = 0.0;

  PhaseConfig() = default;
  PhaseConfig(double theta_, double gamma_) : theta(theta_), gamma(gamma_) {
    if (!std::isfinite(theta) || !std::isfinite(gamma))
      throw std::domain_error("PhaseConfig: phases must be finite");
  }
};

// Beamsplitter coupling the two channels. Rotation convention: the
// reference->sample amplitude carries the minus sign, keeping the matrix
// orthogonal; the coupling magnitude is tau either way.
inline Mat2 beamsplitter_op(double tau) {
  if (!(tau >= 0.0 && tau < 1.0))
    throw std::domain_error("beamsplitter_op: tau must be in [0, 1)");
  const double c = std::sqrt(1.0 - tau * tau);
  return {Complex{c, 0.0}, Complex{tau, 0.0}, Complex{-tau, 0.0}, Complex{c, 0.0}};
}

// One pass through the sample: attenuates and phase-shifts the sample channel.
inline Mat2 sample_op(double eta, double theta) {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::domain_error("sample_op: eta must be in [0, 1]");
  if (!std::isfinite(theta))
    throw std::domain_error("sample_op: theta must be finite");
  return {Complex{1.0, 0.0}, Complex{0.0, 0.0}, Complex{0.0, 0.0},
          std::sqrt(eta) * std::polar(1.0, theta)};
}

// Programmed phase shift in the reference arm.
inline Mat2 reference_phase_op(double gamma) {
  if (!std::isfinite(gamma))
    throw std::domain_error("reference_phase_op: gamma must be finite");
  return {std::polar(1.0, gamma), Complex{0.0, 0.0}, Complex{0.0, 0.0},
          Complex{1.0, 0.0}};
}

// Uniform amplitude damping of both channels; single-particle survival
// probability eta_x.
inline Mat2 uniform_loss_op(double eta_x) {
  if (!(eta_x >= 0.0 && eta_x <= 1.0))
    throw std::domain_error("uniform_loss_op: eta_x must be in [0, 1]");
  const double s = std::sqrt(eta_x);
  return {Complex{s, 0.0}, Complex{0.0, 0.0}, Complex{0.0, 0.0}, Complex{s, 0.0}};
}

}  // namespace doselim
