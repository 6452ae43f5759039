// Quantum Fisher information for pure two-mode states, the loss-conditioned
// split J = p * Jcond, and finite-difference state derivatives.
#pragma once

#include <cmath>
#include <utility>

#include "doselim/core_model.hpp"

namespace doselim {

// Step for d/dtheta of propagated states. With the five-point stencil below
// the truncation error is O(h^4) ~ 1e-16 per unit amplitude.
inline constexpr double kFdStep = 1e-4;

struct QfiResult {
  double j;              // QFI of the lossy measurement, j = p_survive * j_conditional
  double p_survive;      // squared norm of the unnormalized exit state
  double j_conditional;  // QFI conditional on no absorption
};

// QFI of a normalized pure state psi with derivative dpsi:
// 4<dpsi|dpsi> - 4|<dpsi|psi>|^2.
inline double qfi_pure(const ProbeState& psi, const ProbeState& dpsi) {
  if (std::abs(psi.norm_sq() - 1.0) > 1e-10)
    throw std::domain_error("qfi_pure: psi must be normalized");
  const double j = 4.0 * dpsi.norm_sq() - 4.0 * std::norm(inner(dpsi, psi));
  return j < 0.0 ? 0.0 : j;  // analytically >= 0; clamp roundoff
}

// Splits an unnormalized exit state into survival probability and the QFI of
// the conditioned (normalized) state. The derivative of the normalized state
// comes from the unnormalized one by the quotient rule, so a nearly
// theta-independent p does not poison the difference.
inline QfiResult qfi_conditional(const ProbeState& exit_state,
                                 const ProbeState& exit_derivative) {
  const double p = exit_state.norm_sq();
  if (!(p > 0.0))
    throw DegenerateStateError("qfi_conditional: exit state has zero norm");
  if (p > 1.0 + kNormSlack)
    throw std::domain_error("qfi_conditional: exit state norm exceeds 1");
  const double sqrt_p = std::sqrt(p);
  const double p_dot = 2.0 * std::real(inner(exit_state, exit_derivative));
  const ProbeState psi_n = (1.0 / sqrt_p) * exit_state;
  const ProbeState dpsi_n =
      (1.0 / sqrt_p) * exit_derivative - (p_dot / (2.0 * p * sqrt_p)) * exit_state;
  const double j_cond = qfi_pure(psi_n, dpsi_n);
  return {p * j_cond, p, j_cond};
}

// Five-point central difference (Richardson extrapolation of the three-point
// stencils at h and 2h) of a theta-parametrized propagator.
template <typename Propagator>
ProbeState fd_derivative(Propagator&& propagate, double theta) {
  const double h = kFdStep;
  const ProbeState m2 = propagate(theta - 2.0 * h);
  const ProbeState m1 = propagate(theta - h);
  const ProbeState p1 = propagate(theta + h);
  const ProbeState p2 = propagate(theta + 2.0 * h);
  return (1.0 / (12.0 * h)) * ((m2 - p2) + 8.0 * (p1 - m1));
}

}  // namespace doselim
