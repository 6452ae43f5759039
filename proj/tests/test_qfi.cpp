#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "doselim/chain.hpp"
#include "doselim/qfi.hpp"
#include "support/oracles.hpp"
#include "support/test_rng.hpp"

using namespace doselim;
using testsupport::Rng;

namespace {

ProbeState mzi_exit(double alpha_sq, double eta, double theta) {
  const double alpha = std::sqrt(alpha_sq);
  return {Complex{std::sqrt(1.0 - alpha_sq), 0.0},
          alpha * std::sqrt(eta) * std::polar(1.0, theta)};
}

ProbeState mzi_exit_derivative(double alpha_sq, double eta, double theta) {
  const double alpha = std::sqrt(alpha_sq);
  return {Complex{0.0, 0.0},
          Complex{0.0, 1.0} * alpha * std::sqrt(eta) * std::polar(1.0, theta)};
}

ProbeState random_unit_state(Rng& rng) {
  ProbeState s{Complex{rng.uniform(-1, 1), rng.uniform(-1, 1)},
               Complex{rng.uniform(-1, 1), rng.uniform(-1, 1)}};
  const double n = std::sqrt(s.norm_sq());
  return (1.0 / n) * s;
}

}  // namespace

TEST_CASE("qfi_pure examples") {
  // balanced lossless interferometer: J = 4 a^2 (1 - a^2) = 1
  {
    const double a2 = 0.5;
    const ProbeState psi = mzi_exit(a2, 1.0, 0.3);
    const ProbeState dpsi = mzi_exit_derivative(a2, 1.0, 0.3);
    CHECK(qfi_pure(psi, dpsi) == doctest::Approx(1.0).epsilon(1e-12));
  }
  // a pure global phase carries no information
  {
    Rng rng(5);
    const ProbeState psi = random_unit_state(rng);
    const ProbeState dpsi = Complex{0.0, 1.0} * psi;
    CHECK(qfi_pure(psi, dpsi) == doctest::Approx(0.0).epsilon(1e-14));
  }
  // small sample amplitude: J = 4 * 0.01 * 0.99
  {
    const ProbeState psi = mzi_exit(0.01, 1.0, 0.0);
    const ProbeState dpsi = mzi_exit_derivative(0.01, 1.0, 0.0);
    CHECK(qfi_pure(psi, dpsi) == doctest::Approx(0.0396).epsilon(1e-12));
  }
  CHECK_THROWS_AS(qfi_pure(ProbeState{Complex{0.9, 0.0}, Complex{0.0, 0.0}},
                           ProbeState{}),
                  std::domain_error);
}

TEST_CASE("qfi_pure is invariant under global phase and gauge shifts") {
  Rng rng(11);
  for (int it = 0; it < 200; ++it) {
    const ProbeState psi = random_unit_state(rng);
    ProbeState dpsi{Complex{rng.uniform(-1, 1), rng.uniform(-1, 1)},
                    Complex{rng.uniform(-1, 1), rng.uniform(-1, 1)}};
    const double base = qfi_pure(psi, dpsi);

    const double phi = rng.uniform(-3.0, 3.0);
    const double c = rng.uniform(-2.0, 2.0);
    const Complex rot = std::polar(1.0, phi);
    const ProbeState psi2 = rot * psi;
    const ProbeState dpsi2 = rot * (dpsi + Complex{0.0, c} * psi);
    CHECK(qfi_pure(psi2, dpsi2) ==
          doctest::Approx(base).epsilon(1e-10).scale(std::max(base, 1.0)));
  }
}

TEST_CASE("qfi_conditional matches the single-pass closed form") {
  // alpha^2 = 0.5, eta = 0.5: p = 0.75, Jcond = 8/9, J = 2/3
  {
    const QfiResult q = qfi_conditional(mzi_exit(0.5, 0.5, 0.0),
                                        mzi_exit_derivative(0.5, 0.5, 0.0));
    CHECK(q.p_survive == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(q.j_conditional == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
    CHECK(q.j == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }
  // eta = 1 reduces to the pure QFI with p = 1
  {
    const ProbeState psi = mzi_exit(0.3, 1.0, 0.7);
    const ProbeState dpsi = mzi_exit_derivative(0.3, 1.0, 0.7);
    const QfiResult q = qfi_conditional(psi, dpsi);
    CHECK(q.p_survive == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(q.j == doctest::Approx(qfi_pure(psi, dpsi)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(qfi_conditional(ProbeState{}, ProbeState{}), DegenerateStateError);
  CHECK_THROWS_AS(qfi_conditional(ProbeState{Complex{1.2, 0.0}, Complex{0.0, 0.0}},
                                  ProbeState{}),
                  std::domain_error);
}

TEST_CASE("qfi_conditional reproduces the lossy closed form over a grid") {
  for (double alpha_sq = 0.01; alpha_sq < 0.995; alpha_sq += 0.07) {
    for (double eta = 0.1; eta <= 1.0; eta += 0.09) {
      const testsupport::MziExpected expect = testsupport::mzi_expected(alpha_sq, eta);
      const QfiResult q = qfi_conditional(mzi_exit(alpha_sq, eta, 0.4),
                                          mzi_exit_derivative(alpha_sq, eta, 0.4));
      CHECK(q.p_survive == doctest::Approx(expect.p).epsilon(1e-12));
      CHECK(q.j_conditional == doctest::Approx(expect.j_conditional).epsilon(1e-8));
      CHECK(q.j == doctest::Approx(expect.j).epsilon(1e-8));
      CHECK(q.j == doctest::Approx(q.p_survive * q.j_conditional).epsilon(1e-12));
      CHECK(q.j <= q.j_conditional * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("fd_derivative examples") {
  // analytic derivative of (1, e^{i theta})/sqrt(2)
  {
    const auto prop = [](double theta) {
      const double r = 1.0 / std::sqrt(2.0);
      return ProbeState{Complex{r, 0.0}, r * std::polar(1.0, theta)};
    };
    const ProbeState d = fd_derivative(prop, 0.0);
    CHECK(std::abs(d.ref_amp) < 1e-12);
    CHECK(std::abs(d.samp_amp - Complex{0.0, 1.0 / std::sqrt(2.0)}) < 1e-12);
  }
  // theta-independent propagator differentiates to zero
  {
    const auto prop = [](double) { return ProbeState::initial(); };
    const ProbeState d = fd_derivative(prop, 0.4);
    CHECK(std::abs(d.ref_amp) == 0.0);
    CHECK(std::abs(d.samp_amp) == 0.0);
  }
}

TEST_CASE("fd_derivative matches the symbolic two-stage derivative") {
  const LossBudget budget(0.9, 0.95, 0.97, 0.92);
  const double t0 = 0.03, t1 = 0.014;
  const double gamma = 0.12;
  const TauSchedule schedule({t0, t1});
  for (double theta : {0.0, 0.31, -1.2}) {
    const auto prop = [&](double th) {
      return ci_exact_propagate(schedule, budget, PhaseConfig(th, gamma)).exit_state;
    };
    const ProbeState fd = fd_derivative(prop, theta);
    const testsupport::TwoStageSymbolic sym =
        testsupport::two_stage_symbolic(t0, t1, budget, theta, gamma);
    CHECK(std::abs(fd.ref_amp - sym.dpsi0) < 1e-8);
    CHECK(std::abs(fd.samp_amp - sym.dpsi1) < 1e-8);
  }
}

TEST_CASE("finite-difference QFI agrees with the analytic closed form") {
  for (double alpha_sq = 0.05; alpha_sq < 0.99; alpha_sq += 0.13) {
    for (double eta = 0.1; eta <= 1.0; eta += 0.13) {
      const auto prop = [&](double theta) { return mzi_exit(alpha_sq, eta, theta); };
      const ProbeState fd = fd_derivative(prop, 0.2);
      const QfiResult q = qfi_conditional(mzi_exit(alpha_sq, eta, 0.2), fd);
      const testsupport::MziExpected expect = testsupport::mzi_expected(alpha_sq, eta);
      CHECK(q.j == doctest::Approx(expect.j).epsilon(1e-6));
    }
  }
}
