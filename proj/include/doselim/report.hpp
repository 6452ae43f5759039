// Scheme descriptions and the J/d/xi report shared by all measurement families.
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "doselim/core_model.hpp"

namespace doselim {

enum class SchemeFamily { Sp, Noon, Mp, Sqz, MpSqz, Cic, Cio };

inline const char* family_name(SchemeFamily f) {
  switch (f) {
    case SchemeFamily::Sp: return "sp";
    case SchemeFamily::Noon: return "noon";
    case SchemeFamily::Mp: return "mp";
    case SchemeFamily::Sqz: return "sqz";
    case SchemeFamily::MpSqz: return "mpsqz";
    case SchemeFamily::Cic: return "cic";
    case SchemeFamily::Cio: return "cio";
  }
  return "?";
}

inline std::optional<SchemeFamily> family_from_name(std::string_view name) {
  if (name == "sp") return SchemeFamily::Sp;
  if (name == "noon") return SchemeFamily::Noon;
  if (name == "mp") return SchemeFamily::Mp;
  if (name == "sqz") return SchemeFamily::Sqz;
  if (name == "mpsqz") return SchemeFamily::MpSqz;
  if (name == "cic") return SchemeFamily::Cic;
  if (name == "cio") return SchemeFamily::Cio;
  return std::nullopt;
}

// Tagged description of one measurement: family, its required parameter and
// the loss budget it runs under.
struct SchemeSpec {
  SchemeFamily family;
  LossBudget budget;
  int n = 0;         // NOON size (NOON only)
  int m = 0;         // passes / stages (MP, MPSQZ, CIC, CIO)
  double n_sq = 0.0; // squeezing particle number (SQZ only)

  static SchemeSpec sp(const LossBudget& b) { return {SchemeFamily::Sp, b}; }

  static SchemeSpec noon(int n, const LossBudget& b) {
    if (n < 1) throw std::domain_error("SchemeSpec: NOON size n must be >= 1");
    SchemeSpec s{SchemeFamily::Noon, b};
    s.n = n;
    return s;
  }

  static SchemeSpec mp(int m, const LossBudget& b) {
    if (m < 1) throw std::domain_error("SchemeSpec: pass count m must be >= 1");
    SchemeSpec s{SchemeFamily::Mp, b};
    s.m = m;
    return s;
  }

  static SchemeSpec sqz(double n_sq, const LossBudget& b) {
    if (!(n_sq >= 0.0))
      throw std::domain_error("SchemeSpec: n_sq must be >= 0");
    SchemeSpec s{SchemeFamily::Sqz, b};
    s.n_sq = n_sq;
    return s;
  }

  static SchemeSpec mpsqz(int m, const LossBudget& b) {
    if (m < 1) throw std::domain_error("SchemeSpec: pass count m must be >= 1");
    SchemeSpec s{SchemeFamily::MpSqz, b};
    s.m = m;
    return s;
  }

  static SchemeSpec cic(int m, const LossBudget& b) {
    if (m < 1) throw std::domain_error("SchemeSpec: stage count m must be >= 1");
    SchemeSpec s{SchemeFamily::Cic, b};
    s.m = m;
    return s;
  }

  static SchemeSpec cio(int m, const LossBudget& b) {
    if (m < 1) throw std::domain_error("SchemeSpec: stage count m must be >= 1");
    SchemeSpec s{SchemeFamily::Cio, b};
    s.m = m;
    return s;
  }
};

// Quantum limit on QFI per dose at sample transmissivity eta.
inline double xi_ql(double eta) {
  if (eta == 1.0)
    throw DivergentLimitError("xi_ql: diverges at eta = 1");
  if (!(eta >= 0.0 && eta < 1.0))
    throw std::domain_error("xi_ql: eta must be in [0, 1)");
  return 4.0 * eta / (1.0 - eta);
}

// J, d and xi = J/d for one scheme evaluation. xi_ratio is always normalized
// by the lossless quantum limit at the same eta.
struct EfficiencyReport {
  double j_per_unit;
  double dose_per_unit;
  double xi;
  double xi_ratio;
  SchemeSpec spec_echo;
};

inline EfficiencyReport make_report(const SchemeSpec& spec, double j, double d) {
  if (!(d > 0.0))
    throw DegenerateScheduleError("EfficiencyReport: dose must be positive");
  const double xi = j / d;
  // eta = 0 carries no phase information: xi and xi_ql both vanish there.
  const double ql = xi_ql(spec.budget.eta);
  const double ratio = (ql == 0.0 && xi == 0.0) ? 0.0 : xi / ql;
  return {j, d, xi, ratio, spec};
}

}  // namespace doselim
