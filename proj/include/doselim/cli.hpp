// Command-line front end. Subcommands: efficiency, figure, sweep, optimize,
// validate. Exit codes: 0 success, 1 usage/domain error, 2 validation
// failure, 3 I/O error.
#pragma once

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "doselim/sweep.hpp"
#include "doselim/validate.hpp"

namespace doselim {

namespace cli_detail {

inline void print_report_text(const EfficiencyReport& r, std::ostream& out) {
  const SchemeSpec& s = r.spec_echo;
  out << "family=" << family_name(s.family);
  switch (s.family) {
    case SchemeFamily::Noon: out << " n=" << s.n; break;
    case SchemeFamily::Sqz: out << " nsq=" << fmt_g12(s.n_sq); break;
    case SchemeFamily::Sp: break;
    default: out << " m=" << s.m; break;
  }
  out << " eta=" << fmt_g12(s.budget.eta) << " eta_p=" << fmt_g12(s.budget.eta_p)
      << " eta_rt=" << fmt_g12(s.budget.eta_rt) << " eta_d=" << fmt_g12(s.budget.eta_d)
      << " J=" << fmt_g12(r.j_per_unit) << " d=" << fmt_g12(r.dose_per_unit)
      << " xi=" << fmt_g12(r.xi) << " xi_ratio=" << fmt_g12(r.xi_ratio) << "\n";
}

inline nlohmann::ordered_json report_to_json(const EfficiencyReport& r) {
  const SchemeSpec& s = r.spec_echo;
  nlohmann::ordered_json doc;
  doc["family"] = family_name(s.family);
  switch (s.family) {
    case SchemeFamily::Noon: doc["n"] = s.n; break;
    case SchemeFamily::Sqz: doc["n_sq"] = std::stod(fmt_g12(s.n_sq)); break;
    case SchemeFamily::Sp: break;
    default: doc["m"] = s.m; break;
  }
  doc["eta"] = std::stod(fmt_g12(s.budget.eta));
  doc["eta_p"] = std::stod(fmt_g12(s.budget.eta_p));
  doc["eta_rt"] = std::stod(fmt_g12(s.budget.eta_rt));
  doc["eta_d"] = std::stod(fmt_g12(s.budget.eta_d));
  doc["j_per_unit"] = std::stod(fmt_g12(r.j_per_unit));
  doc["dose_per_unit"] = std::stod(fmt_g12(r.dose_per_unit));
  doc["xi"] = std::stod(fmt_g12(r.xi));
  doc["xi_ratio"] = std::stod(fmt_g12(r.xi_ratio));
  return doc;
}

struct BudgetFlags {
  double eta = -1.0;
  double eta_p = 1.0;
  double eta_rt = 1.0;
  double eta_d = 1.0;

  void attach(CLI::App* cmd, bool eta_required = true) {
    auto* opt = cmd->add_option("--eta", eta, "sample transmissivity, in (0, 1)");
    if (eta_required) opt->required();
    cmd->add_option("--eta-p", eta_p, "preparation transmissivity, in (0, 1]");
    cmd->add_option("--eta-rt", eta_rt, "per round-trip transmissivity, in (0, 1]");
    cmd->add_option("--eta-d", eta_d, "detection transmissivity, in (0, 1]");
  }

  LossBudget budget() const {
    if (!(eta > 0.0 && eta < 1.0))
      throw std::domain_error("--eta must be in (0, 1)");
    return LossBudget(eta, eta_p, eta_rt, eta_d);
  }
};

}  // namespace cli_detail

inline int cli_run(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"dose-limited phase estimation toolkit"};
  app.require_subcommand(1);

  // efficiency
  auto* eff = app.add_subcommand("efficiency", "evaluate one scheme and print J, d, xi");
  std::string eff_family;
  int eff_n = 0, eff_m = 0;
  double eff_nsq = -1.0;
  std::string eff_format = "text";
  cli_detail::BudgetFlags eff_budget;
  eff->add_option("--family", eff_family, "sp|noon|mp|sqz|mpsqz|cic|cio")
      ->required()
      ->check(CLI::IsMember({"sp", "noon", "mp", "sqz", "mpsqz", "cic", "cio"}));
  eff_budget.attach(eff);
  eff->add_option("--n", eff_n, "NOON size (noon)");
  eff->add_option("--m", eff_m, "passes / stages (mp, mpsqz, cic, cio)");
  eff->add_option("--nsq", eff_nsq, "squeezing particle number (sqz)");
  eff->add_option("--format", eff_format, "text|json")
      ->check(CLI::IsMember({"text", "json"}));

  // figure
  auto* fig = app.add_subcommand("figure", "emit one comparison dataset as CSV");
  std::string fig_name;
  std::string fig_out;
  int fig_points = 200;
  double fig_om_min = 1e-3, fig_om_max = 0.9;
  int fig_threads = 1;
  fig->add_option("name", fig_name, "fig1a|fig1b|fig3")
      ->required()
      ->check(CLI::IsMember({"fig1a", "fig1b", "fig3"}));
  fig->add_option("--out", fig_out, "output CSV path")->required();
  fig->add_option("--points", fig_points, "grid points (fig1a, fig3)");
  fig->add_option("--absorption-min", fig_om_min, "smallest 1 - eta (fig1a, fig3)");
  fig->add_option("--absorption-max", fig_om_max, "largest 1 - eta (fig1a, fig3)");
  fig->add_option("--threads", fig_threads, "worker threads");

  // sweep
  auto* swp = app.add_subcommand("sweep", "run a config-driven eta sweep");
  std::string swp_config;
  std::string swp_out;
  std::string swp_format;
  int swp_threads = 1;
  swp->add_option("--config", swp_config, "sweep config file")->required();
  swp->add_option("--out", swp_out, "output path (overrides config)");
  swp->add_option("--format", swp_format, "csv|json (overrides config)")
      ->check(CLI::IsMember({"csv", "json"}));
  swp->add_option("--threads", swp_threads, "worker threads");

  // optimize
  auto* opt = app.add_subcommand("optimize", "numerically optimize the tau schedule");
  int opt_m = 0;
  cli_detail::BudgetFlags opt_budget;
  int opt_restarts = 4;
  int opt_max_iters = 400;
  double opt_rel_tol = 1e-12;
  std::uint64_t opt_seed = 0x5eed5eed5eedull;
  std::string opt_format = "text";
  opt->add_option("--m", opt_m, "stage count")->required();
  opt_budget.attach(opt);
  opt->add_option("--restarts", opt_restarts, "restart count");
  opt->add_option("--max-iters", opt_max_iters, "coordinate sweeps per start");
  opt->add_option("--rel-tol", opt_rel_tol, "relative improvement stop threshold");
  opt->add_option("--seed", opt_seed, "seed for restart perturbations");
  opt->add_option("--format", opt_format, "text|json")
      ->check(CLI::IsMember({"text", "json"}));

  // validate
  auto* val = app.add_subcommand("validate", "run the built-in consistency suites");
  bool val_quick = false;
  val->add_flag("--quick", val_quick, "single-epsilon, reduced grid");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(eff)) {
      const LossBudget budget = eff_budget.budget();
      EfficiencyReport report = [&] {
        if (eff_family == "sp") {
          if (eff->count("--n") || eff->count("--m") || eff->count("--nsq"))
            throw std::domain_error("sp takes no scheme parameter");
          return xi_sp(budget);
        }
        if (eff_family == "noon") {
          if (!eff->count("--n")) throw std::domain_error("noon requires --n >= 1");
          return xi_noon(eff_n, budget);
        }
        if (eff_family == "sqz") {
          if (!eff->count("--nsq")) throw std::domain_error("sqz requires --nsq >= 0");
          return xi_sqz(eff_nsq, budget);
        }
        if (!eff->count("--m"))
          throw std::domain_error(eff_family + " requires --m >= 1");
        if (eff_family == "mp") return xi_mp(eff_m, budget);
        if (eff_family == "mpsqz") return xi_mpsqz(eff_m, budget);
        if (eff_family == "cic") return xi_cic(eff_m, budget);
        return xi_cio(eff_m, budget);
      }();
      if (eff_format == "json")
        out << cli_detail::report_to_json(report).dump(2) << "\n";
      else
        cli_detail::print_report_text(report, out);
      return 0;
    }

    if (app.got_subcommand(fig)) {
      if (fig_threads < 1) throw std::domain_error("--threads must be >= 1");
      Table table;
      if (fig_name == "fig1a")
        table = figure_fig1a(fig_points, fig_om_min, fig_om_max, fig_threads);
      else if (fig_name == "fig1b")
        table = figure_fig1b(fig_threads);
      else
        table = figure_fig3(fig_points, fig_om_min, fig_om_max, fig_threads);
      write_table_file(table, fig_out, OutputFormat::Csv);
      out << "wrote " << fig_name << " (" << table.rows.size() << " rows) to " << fig_out
          << "\n";
      return 0;
    }

    if (app.got_subcommand(swp)) {
      if (swp_threads < 1) throw std::domain_error("--threads must be >= 1");
      SweepConfig cfg = parse_sweep_config_file(swp_config);
      if (!swp_out.empty()) cfg.output_path = swp_out;
      if (cfg.output_path.empty())
        throw std::domain_error("sweep: no output path (use --out or 'out =' in the config)");
      if (!swp_format.empty())
        cfg.format = swp_format == "json" ? OutputFormat::Json : OutputFormat::Csv;
      const SweepOutcome outcome = run_sweep(cfg, swp_threads);
      if (outcome.any_scan_boundary)
        err << "warning: an integer scan hit search_max = " << cfg.search_max
            << "; optimum may lie beyond it\n";
      write_table_file(outcome.table, cfg.output_path, cfg.format);
      out << "wrote sweep (" << outcome.table.rows.size() << " rows) to " << cfg.output_path
          << "\n";
      return 0;
    }

    if (app.got_subcommand(opt)) {
      const LossBudget budget = opt_budget.budget();
      OptimizerConfig cfg;
      cfg.restarts = opt_restarts;
      cfg.max_iters = opt_max_iters;
      cfg.rel_tol = opt_rel_tol;
      cfg.seed = opt_seed;
      const OptimizationResult result = optimize_taus(opt_m, budget, cfg);
      const double xi_presc =
          ci_xi(ci_optimal_taus(opt_m, budget, kDefaultEpsilon), budget).xi;
      const double shortfall =
          std::max(0.0, (result.best_xi - xi_presc) / xi_presc);
      if (!result.converged)
        err << "warning: optimizer did not converge within --max-iters\n";
      if (opt_format == "json") {
        nlohmann::ordered_json doc;
        doc["m"] = opt_m;
        doc["best_xi"] = std::stod(fmt_g12(result.best_xi));
        doc["prescription_xi"] = std::stod(fmt_g12(xi_presc));
        doc["prescription_shortfall"] = std::stod(fmt_g12(shortfall));
        doc["converged"] = result.converged;
        doc["iterations_used"] = result.iterations_used;
        nlohmann::ordered_json taus = nlohmann::ordered_json::array();
        for (double t : result.best_taus.taus) taus.push_back(std::stod(fmt_g12(t)));
        doc["taus"] = std::move(taus);
        out << doc.dump(2) << "\n";
      } else {
        out << "m=" << opt_m << " best_xi=" << fmt_g12(result.best_xi)
            << " prescription_xi=" << fmt_g12(xi_presc)
            << " shortfall=" << fmt_g12(shortfall)
            << " converged=" << (result.converged ? "yes" : "no")
            << " sweeps=" << result.iterations_used << "\n";
        out << "taus:";
        for (double t : result.best_taus.taus) out << ' ' << fmt_g12(t);
        out << "\n";
      }
      return 0;
    }

    if (app.got_subcommand(val)) {
      const std::vector<ValidationGroup> groups = run_validation(val_quick);
      bool all_ok = true;
      for (const ValidationGroup& g : groups) {
        out << (g.passed ? "pass" : "FAIL") << "  " << g.name << ": " << g.detail << "\n";
        all_ok = all_ok && g.passed;
      }
      out << (all_ok ? "validate: all groups passed\n" : "validate: FAILURES above\n");
      return all_ok ? 0 : 2;
    }
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

inline int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_run(args);
}

}  // namespace doselim
