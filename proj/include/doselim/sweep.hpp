// Sweep and figure data generation: eta grids, per-scheme columns, CSV/JSON
// emission. Output is deterministic: identical inputs give byte-identical
// files regardless of thread count.
#pragma once

#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "doselim/schemes.hpp"

namespace doselim {

inline constexpr int kSweepSchemaVersion = 1;

enum class ParamMode { None, Fixed, Opt, Inf };
enum class OutputFormat { Csv, Json };

// One requested output column group: a family plus how its parameter is set.
struct SchemeRequest {
  SchemeFamily family;
  ParamMode mode = ParamMode::None;
  double param = 0.0;  // Fixed mode only

  std::string tag() const {
    std::string t = family_name(family);
    switch (mode) {
      case ParamMode::None:
        return t;
      case ParamMode::Opt:
        return t + "_opt";
      case ParamMode::Inf:
        return t + "_inf";
      case ParamMode::Fixed: {
        char buf[40];
        if (family == SchemeFamily::Sqz)
          std::snprintf(buf, sizeof buf, "%g", param);
        else
          std::snprintf(buf, sizeof buf, "%d", static_cast<int>(param));
        return t + "_" + buf;
      }
    }
    return t;
  }
};

struct SweepConfig {
  std::vector<double> eta_grid;
  std::vector<SchemeRequest> schemes;
  double eta_p = 1.0;
  double eta_rt = 1.0;
  double eta_d = 1.0;
  OutputFormat format = OutputFormat::Csv;
  std::string output_path;  // optional; the CLI may override
  int search_max = 4096;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// %.12g: twelve significant digits.
inline std::string fmt_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Runs fn(0..n-1); each call must only write state owned by its index, so the
// assembled result does not depend on the thread count.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  threads = std::min(threads, n);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::domain_error("sweep config: " + key + " is not a number: '" + s + "'");
  }
}

inline int parse_int(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::domain_error("sweep config: " + key + " is not an integer: '" + s + "'");
  }
}

inline SchemeRequest parse_scheme_token(const std::string& token) {
  const std::vector<std::string> parts = split(token, ':');
  if (parts.empty() || parts.size() > 2)
    throw std::domain_error("sweep config: bad scheme token '" + token + "'");
  const auto family = family_from_name(parts[0]);
  if (!family)
    throw std::domain_error("sweep config: unknown scheme family '" + parts[0] + "'");
  SchemeRequest req{*family, ParamMode::None, 0.0};
  const bool needs_param = *family != SchemeFamily::Sp;
  if (parts.size() == 1) {
    if (needs_param)
      throw std::domain_error("sweep config: scheme '" + parts[0] +
                              "' requires a parameter (value, 'opt' or 'inf')");
    return req;
  }
  if (!needs_param)
    throw std::domain_error("sweep config: scheme 'sp' takes no parameter");
  const std::string& p = parts[1];
  if (p == "opt") {
    if (*family == SchemeFamily::Sqz)
      throw std::domain_error("sweep config: sqz has a real parameter; use a value or 'inf'");
    req.mode = ParamMode::Opt;
    return req;
  }
  if (p == "inf") {
    if (*family != SchemeFamily::Sqz)
      throw std::domain_error("sweep config: only sqz supports 'inf'");
    req.mode = ParamMode::Inf;
    return req;
  }
  req.mode = ParamMode::Fixed;
  if (*family == SchemeFamily::Sqz) {
    req.param = parse_double(p, "sqz parameter");
    if (!(req.param >= 0.0))
      throw std::domain_error("sweep config: n_sq must be >= 0");
  } else {
    const int v = parse_int(p, "scheme parameter");
    if (v < 1) throw std::domain_error("sweep config: scheme parameter must be >= 1");
    req.param = v;
  }
  return req;
}

}  // namespace detail

// Key = value text, '#' comments, one schema. Grid is either explicit
// (eta_grid) or generated from eta_min/eta_max/eta_points with linear or
// log-one-minus spacing.
inline SweepConfig parse_sweep_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::domain_error("sweep config: line " + std::to_string(line_no) +
                              " is not 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::domain_error("sweep config: line " + std::to_string(line_no) +
                              " is not 'key = value'");
    if (kv.count(key))
      throw std::domain_error("sweep config: duplicate key '" + key + "'");
    kv[key] = value;
  }

  static const char* known[] = {"schema_version", "eta_grid",  "eta_min",
                                "eta_max",        "eta_points", "eta_spacing",
                                "schemes",        "eta_p",      "eta_rt",
                                "eta_d",          "normalization", "format",
                                "out",            "search_max"};
  for (const auto& [key, value] : kv) {
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) throw std::domain_error("sweep config: unknown key '" + key + "'");
  }

  if (!kv.count("schema_version"))
    throw std::domain_error("sweep config: missing schema_version");
  if (detail::parse_int(kv["schema_version"], "schema_version") != kSweepSchemaVersion)
    throw std::domain_error("sweep config: schema_version must be 1");

  SweepConfig cfg;

  if (kv.count("eta_grid")) {
    if (kv.count("eta_min") || kv.count("eta_max") || kv.count("eta_points") ||
        kv.count("eta_spacing"))
      throw std::domain_error("sweep config: eta_grid excludes eta_min/eta_max/eta_points");
    for (const std::string& tok : detail::split(kv["eta_grid"], ','))
      cfg.eta_grid.push_back(detail::parse_double(tok, "eta_grid"));
  } else {
    if (!kv.count("eta_min") || !kv.count("eta_max") || !kv.count("eta_points"))
      throw std::domain_error("sweep config: need eta_grid or eta_min/eta_max/eta_points");
    const double lo = detail::parse_double(kv["eta_min"], "eta_min");
    const double hi = detail::parse_double(kv["eta_max"], "eta_max");
    const int points = detail::parse_int(kv["eta_points"], "eta_points");
    if (points < 2) throw std::domain_error("sweep config: eta_points must be >= 2");
    if (!(lo < hi)) throw std::domain_error("sweep config: eta_min must be < eta_max");
    std::string spacing = kv.count("eta_spacing") ? kv["eta_spacing"] : "linear";
    cfg.eta_grid.resize(static_cast<std::size_t>(points));
    if (spacing == "linear") {
      for (int i = 0; i < points; ++i)
        cfg.eta_grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
    } else if (spacing == "log-one-minus") {
      // log-spaced in 1 - eta, emitted with eta ascending
      const double la = std::log10(1.0 - hi);
      const double lb = std::log10(1.0 - lo);
      for (int i = 0; i < points; ++i) {
        const double om = std::pow(10.0, lb + (la - lb) * i / (points - 1));
        cfg.eta_grid[static_cast<std::size_t>(i)] = 1.0 - om;
      }
    } else {
      throw std::domain_error("sweep config: eta_spacing must be linear or log-one-minus");
    }
  }
  for (double eta : cfg.eta_grid)
    if (!(eta > 0.0 && eta < 1.0))
      throw std::domain_error("sweep config: every eta must be in (0, 1)");
  for (std::size_t i = 1; i < cfg.eta_grid.size(); ++i)
    if (!(cfg.eta_grid[i] > cfg.eta_grid[i - 1]))
      throw std::domain_error("sweep config: eta grid must be strictly increasing");

  if (!kv.count("schemes"))
    throw std::domain_error("sweep config: missing schemes");
  std::vector<std::string> tags;
  for (const std::string& tok : detail::split(kv["schemes"], ',')) {
    const SchemeRequest req = detail::parse_scheme_token(tok);
    for (const std::string& t : tags)
      if (t == req.tag())
        throw std::domain_error("sweep config: duplicate scheme '" + req.tag() + "'");
    tags.push_back(req.tag());
    cfg.schemes.push_back(req);
  }
  if (cfg.schemes.empty())
    throw std::domain_error("sweep config: at least one scheme is required");

  if (kv.count("eta_p")) cfg.eta_p = detail::parse_double(kv["eta_p"], "eta_p");
  if (kv.count("eta_rt")) cfg.eta_rt = detail::parse_double(kv["eta_rt"], "eta_rt");
  if (kv.count("eta_d")) cfg.eta_d = detail::parse_double(kv["eta_d"], "eta_d");
  LossBudget(cfg.eta_grid.front(), cfg.eta_p, cfg.eta_rt, cfg.eta_d);  // range check

  if (kv.count("normalization") && kv["normalization"] != "lossless-ql")
    throw std::domain_error("sweep config: only normalization = lossless-ql is supported");

  if (kv.count("format")) {
    if (kv["format"] == "csv")
      cfg.format = OutputFormat::Csv;
    else if (kv["format"] == "json")
      cfg.format = OutputFormat::Json;
    else
      throw std::domain_error("sweep config: format must be csv or json");
  }
  if (kv.count("out")) cfg.output_path = kv["out"];
  if (kv.count("search_max")) {
    cfg.search_max = detail::parse_int(kv["search_max"], "search_max");
    if (cfg.search_max < 1)
      throw std::domain_error("sweep config: search_max must be >= 1");
  }
  return cfg;
}

inline SweepConfig parse_sweep_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sweep config '" + path + "'");
  return parse_sweep_config(in);
}

// One scheme evaluated at one eta. Opt mode also reports the scanned optimum.
struct SchemeCell {
  double xi;
  double ratio;
  double param;  // scanned parameter (Opt), echoed parameter (Fixed), else 0
  bool on_boundary;
};

inline SchemeCell evaluate_request(const SchemeRequest& req, const LossBudget& budget,
                                   int search_max) {
  switch (req.mode) {
    case ParamMode::None: {
      const EfficiencyReport r = xi_sp(budget);
      return {r.xi, r.xi_ratio, 0.0, false};
    }
    case ParamMode::Inf: {
      const EfficiencyReport r = xi_sqz_limit(budget);
      return {r.xi, r.xi_ratio, 0.0, false};
    }
    case ParamMode::Opt: {
      const IntOptimum opt = optimal_int_param(req.family, budget, search_max);
      return {opt.report.xi, opt.report.xi_ratio, static_cast<double>(opt.param),
              opt.on_boundary};
    }
    case ParamMode::Fixed: {
      EfficiencyReport r = [&] {
        switch (req.family) {
          case SchemeFamily::Noon: return xi_noon(static_cast<int>(req.param), budget);
          case SchemeFamily::Mp: return xi_mp(static_cast<int>(req.param), budget);
          case SchemeFamily::Sqz: return xi_sqz(req.param, budget);
          case SchemeFamily::MpSqz: return xi_mpsqz(static_cast<int>(req.param), budget);
          case SchemeFamily::Cic: return xi_cic(static_cast<int>(req.param), budget);
          case SchemeFamily::Cio: return xi_cio(static_cast<int>(req.param), budget);
          case SchemeFamily::Sp: break;
        }
        throw std::domain_error("evaluate_request: sp takes no parameter");
      }();
      return {r.xi, r.xi_ratio, req.param, false};
    }
  }
  throw std::domain_error("evaluate_request: bad mode");
}

struct SweepOutcome {
  Table table;
  bool any_scan_boundary;  // some scanned optimum sat on search_max
};

inline SweepOutcome run_sweep(const SweepConfig& cfg, int threads = 1) {
  SweepOutcome out;
  out.any_scan_boundary = false;
  out.table.columns.push_back("eta");
  for (const SchemeRequest& req : cfg.schemes) {
    out.table.columns.push_back(req.tag() + "_xi");
    out.table.columns.push_back(req.tag() + "_ratio");
    if (req.mode == ParamMode::Opt) out.table.columns.push_back(req.tag() + "_param");
  }
  const int n = static_cast<int>(cfg.eta_grid.size());
  out.table.rows.assign(static_cast<std::size_t>(n), {});
  std::atomic<bool> boundary{false};
  parallel_for(n, threads, [&](int i) {
    const double eta = cfg.eta_grid[static_cast<std::size_t>(i)];
    const LossBudget budget(eta, cfg.eta_p, cfg.eta_rt, cfg.eta_d);
    std::vector<double>& row = out.table.rows[static_cast<std::size_t>(i)];
    row.push_back(eta);
    for (const SchemeRequest& req : cfg.schemes) {
      const SchemeCell cell = evaluate_request(req, budget, cfg.search_max);
      row.push_back(cell.xi);
      row.push_back(cell.ratio);
      if (req.mode == ParamMode::Opt) row.push_back(cell.param);
      if (cell.on_boundary) boundary.store(true, std::memory_order_relaxed);
    }
  });
  out.any_scan_boundary = boundary.load();
  return out;
}

// Log-spaced grid of 1 - eta on [om_min, om_max], rows emitted with
// absorption ascending.
inline std::vector<double> one_minus_eta_grid(int points, double om_min, double om_max) {
  if (points < 2) throw std::domain_error("figure grid: points must be >= 2");
  if (!(om_min > 0.0 && om_min < om_max && om_max < 1.0))
    throw std::domain_error("figure grid: need 0 < min < max < 1 for 1 - eta");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double la = std::log10(om_min);
  const double lb = std::log10(om_max);
  for (int i = 0; i < points; ++i)
    grid[static_cast<std::size_t>(i)] = std::pow(10.0, la + (lb - la) * i / (points - 1));
  return grid;
}

// Ratio ceiling used when inverting for the equivalent squeezing level; the
// inversion is singular at ratio 1.
inline constexpr double kEquivalentDbRatioCap = 1.0 - 1e-12;

// xi/xi_QL for every family vs absorption probability 1 - eta, lossless.
// equivalent_db is the squeezing a Gaussian probe needs to match the m = 128
// optimized chain at the same eta, capped near ratio 1.
inline Table figure_fig1a(int points = 200, double om_min = 1e-3, double om_max = 0.9,
                          int threads = 1) {
  Table t;
  t.columns = {"one_minus_eta", "ratio_sp",      "ratio_noon_opt", "ratio_mp_opt",
               "ratio_cic_opt", "ratio_cio_m4",  "ratio_cio_m32",  "ratio_cio_m128",
               "equivalent_db"};
  const std::vector<double> om = one_minus_eta_grid(points, om_min, om_max);
  t.rows.assign(om.size(), {});
  parallel_for(points, threads, [&](int i) {
    const double eta = 1.0 - om[static_cast<std::size_t>(i)];
    const LossBudget budget = LossBudget::lossless(eta);
    const double cio128 = xi_cio(128, budget).xi_ratio;
    const double db =
        equivalent_db_for_ratio(std::min(cio128, kEquivalentDbRatioCap), eta);
    t.rows[static_cast<std::size_t>(i)] = {
        om[static_cast<std::size_t>(i)],
        xi_sp(budget).xi_ratio,
        optimal_int_param(SchemeFamily::Noon, budget).report.xi_ratio,
        optimal_int_param(SchemeFamily::Mp, budget).report.xi_ratio,
        optimal_int_param(SchemeFamily::Cic, budget).report.xi_ratio,
        xi_cio(4, budget).xi_ratio,
        xi_cio(32, budget).xi_ratio,
        cio128,
        db};
  });
  return t;
}

// xi/xi_QL vs the family parameter at eta = 0.9, lossless. param is read as
// n (NOON), m (MP/CIC/CIO) or n_sq (SQZ).
inline Table figure_fig1b(int threads = 1) {
  Table t;
  t.columns = {"param",     "ratio_sp",  "ratio_noon", "ratio_mp",
               "ratio_cic", "ratio_cio", "ratio_sqz"};
  const LossBudget budget = LossBudget::lossless(0.9);
  const int max_param = 128;
  t.rows.assign(static_cast<std::size_t>(max_param), {});
  parallel_for(max_param, threads, [&](int i) {
    const int p = i + 1;
    t.rows[static_cast<std::size_t>(i)] = {static_cast<double>(p),
                                           xi_sp(budget).xi_ratio,
                                           xi_noon(p, budget).xi_ratio,
                                           xi_mp(p, budget).xi_ratio,
                                           xi_cic(p, budget).xi_ratio,
                                           xi_cio(p, budget).xi_ratio,
                                           xi_sqz(static_cast<double>(p), budget).xi_ratio};
  });
  return t;
}

// Lossy comparison: eta_rt = 0.95 and eta_p = eta_d = 0.9 for the main
// columns, plus optimal-m MP and MPSQZ at eta_rt = 0.99. All ratios are
// against the lossless quantum limit.
inline Table figure_fig3(int points = 200, double om_min = 1e-3, double om_max = 0.9,
                         int threads = 1) {
  Table t;
  t.columns = {"one_minus_eta",  "ratio_sp",      "ratio_noon_opt", "ratio_mp_opt",
               "ratio_cic_opt",  "ratio_cio_m4",  "ratio_cio_m32",  "ratio_cio_m128",
               "ratio_sqz_inf",  "ratio_mp_rt99", "ratio_mpsqz_rt99"};
  const std::vector<double> om = one_minus_eta_grid(points, om_min, om_max);
  t.rows.assign(om.size(), {});
  parallel_for(points, threads, [&](int i) {
    const double eta = 1.0 - om[static_cast<std::size_t>(i)];
    const LossBudget main_budget(eta, 0.9, 0.95, 0.9);
    const LossBudget low_rt_loss(eta, 0.9, 0.99, 0.9);
    t.rows[static_cast<std::size_t>(i)] = {
        om[static_cast<std::size_t>(i)],
        xi_sp(main_budget).xi_ratio,
        optimal_int_param(SchemeFamily::Noon, main_budget).report.xi_ratio,
        optimal_int_param(SchemeFamily::Mp, main_budget).report.xi_ratio,
        optimal_int_param(SchemeFamily::Cic, main_budget).report.xi_ratio,
        xi_cio(4, main_budget).xi_ratio,
        xi_cio(32, main_budget).xi_ratio,
        xi_cio(128, main_budget).xi_ratio,
        xi_sqz_limit(main_budget).xi_ratio,
        optimal_int_param(SchemeFamily::Mp, low_rt_loss).report.xi_ratio,
        optimal_int_param(SchemeFamily::MpSqz, low_rt_loss).report.xi_ratio};
  });
  return t;
}

// UTF-8, comma-separated, header row, LF endings, 12 significant digits,
// no trailing comma.
inline void write_csv(const Table& t, std::ostream& out) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out << ',';
    out << t.columns[c];
  }
  out << '\n';
  for (const std::vector<double>& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << fmt_g12(row[c]);
    }
    out << '\n';
  }
}

// JSON mirror of the CSV table. Values are rounded to the same 12 significant
// digits so both formats carry identical numbers.
inline std::string table_to_json(const Table& t) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kSweepSchemaVersion;
  doc["columns"] = t.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const std::vector<double>& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (double v : row) r.push_back(std::stod(fmt_g12(v)));
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

inline void write_table_file(const Table& t, const std::string& path,
                             OutputFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file '" + path + "'");
  if (format == OutputFormat::Csv)
    write_csv(t, out);
  else
    out << table_to_json(t);
  out.flush();
  if (!out) throw IoError("failed while writing '" + path + "'");
}

}  // namespace doselim
