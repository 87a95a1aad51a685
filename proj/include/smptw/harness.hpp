#pragma once

// Experiment layer: dataset loading, the Monte Carlo study of the SMPtW
// estimator, the competitor-model comparison, curve tables, and JSON / text
// output for all of them.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"
#include "smptw/distribution.hpp"
#include "smptw/errors.hpp"
#include "smptw/inference.hpp"
#include "smptw/model_zoo.hpp"
#include "smptw/sampler.hpp"

namespace smptw::harness {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

struct Dataset {
  std::vector<double> values;
  std::string name;
  std::string source;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Fields of one line: a single CSV field (a trailing comma is tolerated) or
// whitespace-separated values.
inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  if (line.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= line.size()) {
      const auto comma = line.find(',', start);
      const auto end = comma == std::string_view::npos ? line.size() : comma;
      out.push_back(trim(line.substr(start, end - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    while (!out.empty() && out.back().empty()) out.pop_back();
    return out;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

/// Parses one numeric column (optional non-numeric header on the first data
/// line) or whitespace-separated values. Blank lines and lines starting with
/// '#' are skipped.
inline Dataset parse_dataset(std::istream& in, std::string name, std::string source) {
  Dataset ds{{}, std::move(name), std::move(source)};
  std::string line;
  std::size_t lineno = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = detail::split_fields(body);
    const bool first = !seen_content;
    seen_content = true;
    if (body.find(',') != std::string_view::npos && fields.size() > 1) {
      throw DomainError(ds.source + ":" + std::to_string(lineno) + ": expected one column, found " +
                        std::to_string(fields.size()));
    }
    std::vector<double> row;
    bool header = false;
    for (auto f : fields) {
      const auto v = detail::parse_double(f);
      if (!v) {
        if (first && fields.size() == 1) {
          header = true;
          break;
        }
        throw DomainError(ds.source + ":" + std::to_string(lineno) + ": cannot parse '" +
                          std::string(f) + "' as a number");
      }
      if (!std::isfinite(*v) || !(*v > 0.0)) {
        throw DomainError(ds.source + ":" + std::to_string(lineno) +
                          ": values must be positive and finite, got " + std::string(f));
      }
      row.push_back(*v);
    }
    if (!header) ds.values.insert(ds.values.end(), row.begin(), row.end());
  }
  if (ds.values.empty()) throw DomainError(ds.source + ": dataset is empty");
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open data file " + path.string());
  return parse_dataset(in, path.stem().string(), path.string());
}

// ---------------------------------------------------------------------------
// Simulation study
// ---------------------------------------------------------------------------

struct SimulationPlan {
  std::vector<SmptwParams> param_pairs;
  std::vector<int> sample_sizes;
  int replications = 1000;
  double confidence_level = 0.95;
  std::uint64_t base_seed = 20240601;

  void validate() const {
    if (param_pairs.empty()) throw DomainError("SimulationPlan: no parameter pairs");
    if (sample_sizes.empty()) throw DomainError("SimulationPlan: no sample sizes");
    if (replications < 1) throw DomainError("SimulationPlan: replications must be >= 1");
    if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
      throw DomainError("SimulationPlan: confidence_level must lie in (0, 1)");
    }
    for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
      if (sample_sizes[i] < 5) throw DomainError("SimulationPlan: sample sizes must be >= 5");
      if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1]) {
        throw DomainError("SimulationPlan: sample sizes must be strictly increasing");
      }
    }
  }

  /// Retries allowed per cell: 5% of the replications, rounded down.
  int retry_cap() const { return replications / 20; }
};

/// The five parameter pairs and five sample sizes of the published study.
inline SimulationPlan published_study_plan(int replications = 1000, std::uint64_t seed = 20240601) {
  SimulationPlan plan;
  plan.param_pairs = {SmptwParams(3.0, 7.0), SmptwParams(1.5, 2.0), SmptwParams(2.5, 1.2),
                      SmptwParams(3.5, 1.7), SmptwParams(0.5, 4.5)};
  plan.sample_sizes = {50, 100, 250, 500, 1000};
  plan.replications = replications;
  plan.base_seed = seed;
  return plan;
}

/// Plan file: {"param_pairs": [[λ, φ], ...], "sample_sizes": [...],
/// "replications": R, "confidence_level": c, "base_seed": s}.
inline SimulationPlan plan_from_json(const json& j) {
  try {
    SimulationPlan plan;
    for (const auto& pair : j.at("param_pairs")) {
      plan.param_pairs.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    }
    plan.sample_sizes = j.at("sample_sizes").get<std::vector<int>>();
    plan.replications = j.value("replications", plan.replications);
    plan.confidence_level = j.value("confidence_level", plan.confidence_level);
    plan.base_seed = j.value("base_seed", plan.base_seed);
    plan.validate();
    return plan;
  } catch (const json::exception& e) {
    throw DomainError(std::string("invalid simulation plan: ") + e.what());
  }
}

inline SimulationPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open plan file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
  return plan_from_json(j);
}

struct ParameterSummary {
  std::string name;
  double true_value = 0.0;
  double mean_estimate = 0.0;
  double bias = 0.0;
  double mse = 0.0;
  double coverage = 0.0;
};

struct SimulationCell {
  SmptwParams params{1.0, 1.0};
  int n = 0;
  int successful = 0;  // replications entering the summaries
  int retries = 0;
  bool unreliable = false;
  std::array<ParameterSummary, 2> summaries;
};

struct SimulationReport {
  SimulationPlan plan;
  std::vector<SimulationCell> cells;

  const SimulationCell* find(double lambda, double phi, int n) const {
    for (const auto& c : cells) {
      if (c.params.lambda() == lambda && c.params.phi() == phi && c.n == n) return &c;
    }
    return nullptr;
  }
};

struct SimulationOptions {
  unsigned threads = 0;  // 0: hardware concurrency
};

namespace detail {

struct ReplicationOutcome {
  bool ok = false;
  int attempts = 0;
  std::array<double, 2> estimate{};
  std::array<bool, 2> covered{};
};

inline ReplicationOutcome run_replication(const SimulationPlan& plan, std::size_t cell_index,
                                          const SmptwParams& truth, int n, int rep, int max_attempts) {
  ReplicationOutcome out;
  const std::array<double, 2> theta{truth.lambda(), truth.phi()};
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    out.attempts = attempt + 1;
    const std::uint64_t stream_id =
        hash_words({static_cast<std::uint64_t>(cell_index), static_cast<std::uint64_t>(rep),
                    static_cast<std::uint64_t>(attempt)});
    try {
      const auto data = sample(truth, static_cast<std::size_t>(n), SeededStream(plan.base_seed, stream_id));
      const FitResult fit = fit_mle(data);
      if (!fit.converged || !fit.std_errors_available) continue;
      for (std::size_t k = 0; k < 2; ++k) {
        out.estimate[k] = fit.estimates[k];
        out.covered[k] = wald_interval(fit, k, plan.confidence_level).contains(theta[k]);
      }
      out.ok = true;
      return out;
    } catch (const NumericError&) {
      // re-draw
    }
  }
  return out;
}

}  // namespace detail

/// Runs every (pair, n) cell. Replication r of cell c, attempt a, draws from
/// stream hash(c, r, a) of plan.base_seed. A replication whose fit fails to
/// converge is re-drawn; retries are charged against the cell's cap in
/// replication order, and a cell that exceeds the cap (or loses a replication
/// entirely) is flagged unreliable. Results do not depend on thread count.
inline SimulationReport run_simulation(const SimulationPlan& plan, const SimulationOptions& options = {}) {
  plan.validate();
  const std::size_t n_cells = plan.param_pairs.size() * plan.sample_sizes.size();
  const std::size_t reps = static_cast<std::size_t>(plan.replications);
  const std::size_t units = n_cells * reps;
  const int max_attempts = plan.retry_cap() + 1;

  std::vector<detail::ReplicationOutcome> outcomes(units);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t u = next.fetch_add(1); u < units; u = next.fetch_add(1)) {
      const std::size_t cell = u / reps;
      const int rep = static_cast<int>(u % reps);
      const auto& truth = plan.param_pairs[cell / plan.sample_sizes.size()];
      const int n = plan.sample_sizes[cell % plan.sample_sizes.size()];
      outcomes[u] = detail::run_replication(plan, cell, truth, n, rep, max_attempts);
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, units));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  SimulationReport report{plan, {}};
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    SimulationCell c;
    c.params = plan.param_pairs[cell / plan.sample_sizes.size()];
    c.n = plan.sample_sizes[cell % plan.sample_sizes.size()];
    const std::array<double, 2> theta{c.params.lambda(), c.params.phi()};
    std::array<double, 2> sum{}, sum_sq{};
    std::array<int, 2> hits{};
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& o = outcomes[cell * reps + r];
      c.retries += o.attempts - 1;
      if (!o.ok) {
        c.unreliable = true;
        continue;
      }
      ++c.successful;
      for (std::size_t k = 0; k < 2; ++k) {
        sum[k] += o.estimate[k];
        sum_sq[k] += (o.estimate[k] - theta[k]) * (o.estimate[k] - theta[k]);
        hits[k] += o.covered[k] ? 1 : 0;
      }
    }
    if (c.retries > plan.retry_cap()) c.unreliable = true;
    const char* names[2] = {"lambda", "phi"};
    for (std::size_t k = 0; k < 2; ++k) {
      ParameterSummary& s = c.summaries[k];
      s.name = names[k];
      s.true_value = theta[k];
      if (c.successful > 0) {
        const double m = c.successful;
        s.mean_estimate = sum[k] / m;
        s.bias = s.mean_estimate - theta[k];
        s.mse = sum_sq[k] / m;
        s.coverage = hits[k] / m;
      } else {
        s.mean_estimate = s.bias = s.mse = s.coverage = std::nan("");
      }
    }
    report.cells.push_back(std::move(c));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Application study
// ---------------------------------------------------------------------------

struct ApplicationOptions {
  // Keep the two-parameter SMPtW out of the ranking, as in the published tables.
  bool exclude_two_param_smptw = false;
};

/// Fits the six comparison models plus the two-parameter SMPtW and ranks them.
inline zoo::ModelComparisonReport run_application(const Dataset& dataset,
                                                  const ApplicationOptions& options = {}) {
  if (dataset.values.empty()) throw DomainError("run_application: empty dataset");
  auto specs = zoo::comparison_models();
  specs.push_back(zoo::model_spec(zoo::ModelId::smptw_2p));
  std::vector<zoo::ModelId> unranked;
  if (options.exclude_two_param_smptw) unranked.push_back(zoo::ModelId::smptw_2p);
  return zoo::compare_models(dataset.values, specs, unranked);
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

struct CurveGrid {
  double start;
  double stop;
  int count;

  void validate() const {
    if (!(std::isfinite(start) && std::isfinite(stop) && start >= 0.0 && start < stop)) {
      throw DomainError("curve grid needs 0 <= start < stop");
    }
    if (count < 2) throw DomainError("curve grid needs count >= 2");
  }
  double at(int i) const {
    return i == count - 1 ? stop : start + (stop - start) * i / (count - 1);
  }
};

struct CurveRow {
  double y;
  double pdf;
  double cdf;
  double survival;
  std::optional<double> hazard;  // absent where survival < 1e-12
};

inline std::vector<CurveRow> emit_curves(const SmptwParams& p, const CurveGrid& grid) {
  grid.validate();
  std::vector<CurveRow> rows;
  rows.reserve(static_cast<std::size_t>(grid.count));
  for (int i = 0; i < grid.count; ++i) {
    const double y = grid.at(i);
    CurveRow row{y, pdf(p, y), cdf(p, y), survival(p, y), std::nullopt};
    if (y == 0.0) {
      // limit y -> 0 of φ y^{φ-1} λ log λ/(λ - 1): 0, finite or +inf
      const double L = p.log_lambda();
      row.hazard = p.phi() * std::pow(0.0, p.phi() - 1.0) * std::exp(L) * smptw::detail::smp_scale(L);
    } else if (row.survival >= 1e-12) {
      row.hazard = hazard(p, y);
    }
    rows.push_back(row);
  }
  return rows;
}

namespace detail {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_curves_csv(std::ostream& out, const std::vector<CurveRow>& rows) {
  out << "y,pdf,cdf,survival,hazard\n";
  for (const auto& r : rows) {
    out << detail::format_number(r.y) << ',' << detail::format_number(r.pdf) << ','
        << detail::format_number(r.cdf) << ',' << detail::format_number(r.survival) << ',';
    if (r.hazard) out << detail::format_number(*r.hazard);
    out << '\n';
  }
}

inline void write_sample_csv(std::ostream& out, const std::vector<double>& values) {
  out << "y\n";
  for (double v : values) out << detail::format_number(v) << '\n';
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace detail {

// NaN and infinities become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

}  // namespace detail

inline json to_json(const SimulationPlan& plan) {
  json pairs = json::array();
  for (const auto& p : plan.param_pairs) pairs.push_back({p.lambda(), p.phi()});
  return {{"param_pairs", pairs},
          {"sample_sizes", plan.sample_sizes},
          {"replications", plan.replications},
          {"confidence_level", plan.confidence_level},
          {"base_seed", plan.base_seed}};
}

inline json to_json(const SimulationReport& report) {
  json rows = json::array();
  for (const auto& c : report.cells) {
    json params = json::array();
    for (const auto& s : c.summaries) {
      params.push_back({{"name", s.name},
                        {"true_value", s.true_value},
                        {"mean_estimate", detail::number(s.mean_estimate)},
                        {"bias", detail::number(s.bias)},
                        {"mse", detail::number(s.mse)},
                        {"coverage", detail::number(s.coverage)}});
    }
    rows.push_back({{"lambda", c.params.lambda()},
                    {"phi", c.params.phi()},
                    {"n", c.n},
                    {"successful", c.successful},
                    {"retries", c.retries},
                    {"unreliable", c.unreliable},
                    {"parameters", params}});
  }
  return {{"schema_version", kSchemaVersion}, {"kind", "simulation"}, {"plan", to_json(report.plan)},
          {"rows", rows}};
}

inline json to_json(const FitResult& fit) {
  return {{"param_names", fit.param_names},
          {"estimates", detail::numbers(fit.estimates)},
          {"std_errors", detail::numbers(fit.std_errors)},
          {"log_likelihood", detail::number(fit.log_likelihood)},
          {"converged", fit.converged},
          {"std_errors_available", fit.std_errors_available},
          {"iterations", fit.iterations},
          {"gradient_norm", detail::number(fit.gradient_norm)},
          {"message", fit.message}};
}

inline json to_json(const InformationCriteria& ic) {
  return {{"aic", detail::number(ic.aic)},
          {"bic", detail::number(ic.bic)},
          {"aicc", detail::number(ic.aicc)},
          {"hqic", detail::number(ic.hqic)}};
}

inline json to_json(const zoo::ModelComparisonReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row = {{"model_id", r.spec.key},
                {"display_name", r.spec.display_name},
                {"fit", to_json(r.fit)},
                {"criteria", r.criteria ? to_json(*r.criteria) : json(nullptr)},
                {"rank", r.rank ? json(*r.rank) : json(nullptr)},
                {"excluded_from_ranking", r.excluded_from_ranking}};
    rows.push_back(std::move(row));
  }
  return {{"schema_version", kSchemaVersion},
          {"kind", "model_comparison"},
          {"sample_size", report.sample_size},
          {"rows", rows}};
}

// ---------------------------------------------------------------------------
// Text tables
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fixed(double v, int digits = 4) {
  if (!std::isfinite(v)) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// Left-aligns the first column, right-aligns the rest.
inline std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << "  ";
      out << (i == 0 ? std::left : std::right) << std::setw(static_cast<int>(width[i])) << row[i];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace detail

inline std::string format_table(const SimulationReport& report) {
  std::vector<std::vector<std::string>> rows{{"lambda", "phi", "n", "mean(l)", "mean(p)", "bias(l)",
                                              "bias(p)", "mse(l)", "mse(p)", "cp(l)", "cp(p)", "retries"}};
  for (const auto& c : report.cells) {
    const auto& l = c.summaries[0];
    const auto& p = c.summaries[1];
    rows.push_back({detail::fixed(c.params.lambda(), 2), detail::fixed(c.params.phi(), 2),
                    std::to_string(c.n), detail::fixed(l.mean_estimate, 3), detail::fixed(p.mean_estimate, 3),
                    detail::fixed(l.bias, 3), detail::fixed(p.bias, 3), detail::fixed(l.mse, 3),
                    detail::fixed(p.mse, 3), detail::fixed(l.coverage, 3), detail::fixed(p.coverage, 3),
                    std::to_string(c.retries) + (c.unreliable ? "*" : "")});
  }
  return detail::render_table(rows);
}

inline std::string format_table(const zoo::ModelComparisonReport& report) {
  std::vector<std::vector<std::string>> rows{
      {"model", "estimates (se)", "loglik", "AIC", "BIC", "AICc", "HQIC", "rank"}};
  for (const auto& r : report.rows) {
    std::string est;
    for (std::size_t i = 0; i < r.fit.estimates.size(); ++i) {
      if (i) est += ", ";
      est += r.spec.param_names[i] + "=" + detail::fixed(r.fit.estimates[i]) + " (" +
             detail::fixed(r.fit.std_errors[i]) + ")";
    }
    const auto ic = r.criteria.value_or(InformationCriteria{NAN, NAN, NAN, NAN});
    rows.push_back({r.spec.key, est, detail::fixed(r.fit.log_likelihood), detail::fixed(ic.aic),
                    detail::fixed(ic.bic), detail::fixed(ic.aicc), detail::fixed(ic.hqic),
                    r.rank ? std::to_string(*r.rank) : (r.excluded_from_ranking ? "excl" : "-")});
  }
  return detail::render_table(rows);
}

inline std::string format_table(const FitResult& fit) {
  std::vector<std::vector<std::string>> rows{{"parameter", "estimate", "std.error"}};
  for (std::size_t i = 0; i < fit.estimates.size(); ++i) {
    rows.push_back({fit.param_names[i], detail::fixed(fit.estimates[i], 6), detail::fixed(fit.std_errors[i], 6)});
  }
  return detail::render_table(rows) + "log-likelihood " + detail::fixed(fit.log_likelihood, 6) +
         (fit.converged ? "" : "  (not converged: " + fit.message + ")") + "\n";
}

}  // namespace smptw::harness
