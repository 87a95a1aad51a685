#pragma once

// Weibull-family competitor models for model comparison. Parameter naming is
// per model; the same letter means different things in different rows:
//
//   standard_weibull          φ (shape), scale fixed at 1
//   two_param_weibull         β (scale), φ (shape)
//   exponentiated_weibull     β (exponent), λ (rate), φ (shape)
//   transmuted_weibull        β (transmutation, [-1, 1]), λ (rate), φ (shape)
//   sine_alpha_power_weibull  β (shape), λ (rate), φ (alpha power)
//   smp_weibull_3p            β (scale), λ (SMP), φ (shape)
//   smptw_2p                  λ (SMP), φ (shape), scale fixed at 1

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smptw/distribution.hpp"
#include "smptw/errors.hpp"
#include "smptw/inference.hpp"
#include "smptw/numerics.hpp"
#include "smptw/optimizer.hpp"

namespace smptw::zoo {

enum class ModelId {
  standard_weibull,
  two_param_weibull,
  exponentiated_weibull,
  transmuted_weibull,
  sine_alpha_power_weibull,
  smp_weibull_3p,
  smptw_2p,
};

struct ParamDomain {
  double lower;
  double upper;
  bool closed;  // bounds attainable
};

struct ModelSpec {
  ModelId id;
  std::string key;
  std::string display_name;
  int param_count;
  std::vector<std::string> param_names;
  std::vector<ParamDomain> domains;
  std::vector<Transform> transforms;
};

namespace detail {

inline constexpr double kInf = numerics::kInf;
inline const ParamDomain kPositive{0.0, kInf, false};
inline const ParamDomain kSymmetricClosed{-1.0, 1.0, true};

inline std::vector<ModelSpec> build_specs() {
  using T = Transform;
  return {
      {ModelId::standard_weibull, "standard_weibull", "Standard Weibull", 1, {"phi"}, {kPositive},
       {T::positive}},
      {ModelId::two_param_weibull, "two_param_weibull", "Two parameter Weibull", 2,
       {"beta", "phi"}, {kPositive, kPositive}, {T::positive, T::positive}},
      {ModelId::exponentiated_weibull, "exponentiated_weibull", "Exponentiated Weibull", 3,
       {"beta", "lambda", "phi"}, {kPositive, kPositive, kPositive},
       {T::positive, T::positive, T::positive}},
      {ModelId::transmuted_weibull, "transmuted_weibull", "Transmuted Weibull", 3,
       {"beta", "lambda", "phi"}, {kSymmetricClosed, kPositive, kPositive},
       {T::symmetric, T::positive, T::positive}},
      {ModelId::sine_alpha_power_weibull, "sine_alpha_power_weibull", "Sine alpha power Weibull",
       3, {"beta", "lambda", "phi"}, {kPositive, kPositive, kPositive},
       {T::positive, T::positive, T::positive}},
      {ModelId::smp_weibull_3p, "smp_weibull_3p", "SMP transformed Weibull (3 parameter)", 3,
       {"beta", "lambda", "phi"}, {kPositive, kPositive, kPositive},
       {T::positive, T::positive, T::positive}},
      {ModelId::smptw_2p, "smptw_2p", "SMPtW (2 parameter)", 2, {"lambda", "phi"},
       {kPositive, kPositive}, {T::positive, T::positive}},
  };
}

inline const std::vector<ModelSpec>& all_specs() {
  static const std::vector<ModelSpec> specs = build_specs();
  return specs;
}

}  // namespace detail

inline const ModelSpec& model_spec(ModelId id) {
  return detail::all_specs().at(static_cast<std::size_t>(id));
}

/// The six comparison models, in table order.
inline std::vector<ModelSpec> comparison_models() {
  const auto& all = detail::all_specs();
  return {all.begin(), all.begin() + 6};
}

inline std::optional<ModelId> parse_model_id(std::string_view key) {
  for (const auto& spec : detail::all_specs()) {
    if (spec.key == key) return spec.id;
  }
  if (key == "smptw") return ModelId::smptw_2p;
  return std::nullopt;
}

inline void check_params(const ModelSpec& spec, std::span<const double> params) {
  if (params.size() != static_cast<std::size_t>(spec.param_count)) {
    throw DomainError(spec.key + ": expected " + std::to_string(spec.param_count) +
                      " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ParamDomain& d = spec.domains[i];
    const double v = params[i];
    const bool ok = std::isfinite(v) && (d.closed ? (v >= d.lower && v <= d.upper)
                                                  : (v > d.lower && v < d.upper));
    if (!ok) {
      throw DomainError(spec.key + ": parameter " + spec.param_names[i] + " = " +
                        std::to_string(v) + " outside its domain");
    }
  }
}

namespace detail {

struct PointEval {
  double log_pdf;
  std::array<double, 3> grad{};  // ∂ log f / ∂θ
};

// d/da log(a/(e^a - 1))
inline double d_log_smp_scale(double a) {
  if (std::abs(a) < 1e-4) return -0.5 - a / 12.0;
  return 1.0 / a - std::exp(a) / std::expm1(a);
}

inline PointEval standard_weibull_point(std::span<const double> t, double y) {
  const double phi = t[0];
  const double ly = std::log(y);
  const double x = std::pow(y, phi);
  return {std::log(phi) + (phi - 1.0) * ly - x, {1.0 / phi + ly - x * ly}};
}

inline PointEval two_param_weibull_point(std::span<const double> t, double y) {
  const double beta = t[0], phi = t[1];
  const double lz = std::log(y / beta);
  const double x = std::exp(phi * lz);
  return {std::log(phi) - std::log(beta) + (phi - 1.0) * lz - x,
          {(phi / beta) * (x - 1.0), 1.0 / phi + lz - x * lz}};
}

inline PointEval exponentiated_weibull_point(std::span<const double> t, double y) {
  const double beta = t[0], lambda = t[1], phi = t[2];
  const double ly = std::log(y);
  const double u = lambda * std::pow(y, phi);
  const double E = std::exp(-u);
  const double A = -std::expm1(-u);
  const double logA = std::log(A);
  const double c = -1.0 + (beta - 1.0) * E / A;
  return {std::log(beta) + std::log(phi) + std::log(lambda) + (phi - 1.0) * ly - u + (beta - 1.0) * logA,
          {1.0 / beta + logA, 1.0 / lambda + (u / lambda) * c, 1.0 / phi + ly + u * ly * c}};
}

inline PointEval transmuted_weibull_point(std::span<const double> t, double y) {
  const double beta = t[0], lambda = t[1], phi = t[2];
  const double ly = std::log(y);
  const double u = lambda * std::pow(y, phi);
  const double E = std::exp(-u);
  const double B = 1.0 - beta + 2.0 * beta * E;
  const double c = -1.0 - 2.0 * beta * E / B;
  return {std::log(phi) + std::log(lambda) + (phi - 1.0) * ly - u + std::log(B),
          {(2.0 * E - 1.0) / B, 1.0 / lambda + (u / lambda) * c, 1.0 / phi + ly + u * ly * c}};
}

// G = (α^A - 1)/(α - 1) written through a = log α; G -> A as α -> 1.
inline double alpha_power_cdf(double A, double a) {
  return a == 0.0 ? A : std::expm1(A * a) / std::expm1(a);
}

inline PointEval sine_alpha_power_weibull_point(std::span<const double> t, double y) {
  constexpr double half_pi = 0.5 * std::numbers::pi;
  const double beta = t[0], lambda = t[1], alpha = t[2];
  const double a = smp_log_lambda(alpha);
  const double ly = std::log(y);
  const double u = lambda * std::pow(y, beta);
  const double E = std::exp(-u);
  const double A = -std::expm1(-u);
  const double G = alpha_power_cdf(A, a);
  const double cosine = std::cos(half_pi * G);
  const double T = half_pi * std::tan(half_pi * G);

  const double dG_dA = smptw::detail::smp_scale(a) * std::exp(A * a);
  double dG_da;
  if (std::abs(a) < 1e-4) {
    dG_da = A * (0.5 * (A - 1.0) + 2.0 * a * (A * A / 6.0 - A / 4.0 + 1.0 / 12.0));
  } else {
    const double em1 = std::expm1(a);
    dG_da = (A * std::exp(A * a) * em1 - std::expm1(A * a) * std::exp(a)) / (em1 * em1);
  }
  const double dl_du = -1.0 + E * a - T * dG_dA * E;
  const double dl_da = d_log_smp_scale(a) + A - T * dG_da;

  const double lf = std::log(half_pi) + std::log(lambda) + std::log(beta) +
                    smptw::detail::log_smp_scale(a) + (beta - 1.0) * ly - u + A * a +
                    std::log(cosine);
  return {lf, {1.0 / beta + ly + u * ly * dl_du, 1.0 / lambda + (u / lambda) * dl_du, dl_da / alpha}};
}

inline PointEval smp_weibull_3p_point(std::span<const double> t, double y) {
  const double beta = t[0], lambda = t[1], phi = t[2];
  const double L = smp_log_lambda(lambda);
  const double lz = std::log(y / beta);
  const double x = std::exp(phi * lz);
  const double w = std::exp(-x);
  const double lf = smp_log_pdf(L, w, std::log(phi) - std::log(beta) + (phi - 1.0) * lz - x);
  const double k = L * w + 1.0;
  return {lf,
          {(phi / beta) * (x * k - 1.0), w / lambda + smptw::detail::lambda_score_constant(lambda),
           1.0 / phi + lz - x * lz * k}};
}

inline PointEval smptw_2p_point(std::span<const double> t, double y) {
  const std::array<double, 3> scaled{1.0, t[0], t[1]};
  PointEval e = smp_weibull_3p_point(scaled, y);
  return {e.log_pdf, {e.grad[1], e.grad[2], 0.0}};
}

inline PointEval evaluate_point(ModelId id, std::span<const double> t, double y) {
  switch (id) {
    case ModelId::standard_weibull:
      return standard_weibull_point(t, y);
    case ModelId::two_param_weibull:
      return two_param_weibull_point(t, y);
    case ModelId::exponentiated_weibull:
      return exponentiated_weibull_point(t, y);
    case ModelId::transmuted_weibull:
      return transmuted_weibull_point(t, y);
    case ModelId::sine_alpha_power_weibull:
      return sine_alpha_power_weibull_point(t, y);
    case ModelId::smp_weibull_3p:
      return smp_weibull_3p_point(t, y);
    case ModelId::smptw_2p:
      return smptw_2p_point(t, y);
  }
  throw DomainError("unknown model");
}

}  // namespace detail

inline double model_log_pdf(const ModelSpec& spec, std::span<const double> params, double y) {
  check_params(spec, params);
  if (!(y > 0.0)) throw DomainError(spec.key + ": y must be > 0");
  if (std::isinf(y)) return -numerics::kInf;
  const double lf = detail::evaluate_point(spec.id, params, y).log_pdf;
  return std::isnan(lf) ? -numerics::kInf : lf;
}

inline double model_pdf(const ModelSpec& spec, std::span<const double> params, double y) {
  return std::exp(model_log_pdf(spec, params, y));
}

inline double model_cdf(const ModelSpec& spec, std::span<const double> t, double y) {
  check_params(spec, t);
  if (!(y >= 0.0)) throw DomainError(spec.key + ": y must be >= 0");
  if (y == 0.0) return 0.0;
  switch (spec.id) {
    case ModelId::standard_weibull:
      return -std::expm1(-std::pow(y, t[0]));
    case ModelId::two_param_weibull:
      return -std::expm1(-std::pow(y / t[0], t[1]));
    case ModelId::exponentiated_weibull:
      return std::pow(-std::expm1(-t[1] * std::pow(y, t[2])), t[0]);
    case ModelId::transmuted_weibull: {
      const double G = -std::expm1(-t[1] * std::pow(y, t[2]));
      return std::clamp((1.0 + t[0]) * G - t[0] * G * G, 0.0, 1.0);
    }
    case ModelId::sine_alpha_power_weibull: {
      const double A = -std::expm1(-t[1] * std::pow(y, t[0]));
      return std::sin(0.5 * std::numbers::pi * detail::alpha_power_cdf(A, smp_log_lambda(t[2])));
    }
    case ModelId::smp_weibull_3p: {
      const double x = std::pow(y / t[0], t[2]);
      return smp_cdf(smp_log_lambda(t[1]), -std::expm1(-x), std::exp(-x));
    }
    case ModelId::smptw_2p:
      return cdf(SmptwParams(t[0], t[1]), y);
  }
  throw DomainError("unknown model");
}

inline double model_log_likelihood(const ModelSpec& spec, std::span<const double> params,
                                   std::span<const double> data) {
  check_params(spec, params);
  smptw::detail::require_positive_data(data, "model_log_likelihood");
  double ll = 0.0;
  for (double y : data) ll += detail::evaluate_point(spec.id, params, y).log_pdf;
  return std::isnan(ll) ? -numerics::kInf : ll;
}

/// Analytic score ∂ℓ/∂θ.
inline std::vector<double> model_score(const ModelSpec& spec, std::span<const double> params,
                                       std::span<const double> data) {
  check_params(spec, params);
  smptw::detail::require_positive_data(data, "model_score");
  std::vector<double> g(static_cast<std::size_t>(spec.param_count), 0.0);
  for (double y : data) {
    const auto e = detail::evaluate_point(spec.id, params, y);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += e.grad[i];
  }
  return g;
}

struct WeibullStart {
  double shape;
  double scale;
};

/// Two-parameter Weibull MLE through its profile equation in the shape:
/// Σ y^k log y / Σ y^k - 1/k - mean(log y) = 0.
inline WeibullStart weibull_start(std::span<const double> data) {
  const double n = static_cast<double>(data.size());
  double mean_log = 0.0;
  for (double y : data) mean_log += std::log(y) / n;
  auto profile = [&](double k) {
    // scale by the max to keep y^k finite
    const double ymax = *std::max_element(data.begin(), data.end());
    double num = 0.0, den = 0.0;
    for (double y : data) {
      const double v = std::pow(y / ymax, k);
      num += v * std::log(y);
      den += v;
    }
    return num / den - 1.0 / k - mean_log;
  };
  double k = 1.0;
  try {
    k = numerics::find_root(profile, 0.02, 50.0);
  } catch (const std::exception&) {
    k = 1.0;
  }
  double mean_pow = 0.0;
  for (double y : data) mean_pow += std::pow(y, k) / n;
  return {k, std::pow(mean_pow, 1.0 / k)};
}

inline LikelihoodProblem model_likelihood_problem(const ModelSpec& spec, std::span<const double> data) {
  smptw::detail::require_positive_data(data, "fit_model");
  LikelihoodProblem problem;
  problem.names = spec.param_names;
  problem.transforms = spec.transforms;
  problem.log_likelihood = [&spec, data](std::span<const double> t) {
    return model_log_likelihood(spec, t, data);
  };
  problem.gradient = [&spec, data](std::span<const double> t) { return model_score(spec, t, data); };
  return problem;
}

/// Data-driven start points: the two-parameter Weibull fit combined with a
/// spread of values for each model's extra parameter.
inline std::vector<std::vector<double>> default_starts(const ModelSpec& spec,
                                                       std::span<const double> data) {
  const WeibullStart w = weibull_start(data);
  const double rate = std::pow(w.scale, -w.shape);
  std::vector<std::vector<double>> starts;
  switch (spec.id) {
    case ModelId::standard_weibull:
      starts.push_back({standard_weibull_shape_mle(data)});
      break;
    case ModelId::two_param_weibull:
      starts.push_back({w.scale, w.shape});
      break;
    case ModelId::exponentiated_weibull:
      for (double b : {0.25, 0.5, 1.0, 2.0, 4.0}) starts.push_back({b, rate, w.shape});
      break;
    case ModelId::transmuted_weibull:
      for (double b : {-0.9, -0.5, 0.0, 0.5, 0.9}) starts.push_back({b, rate, w.shape});
      break;
    case ModelId::sine_alpha_power_weibull:
      for (double a : {0.05, 0.5, 2.0, 20.0, 200.0, 2000.0}) starts.push_back({w.shape, rate, a});
      break;
    case ModelId::smp_weibull_3p:
      for (double l : {0.005, 0.05, 0.5, 2.0, 20.0, 200.0}) starts.push_back({w.scale, l, w.shape});
      break;
    case ModelId::smptw_2p: {
      const double phi0 = standard_weibull_shape_mle(data);
      starts.push_back({2.0, phi0});
      starts.push_back({0.5, phi0});
      break;
    }
  }
  return starts;
}

/// Maximum-likelihood fit of one model. With `init`, only that start is used
/// (a local fit); otherwise the best of default_starts().
inline FitResult fit_model(const ModelSpec& spec, std::span<const double> data,
                           std::optional<std::vector<double>> init = std::nullopt,
                           const OptimizerOptions& options = {}) {
  if (data.size() <= static_cast<std::size_t>(spec.param_count) + 1) {
    throw DomainError(spec.key + ": need more than param_count + 1 observations");
  }
  const LikelihoodProblem problem = model_likelihood_problem(spec, data);
  if (init) {
    check_params(spec, *init);
    return maximize_likelihood(problem, *init, options);
  }
  return maximize_multistart(problem, default_starts(spec, data), options);
}

struct ModelComparisonRow {
  ModelSpec spec;
  FitResult fit;
  std::optional<InformationCriteria> criteria;
  std::optional<int> rank;  // 1 = best; empty when excluded or not converged
  bool excluded_from_ranking = false;
};

struct ModelComparisonReport {
  std::size_t sample_size = 0;
  std::vector<ModelComparisonRow> rows;

  const ModelComparisonRow* find(ModelId id) const {
    for (const auto& row : rows) {
      if (row.spec.id == id) return &row;
    }
    return nullptr;
  }
  const ModelComparisonRow* best() const {
    for (const auto& row : rows) {
      if (row.rank == 1) return &row;
    }
    return nullptr;
  }
};

/// Fits every spec and ranks the converged ones by AIC (ties by BIC). Models in
/// `unranked` are fitted and reported but take no rank.
inline ModelComparisonReport compare_models(std::span<const double> data,
                                            const std::vector<ModelSpec>& specs,
                                            std::span<const ModelId> unranked = {}) {
  if (data.empty() || specs.empty()) throw DomainError("compare_models: need data and models");
  ModelComparisonReport report;
  report.sample_size = data.size();
  for (const auto& spec : specs) {
    ModelComparisonRow row{spec, {}, std::nullopt, std::nullopt,
                           std::find(unranked.begin(), unranked.end(), spec.id) != unranked.end()};
    try {
      row.fit = fit_model(spec, data);
      if (std::isfinite(row.fit.log_likelihood)) {
        row.criteria = information_criteria(row.fit.log_likelihood, spec.param_count,
                                            static_cast<int>(data.size()));
      }
    } catch (const std::exception& e) {
      row.fit.param_names = spec.param_names;
      row.fit.converged = false;
      row.fit.message = e.what();
    }
    report.rows.push_back(std::move(row));
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    if (row.fit.converged && row.criteria && !row.excluded_from_ranking) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = *report.rows[a].criteria;
    const auto& cb = *report.rows[b].criteria;
    if (ca.aic != cb.aic) return ca.aic < cb.aic;
    return ca.bic < cb.bic;
  });
  for (std::size_t r = 0; r < order.size(); ++r) report.rows[order[r]].rank = static_cast<int>(r + 1);
  return report;
}

}  // namespace smptw::zoo
