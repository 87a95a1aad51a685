#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "smptw/distribution.hpp"
#include "smptw/errors.hpp"
#include "smptw/numerics.hpp"
#include "smptw/optimizer.hpp"

namespace smptw {

namespace detail {

inline void require_positive_data(std::span<const double> data, const char* who) {
  if (data.empty()) throw DomainError(std::string(who) + ": empty data");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(data[i] > 0.0) || !std::isfinite(data[i])) {
      throw DomainError(std::string(who) + ": observation " + std::to_string(i) +
                        " must be positive and finite, got " + std::to_string(data[i]));
    }
  }
}

// 1/(λ log λ) - 1/(λ - 1), with its λ -> 1 expansion -1/2 + 5(λ-1)/12.
inline double lambda_score_constant(double lambda) {
  const double eps = lambda - 1.0;
  if (std::abs(eps) < 1e-5) return -0.5 + 5.0 * eps / 12.0;
  return 1.0 / (lambda * std::log(lambda)) - 1.0 / eps;
}

}  // namespace detail

/// ℓ(λ, φ) = n log((log λ)/(λ-1)) + log λ Σ e^{-yᵢ^φ} + n log φ + (φ-1) Σ log yᵢ - Σ yᵢ^φ.
///
/// Returns -∞ when the density underflows at some observation.
inline double log_likelihood(const SmptwParams& p, std::span<const double> data) {
  detail::require_positive_data(data, "log_likelihood");
  const double L = p.log_lambda();
  const double phi = p.phi();
  double sum_w = 0.0, sum_x = 0.0, sum_log = 0.0;
  for (double y : data) {
    const double x = std::pow(y, phi);
    sum_w += std::exp(-x);
    sum_x += x;
    sum_log += std::log(y);
  }
  const double n = static_cast<double>(data.size());
  const double ll = n * detail::log_smp_scale(L) + L * sum_w + n * std::log(phi) +
                    (phi - 1.0) * sum_log - sum_x;
  return std::isnan(ll) ? -numerics::kInf : ll;
}

/// (∂ℓ/∂λ, ∂ℓ/∂φ):
///   ∂ℓ/∂λ = (1/λ) Σ e^{-yᵢ^φ} + n/(λ log λ) - n/(λ-1)
///   ∂ℓ/∂φ = -log λ Σ yᵢ^φ log yᵢ e^{-yᵢ^φ} + n/φ + Σ log yᵢ - Σ yᵢ^φ log yᵢ
/// The λ-component is continued through λ = 1 by its Taylor expansion.
inline std::array<double, 2> score(const SmptwParams& p, std::span<const double> data) {
  detail::require_positive_data(data, "score");
  const double lambda = p.lambda();
  const double L = p.log_lambda();
  const double phi = p.phi();
  double sum_w = 0.0, sum_xlw = 0.0, sum_log = 0.0, sum_xl = 0.0;
  for (double y : data) {
    const double ly = std::log(y);
    const double x = std::pow(y, phi);
    const double w = std::exp(-x);
    sum_w += w;
    sum_xlw += x * ly * w;
    sum_log += ly;
    sum_xl += x * ly;
  }
  const double n = static_cast<double>(data.size());
  return {sum_w / lambda + n * detail::lambda_score_constant(lambda),
          -L * sum_xlw + n / phi + sum_log - sum_xl};
}

/// Shape MLE of the unit-scale Weibull: root of n/φ + Σ log y - Σ y^φ log y.
inline double standard_weibull_shape_mle(std::span<const double> data) {
  detail::require_positive_data(data, "standard_weibull_shape_mle");
  const double n = static_cast<double>(data.size());
  auto equation = [&](double phi) {
    double s = n / phi;
    for (double y : data) s += std::log(y) - std::pow(y, phi) * std::log(y);
    return s;
  };
  double lo = 1e-3, hi = 1.0;
  while (equation(hi) > 0.0 && hi < 1e3) hi *= 2.0;
  while (equation(lo) < 0.0 && lo > 1e-8) lo *= 0.5;
  if (!(equation(lo) > 0.0 && equation(hi) < 0.0)) return 1.0;
  return numerics::find_root(equation, lo, hi);
}

inline LikelihoodProblem smptw_likelihood_problem(std::span<const double> data) {
  detail::require_positive_data(data, "fit_mle");
  LikelihoodProblem problem;
  problem.names = {"lambda", "phi"};
  problem.transforms = {Transform::positive, Transform::positive};
  problem.log_likelihood = [data](std::span<const double> t) {
    return log_likelihood(SmptwParams(t[0], t[1]), data);
  };
  problem.gradient = [data](std::span<const double> t) {
    const auto s = score(SmptwParams(t[0], t[1]), data);
    return std::vector<double>{s[0], s[1]};
  };
  return problem;
}

/// Maximum-likelihood fit of SMPtW(λ, φ).
///
/// Without `init`, two starts are tried, λ₀ ∈ {2, 0.5} (one in each of the
/// λ > 1 and λ < 1 basins), both with φ₀ the unit-scale Weibull shape MLE;
/// the better fit is returned.
inline FitResult fit_mle(std::span<const double> data, std::optional<SmptwParams> init = std::nullopt,
                         const OptimizerOptions& options = {}) {
  if (data.size() < 5) throw DomainError("fit_mle: need at least 5 observations");
  const LikelihoodProblem problem = smptw_likelihood_problem(data);
  std::vector<std::vector<double>> starts;
  if (init) {
    starts.push_back({init->lambda(), init->phi()});
  } else {
    const double phi0 = standard_weibull_shape_mle(data);
    starts.push_back({2.0, phi0});
    starts.push_back({0.5, phi0});
  }
  return maximize_multistart(problem, starts, options);
}

struct ConfidenceInterval {
  double lower;
  double upper;
  double level;

  bool contains(double value) const { return lower <= value && value <= upper; }
};

/// Upper (1 - level)/2 point of the standard normal.
inline double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + 0.5 * level);
}

/// θ̂ ± z·se for parameter `index` of a fit.
inline ConfidenceInterval wald_interval(const FitResult& fit, std::size_t index, double level) {
  if (index >= fit.estimates.size()) throw DomainError("wald_interval: parameter index out of range");
  if (!fit.std_errors_available || index >= fit.std_errors.size() ||
      !std::isfinite(fit.std_errors[index])) {
    throw NumericError("wald_interval: standard errors unavailable for this fit");
  }
  const double z = normal_critical_value(level);
  const double half = z * fit.std_errors[index];
  return {fit.estimates[index] - half, fit.estimates[index] + half, level};
}

struct InformationCriteria {
  double aic;
  double bic;
  double aicc;
  double hqic;
};

/// AIC = 2k - 2ℓ, BIC = k log n - 2ℓ, AICc = AIC + 2k(k+1)/(n-k-1),
/// HQIC = 2k log log n - 2ℓ.
inline InformationCriteria information_criteria(double log_lik, int k, int n) {
  if (k < 1 || n < 1) throw DomainError("information_criteria: k and n must be positive");
  if (n <= k + 1) throw DomainError("information_criteria: AICc undefined for n <= k + 1");
  const double kk = k, nn = n;
  const double aic = 2.0 * kk - 2.0 * log_lik;
  return {aic, kk * std::log(nn) - 2.0 * log_lik, aic + 2.0 * kk * (kk + 1.0) / (nn - kk - 1.0),
          2.0 * kk * std::log(std::log(nn)) - 2.0 * log_lik};
}

}  // namespace smptw
