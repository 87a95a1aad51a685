#pragma once

// Generic maximum-likelihood engine shared by the SMPtW fit and the
// competitor models. Parameters are mapped to an unconstrained space
// (log for positive parameters, atanh for parameters in (-1, 1)); the search
// is BFGS with Armijo backtracking, a Nelder-Mead restart if the line search
// stalls, and a final Newton polish on the natural scale. Standard errors come
// from the observed information, i.e. the inverse of the negative Hessian,
// with the Hessian built by central differences of the analytic score.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "smptw/errors.hpp"

namespace smptw {

enum class Transform {
  positive,   // θ ∈ (0, ∞),  θ = e^z
  symmetric,  // θ ∈ (-1, 1), θ = tanh z
  identity,   // θ ∈ ℝ
};

struct FitResult {
  std::vector<std::string> param_names;
  std::vector<double> estimates;
  std::vector<double> std_errors;
  Eigen::MatrixXd covariance;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  bool converged = false;
  bool std_errors_available = false;
  int iterations = 0;
  double gradient_norm = std::numeric_limits<double>::infinity();
  std::string message;
};

struct LikelihoodProblem {
  std::vector<std::string> names;
  std::vector<Transform> transforms;
  std::function<double(std::span<const double>)> log_likelihood;
  /// ∂ℓ/∂θ on the natural scale.
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

struct OptimizerOptions {
  int max_iterations = 500;
  /// `converged` requires the sup-norm of the natural-scale score below this.
  double gradient_tol = 1e-6;
  /// Largest step (sup-norm, unconstrained scale) tried by the line search.
  double max_step = 4.0;
};

namespace detail {

inline double to_unconstrained(Transform t, double theta) {
  switch (t) {
    case Transform::positive:
      return std::log(theta);
    case Transform::symmetric:
      return std::atanh(theta);
    case Transform::identity:
      break;
  }
  return theta;
}

inline double from_unconstrained(Transform t, double z) {
  switch (t) {
    case Transform::positive:
      return std::exp(z);
    case Transform::symmetric:
      return std::tanh(z);
    case Transform::identity:
      break;
  }
  return z;
}

inline double jacobian(Transform t, double theta) {
  switch (t) {
    case Transform::positive:
      return theta;
    case Transform::symmetric:
      return 1.0 - theta * theta;
    case Transform::identity:
      break;
  }
  return 1.0;
}

inline bool in_domain(Transform t, double theta) {
  if (!std::isfinite(theta)) return false;
  switch (t) {
    case Transform::positive:
      return theta > 0.0;
    case Transform::symmetric:
      return theta > -1.0 && theta < 1.0;
    case Transform::identity:
      break;
  }
  return true;
}

inline double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return std::isnan(m) ? std::numeric_limits<double>::infinity() : m;
}

class Engine {
 public:
  Engine(const LikelihoodProblem& problem, const OptimizerOptions& options)
      : problem_(problem), options_(options), dim_(problem.transforms.size()) {}

  std::vector<double> natural(const Eigen::VectorXd& z) const {
    std::vector<double> theta(dim_);
    for (std::size_t i = 0; i < dim_; ++i) theta[i] = from_unconstrained(problem_.transforms[i], z[i]);
    return theta;
  }

  Eigen::VectorXd unconstrained(std::span<const double> theta) const {
    Eigen::VectorXd z(dim_);
    for (std::size_t i = 0; i < dim_; ++i) z[i] = to_unconstrained(problem_.transforms[i], theta[i]);
    return z;
  }

  bool valid(std::span<const double> theta) const {
    for (std::size_t i = 0; i < dim_; ++i) {
      if (!in_domain(problem_.transforms[i], theta[i])) return false;
    }
    return true;
  }

  // Negative log-likelihood in z; +inf outside the domain.
  double objective(const Eigen::VectorXd& z) {
    ++evaluations_;
    const auto theta = natural(z);
    if (!valid(theta)) return std::numeric_limits<double>::infinity();
    const double ll = problem_.log_likelihood(theta);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  }

  Eigen::VectorXd objective_gradient(const Eigen::VectorXd& z) {
    const auto theta = natural(z);
    const auto g = problem_.gradient(theta);
    Eigen::VectorXd out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      out[i] = -g[i] * jacobian(problem_.transforms[i], theta[i]);
    }
    return out;
  }

  double natural_gradient_norm(const Eigen::VectorXd& z) {
    return sup_norm(problem_.gradient(natural(z)));
  }

  // Returns true if it stopped on the gradient criterion.
  bool bfgs(Eigen::VectorXd& z, int& iterations, int budget) {
    double f = objective(z);
    if (!std::isfinite(f)) return false;
    Eigen::VectorXd g = objective_gradient(z);
    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(dim_, dim_);
    bool fresh = true;
    const double inner_tol = 1e-3 * options_.gradient_tol;

    for (int it = 0; it < budget; ++it) {
      if (natural_gradient_norm(z) <= inner_tol) return true;
      Eigen::VectorXd d = -Hinv * g;
      if (!(g.dot(d) < 0.0) || !d.allFinite()) {
        Hinv.setIdentity();
        fresh = true;
        d = -g;
      }
      const double dmax = d.cwiseAbs().maxCoeff();
      if (dmax > options_.max_step) d *= options_.max_step / dmax;

      const double slope = g.dot(d);
      double alpha = 1.0;
      bool accepted = false;
      Eigen::VectorXd z_new;
      double f_new = f;
      for (int k = 0; k < 60; ++k) {
        z_new = z + alpha * d;
        f_new = objective(z_new);
        if (std::isfinite(f_new) && f_new <= f + 1e-4 * alpha * slope) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      ++iterations;
      if (!accepted) {
        if (!fresh) {
          Hinv.setIdentity();
          fresh = true;
          continue;
        }
        return natural_gradient_norm(z) <= options_.gradient_tol;
      }
      const Eigen::VectorXd g_new = objective_gradient(z_new);
      const Eigen::VectorXd s = z_new - z;
      const Eigen::VectorXd y = g_new - g;
      const double sy = s.dot(y);
      if (sy > 1e-12 * s.norm() * y.norm()) {
        if (fresh) {
          Hinv *= sy / y.dot(y);
          fresh = false;
        }
        const double rho = 1.0 / sy;
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim_, dim_);
        Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) +
               rho * s * s.transpose();
      }
      const double f_old = f;
      z = z_new;
      f = f_new;
      g = g_new;
      if (std::abs(f_old - f) <= 1e-15 * (1.0 + std::abs(f)) && s.cwiseAbs().maxCoeff() < 1e-12) {
        return natural_gradient_norm(z) <= options_.gradient_tol;
      }
    }
    return natural_gradient_norm(z) <= inner_tol;
  }

  void nelder_mead(Eigen::VectorXd& z, int& iterations, int max_evals) {
    const std::size_t n = dim_;
    std::vector<Eigen::VectorXd> simplex(n + 1, z);
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += 0.25;
    for (std::size_t i = 0; i <= n; ++i) values[i] = objective(simplex[i]);

    int evals = static_cast<int>(n + 1);
    while (evals < max_evals) {
      std::vector<std::size_t> order(n + 1);
      for (std::size_t i = 0; i <= n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
      if (std::abs(values[worst] - values[best]) <= 1e-14 * (1.0 + std::abs(values[best]))) break;

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (std::size_t i = 0; i <= n; ++i) {
        if (i != worst) centroid += simplex[i];
      }
      centroid /= static_cast<double>(n);

      const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
      const double fr = objective(reflected);
      ++evals;
      if (fr < values[best]) {
        const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
        const double fe = objective(expanded);
        ++evals;
        if (fe < fr) {
          simplex[worst] = expanded;
          values[worst] = fe;
        } else {
          simplex[worst] = reflected;
          values[worst] = fr;
        }
      } else if (fr < values[second]) {
        simplex[worst] = reflected;
        values[worst] = fr;
      } else {
        const Eigen::VectorXd contracted = centroid + 0.5 * (simplex[worst] - centroid);
        const double fc = objective(contracted);
        ++evals;
        if (fc < values[worst]) {
          simplex[worst] = contracted;
          values[worst] = fc;
        } else {
          for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
            values[i] = objective(simplex[i]);
            ++evals;
          }
        }
      }
      ++iterations;
    }
    const auto best_it = std::min_element(values.begin(), values.end());
    z = simplex[static_cast<std::size_t>(best_it - values.begin())];
  }

  // Central-difference Hessian of ℓ on the natural scale, from the score.
  Eigen::MatrixXd hessian(std::span<const double> theta) const {
    Eigen::MatrixXd H(dim_, dim_);
    std::vector<double> up(theta.begin(), theta.end());
    std::vector<double> down(theta.begin(), theta.end());
    for (std::size_t i = 0; i < dim_; ++i) {
      double h = std::max(1e-5, 1e-5 * std::abs(theta[i]));
      const Transform t = problem_.transforms[i];
      if (t == Transform::positive) h = std::min(h, 0.25 * theta[i]);
      if (t == Transform::symmetric) h = std::min(h, 0.25 * (1.0 - std::abs(theta[i])));
      up[i] = theta[i] + h;
      down[i] = theta[i] - h;
      const auto gu = problem_.gradient(up);
      const auto gd = problem_.gradient(down);
      for (std::size_t k = 0; k < dim_; ++k) H(k, i) = (gu[k] - gd[k]) / (2.0 * h);
      up[i] = theta[i];
      down[i] = theta[i];
    }
    return 0.5 * (H + H.transpose());
  }

  // Newton steps on the natural scale while they keep ℓ from decreasing.
  void newton_polish(std::vector<double>& theta) {
    for (int k = 0; k < 6; ++k) {
      const auto g = problem_.gradient(theta);
      if (sup_norm(g) <= 1e-3 * options_.gradient_tol) return;
      const Eigen::MatrixXd H = hessian(theta);
      if (!H.allFinite()) return;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(-H);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return;
      const Eigen::VectorXd step = ldlt.solve(Eigen::Map<const Eigen::VectorXd>(g.data(), dim_));
      if (!step.allFinite()) return;
      std::vector<double> candidate(theta);
      for (std::size_t i = 0; i < dim_; ++i) candidate[i] += step[i];
      if (!valid(candidate)) return;
      const double ll_old = problem_.log_likelihood(theta);
      const double ll_new = problem_.log_likelihood(candidate);
      if (!std::isfinite(ll_new) || ll_new < ll_old - 1e-12 * (1.0 + std::abs(ll_old))) return;
      if (sup_norm(problem_.gradient(candidate)) > sup_norm(g)) return;
      theta = std::move(candidate);
    }
  }

  FitResult run(std::span<const double> start) {
    if (start.size() != dim_) throw DomainError("maximize_likelihood: start has wrong dimension");
    if (!valid(start)) throw DomainError("maximize_likelihood: start point outside parameter domain");
    Eigen::VectorXd z = unconstrained(start);
    if (!std::isfinite(objective(z))) {
      throw DomainError("maximize_likelihood: log-likelihood is not finite at the start point");
    }
    int iterations = 0;
    bool ok = bfgs(z, iterations, options_.max_iterations);
    if (!ok && iterations < options_.max_iterations) {
      nelder_mead(z, iterations, 400 * static_cast<int>(dim_ + 1));
      ok = bfgs(z, iterations, std::max(1, options_.max_iterations - iterations));
    }
    std::vector<double> theta = natural(z);
    newton_polish(theta);
    return finalize(std::move(theta), iterations);
  }

  FitResult finalize(std::vector<double> theta, int iterations) const {
    FitResult r;
    r.param_names = problem_.names;
    r.iterations = iterations;
    r.log_likelihood = problem_.log_likelihood(theta);
    r.gradient_norm = sup_norm(problem_.gradient(theta));
    r.converged = std::isfinite(r.log_likelihood) && r.gradient_norm <= options_.gradient_tol;
    r.std_errors.assign(dim_, std::numeric_limits<double>::quiet_NaN());
    r.covariance = Eigen::MatrixXd::Constant(dim_, dim_, std::numeric_limits<double>::quiet_NaN());

    const Eigen::MatrixXd H = hessian(theta);
    if (H.allFinite()) {
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-H);
      const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
      if (eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, top)) {
        const Eigen::VectorXd inv_vals = eig.eigenvalues().cwiseInverse();
        Eigen::MatrixXd cov = eig.eigenvectors() * inv_vals.asDiagonal() * eig.eigenvectors().transpose();
        cov = 0.5 * (cov + cov.transpose());
        r.covariance = cov;
        for (std::size_t i = 0; i < dim_; ++i) r.std_errors[i] = std::sqrt(cov(i, i));
        r.std_errors_available = true;
      }
    }
    if (!r.converged) {
      r.message = "gradient norm " + std::to_string(r.gradient_norm) + " above tolerance";
    } else if (!r.std_errors_available) {
      r.message = "observed information is singular or not positive definite";
    }
    r.estimates = std::move(theta);
    return r;
  }

 private:
  const LikelihoodProblem& problem_;
  OptimizerOptions options_;
  std::size_t dim_;
  long evaluations_ = 0;
};

}  // namespace detail

/// Maximizes problem.log_likelihood from one start point.
inline FitResult maximize_likelihood(const LikelihoodProblem& problem, std::span<const double> start,
                                     const OptimizerOptions& options = {}) {
  if (problem.transforms.size() != problem.names.size()) {
    throw DomainError("maximize_likelihood: names and transforms differ in length");
  }
  return detail::Engine(problem, options).run(start);
}

/// Runs every start and keeps the best converged fit (or the best overall if
/// none converged). Start points where the likelihood is not finite are skipped.
inline FitResult maximize_multistart(const LikelihoodProblem& problem,
                                     const std::vector<std::vector<double>>& starts,
                                     const OptimizerOptions& options = {}) {
  FitResult best;
  bool have = false;
  int total_iterations = 0;
  for (const auto& start : starts) {
    FitResult r;
    try {
      r = maximize_likelihood(problem, start, options);
    } catch (const DomainError&) {
      continue;
    }
    total_iterations += r.iterations;
    const bool better = !have || (r.converged && !best.converged) ||
                        (r.converged == best.converged && r.log_likelihood > best.log_likelihood);
    if (better) {
      best = std::move(r);
      have = true;
    }
  }
  if (!have) throw DomainError("maximize_multistart: no usable start point");
  best.iterations = total_iterations;
  return best;
}

}  // namespace smptw
