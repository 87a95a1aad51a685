#pragma once

// Numerical kernel: log-gamma, incomplete gamma, convergent series summation,
// adaptive Gauss-Kronrod quadrature and bracketed root finding.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "smptw/errors.hpp"

namespace smptw::numerics {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct SeriesConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_terms = 500;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_terms < 1) {
      throw DomainError("SeriesConfig: tolerances must be > 0 and max_terms >= 1");
    }
  }
};

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 200;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions < 1) {
      throw DomainError("QuadratureConfig: tolerances must be > 0 and max_subdivisions >= 1");
    }
  }
};

struct SeriesResult {
  double value = 0.0;
  int terms = 0;
};

// ---------------------------------------------------------------------------
// Gamma family
// ---------------------------------------------------------------------------

namespace detail {

// Lanczos approximation, g = 7, n = 9.
inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczosCoef = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

inline double lanczos_log_gamma(double x) {
  // valid for x >= 0.5
  x -= 1.0;
  double a = kLanczosCoef[0];
  for (std::size_t i = 1; i < kLanczosCoef.size(); ++i) {
    a += kLanczosCoef[i] / (x + static_cast<double>(i));
  }
  const double t = x + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

}  // namespace detail

/// log Γ(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be positive and finite, got " + std::to_string(x));
  }
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < 0.5) {
    // reflection: Γ(x)Γ(1-x) = π / sin(πx)
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) -
           detail::lanczos_log_gamma(1.0 - x);
  }
  return detail::lanczos_log_gamma(x);
}

inline double gamma_function(double x) { return std::exp(log_gamma(x)); }

namespace detail {

inline void check_incomplete_gamma_args(double s, double x, const char* who) {
  if (!(s > 0.0) || !std::isfinite(s) || !(x >= 0.0) || std::isnan(x)) {
    throw DomainError(std::string(who) + ": requires s > 0 and x >= 0");
  }
}

// x^s e^{-x} Σ x^n / (s(s+1)...(s+n)) = γ(s, x)
inline double lower_gamma_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  for (int n = 1; n < 2000; ++n) {
    term *= x / (s + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      return sum * std::exp(-x + s * std::log(x));
    }
  }
  throw NonConvergenceError("lower_incomplete_gamma: series did not converge", sum, 2000);
}

// Lentz continued fraction for Γ(s, x), x > s + 1.
inline double upper_gamma_fraction(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 2000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      return std::exp(-x + s * std::log(x)) * h;
    }
  }
  throw NonConvergenceError("upper_incomplete_gamma: continued fraction did not converge", h, 2000);
}

}  // namespace detail

/// γ(s, x) = ∫₀ˣ u^{s-1} e^{-u} du.
inline double lower_incomplete_gamma(double s, double x) {
  detail::check_incomplete_gamma_args(s, x, "lower_incomplete_gamma");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return gamma_function(s);
  if (x < s + 1.0) return detail::lower_gamma_series(s, x);
  return gamma_function(s) - detail::upper_gamma_fraction(s, x);
}

/// Γ(s, x) = ∫ₓ^∞ u^{s-1} e^{-u} du.
inline double upper_incomplete_gamma(double s, double x) {
  detail::check_incomplete_gamma_args(s, x, "upper_incomplete_gamma");
  if (x == 0.0) return gamma_function(s);
  if (std::isinf(x)) return 0.0;
  if (x < s + 1.0) return gamma_function(s) - detail::lower_gamma_series(s, x);
  return detail::upper_gamma_fraction(s, x);
}

// ---------------------------------------------------------------------------
// Series
// ---------------------------------------------------------------------------

/// Sums term(0) + term(1) + ... with compensated (Neumaier) accumulation.
///
/// Stops once two consecutive terms satisfy |t_j| < abs_tol + rel_tol·|S_j|.
/// Requiring two small terms in a row keeps alternating series with a
/// transient near-zero term from stopping early. Throws NonConvergenceError,
/// carrying the partial sum, when max_terms is reached or a term is not finite.
template <class Term>
  requires std::invocable<Term&, int>
SeriesResult sum_series(Term&& term, const SeriesConfig& cfg = {}) {
  cfg.validate();
  double sum = 0.0;
  double comp = 0.0;
  int small_run = 0;
  for (int j = 0; j < cfg.max_terms; ++j) {
    const double t = static_cast<double>(term(j));
    if (!std::isfinite(t)) {
      throw NonConvergenceError("sum_series: non-finite term at index " + std::to_string(j),
                                sum + comp, static_cast<std::size_t>(j));
    }
    const double next = sum + t;
    comp += std::abs(sum) >= std::abs(t) ? (sum - next) + t : (t - next) + sum;
    sum = next;
    const double total = sum + comp;
    if (std::abs(t) < cfg.abs_tol + cfg.rel_tol * std::abs(total)) {
      if (++small_run == 2) return {total, j + 1};
    } else {
      small_run = 0;
    }
  }
  throw NonConvergenceError("sum_series: no convergence within " + std::to_string(cfg.max_terms) +
                                " terms",
                            sum + comp, static_cast<std::size_t>(cfg.max_terms));
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

namespace detail {

struct RuleResult {
  double value;
  double error;
};

// 7-point Gauss / 15-point Kronrod pair with QUADPACK's error heuristic.
template <class F>
RuleResult gauss_kronrod_15(F& f, double a, double b) {
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = static_cast<double>(f(center));
  double kronrod = fc * wgk[7];
  double gauss = fc * wg[3];
  double resabs = std::abs(kronrod);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * xgk[j];
    f1[j] = static_cast<double>(f(center - dx));
    f2[j] = static_cast<double>(f(center + dx));
    kronrod += wgk[j] * (f1[j] + f2[j]);
    resabs += wgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) gauss += wg[j / 2] * (f1[j] + f2[j]);
  }
  const double mean = 0.5 * kronrod;
  double resasc = wgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    resasc += wgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  }
  const double value = kronrod * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * resabs, err);
  }
  if (!std::isfinite(value) || !std::isfinite(err)) {
    throw NumericError("integrate: integrand is not finite on [" + std::to_string(a) + ", " +
                       std::to_string(b) + "]");
  }
  return {value, err};
}

template <class F>
double integrate_finite(F& f, double a, double b, const QuadratureConfig& cfg) {
  struct Segment {
    double a, b, value, error;
  };
  auto by_error = [](const Segment& x, const Segment& y) { return x.error < y.error; };
  std::priority_queue<Segment, std::vector<Segment>, decltype(by_error)> heap(by_error);

  const RuleResult first = gauss_kronrod_15(f, a, b);
  heap.push({a, b, first.value, first.error});
  double total = first.value;
  double total_err = first.error;
  int subdivisions = 1;

  while (total_err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
    if (subdivisions >= cfg.max_subdivisions) {
      throw NonConvergenceError("integrate: tolerance not met after " +
                                    std::to_string(cfg.max_subdivisions) +
                                    " subdivisions (error estimate " + std::to_string(total_err) +
                                    ")",
                                total, static_cast<std::size_t>(subdivisions));
    }
    const Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        std::abs(worst.b - worst.a) <= 100.0 * kEps * std::abs(mid) + 1000.0 * std::numeric_limits<double>::min()) {
      throw NonConvergenceError("integrate: interval too small to subdivide (roundoff)", total,
                                static_cast<std::size_t>(subdivisions));
    }
    heap.pop();
    const RuleResult left = gauss_kronrod_15(f, worst.a, mid);
    const RuleResult right = gauss_kronrod_15(f, mid, worst.b);
    heap.push({worst.a, mid, left.value, left.error});
    heap.push({mid, worst.b, right.value, right.error});
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    ++subdivisions;
    if (subdivisions % 32 == 0) {
      // re-accumulate to wash out drift from the incremental updates
      auto copy = heap;
      total = 0.0;
      total_err = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        total_err += copy.top().error;
        copy.pop();
      }
    }
  }
  return total;
}

}  // namespace detail

/// ∫ₐᵇ f. Either limit may be infinite; infinite ranges are mapped onto a
/// finite interval with y = a + t/(1-t).
template <class F>
double integrate(F&& f, double a, double b, const QuadratureConfig& cfg = {}) {
  cfg.validate();
  if (std::isnan(a) || std::isnan(b)) throw DomainError("integrate: NaN limit");
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, cfg);

  if (std::isinf(a) && std::isinf(b)) {
    return integrate(f, a, 0.0, cfg) + integrate(f, 0.0, b, cfg);
  }
  if (std::isinf(b)) {
    auto g = [&](double t) {
      const double one_minus = 1.0 - t;
      return f(a + t / one_minus) / (one_minus * one_minus);
    };
    return detail::integrate_finite(g, 0.0, 1.0, cfg);
  }
  if (std::isinf(a)) {
    auto g = [&](double t) {
      const double one_minus = 1.0 - t;
      return f(b - t / one_minus) / (one_minus * one_minus);
    };
    return detail::integrate_finite(g, 0.0, 1.0, cfg);
  }
  return detail::integrate_finite(f, a, b, cfg);
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Brent's method (inverse quadratic / secant steps safeguarded by bisection).
///
/// Returns x with |f(x)| <= 1e-12 or a final bracket narrower than
/// 1e-14·max(1, |x|). Throws DomainError if f(lo), f(hi) share a sign.
template <class F>
double find_root(F&& f, double lo, double hi, int max_iterations = 300) {
  constexpr double f_tol = 1e-12;
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("find_root: non-finite bracket");
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (std::isnan(fa) || std::isnan(fb)) throw DomainError("find_root: f is NaN at bracket end");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw DomainError("find_root: f(lo) and f(hi) have the same sign");

  double c = b, fc = fb;
  double d = b - a, e = d;
  for (int iter = 0; iter < max_iterations; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::abs(b) + 0.5e-14 * std::max(1.0, std::abs(b));
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || std::abs(fb) <= f_tol) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
    fb = f(b);
    if (std::isnan(fb)) throw NumericError("find_root: f returned NaN");
  }
  throw NonConvergenceError("find_root: iteration cap reached", b, static_cast<std::size_t>(max_iterations));
}

}  // namespace smptw::numerics
