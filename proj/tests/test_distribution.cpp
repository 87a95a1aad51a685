#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "smptw/distribution.hpp"
#include "smptw/numerics.hpp"
#include "test_support.hpp"

using namespace smptw;
using numerics::integrate;
using numerics::kInf;
using smptw::testing::grid_params;
using smptw::testing::rel_err;

namespace {

const double kLevels[] = {0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999};

double bisect_cdf(const SmptwParams& p, double u, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(p, mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double quad_moment(const SmptwParams& p, double r) {
  return integrate([&](double y) { return std::pow(y, r) * pdf(p, y); }, 0.0, kInf, {1e-14, 1e-11, 1000});
}

}  // namespace

TEST(Params, Validation) {
  EXPECT_THROW(SmptwParams(0.0, 1.0), DomainError);
  EXPECT_THROW(SmptwParams(-1.0, 1.0), DomainError);
  EXPECT_THROW(SmptwParams(2.0, 0.0), DomainError);
  EXPECT_THROW(SmptwParams(kInf, 1.0), DomainError);
  EXPECT_THROW(SmptwParams(2.0, std::nan("")), DomainError);
  EXPECT_TRUE(SmptwParams(1.0 + 1e-9, 2.0).weibull_branch());
  EXPECT_FALSE(SmptwParams(1.0 + 1e-7, 2.0).weibull_branch());
  EXPECT_EQ(SmptwParams(1.0 + 1e-9, 2.0).log_lambda(), 0.0);
}

TEST(Pdf, KnownValues) {
  EXPECT_NEAR(pdf(SmptwParams(1.0, 2.0), 1.0), 2.0 * std::exp(-1.0), 1e-15);
  EXPECT_EQ(pdf(SmptwParams(3.0, 2.0), 0.0), 0.0);
  EXPECT_NEAR(pdf(SmptwParams(1.0, 1.0), 0.0), 1.0, 1e-15);
  EXPECT_EQ(pdf(SmptwParams(3.0, 0.5), 0.0), kInf);
  EXPECT_THROW(pdf(SmptwParams(3.0, 2.0), -0.1), DomainError);
}

TEST(Pdf, IsDerivativeOfCdf) {
  for (const auto& p : grid_params()) {
    for (double y : {0.3, 0.8, 1.0, 1.4}) {
      const double h = 1e-5;
      const double fd = (cdf(p, y + h) - cdf(p, y - h)) / (2 * h);
      EXPECT_NEAR(pdf(p, y), fd, 1e-6 * std::max(1.0, pdf(p, y))) << p.lambda() << " " << p.phi() << " " << y;
    }
  }
}

TEST(Pdf, Normalization) {
  for (const auto& p : grid_params()) {
    const double q = integrate([&](double y) { return pdf(p, y); }, 0.0, kInf, {1e-13, 1e-11, 1000});
    EXPECT_NEAR(q, 1.0, 1e-8) << p.lambda() << " " << p.phi();
  }
}

TEST(Pdf, LargeParametersStayFinite) {
  const SmptwParams p(1e200, 3.0);
  for (double y : {0.01, 0.5, 1.0, 3.0}) {
    EXPECT_TRUE(std::isfinite(log_pdf(p, y))) << y;
  }
  EXPECT_NEAR(integrate([&](double y) { return pdf(p, y); }, 0.0, kInf, {1e-13, 1e-11, 2000}), 1.0, 1e-7);
}

TEST(Cdf, KnownValues) {
  for (const auto& p : grid_params()) EXPECT_EQ(cdf(p, 0.0), 0.0);
  EXPECT_NEAR(cdf(SmptwParams(1.0, 3.0), 1.0), 1.0 - std::exp(-1.0), 1e-15);
  const SmptwParams p(3.0, 2.0);
  const double q = integrate([&](double y) { return pdf(p, y); }, 0.0, 1.0, {1e-14, 1e-12, 200});
  EXPECT_NEAR(cdf(p, 1.0), q, 1e-8);
  EXPECT_EQ(cdf(p, kInf), 1.0);
}

TEST(Cdf, NondecreasingAndComplement) {
  for (const auto& p : grid_params()) {
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double y = 0.04 * i;
      const double F = cdf(p, y);
      EXPECT_GE(F, prev);
      EXPECT_NEAR(F + survival(p, y), 1.0, 1e-14);
      prev = F;
    }
  }
  EXPECT_NEAR(survival(SmptwParams(0.5, 4.5), 0.8), 1.0 - cdf(SmptwParams(0.5, 4.5), 0.8), 1e-15);
}

TEST(Cdf, MatchesGeneralTransformOfWeibullBase) {
  for (const auto& p : grid_params()) {
    for (double y = 0.05; y < 3.0; y += 0.1) {
      const double G = 1.0 - std::exp(-std::pow(y, p.phi()));
      double literal = G;
      if (p.lambda() != 1.0) {
        const double l = p.lambda();
        literal = (std::exp(std::log(l) * (1.0 - G)) - l) / (1.0 - l);
      }
      EXPECT_NEAR(cdf(p, y), literal, 1e-14) << p.lambda() << " " << y;
    }
  }
}

TEST(Survival, KnownValues) {
  EXPECT_EQ(survival(SmptwParams(3.0, 2.0), 0.0), 1.0);
  EXPECT_NEAR(survival(SmptwParams(1.0, 1.0), 2.0), std::exp(-2.0), 1e-16);
}

TEST(Hazard, KnownValues) {
  for (double y : {0.1, 1.0, 5.0, 30.0}) EXPECT_NEAR(hazard(SmptwParams(1.0, 1.0), y), 1.0, 1e-12);
  EXPECT_NEAR(hazard(SmptwParams(1.0, 2.0), 0.5), 1.0, 1e-14);
  const SmptwParams p(3.0, 2.0);
  EXPECT_LT(rel_err(hazard(p, 1.0), pdf(p, 1.0) / survival(p, 1.0)), 1e-12);
  EXPECT_THROW(hazard(p, 0.0), DomainError);
  EXPECT_THROW(hazard(p, 100.0), NumericError);
}

TEST(Hazard, MatchesRatioWhereSurvivalIsNotTiny) {
  for (const auto& p : grid_params()) {
    for (double y = 0.05; y < 4.0; y += 0.05) {
      const double S = survival(p, y);
      if (S < 1e-8) break;
      EXPECT_LT(rel_err(hazard(p, y), pdf(p, y) / S), 1e-9) << p.lambda() << " " << p.phi() << " " << y;
    }
  }
}

TEST(Hazard, Shapes) {
  for (double y = 0.1; y <= 3.0; y += 0.1) EXPECT_NEAR(hazard(SmptwParams(1.0, 1.0), y), 1.0, 1e-12);
  for (double lambda : {0.5, 1.5, 3.0, 9.0}) {
    double up = 0.0, down = kInf;
    for (int i = 0; i < 50; ++i) {
      const double y = 0.1 + 2.9 * i / 49.0;
      const double inc = hazard(SmptwParams(lambda, 2.0), y);
      const double dec = hazard(SmptwParams(lambda, 0.5), y);
      EXPECT_GT(inc, up);
      EXPECT_LT(dec, down);
      up = inc;
      down = dec;
    }
  }
}

TEST(Quantile, KnownValues) {
  EXPECT_NEAR(quantile(SmptwParams(1.0, 2.0), 1.0 - std::exp(-1.0)), 1.0, 1e-14);
  const SmptwParams p(3.0, 1.0);
  EXPECT_NEAR(quantile(p, 0.5), bisect_cdf(p, 0.5, 0.0, 20.0), 1e-10);
  EXPECT_THROW(quantile(p, 0.0), DomainError);
  EXPECT_THROW(quantile(p, 1.0), DomainError);
}

TEST(Quantile, RoundTrip) {
  for (const auto& p : grid_params()) {
    for (double u : kLevels) EXPECT_NEAR(cdf(p, quantile(p, u)), u, 1e-10) << p.lambda() << " " << u;
  }
}

TEST(Quantile, ExtremeLevelsAndParameters) {
  for (const auto& p : {SmptwParams(1e-12, 1.0), SmptwParams(1e12, 2.0), SmptwParams(1.0 + 1e-7, 0.3)}) {
    for (double u : {1e-15, 1e-9, 0.3, 1.0 - 1e-9, 1.0 - 0x1.0p-53}) {
      const double y = quantile(p, u);
      ASSERT_TRUE(std::isfinite(y) && y >= 0.0) << p.lambda() << " " << u;
      EXPECT_NEAR(cdf(p, y), u, 1e-9) << p.lambda() << " " << u;
    }
  }
}

TEST(Quantile, LambdaOneLimit) {
  for (double u : kLevels) {
    const double weibull = std::pow(-std::log1p(-u), 1.0 / 1.7);
    EXPECT_NEAR(quantile(SmptwParams(1.0 + 1e-6, 1.7), u), weibull, 1e-5);
    EXPECT_NEAR(quantile(SmptwParams(1.0 - 1e-6, 1.7), u), weibull, 1e-5);
    EXPECT_NEAR(quantile(SmptwParams(1.0, 1.7), u), weibull, 1e-14);
  }
}

TEST(Median, Values) {
  EXPECT_NEAR(median(SmptwParams(1.0, 1.0)), std::log(2.0), 1e-15);
  EXPECT_NEAR(median(SmptwParams(1.0, 2.0)), std::sqrt(std::log(2.0)), 1e-15);
  const SmptwParams p(2.5, 1.2);
  EXPECT_NEAR(median(p), bisect_cdf(p, 0.5, 0.0, 10.0), 1e-10);
}

TEST(Moments, KnownValues) {
  EXPECT_NEAR(raw_moment(SmptwParams(1.0, 1.0), 1), 1.0, 1e-14);
  EXPECT_NEAR(raw_moment(SmptwParams(1.0, 2.0), 2), 1.0, 1e-14);
  EXPECT_THROW(raw_moment(SmptwParams(1.0, 2.0), 0), DomainError);
  const auto mv1 = mean_variance(SmptwParams(1.0, 1.0));
  EXPECT_NEAR(mv1.mean, 1.0, 1e-14);
  EXPECT_NEAR(mv1.variance, 1.0, 1e-13);
  const auto mv2 = mean_variance(SmptwParams(1.0, 2.0));
  EXPECT_NEAR(mv2.mean, std::sqrt(std::numbers::pi) / 2.0, 1e-14);
  EXPECT_NEAR(mv2.variance, 1.0 - std::numbers::pi / 4.0, 1e-13);
}

TEST(Moments, AgainstQuadrature) {
  for (const auto& p : grid_params()) {
    for (int r = 1; r <= 4; ++r) {
      EXPECT_LT(rel_err(raw_moment(p, r), quad_moment(p, r)), 1e-6) << p.lambda() << " " << p.phi() << " " << r;
    }
    const auto mv = mean_variance(p);
    EXPECT_GE(mv.variance, 0.0);
  }
  const SmptwParams p(1.5, 2.0);
  const double m1 = quad_moment(p, 1), m2 = quad_moment(p, 2);
  EXPECT_LT(rel_err(mean_variance(p).variance, m2 - m1 * m1), 1e-6);
}

TEST(Mgf, Values) {
  for (const auto& p : grid_params()) EXPECT_EQ(mgf(p, 0.0), 1.0);
  EXPECT_NEAR(mgf(SmptwParams(1.0, 1.0), 0.5), 2.0, 1e-9);
  const SmptwParams p(3.0, 2.0);
  const double q = integrate([&](double y) { return std::exp(y + log_pdf(p, y)); }, 0.0, kInf, {1e-14, 1e-12, 500});
  EXPECT_LT(rel_err(mgf(p, 1.0), q), 1e-8);
  const double qn = integrate([&](double y) { return std::exp(-2.0 * y) * pdf(p, y); }, 0.0, kInf, {1e-14, 1e-12, 500});
  EXPECT_LT(rel_err(mgf(p, -2.0), qn), 1e-8);
}

TEST(Mgf, DivergentCases) {
  EXPECT_THROW(mgf(SmptwParams(3.0, 0.7), 0.5), NonConvergenceError);
  EXPECT_THROW(mgf(SmptwParams(1.0, 1.0), 2.0), NonConvergenceError);
  // moments grow like Γ(1 + r/φ), so for φ < 1 the series diverges at any t != 0
  EXPECT_THROW(mgf(SmptwParams(3.0, 0.7), -0.5), NonConvergenceError);
  EXPECT_NO_THROW(mgf(SmptwParams(3.0, 1.5), -0.5));
}

TEST(CharFunction, Values) {
  for (const auto& p : grid_params()) EXPECT_EQ(char_function(p, 0.0), std::complex<double>(1.0, 0.0));
  const auto j = char_function(SmptwParams(1.0, 1.0), 1.0);
  EXPECT_NEAR(j.real(), 0.5, 1e-9);
  EXPECT_NEAR(j.imag(), 0.5, 1e-9);
  const SmptwParams p(2.5, 1.2);
  const double t = 0.7;
  const double re = integrate([&](double y) { return std::cos(t * y) * pdf(p, y); }, 0.0, kInf, {1e-14, 1e-12, 1000});
  const double im = integrate([&](double y) { return std::sin(t * y) * pdf(p, y); }, 0.0, kInf, {1e-14, 1e-12, 1000});
  const auto c = char_function(p, t);
  EXPECT_NEAR(c.real(), re, 1e-8);
  EXPECT_NEAR(c.imag(), im, 1e-8);
}

TEST(CharFunction, BoundedModulus) {
  for (const auto& p : grid_params()) {
    for (double t : {-5.0, -1.0, -0.3, 0.4, 1.0, 2.5, 8.0}) {
      const auto c = char_function(p, t);
      EXPECT_LE(std::abs(c), 1.0 + 1e-9) << p.lambda() << " " << p.phi() << " " << t;
    }
  }
  const auto a = char_function(SmptwParams(3.0, 2.0), 1.3);
  const auto b = char_function(SmptwParams(3.0, 2.0), -1.3);
  EXPECT_NEAR(a.real(), b.real(), 1e-10);
  EXPECT_NEAR(a.imag(), -b.imag(), 1e-10);
}

TEST(Mode, Values) {
  EXPECT_NEAR(mode(SmptwParams(1.0, 3.0)), std::cbrt(2.0 / 3.0), 1e-10);
  EXPECT_EQ(mode(SmptwParams(3.0, 0.8)), 0.0);
  EXPECT_EQ(mode(SmptwParams(3.0, 1.0)), 0.0);
}

TEST(Mode, GridArgmax) {
  const SmptwParams p(3.0, 7.0);
  double best_y = 0.0, best = -kInf;
  const int n = 1000000;
  for (int i = 1; i <= n; ++i) {
    const double y = 3.0 * i / n;
    const double v = log_pdf(p, y);
    if (v > best) {
      best = v;
      best_y = y;
    }
  }
  EXPECT_NEAR(mode(p), best_y, 1e-4);
}

TEST(Mode, Stationarity) {
  for (const auto& p : grid_params()) {
    if (p.phi() <= 1.0) continue;
    const double m = mode(p);
    const double h = 1e-6;
    EXPECT_LE(std::abs((log_pdf(p, m + h) - log_pdf(p, m - h)) / (2 * h)), 1e-6);
    EXPECT_LT(pdf(p, m + 0.01), pdf(p, m));
    EXPECT_LT(pdf(p, m - 0.01), pdf(p, m));
  }
}

TEST(MeanWaitingTime, Values) {
  const double e = std::exp(-1.0);
  EXPECT_NEAR(mean_waiting_time(SmptwParams(1.0, 1.0), 1.0), 1.0 - (1.0 - 2.0 * e) / (1.0 - e), 1e-10);
  const SmptwParams p(3.0, 2.0);
  const double part = integrate([&](double y) { return y * pdf(p, y); }, 0.0, 1.0, {1e-15, 1e-13, 500});
  EXPECT_LT(rel_err(mean_waiting_time(p, 1.0), 1.0 - part / cdf(p, 1.0)), 1e-8);
  EXPECT_NEAR(mean_waiting_time(p, 30.0), 30.0 - raw_moment(p, 1), 1e-9);
}

TEST(MeanWaitingTime, Range) {
  for (const auto& p : grid_params()) {
    for (double t : {0.05, 0.25, 0.5, 1.0, 2.0, 5.0}) {
      const double m = mean_waiting_time(p, t);
      EXPECT_GE(m, 0.0);
      EXPECT_LE(m, t);
    }
  }
  EXPECT_THROW(mean_waiting_time(SmptwParams(3.0, 7.0), 1e-4), DegenerateInputError);
  EXPECT_THROW(mean_waiting_time(SmptwParams(3.0, 7.0), 0.0), DomainError);
}

TEST(MeanResidualLife, Values) {
  for (double t : {0.0, 0.5, 3.0}) EXPECT_NEAR(mean_residual_life(SmptwParams(1.0, 1.0), t), 1.0, 1e-10);
  for (const auto& p : grid_params()) EXPECT_NEAR(mean_residual_life(p, 0.0), raw_moment(p, 1), 1e-8);
  const SmptwParams p(1.5, 2.0);
  const double tail = integrate([&](double y) { return y * pdf(p, y); }, 0.5, kInf, {1e-15, 1e-13, 500});
  EXPECT_LT(rel_err(mean_residual_life(p, 0.5), tail / survival(p, 0.5) - 0.5), 1e-8);
  EXPECT_THROW(mean_residual_life(SmptwParams(3.0, 7.0), 10.0), DegenerateInputError);
  EXPECT_THROW(mean_residual_life(p, -1.0), DomainError);
}

TEST(StressStrength, IdenticalLawsGiveHalf) {
  for (const auto& p : grid_params()) EXPECT_EQ(stress_strength({p, p}), 0.5);
  for (const auto& p : grid_params()) EXPECT_NEAR(stress_strength_closed_form({p, p}), 0.5, 1e-12);
}

TEST(StressStrength, ClosedFormAgainstQuadrature) {
  const StressStrengthPair pair{SmptwParams(3.0, 2.0), SmptwParams(2.0, 2.0)};
  EXPECT_NEAR(stress_strength_closed_form(pair), stress_strength_by_quadrature(pair), 1e-8);
  const StressStrengthPair unit{SmptwParams(3.0, 2.0), SmptwParams(1.0, 2.0)};
  EXPECT_NEAR(stress_strength_closed_form(unit), stress_strength_by_quadrature(unit), 1e-8);
  const StressStrengthPair reciprocal{SmptwParams(4.0, 1.5), SmptwParams(0.25, 1.5)};
  EXPECT_NEAR(stress_strength_closed_form(reciprocal), stress_strength_by_quadrature(reciprocal), 1e-8);
}

TEST(StressStrength, Complementarity) {
  const double lambdas[] = {0.2, 0.5, 1.0, 1.5, 3.0, 9.0};
  for (double a : lambdas) {
    for (double b : lambdas) {
      const SmptwParams p(a, 1.7), q(b, 1.7);
      EXPECT_NEAR(stress_strength({p, q}) + stress_strength({q, p}), 1.0, 1e-8) << a << " " << b;
    }
  }
  const SmptwParams p(2.0, 1.2), q(0.7, 3.0);
  EXPECT_NEAR(stress_strength({p, q}) + stress_strength({q, p}), 1.0, 1e-8);
  EXPECT_THROW(stress_strength_closed_form({p, q}), DomainError);
}

TEST(OrderStatistics, Values) {
  const SmptwParams p(3.0, 2.0);
  EXPECT_EQ(order_stat_pdf(p, {1, 1}, 0.7), pdf(p, 0.7));
  const SmptwParams e(1.0, 1.0);
  for (double y : {0.2, 1.0, 2.5}) {
    const double f = 3.0 * std::pow(1.0 - std::exp(-y), 2) * std::exp(-y);
    EXPECT_NEAR(order_stat_pdf(e, {3, 3}, y), f, 1e-14);
  }
  const double q = integrate([&](double y) { return order_stat_pdf(p, {2, 5}, y); }, 0.0, kInf, {1e-13, 1e-11, 500});
  EXPECT_NEAR(q, 1.0, 1e-9);
  EXPECT_THROW(order_stat_pdf(p, {0, 3}, 1.0), DomainError);
  EXPECT_THROW(order_stat_pdf(p, {4, 3}, 1.0), DomainError);
}

TEST(OrderStatistics, MixtureIdentity) {
  for (const auto& p : grid_params()) {
    for (int n : {2, 3, 5}) {
      for (double y : {0.2, 0.7, 1.1, 2.0}) {
        double mix = 0.0;
        for (int j = 1; j <= n; ++j) mix += order_stat_pdf(p, {j, n}, y) / n;
        EXPECT_NEAR(mix, pdf(p, y), 1e-10);
      }
    }
  }
}

TEST(Renyi, Values) {
  EXPECT_NEAR(renyi_entropy(SmptwParams(1.0, 1.0), 2.0), std::log(2.0), 1e-10);
  EXPECT_NEAR(renyi_entropy(SmptwParams(1.0, 2.0), 2.0), -std::log(std::sqrt(std::numbers::pi / 8.0)), 1e-10);
  const SmptwParams p(3.0, 2.0);
  EXPECT_LT(rel_err(std::exp(renyi_log_integral(p, 0.5)), renyi_integral_by_quadrature(p, 0.5)), 1e-8);
}

TEST(Renyi, SeriesAgainstQuadratureOnGrid) {
  for (const auto& p : grid_params()) {
    for (double h : {0.5, 2.0, 3.0}) {
      EXPECT_LT(rel_err(std::exp(renyi_log_integral(p, h)), renyi_integral_by_quadrature(p, h)), 1e-6)
          << p.lambda() << " " << p.phi() << " " << h;
      EXPECT_NO_THROW(renyi_entropy(p, h));
    }
  }
}

TEST(Renyi, Domain) {
  EXPECT_THROW(renyi_entropy(SmptwParams(2.0, 2.0), 1.0), DomainError);
  EXPECT_THROW(renyi_entropy(SmptwParams(2.0, 2.0), -1.0), DomainError);
  EXPECT_THROW(renyi_entropy(SmptwParams(2.0, 0.25), 2.0), DomainError);
}

TEST(LambdaOne, Continuity) {
  for (double phi : {0.5, 1.0, 2.0, 7.0}) {
    const SmptwParams base(1.0, phi);
    for (double eps : {1e-6, -1e-6}) {
      const SmptwParams near(1.0 + eps, phi);
      for (double y : {0.1, 0.5, 1.0, 1.5, 2.5}) {
        EXPECT_NEAR(pdf(near, y), pdf(base, y), 1e-4);
        EXPECT_NEAR(cdf(near, y), cdf(base, y), 1e-4);
      }
      for (double u : kLevels) EXPECT_NEAR(quantile(near, u), quantile(base, u), 1e-4);
      for (int r = 1; r <= 4; ++r) EXPECT_LT(rel_err(raw_moment(near, r), raw_moment(base, r)), 1e-4);
    }
  }
}

TEST(SmpTransform, Helpers) {
  EXPECT_EQ(smp_log_lambda(1.0 + 1e-9), 0.0);
  EXPECT_NEAR(smp_log_lambda(std::exp(1.0)), 1.0, 1e-15);
  const double L = std::log(4.0);
  EXPECT_NEAR(smp_cdf(L, 0.3, 0.7) + smp_sf(L, 0.7), 1.0, 1e-15);
}
