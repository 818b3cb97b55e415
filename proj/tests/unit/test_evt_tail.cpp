#include "exvi/error.hpp"
#include "exvi/evt_tail.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace exvi;

namespace {

FrechetTail tail_of(double s, double alpha, double m = 0.0) {
  FrechetTail t;
  t.s = s;
  t.alpha = alpha;
  t.m = m;
  return t;
}

std::vector<double> draw(double s, double alpha, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> ys(n);
  // inverse CDF: y = s (-log U)^(-1/alpha)
  for (auto& y : ys) y = s * std::pow(-std::log(u(rng)), -1.0 / alpha);
  return ys;
}

// Simpson's rule in log-space, integrand pdf(y) dy = pdf(e^u) e^u du
double integrate_pdf(const FrechetTail& t, double lo, double hi, int n = 20000) {
  const double a = std::log(lo - t.m);
  const double b = std::log(hi - t.m);
  const double h = (b - a) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = a + i * h;
    const double f = std::exp(frechet_log_pdf(t, t.m + std::exp(u)) + u);
    sum += (i == 0 || i == n) ? f : (i % 2 ? 4.0 * f : 2.0 * f);
  }
  return sum * h / 3.0;
}

}  // namespace

TEST(Frechet, UnitParameters) {
  const FrechetTail t = tail_of(1.0, 1.0);
  EXPECT_NEAR(frechet_log_pdf(t, 1.0), -1.0, 1e-12);
  EXPECT_NEAR(frechet_cdf(t, 1.0), std::exp(-1.0), 1e-12);
}

TEST(Frechet, SupportBoundary) {
  const FrechetTail t = tail_of(1.0, 2.0, 0.5);
  EXPECT_EQ(frechet_log_pdf(t, 0.5), kLogDensitySentinel);
  EXPECT_EQ(frechet_log_pdf(t, -3.0), kLogDensitySentinel);
  EXPECT_EQ(frechet_cdf(t, 0.5), 0.0);
  EXPECT_NEAR(frechet_cdf(t, 1e12), 1.0, 1e-12);
  EXPECT_LT(frechet_cdf(t, 0.5 + 1e-3), 1e-12);
}

TEST(Frechet, PdfIntegratesToOne) {
  const FrechetTail t = tail_of(1.3, 2.0);
  EXPECT_NEAR(integrate_pdf(t, 1e-8, 1e6 * t.s), 1.0, 1e-4);
}

TEST(Frechet, CdfMatchesIntegratedPdf) {
  const FrechetTail t = tail_of(2.0, 1.5, 0.3);
  for (int i = 1; i <= 20; ++i) {
    const double y = t.m + 0.25 * i;
    EXPECT_NEAR(frechet_cdf(t, y), integrate_pdf(t, t.m + 1e-9, y), 1e-6);
  }
}

TEST(Frechet, CdfNondecreasing) {
  const FrechetTail t = tail_of(0.7, 3.0);
  double prev = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double c = frechet_cdf(t, 0.01 * i);
    EXPECT_GE(c, prev);
    prev = c;
  }
}

TEST(Frechet, RecoversModerateTail) {
  const auto ys = draw(2.0, 3.0, 10000, 1);
  const FrechetFit fit = fit_frechet_mle(ys);
  EXPECT_NEAR(fit.tail.s, 2.0, 0.1);
  EXPECT_NEAR(fit.tail.alpha, 3.0, 0.15);
  EXPECT_LT(fit.gradient_norm, 1e-6);
  EXPECT_GE(fit.log_likelihood, frechet_log_likelihood(ys, 2.0, 3.0, 0.0) - 1e-6);
}

TEST(Frechet, RecoversHeavyAndLightTails) {
  for (double alpha : {1.2, 8.0}) {
    const auto ys = draw(2.0, alpha, 10000, 2);
    const FrechetFit fit = fit_frechet_mle(ys);
    EXPECT_NEAR(fit.tail.alpha, alpha, 0.1 * alpha);
    EXPECT_NEAR(fit.tail.s, 2.0, 0.2);
  }
}

TEST(Frechet, BeatsCoarseGrid) {
  const auto ys = draw(1.5, 2.5, 2000, 3);
  const FrechetFit fit = fit_frechet_mle(ys);
  for (double s = 0.5; s <= 3.0; s += 0.25) {
    for (double a = 0.5; a <= 5.0; a += 0.25) {
      EXPECT_GE(fit.log_likelihood, frechet_log_likelihood(ys, s, a, 0.0) - 1e-9);
    }
  }
}

TEST(Frechet, ScaleEquivariance) {
  auto ys = draw(1.0, 4.0, 3000, 4);
  const FrechetFit base = fit_frechet_mle(ys);
  for (auto& y : ys) y *= 7.5;
  const FrechetFit scaled = fit_frechet_mle(ys);
  EXPECT_NEAR(scaled.tail.s, 7.5 * base.tail.s, 1e-6 * scaled.tail.s);
  EXPECT_NEAR(scaled.tail.alpha, base.tail.alpha, 1e-6);
}

TEST(Frechet, PoorStartStillConverges) {
  // most mass close to the location with a light upper tail
  std::vector<double> ys = {0.02, 0.04, 0.05, 0.06, 0.2, 0.35, 0.5, 0.6, 0.7, 1.0,
                            2.0,  4.0,  6.0,  9.0,  12.0, 20.0, 30.0, 50.0, 55.0, 84.0};
  const FrechetFit fit = fit_frechet_mle(ys);
  EXPECT_LT(fit.gradient_norm, 1e-6);
  EXPECT_TRUE(std::isfinite(fit.tail.alpha));
}

TEST(Frechet, ProfileLocation) {
  auto ys = draw(2.0, 3.0, 4000, 5);
  for (auto& y : ys) y += 1.0;
  const FrechetFit fit = fit_frechet_mle(ys, TailLocation::kProfile);
  EXPECT_LT(fit.tail.m, *std::min_element(ys.begin(), ys.end()));
  EXPECT_GE(fit.log_likelihood, fit_frechet_mle(ys, TailLocation::kZero).log_likelihood - 1e-9);
}

TEST(Frechet, FitErrors) {
  std::vector<double> few = {1, 2, 3};
  EXPECT_THROW(fit_frechet_mle(few), ValidationError);
  std::vector<double> nonpositive(20, 1.0);
  nonpositive[4] = -1.0;
  EXPECT_THROW(fit_frechet_mle(nonpositive), ValidationError);
  std::vector<double> stresses(50, 0.0);
  try {
    fit_exceedance_tail(stresses, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyEvidence);
  }
}

TEST(Exceedance, FloorAndCeiling) {
  FrechetTail t = tail_of(5.0, 2.0, 0.0);
  t.sigma_bar = 100.0;
  EXPECT_EQ(exceedance_prob(t, 100.0), kProbabilityFloor);
  EXPECT_EQ(exceedance_prob(t, 50.0), kProbabilityFloor);
  EXPECT_NEAR(exceedance_prob(t, 1e9), 1.0, 1e-12);
}

TEST(Exceedance, MonotoneOverRandomTails) {
  Rng rng(6);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    FrechetTail t = tail_of(u(rng), u(rng), normal(rng));
    t.sigma_bar = normal(rng);
    std::vector<double> s = {normal(rng), normal(rng), normal(rng)};
    std::sort(s.begin(), s.end());
    double prev = 0.0;
    for (double v : s) {
      const double p = exceedance_prob(t, v);
      EXPECT_GE(p, prev);
      EXPECT_GE(p, kProbabilityFloor);
      EXPECT_LE(p, 1.0);
      prev = p;
    }
  }
}

TEST(Exceedance, FitsOnlyExceedances) {
  std::vector<double> stresses;
  const auto ys = draw(3.0, 2.5, 500, 7);
  for (double y : ys) stresses.push_back(1000.0 + y);
  for (int i = 0; i < 500; ++i) stresses.push_back(900.0 + 0.1 * i);
  const FrechetFit fit = fit_exceedance_tail(stresses, 1000.0);
  const FrechetFit direct = fit_frechet_mle(ys);
  EXPECT_NEAR(fit.tail.s, direct.tail.s, 1e-9);
  EXPECT_EQ(fit.tail.sigma_bar, 1000.0);
}
