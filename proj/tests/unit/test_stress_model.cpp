#include "exvi/error.hpp"
#include "exvi/stress_model.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace exvi;

namespace {

TermSpec small_spec(Index d) {
  TermSpec s;
  s.feature_dim = d;
  for (Index a = 0; a < d; ++a) s.terms.push_back(Term::linear(a));
  for (Index a = 0; a < d; ++a) s.terms.push_back(Term::square(a));
  for (Index a = 0; a + 1 < d; ++a) s.terms.push_back(Term::product(a, a + 1));
  return s;
}

Matrix uniform_rows(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) x(i, j) = u(rng);
  return x;
}

StressModel random_model(const TermSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  StressModel m;
  m.termspec = spec;
  m.beta.resize(spec.size());
  for (Index t = 0; t < spec.size(); ++t) m.beta(t) = normal(rng);
  m.intercept = 3.5;
  return m;
}

double symbolic(const StressModel& m, const Vector& x) {
  double s = m.intercept;
  for (std::size_t t = 0; t < m.termspec.terms.size(); ++t) {
    const Term& term = m.termspec.terms[t];
    double mono = 0.0;
    if (term.kind == TermKind::kLinear) mono = x(term.a);
    if (term.kind == TermKind::kSquare) mono = x(term.a) * x(term.a);
    if (term.kind == TermKind::kProduct) mono = x(term.a) * x(*term.b);
    s += m.beta(static_cast<Index>(t)) * mono;
  }
  return s;
}

}  // namespace

TEST(StressModel, ZeroBetaGivesIntercept) {
  StressModel m;
  m.termspec = small_spec(3);
  m.beta = Vector::Zero(m.termspec.size());
  m.intercept = 12.0;
  EXPECT_EQ(m.evaluate(Vector::Constant(3, 4.0)), 12.0);
}

TEST(StressModel, SingleLinearTerm) {
  StressModel m;
  m.termspec.feature_dim = 4;
  m.termspec.terms = {Term::linear(2)};
  m.beta = Vector::Constant(1, 2.0);
  Vector x = Vector::Zero(4);
  x(2) = 1.5;
  EXPECT_DOUBLE_EQ(m.evaluate(x), 3.0);
}

TEST(StressModel, MatchesTermByTermExpansion) {
  const StressModel m = random_model(small_spec(4), 1);
  const Matrix x = uniform_rows(50, 4, 2);
  const Vector batch = m.evaluate_rows(x);
  const Matrix design = design_matrix(m.termspec, x);
  for (Index i = 0; i < x.rows(); ++i) {
    EXPECT_NEAR(m.evaluate(x.row(i).transpose()), symbolic(m, x.row(i).transpose()), 1e-12);
    EXPECT_NEAR(batch(i), m.intercept + design.row(i).dot(m.beta), 1e-12);
  }
}

TEST(StressModel, DesignMatrixConsistency) {
  TermSpec s;
  s.feature_dim = 2;
  s.terms = {Term::square(0), Term::product(1, 1), Term::square(1)};
  Matrix x = uniform_rows(10, 2, 3);
  x.col(0).setOnes();
  const Matrix m = design_matrix(s, x);
  EXPECT_TRUE((m.col(0).array() == 1.0).all());
  EXPECT_EQ(m.col(1), m.col(2));
}

TEST(StressModel, ExactlyQuadraticAlongLines) {
  const StressModel m = random_model(small_spec(5), 4);
  Rng rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(5), u(5);
    for (Index j = 0; j < 5; ++j) {
      x(j) = normal(rng);
      u(j) = normal(rng);
    }
    auto f = [&](double t) { return m.evaluate(x + t * u); };
    // Lagrange interpolation through t = 0, 1, 2 predicts t = 3
    const double pred = f(0.0) - 3.0 * f(1.0) + 3.0 * f(2.0);
    EXPECT_NEAR(pred, f(3.0), 1e-9 * (1.0 + std::abs(f(3.0))));
  }
}

TEST(StressModel, RecoversNoiselessModel) {
  const TermSpec spec = small_spec(4);
  const StressModel truth = random_model(spec, 6);
  const Matrix x = uniform_rows(200, 4, 7);
  const Vector sigma = truth.evaluate_rows(x);
  StressFitOptions opt;
  opt.ridge = 0.0;
  const StressModel fit = fit_stress(x, sigma, spec, opt);
  EXPECT_LT((fit.beta - truth.beta).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(fit.intercept, truth.intercept, 1e-8);
  const Vector resid = fit.evaluate_rows(x) - sigma;
  EXPECT_LT(std::sqrt(resid.squaredNorm() / 200.0), 1e-8);
}

TEST(StressModel, ConstantSigmaGivesIntercept) {
  const TermSpec spec = small_spec(3);
  const Matrix x = uniform_rows(60, 3, 8);
  const StressModel fit = fit_stress(x, Vector::Constant(60, 1100.0), spec);
  EXPECT_LT(fit.beta.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(fit.intercept, 1100.0, 1e-6);
}

TEST(StressModel, RidgeShrinksMonotonically) {
  const TermSpec spec = small_spec(3);
  const StressModel truth = random_model(spec, 9);
  const Matrix x = uniform_rows(80, 3, 10);
  Vector sigma = truth.evaluate_rows(x);
  double prev = std::numeric_limits<double>::infinity();
  for (double ridge : {0.0, 1.0, 1e3, 1e6}) {
    StressFitOptions opt;
    opt.ridge = ridge;
    const double norm = fit_stress(x, sigma, spec, opt).beta.norm();
    EXPECT_LT(norm, prev);
    prev = norm;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(StressModel, RankDeficientWithoutRidge) {
  TermSpec spec;
  spec.feature_dim = 2;
  spec.terms = {Term::linear(0), Term::linear(1)};
  Matrix x = uniform_rows(30, 2, 11);
  x.col(1) = 2.0 * x.col(0);
  StressFitOptions opt;
  opt.ridge = 0.0;
  try {
    fit_stress(x, x.col(0), spec, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIllConditioned);
    EXPECT_NE(std::string(e.what()).find("ridge"), std::string::npos);
  }
  opt.ridge = 1e-6;
  EXPECT_NO_THROW(fit_stress(x, x.col(0), spec, opt));
}

TEST(StressModel, Validation) {
  TermSpec bad;
  bad.feature_dim = 2;
  bad.terms = {Term::linear(2)};
  EXPECT_THROW(bad.validate(), ValidationError);
  const StressModel m = random_model(small_spec(3), 12);
  EXPECT_THROW(m.evaluate(Vector::Zero(4)), ValidationError);
  EXPECT_EQ(term_kind_from_string(to_string(TermKind::kProduct)), TermKind::kProduct);
  EXPECT_THROW(term_kind_from_string("cubic"), ValidationError);
}
