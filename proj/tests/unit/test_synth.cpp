#include "exvi/error.hpp"
#include "exvi/synth.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace exvi;

namespace {

struct Models {
  PcaModel pca;
  GaussianMixture prior;
  StressModel stress;
};

const Models& models() {
  static const Models m = [] {
    Rng rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(300, 4);
    for (Index i = 0; i < 300; ++i) {
      const double a = normal(rng), b = normal(rng);
      x.row(i) << a, a + 0.1 * normal(rng), b, 2.0 * b + 0.1 * normal(rng);
    }
    Models out;
    out.pca = fit_pca(x, DimensionPolicy::fixed(2), Standardization::kZScore,
                      {"f1", "f2", "f3", "f4"});
    out.prior = fit_em(out.pca.project_rows(x), 2).model;
    TermSpec spec;
    spec.feature_dim = 4;
    spec.feature_names = out.pca.feature_names();
    spec.terms = {Term::linear(0), Term::linear(2), Term::product(0, 2)};
    Vector beta(3);
    beta << 50.0, 30.0, 10.0;
    out.stress = StressModel{spec, beta, 1000.0};
    return out;
  }();
  return m;
}

FeatureTable experimental(Index n, std::uint64_t seed) {
  const Models& m = models();
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureTable t;
  t.feature_names = m.pca.feature_names();
  t.rows = m.pca.reconstruct_rows(m.prior.sample(n, seed));
  Vector s = m.stress.evaluate_rows(t.rows);
  for (Index i = 0; i < n; ++i) s(i) += 5.0 * normal(rng);
  t.stress = s;
  return t;
}

void expect_flags_consistent(const Dataset& ds) {
  for (const FeatureTable* t : {&ds.train, &ds.test}) {
    ASSERT_TRUE(t->stress && t->extreme_flag);
    for (Index i = 0; i < t->size(); ++i) {
      EXPECT_EQ((*t->extreme_flag)[static_cast<std::size_t>(i)], (*t->stress)(i) > ds.sigma_bar);
    }
  }
}

}  // namespace

TEST(SelectThreshold, OneToHundred) {
  std::vector<double> s(100);
  std::iota(s.begin(), s.end(), 1.0);
  const double t = select_threshold(s, 0.95);
  EXPECT_GT(t, 95.0);
  EXPECT_LT(t, 96.0);
  EXPECT_EQ(std::count_if(s.begin(), s.end(), [&](double v) { return v > t; }), 5);
}

TEST(SelectThreshold, ExceedanceCountIsFloorOrCeil) {
  Rng rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n : {7, 20, 101, 999}) {
    std::vector<double> s(static_cast<std::size_t>(n));
    for (auto& v : s) v = u(rng);
    for (double q : {0.5, 0.9, 0.95}) {
      const double t = select_threshold(s, q);
      const double c = static_cast<double>(std::count_if(s.begin(), s.end(), [&](double v) { return v > t; }));
      EXPECT_TRUE(c == std::floor((1 - q) * n) || c == std::ceil((1 - q) * n)) << n << " " << q;
    }
  }
}

TEST(SelectThreshold, Errors) {
  EXPECT_THROW(select_threshold(std::vector<double>{}, 0.95), ValidationError);
  EXPECT_THROW(select_threshold(std::vector<double>{1.0}, 1.0), ValidationError);
}

TEST(GeneratePerfect, DefaultSplit) {
  const Models& m = models();
  ExperimentConfig c;
  const Dataset ds = generate_perfect(c, m.prior, m.pca, m.stress);
  EXPECT_EQ(ds.train.size(), 4000);
  EXPECT_EQ(ds.test.size(), 1000);
  EXPECT_EQ(ds.train.extreme_count() + ds.test.extreme_count(), 250);
  expect_flags_consistent(ds);
  EXPECT_TRUE(ds.warnings.empty());
}

TEST(GeneratePerfect, HundredRowsGiveFiveExtremes) {
  const Models& m = models();
  ExperimentConfig c;
  c.n_total = 100;
  c.n_train = 80;
  const Dataset ds = generate_perfect(c, m.prior, m.pca, m.stress);
  EXPECT_EQ(ds.train.extreme_count() + ds.test.extreme_count(), 5);
}

TEST(GeneratePerfect, Deterministic) {
  const Models& m = models();
  ExperimentConfig c;
  c.n_total = 300;
  c.n_train = 200;
  c.seed = 17;
  const Dataset a = generate_perfect(c, m.prior, m.pca, m.stress);
  const Dataset b = generate_perfect(c, m.prior, m.pca, m.stress);
  EXPECT_EQ(a.train.rows, b.train.rows);
  EXPECT_EQ(a.test.rows, b.test.rows);
  EXPECT_EQ(a.sigma_bar, b.sigma_bar);
  c.seed = 18;
  EXPECT_NE(generate_perfect(c, m.prior, m.pca, m.stress).train.rows, a.train.rows);
}

TEST(GenerateMixed, PerpendicularCounts) {
  const Models& m = models();
  ExperimentConfig c;
  c.mode = ExperimentMode::kMixed;
  const Dataset ds = generate_mixed(c, experimental(546, 5), m.prior, m.pca, m.stress);
  EXPECT_EQ(ds.train.size(), 1000);
  EXPECT_EQ(ds.test.size(), 700 + 246);
  EXPECT_EQ(std::count(ds.test_provenance.begin(), ds.test_provenance.end(), Provenance::kExperimental),
            246);
  EXPECT_EQ(std::count(ds.train_provenance.begin(), ds.train_provenance.end(),
                       Provenance::kExperimental),
            300);
  expect_flags_consistent(ds);
  const Vector& es = *experimental(546, 5).stress;
  EXPECT_EQ(ds.sigma_bar, select_threshold({es.data(), 546}, 0.95));
}

TEST(GenerateMixed, ParallelCounts) {
  const Models& m = models();
  ExperimentConfig c;
  c.mode = ExperimentMode::kMixed;
  const Dataset ds = generate_mixed(c, experimental(617, 6), m.prior, m.pca, m.stress);
  EXPECT_EQ(std::count(ds.test_provenance.begin(), ds.test_provenance.end(), Provenance::kExperimental),
            317);
}

TEST(GenerateMixed, NoSyntheticRows) {
  const Models& m = models();
  ExperimentConfig c;
  c.mode = ExperimentMode::kMixed;
  c.n_synthetic = 0;
  c.n_synthetic_train = 0;
  const Dataset ds = generate_mixed(c, experimental(400, 7), m.prior, m.pca, m.stress);
  EXPECT_EQ(ds.train.size(), 300);
  EXPECT_EQ(ds.test.size(), 100);
  expect_flags_consistent(ds);
}

TEST(GenerateMixed, Errors) {
  const Models& m = models();
  ExperimentConfig c;
  c.mode = ExperimentMode::kMixed;
  EXPECT_THROW(generate_mixed(c, experimental(200, 8), m.prior, m.pca, m.stress), ValidationError);
  FeatureTable no_stress = experimental(400, 8);
  no_stress.stress.reset();
  EXPECT_THROW(generate_mixed(c, no_stress, m.prior, m.pca, m.stress), ValidationError);
}

TEST(GenerateMixed, EqualStressesWarn) {
  const Models& m = models();
  ExperimentConfig c;
  c.mode = ExperimentMode::kMixed;
  FeatureTable t = experimental(400, 9);
  t.stress->setConstant(5.0);
  const Dataset ds = generate_mixed(c, t, m.prior, m.pca, m.stress);
  EXPECT_EQ(ds.sigma_bar, 5.0);
  EXPECT_FALSE(ds.warnings.empty());
}

TEST(Bicrystal, TermspecShape) {
  const TermSpec s = bicrystal_termspec();
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.feature_dim, 57);
  EXPECT_EQ(s.size(), 94);
}

TEST(SurrogateBase, ShapeFlagsAndDeterminism) {
  SurrogateBaseConfig c;
  c.n_rows = 200;
  const TermSpec spec = bicrystal_termspec();
  const SurrogateBase a = make_surrogate_base(spec, c);
  const SurrogateBase b = make_surrogate_base(spec, c);
  EXPECT_EQ(a.table.size(), 200);
  EXPECT_EQ(a.table.dim(), 57);
  EXPECT_EQ(a.table.rows, b.table.rows);
  EXPECT_EQ(*a.table.stress, *b.table.stress);
  EXPECT_EQ(a.table.extreme_count(), 10);
  EXPECT_NO_THROW(a.table.validate());
}

TEST(Experiment, ModeNames) {
  EXPECT_EQ(experiment_mode_from_string("mixed"), ExperimentMode::kMixed);
  EXPECT_EQ(to_string(ExperimentMode::kPerfect), "perfect");
  EXPECT_THROW(experiment_mode_from_string("both"), ValidationError);
}
