#include "exvi/synth.hpp"

#include "exvi/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace exvi {

double select_threshold(std::span<const double> stresses, double quantile) {
  if (stresses.empty()) throw ValidationError("threshold needs stresses");
  if (!(quantile > 0.0 && quantile < 1.0)) {
    throw ValidationError("quantile must be in (0, 1)");
  }
  std::vector<double> sorted(stresses.begin(), stresses.end());
  for (double s : sorted) {
    if (!std::isfinite(s)) throw ValidationError("non-finite stress value");
  }
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * quantile;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void ExperimentConfig::validate() const {
  if (!(quantile > 0.0 && quantile < 1.0)) {
    throw ValidationError("quantile must be in (0, 1)");
  }
  if (mode == ExperimentMode::kPerfect) {
    if (n_total < 2 || n_train < 1 || n_train >= n_total) {
      throw ValidationError("perfect-model split needs 1 <= n_train < n_total");
    }
  } else {
    if (n_synthetic < 0 || n_synthetic_train < 0 ||
        n_synthetic_train > n_synthetic || n_experimental_train < 0) {
      throw ValidationError(
          "mixed split needs 0 <= n_synthetic_train <= n_synthetic and "
          "n_experimental_train >= 0");
    }
  }
}

void flag_extremes(FeatureTable& table, double sigma_bar) {
  if (!table.stress) throw ValidationError("cannot flag extremes without stress");
  std::vector<bool> flags(static_cast<std::size_t>(table.size()));
  for (Index i = 0; i < table.size(); ++i) {
    flags[static_cast<std::size_t>(i)] = (*table.stress)(i) > sigma_bar;
  }
  table.extreme_flag = std::move(flags);
}

namespace {

void warn_if_degenerate(Dataset& ds, std::span<const double> stresses) {
  const auto exceed = std::count_if(stresses.begin(), stresses.end(),
                                    [&](double s) { return s > ds.sigma_bar; });
  if (exceed == 0) {
    ds.warnings.push_back(
        "no stress exceeds the threshold (all stresses equal or quantile too "
        "high)");
  }
}

FeatureTable synthetic_rows(const GaussianMixture& prior, const PcaModel& pca,
                            const StressModel& stress, Index n,
                            std::uint64_t seed) {
  FeatureTable t;
  t.feature_names = pca.feature_names();
  if (n == 0) {
    t.rows.resize(0, pca.feature_dim());
    t.stress = Vector(0);
    return t;
  }
  const Matrix z = prior.sample(n, seed);
  t.rows = pca.reconstruct_rows(z);
  t.stress = stress.evaluate_rows(t.rows);
  return t;
}

std::vector<Index> iota(Index from, Index to) {
  std::vector<Index> v(static_cast<std::size_t>(std::max<Index>(0, to - from)));
  std::iota(v.begin(), v.end(), from);
  return v;
}

}  // namespace

Dataset generate_perfect(const ExperimentConfig& config,
                         const GaussianMixture& prior, const PcaModel& pca,
                         const StressModel& stress) {
  config.validate();
  if (prior.dim() != pca.dim()) {
    throw ValidationError("prior dimension does not match the PCA model");
  }
  if (stress.termspec.feature_dim != pca.feature_dim()) {
    throw ValidationError("stress model and PCA disagree on feature count");
  }
  FeatureTable pooled = synthetic_rows(prior, pca, stress, config.n_total,
                                       derive_seed(config.seed, 1));
  Dataset ds;
  ds.quantile = config.quantile;
  ds.seed = config.seed;
  const Vector& s = *pooled.stress;
  ds.sigma_bar = select_threshold({s.data(), static_cast<std::size_t>(s.size())},
                                  config.quantile);
  warn_if_degenerate(ds, {s.data(), static_cast<std::size_t>(s.size())});
  flag_extremes(pooled, ds.sigma_bar);

  const auto train_idx = iota(0, config.n_train);
  const auto test_idx = iota(config.n_train, config.n_total);
  ds.train = pooled.subset(train_idx);
  ds.test = pooled.subset(test_idx);
  ds.train_provenance.assign(train_idx.size(), Provenance::kSynthetic);
  ds.test_provenance.assign(test_idx.size(), Provenance::kSynthetic);
  return ds;
}

Dataset generate_mixed(const ExperimentConfig& config,
                       const FeatureTable& experimental,
                       const GaussianMixture& prior, const PcaModel& pca,
                       const StressModel& stress) {
  config.validate();
  experimental.validate();
  if (!experimental.stress) {
    throw ValidationError(
        "experimental rows must carry observed stress (missing 'stress' "
        "column)");
  }
  if (experimental.feature_names != pca.feature_names()) {
    throw ValidationError("experimental features do not match the PCA model");
  }
  if (experimental.size() < config.n_experimental_train) {
    throw ValidationError(
        "mixed split needs at least " +
        std::to_string(config.n_experimental_train) +
        " experimental rows for training, got " +
        std::to_string(experimental.size()));
  }

  Dataset ds;
  ds.quantile = config.quantile;
  ds.seed = config.seed;
  const Vector& es = *experimental.stress;
  ds.sigma_bar = select_threshold(
      {es.data(), static_cast<std::size_t>(es.size())}, config.quantile);
  warn_if_degenerate(ds, {es.data(), static_cast<std::size_t>(es.size())});

  FeatureTable synth = synthetic_rows(prior, pca, stress, config.n_synthetic,
                                      derive_seed(config.seed, 2));
  flag_extremes(synth, ds.sigma_bar);
  FeatureTable exp = experimental;
  exp.extreme_flag.reset();
  flag_extremes(exp, ds.sigma_bar);

  std::vector<Index> perm = iota(0, exp.size());
  Rng rng(derive_seed(config.seed, 3));
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::vector<Index> exp_train(perm.begin(),
                                     perm.begin() + config.n_experimental_train);
  const std::vector<Index> exp_test(perm.begin() + config.n_experimental_train,
                                    perm.end());

  const FeatureTable syn_train = synth.subset(iota(0, config.n_synthetic_train));
  const FeatureTable syn_test =
      synth.subset(iota(config.n_synthetic_train, config.n_synthetic));

  ds.train = concat(syn_train, exp.subset(exp_train));
  ds.test = concat(syn_test, exp.subset(exp_test));
  ds.train_provenance.assign(static_cast<std::size_t>(syn_train.size()),
                             Provenance::kSynthetic);
  ds.train_provenance.insert(ds.train_provenance.end(), exp_train.size(),
                             Provenance::kExperimental);
  ds.test_provenance.assign(static_cast<std::size_t>(syn_test.size()),
                            Provenance::kSynthetic);
  ds.test_provenance.insert(ds.test_provenance.end(), exp_test.size(),
                            Provenance::kExperimental);
  return ds;
}

TermSpec bicrystal_termspec() {
  TermSpec spec;
  auto& names = spec.feature_names;
  const auto add = [&](const std::string& n) {
    names.push_back(n);
    return static_cast<Index>(names.size() - 1);
  };
  const std::array<std::string, 6> strain = {"11", "12", "13", "22", "23", "33"};
  const std::array<std::string, 3> stiff = {"11", "22", "33"};

  const Index rho = add("sqrt_rho_ssd");
  Index lambda[2][3], lambda_max[2][3], e[2][6], c[2][3], tau[2][5], tau_max[2][5];
  for (int g = 0; g < 2; ++g) {
    const std::string grain = "_G" + std::to_string(g + 1);
    for (int i = 0; i < 3; ++i) lambda[g][i] = add("lambda" + std::to_string(i + 1) + grain);
    for (int i = 0; i < 3; ++i) {
      lambda_max[g][i] = add("lambda_max" + std::to_string(i + 1) + grain);
    }
    for (int i = 0; i < 6; ++i) e[g][i] = add("E" + strain[static_cast<std::size_t>(i)] + grain);
    for (int i = 0; i < 3; ++i) c[g][i] = add("C" + stiff[static_cast<std::size_t>(i)] + grain);
    for (int i = 0; i < 5; ++i) tau[g][i] = add("tau" + std::to_string(i + 1) + grain);
    for (int i = 0; i < 5; ++i) {
      tau_max[g][i] = add("tau_max" + std::to_string(i + 1) + grain);
    }
  }
  Index vdot[3], vdot_max[3];
  for (int i = 0; i < 3; ++i) vdot[i] = add("vdot2_" + std::to_string(i + 1));
  for (int i = 0; i < 3; ++i) vdot_max[i] = add("vdot2_max" + std::to_string(i + 1));
  spec.feature_dim = static_cast<Index>(names.size());

  auto& t = spec.terms;
  t.push_back(Term::linear(rho));
  for (int g = 0; g < 2; ++g) for (int i = 0; i < 3; ++i) t.push_back(Term::linear(lambda[g][i]));
  for (int g = 0; g < 2; ++g) for (int i = 0; i < 3; ++i) t.push_back(Term::linear(lambda_max[g][i]));
  for (int g = 0; g < 2; ++g) for (int i = 0; i < 6; ++i) t.push_back(Term::linear(e[g][i]));
  for (int g = 0; g < 2; ++g) for (int i = 0; i < 3; ++i) t.push_back(Term::linear(c[g][i]));
  for (int i = 0; i < 6; ++i) t.push_back(Term::product(e[0][i], e[1][i]));
  for (int i = 0; i < 3; ++i) t.push_back(Term::product(c[0][i], c[1][i]));
  for (int g = 0; g < 2; ++g) for (int i = 0; i < 6; ++i) t.push_back(Term::square(e[g][i]));
  for (int g = 0; g < 2; ++g) for (int i = 0; i < 3; ++i) t.push_back(Term::square(c[g][i]));
  for (int i = 0; i < 5; ++i) for (int j = 0; j < 5; ++j) t.push_back(Term::product(tau[0][i], tau[1][j]));
  for (int i = 0; i < 5; ++i) t.push_back(Term::product(tau_max[0][i], tau_max[1][i]));
  for (int i = 0; i < 3; ++i) t.push_back(Term::linear(vdot[i]));
  for (int i = 0; i < 3; ++i) t.push_back(Term::linear(vdot_max[i]));
  spec.validate();
  return spec;
}

SurrogateBase make_surrogate_base(const TermSpec& termspec,
                                  const SurrogateBaseConfig& config) {
  termspec.validate();
  if (config.n_rows < 2 || config.latent_rank < 1 || config.clusters < 1) {
    throw ValidationError("surrogate base needs n_rows >= 2, rank >= 1, clusters >= 1");
  }
  const Index d = termspec.feature_dim;
  const Index r = config.latent_rank;
  Rng rng(derive_seed(config.seed, 100));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // cluster structure in the latent space; weights proportional to K..1
  std::vector<Vector> centers;
  std::vector<Vector> spreads;
  Vector weights(config.clusters);
  for (Index k = 0; k < config.clusters; ++k) {
    Vector c(r), s(r);
    for (Index j = 0; j < r; ++j) {
      c(j) = config.cluster_spread * normal(rng);
      s(j) = 0.4 + 0.6 * unit(rng);
    }
    centers.push_back(c);
    spreads.push_back(s);
    weights(k) = static_cast<double>(config.clusters - k);
  }
  weights /= weights.sum();

  Matrix loading(d, r);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < r; ++j) loading(i, j) = normal(rng);
  Vector location(d), scale(d);
  for (Index i = 0; i < d; ++i) {
    location(i) = 1.0 + 4.0 * unit(rng);
    scale(i) = 0.2 + 0.8 * unit(rng);
  }

  Matrix x(config.n_rows, d);
  for (Index n = 0; n < config.n_rows; ++n) {
    const double u = unit(rng);
    Index k = config.clusters - 1;
    double acc = 0.0;
    for (Index c = 0; c < config.clusters; ++c) {
      acc += weights(c);
      if (u < acc) {
        k = c;
        break;
      }
    }
    Vector latent(r);
    for (Index j = 0; j < r; ++j) {
      latent(j) = centers[static_cast<std::size_t>(k)](j) +
                  spreads[static_cast<std::size_t>(k)](j) * normal(rng);
    }
    Vector noise(d);
    for (Index i = 0; i < d; ++i) noise(i) = config.feature_noise * normal(rng);
    const Vector raw = (loading * latent) / std::sqrt(static_cast<double>(r)) + noise;
    x.row(n) = (location + scale.cwiseProduct(raw)).transpose();
  }

  StressModel truth;
  truth.termspec = termspec;
  truth.beta.resize(termspec.size());
  for (Index t = 0; t < termspec.size(); ++t) truth.beta(t) = normal(rng);
  const Vector raw_sigma = design_matrix(termspec, x) * truth.beta;
  const double mean = raw_sigma.mean();
  const double sd = std::sqrt((raw_sigma.array() - mean).square().mean());
  const double gain = sd > 0.0 ? config.stress_sd / sd : 1.0;
  truth.beta *= gain;
  truth.intercept = config.stress_mean - gain * mean;

  SurrogateBase out;
  out.truth = truth;
  out.table.feature_names = termspec.feature_names.empty()
                                ? latent_names(d)
                                : termspec.feature_names;
  out.table.rows = x;
  Vector sigma = truth.evaluate_rows(x);
  for (Index n = 0; n < config.n_rows; ++n) sigma(n) += config.stress_noise * normal(rng);
  out.table.stress = sigma;
  const double sigma_bar = select_threshold(
      {sigma.data(), static_cast<std::size_t>(sigma.size())}, config.quantile);
  flag_extremes(out.table, sigma_bar);
  return out;
}

std::string to_string(ExperimentMode mode) {
  return mode == ExperimentMode::kPerfect ? "perfect" : "mixed";
}

ExperimentMode experiment_mode_from_string(const std::string& s) {
  if (s == "perfect") return ExperimentMode::kPerfect;
  if (s == "mixed") return ExperimentMode::kMixed;
  throw ValidationError("unknown experiment mode '" + s + "'");
}

}  // namespace exvi
