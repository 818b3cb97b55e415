#pragma once

#include "exvi/classifier.hpp"
#include "exvi/evt_tail.hpp"
#include "exvi/feature_table.hpp"
#include "exvi/gmm.hpp"
#include "exvi/mcmc.hpp"
#include "exvi/pca.hpp"
#include "exvi/stress_model.hpp"
#include "exvi/synth.hpp"
#include "exvi/vi_engine.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace exvi {

inline constexpr const char* kRunSchema = "exvi-run/1";

struct FitPriorOptions {
  DimensionPolicy dimension = DimensionPolicy::explained_variance(0.95);
  Standardization standardization = Standardization::kZScore;
  Index k_min = 1;
  Index k_max = 8;
  std::optional<Index> fixed_k;  ///< skips selection
  Criterion criterion = Criterion::kBic;
  EmOptions em;
};

struct PriorFit {
  PcaModel pca;
  GaussianMixture prior;
  std::vector<KScore> scores;  ///< empty when K was fixed
  Index k = 0;
  Matrix latent;
};

PriorFit fit_prior(const FeatureTable& features, const FitPriorOptions& options);

/// Writes pca.json, prior.json, selection.csv and latent.csv into `dir`.
void write_prior_fit(const std::filesystem::path& dir, const PriorFit& fit,
                     const FitPriorOptions& options);

/// train.csv, test.csv and meta.json.
void write_dataset(const std::filesystem::path& dir, const Dataset& ds);

/// Latent coordinates of a feature table, keeping stress and flags.
FeatureTable to_latent(const PcaModel& pca, const FeatureTable& table);

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<double>& trace);

void write_classification(const std::filesystem::path& dir,
                          const std::string& method,
                          const ClassificationReport& report,
                          const std::vector<SweepPoint>& sweep);

enum class Method { kVi, kMcmc, kEmpirical };
std::string to_string(Method m);
Method method_from_string(const std::string& s);
/// Comma-separated list, e.g. "vi,mcmc,empirical".
std::vector<Method> parse_methods(const std::string& list);

struct RunAllConfig {
  std::filesystem::path out_dir;
  ExperimentConfig experiment;
  std::uint64_t seed = 1;
  /// Base feature table used to fit PCA and the prior. When empty a
  /// surrogate base is generated from `base`.
  std::filesystem::path base_features;
  SurrogateBaseConfig base;
  /// Mixed mode only; defaults to the base table.
  std::filesystem::path experimental;
  std::filesystem::path termspec;      ///< defaults to bicrystal_termspec()
  std::filesystem::path stress_model;  ///< fitted on the base table if empty
  StressFitOptions stress_fit;
  FitPriorOptions prior;
  TailLocation tail_location = TailLocation::kZero;
  std::string likelihood = "surrogate";  ///< or "observed"
  ViOptions vi;
  /// Extra prior draws scored by the surrogate likelihood and added to the
  /// VI data. Ignored in observed mode.
  Index vi_augment = 20000;
  Index mcmc_steps_per_row = 50;
  double mcmc_burn_in_fraction = 0.1;
  Index mcmc_thin = 10;
  std::vector<Method> methods = {Method::kVi, Method::kMcmc, Method::kEmpirical};
  double llr_threshold = kDefaultLlrThreshold;
  Index sweep_points = 101;
  bool report = true;

  void validate() const;
};

struct RunSummary {
  double sigma_bar = 0.0;
  Index n_train = 0;
  Index n_test = 0;
  Index test_extremes = 0;
  Index latent_dim = 0;
  Index k = 0;
  std::map<Method, ClassificationReport> reports;
  std::map<Method, std::vector<SweepPoint>> sweeps;
  std::vector<double> elbo_trace;
  double mcmc_acceptance = 0.0;
  std::vector<std::string> warnings;
};

/// dataset -> prior -> posteriors -> LLR classification -> report.
/// Layout under out_dir: dataset/, models/, classification/, report/ and
/// meta.json. Errors carry the failing stage name.
RunSummary run_all(const RunAllConfig& config);

}  // namespace exvi
