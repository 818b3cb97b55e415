#pragma once

#include "exvi/feature_table.hpp"
#include "exvi/gmm.hpp"
#include "exvi/pca.hpp"
#include "exvi/stress_model.hpp"
#include "exvi/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace exvi {

/// Empirical quantile with linear interpolation between order statistics
/// (type 7).
double select_threshold(std::span<const double> stresses, double quantile);

enum class ExperimentMode { kPerfect, kMixed };

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::kPerfect;
  double quantile = 0.95;
  std::uint64_t seed = 1;
  // perfect-model test
  Index n_total = 5000;
  Index n_train = 4000;
  // mixed model-data test
  Index n_synthetic = 1400;
  Index n_synthetic_train = 700;
  Index n_experimental_train = 300;

  void validate() const;
};

struct Dataset {
  FeatureTable train;
  FeatureTable test;
  double sigma_bar = 0.0;
  double quantile = 0.95;
  std::uint64_t seed = 0;
  std::vector<Provenance> train_provenance;
  std::vector<Provenance> test_provenance;
  std::vector<std::string> warnings;
};

/// Samples latent points from the prior, reconstructs features, evaluates
/// the stress model, thresholds the pooled stresses at the configured
/// quantile and splits train/test in sampling order.
Dataset generate_perfect(const ExperimentConfig& config,
                         const GaussianMixture& prior, const PcaModel& pca,
                         const StressModel& stress);

/// Synthetic prior samples plus experimental rows; the threshold comes from
/// the experimental stresses only. Experimental rows are shuffled with the
/// seed before the train/test split.
Dataset generate_mixed(const ExperimentConfig& config,
                       const FeatureTable& experimental,
                       const GaussianMixture& prior, const PcaModel& pca,
                       const StressModel& stress);

/// Sets extreme_flag = stress > sigma_bar on every row.
void flag_extremes(FeatureTable& table, double sigma_bar);

/// Term families of the quadratic grain-boundary stress model for a
/// two-grain configuration, over named feature columns.
TermSpec bicrystal_termspec();

/// Stand-in for a crystal-plasticity feature table: features generated
/// from a clustered low-rank latent structure, stress from a random
/// quadratic model plus noise.
struct SurrogateBaseConfig {
  Index n_rows = 546;
  Index latent_rank = 6;
  Index clusters = 4;
  double cluster_spread = 3.0;
  double feature_noise = 0.1;
  double stress_mean = 1100.0;
  double stress_sd = 120.0;
  double stress_noise = 10.0;
  double quantile = 0.95;
  std::uint64_t seed = 1;
};

struct SurrogateBase {
  FeatureTable table;
  StressModel truth;
};

SurrogateBase make_surrogate_base(const TermSpec& termspec,
                                  const SurrogateBaseConfig& config);

std::string to_string(ExperimentMode mode);
ExperimentMode experiment_mode_from_string(const std::string& s);

}  // namespace exvi
