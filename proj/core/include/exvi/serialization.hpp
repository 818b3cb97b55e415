#pragma once

#include "exvi/evt_tail.hpp"
#include "exvi/gmm.hpp"
#include "exvi/pca.hpp"
#include "exvi/stress_model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace exvi {

struct GmmMetadata {
  std::uint64_t seed = 0;
  std::string criterion;
  std::string source;  ///< prior, vi, mcmc, empirical
  std::vector<KScore> scores;
};

void save_pca(const std::filesystem::path& path, const PcaModel& pca);
PcaModel load_pca(const std::filesystem::path& path);

void save_gmm(const std::filesystem::path& path, const GaussianMixture& gmm,
              const GmmMetadata& meta = {});
GaussianMixture load_gmm(const std::filesystem::path& path,
                         GmmMetadata* meta = nullptr);

/// Terms refer to features by name when the spec carries names, by
/// zero-based index otherwise. Both forms are accepted on load.
void save_termspec(const std::filesystem::path& path, const TermSpec& spec);
TermSpec load_termspec(const std::filesystem::path& path);

void save_stress_model(const std::filesystem::path& path,
                       const StressModel& model);
StressModel load_stress_model(const std::filesystem::path& path);

void save_tail(const std::filesystem::path& path, const FrechetTail& tail,
               TailLocation location = TailLocation::kZero);
FrechetTail load_tail(const std::filesystem::path& path);

/// KScore table as CSV: k,ok,log_likelihood,bic,aic
void write_selection_csv(const std::filesystem::path& path,
                         const std::vector<KScore>& scores);

}  // namespace exvi
