#pragma once

#include "exvi/types.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace exvi {

/// Row provenance for datasets that mix model samples with measured rows.
enum class Provenance : std::uint8_t { kSynthetic, kExperimental };

/// N x D table of named microstructural features, optionally carrying the
/// observed stress and the exceedance flag of each row.
struct FeatureTable {
  std::vector<std::string> feature_names;
  Matrix rows;
  std::optional<Vector> stress;
  std::optional<std::vector<bool>> extreme_flag;

  Index size() const { return rows.rows(); }
  Index dim() const { return rows.cols(); }

  /// Throws ValidationError if any invariant is broken: duplicate or
  /// missing names, non-finite entries, or mismatched optional columns.
  void validate() const;

  /// Index of a named feature; throws ValidationError if absent.
  Index column(const std::string& name) const;

  FeatureTable subset(std::span<const Index> indices) const;

  /// Number of rows whose extreme flag is set (0 when flags are absent).
  Index extreme_count() const;
};

/// Rows stacked in order; both tables must share feature names and the
/// presence of optional columns.
FeatureTable concat(const FeatureTable& a, const FeatureTable& b);

/// CSV layout: header row of feature names, optionally followed by
/// `stress` and `extreme` (0/1) columns.
FeatureTable read_feature_csv(const std::filesystem::path& path);
void write_feature_csv(const std::filesystem::path& path,
                       const FeatureTable& table);

/// Latent tables use generated names z1..zd.
std::vector<std::string> latent_names(Index d);

}  // namespace exvi
