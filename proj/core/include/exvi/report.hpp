#pragma once

#include "exvi/gmm.hpp"
#include "exvi/types.hpp"

#include <filesystem>

namespace exvi {

struct ReportOptions {
  Index grid_points = 100;   ///< per axis, cell-centred
  double grid_span = 4.0;    ///< prior marginal mean +- span * sd
  Index pdf_samples = 20000; ///< draws per model for feature histograms
  Index pdf_bins = 40;
  std::uint64_t seed = 11;
};

/// Regenerates report/ under a completed run directory from the stored
/// artifacts. Every input is checked before anything is written.
void generate_report(const std::filesystem::path& run_dir,
                     const ReportOptions& options = {});

/// Mixture marginal over coordinates (i, j) on a cell-centred lattice.
struct DensityGrid {
  Vector a;
  Vector b;
  Matrix density;  ///< a.size() x b.size()
  double cell_area = 0.0;
};

DensityGrid density_grid(const GaussianMixture& model, Index i, Index j,
                         double a_lo, double a_hi, double b_lo, double b_hi,
                         Index points);

}  // namespace exvi
