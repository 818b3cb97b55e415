#include "exvi/report.hpp"

#include "exvi/classifier.hpp"
#include "exvi/error.hpp"
#include "exvi/feature_table.hpp"
#include "exvi/pca.hpp"
#include "exvi/serialization.hpp"
#include "json_io.hpp"
#include "text.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace exvi {

namespace fs = std::filesystem;
using detail::format_double;

DensityGrid density_grid(const GaussianMixture& model, Index i, Index j,
                         double a_lo, double a_hi, double b_lo, double b_hi,
                         Index points) {
  if (points < 1) throw ValidationError("density grid needs points >= 1");
  if (!(a_hi > a_lo) || !(b_hi > b_lo)) {
    throw ValidationError("density grid bounds must be increasing");
  }
  const std::array<Index, 2> coords = {i, j};
  const GaussianMixture m = model.marginal(coords);
  DensityGrid g;
  const double ha = (a_hi - a_lo) / static_cast<double>(points);
  const double hb = (b_hi - b_lo) / static_cast<double>(points);
  g.a = Vector(points);
  g.b = Vector(points);
  for (Index k = 0; k < points; ++k) {
    g.a(k) = a_lo + (static_cast<double>(k) + 0.5) * ha;
    g.b(k) = b_lo + (static_cast<double>(k) + 0.5) * hb;
  }
  g.cell_area = ha * hb;
  g.density.resize(points, points);
  Vector z(2);
  for (Index p = 0; p < points; ++p) {
    for (Index q = 0; q < points; ++q) {
      z << g.a(p), g.b(q);
      g.density(p, q) = std::exp(m.log_density(z));
    }
  }
  return g;
}

namespace {

struct Model {
  std::string name;
  GaussianMixture gmm;
};

std::string text_of(const std::ostringstream& os) { return os.str(); }

double marginal_sd(const GaussianMixture& g, Index c) {
  const Vector mu = g.mixture_mean();
  double var = 0.0;
  for (Index k = 0; k < g.components(); ++k) {
    const double dm = g.mean(k)(c) - mu(c);
    var += g.weights()(k) * (g.covariance(k)(c, c) + dm * dm);
  }
  return std::sqrt(var);
}

}  // namespace

void generate_report(const fs::path& run_dir, const ReportOptions& options) {
  if (options.grid_points < 1 || options.pdf_bins < 1 || options.pdf_samples < 1 ||
      !(options.grid_span > 0.0)) {
    throw ValidationError("report options must be positive");
  }
  const fs::path meta_path = run_dir / "meta.json";
  const fs::path models = run_dir / "models";
  if (!fs::exists(meta_path)) {
    throw IoError(run_dir.string() +
                  " is not a completed run directory (meta.json missing); run "
                  "'exvi run-all' first");
  }
  const auto meta = detail::read_json(meta_path);
  if (meta.value("schema", std::string()) != "exvi-run/1") {
    throw ValidationError("unsupported run directory schema in " + meta_path.string());
  }
  std::vector<std::string> methods;
  for (const auto& m : meta.at("methods")) methods.push_back(m.get<std::string>());

  std::vector<fs::path> required = {models / "pca.json", models / "prior.json",
                                    run_dir / "dataset" / "latent_test.csv"};
  for (const auto& m : methods) required.push_back(models / (m + ".json"));
  for (const auto& p : required) {
    if (!fs::exists(p)) {
      throw IoError("missing artifact " + p.string() + "; rerun 'exvi run-all'");
    }
  }

  GmmMetadata prior_meta;
  const PcaModel pca = load_pca(models / "pca.json");
  std::vector<Model> all;
  all.push_back({"prior", load_gmm(models / "prior.json", &prior_meta)});
  for (const auto& m : methods) all.push_back({m, load_gmm(models / (m + ".json"))});
  const FeatureTable test = read_feature_csv(run_dir / "dataset" / "latent_test.csv");
  if (!test.stress || !test.extreme_flag) {
    throw ValidationError("latent_test.csv lacks stress or extreme columns");
  }
  const GaussianMixture& prior = all.front().gmm;
  const Index d = prior.dim();
  if (pca.dim() != d || test.dim() != d) {
    throw ValidationError("run artifacts disagree on the latent dimension");
  }
  for (const auto& m : all) {
    if (m.gmm.dim() != d) throw ValidationError(m.name + " model has the wrong dimension");
  }

  std::map<std::string, std::string> files;

  // density grids over PC pairs
  const Vector mu = prior.mixture_mean();
  const std::array<std::array<Index, 2>, 3> pairs = {{{0, 1}, {0, 2}, {1, 2}}};
  for (const auto& [i, j] : pairs) {
    if (j >= d) continue;
    std::vector<DensityGrid> grids;
    for (const auto& m : all) {
      const double si = marginal_sd(prior, i);
      const double sj = marginal_sd(prior, j);
      grids.push_back(density_grid(m.gmm, i, j, mu(i) - options.grid_span * si,
                                   mu(i) + options.grid_span * si,
                                   mu(j) - options.grid_span * sj,
                                   mu(j) + options.grid_span * sj,
                                   options.grid_points));
    }
    std::ostringstream os;
    os << "pc" << i + 1 << ",pc" << j + 1;
    for (const auto& m : all) os << ',' << m.name;
    os << '\n';
    const auto& g0 = grids.front();
    for (Index p = 0; p < g0.a.size(); ++p) {
      for (Index q = 0; q < g0.b.size(); ++q) {
        os << format_double(g0.a(p)) << ',' << format_double(g0.b(q));
        for (const auto& g : grids) os << ',' << format_double(g.density(p, q));
        os << '\n';
      }
    }
    files["density_pc" + std::to_string(i + 1) + "_pc" + std::to_string(j + 1) + ".csv"] =
        text_of(os);
  }

  // LLR against stress on the test set, plus a common sweep
  {
    const auto truth = labels_from_flags(*test.extreme_flag);
    std::vector<Vector> llrs;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t m = 1; m < all.size(); ++m) {
      llrs.push_back(llr_rows(all[m].gmm, prior, test.rows));
      lo = std::min(lo, llrs.back().minCoeff());
      hi = std::max(hi, llrs.back().maxCoeff());
    }
    std::ostringstream scatter;
    scatter << "stress,extreme";
    for (std::size_t m = 1; m < all.size(); ++m) scatter << ",llr_" << all[m].name;
    scatter << '\n';
    for (Index r = 0; r < test.size(); ++r) {
      scatter << format_double((*test.stress)(r)) << ','
              << ((*test.extreme_flag)[static_cast<std::size_t>(r)] ? 1 : 0);
      for (const auto& l : llrs) scatter << ',' << format_double(l(r));
      scatter << '\n';
    }
    files["llr_vs_stress.csv"] = text_of(scatter);

    if (!llrs.empty()) {
      Vector bounds(2);
      bounds << lo, hi;
      const auto grid = default_sweep_grid(bounds);
      std::vector<std::vector<SweepPoint>> sweeps;
      for (const auto& l : llrs) sweeps.push_back(threshold_sweep(l, truth, grid));
      std::ostringstream sw;
      sw << "threshold";
      for (std::size_t m = 1; m < all.size(); ++m) {
        sw << ",fnr_" << all[m].name << ",fpr_" << all[m].name;
      }
      sw << '\n';
      for (std::size_t t = 0; t < grid.size(); ++t) {
        sw << format_double(grid[t]);
        for (const auto& s : sweeps) {
          sw << ',' << format_double(s[t].fnr) << ',' << format_double(s[t].fpr);
        }
        sw << '\n';
      }
      files["sweep.csv"] = text_of(sw);
    }
  }

  // feature-space marginals via reconstruction sampling
  {
    std::vector<Matrix> recon;
    for (std::size_t m = 0; m < all.size(); ++m) {
      const Matrix z = all[m].gmm.sample(options.pdf_samples,
                                         derive_seed(options.seed, m));
      recon.push_back(pca.reconstruct_rows(z));
    }
    const auto& names = pca.feature_names();
    const Index nb = options.pdf_bins;
    for (Index f = 0; f < pca.feature_dim(); ++f) {
      double lo = recon.front().col(f).minCoeff();
      double hi = recon.front().col(f).maxCoeff();
      if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
      }
      const double w = (hi - lo) / static_cast<double>(nb);
      std::vector<Vector> dens;
      for (const auto& x : recon) {
        Vector counts = Vector::Zero(nb);
        for (Index r = 0; r < x.rows(); ++r) {
          const double v = x(r, f);
          if (v < lo || v > hi) continue;
          const auto b = std::min<Index>(nb - 1, static_cast<Index>((v - lo) / w));
          counts(b) += 1.0;
        }
        dens.push_back(counts / (static_cast<double>(x.rows()) * w));
      }
      std::ostringstream os;
      os << "bin_lo,bin_hi";
      for (const auto& m : all) os << ',' << m.name;
      os << '\n';
      for (Index b = 0; b < nb; ++b) {
        os << format_double(lo + static_cast<double>(b) * w) << ','
           << format_double(lo + static_cast<double>(b + 1) * w);
        for (const auto& v : dens) os << ',' << format_double(v(b));
        os << '\n';
      }
      files["feature_pdfs/" + names[static_cast<std::size_t>(f)] + ".csv"] = text_of(os);
    }
  }

  {
    const Matrix c = pca.contributions();
    std::ostringstream os;
    os << "feature";
    for (Index k = 0; k < c.cols(); ++k) os << ",pc" << k + 1;
    os << '\n';
    for (Index r = 0; r < c.rows(); ++r) {
      os << pca.feature_names()[static_cast<std::size_t>(r)];
      for (Index k = 0; k < c.cols(); ++k) os << ',' << format_double(c(r, k));
      os << '\n';
    }
    files["contributions.csv"] = text_of(os);
  }

  {
    std::ostringstream os;
    os << "k,ok,log_likelihood,bic,aic\n";
    for (const auto& s : prior_meta.scores) {
      os << s.k << ',' << (s.ok ? 1 : 0) << ','
         << (s.ok ? format_double(s.log_likelihood) : "nan") << ','
         << (s.ok ? format_double(s.bic) : "nan") << ','
         << (s.ok ? format_double(s.aic) : "nan") << '\n';
    }
    files["selection.csv"] = text_of(os);
  }

  {
    nlohmann::json summary{{"schema", meta.at("schema")},
                           {"seed", meta.at("seed")},
                           {"mode", meta.at("mode")},
                           {"sigma_bar", meta.at("sigma_bar")},
                           {"k", prior.components()},
                           {"latent_dim", d},
                           {"methods", methods},
                           {"classification", meta.value("classification", nlohmann::json::object())}};
    files["summary.json"] = summary.dump(2) + "\n";
  }

  // everything computed; write in one go
  const fs::path report = run_dir / "report";
  fs::remove_all(report);
  fs::create_directories(report / "feature_pdfs");
  for (const auto& [name, content] : files) {
    std::ofstream out(report / name, std::ios::binary);
    if (!out) throw IoError("cannot write " + (report / name).string());
    out << content;
  }
}

}  // namespace exvi
