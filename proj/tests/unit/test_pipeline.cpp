#include "exvi/error.hpp"
#include "exvi/pipeline.hpp"
#include "exvi/report.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace exvi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "exvi_test_pipeline" / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

RunAllConfig small_config(const fs::path& out) {
  RunAllConfig c;
  c.out_dir = out;
  c.seed = 3;
  c.base.n_rows = 300;
  c.experiment.n_total = 800;
  c.experiment.n_train = 600;
  c.prior.k_max = 4;
  c.vi_augment = 2000;
  c.mcmc_steps_per_row = 10;
  return c;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream f(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    out[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return out;
}

Index count_lines(const fs::path& p) {
  std::ifstream f(p);
  Index n = 0;
  std::string line;
  while (std::getline(f, line)) ++n;
  return n;
}

}  // namespace

TEST(Pipeline, RunAllProducesEveryArtifact) {
  const fs::path out = scratch("full");
  const RunSummary s = run_all(small_config(out));
  EXPECT_EQ(s.n_train, 600);
  EXPECT_EQ(s.n_test, 200);
  EXPECT_EQ(s.reports.size(), 3u);
  for (const auto& [m, rep] : s.reports) EXPECT_EQ(rep.total(), 200);
  for (const char* f : {"meta.json", "dataset/train.csv", "dataset/test.csv", "models/prior.json",
                        "models/pca.json", "models/vi.json", "models/mcmc.json",
                        "models/empirical.json", "models/tail.json", "models/elbo_trace.csv",
                        "classification/scores.csv", "classification/sweep_vi.csv",
                        "report/summary.json", "report/density_pc1_pc2.csv"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  for (std::size_t t = 1; t < s.elbo_trace.size(); ++t) {
    EXPECT_GE(s.elbo_trace[t], s.elbo_trace[t - 1] - 1e-6);
  }
}

TEST(Pipeline, MethodSelectionLimitsArtifacts) {
  const fs::path out = scratch("vi_only");
  RunAllConfig c = small_config(out);
  c.methods = parse_methods("vi");
  const RunSummary s = run_all(c);
  EXPECT_EQ(s.reports.size(), 1u);
  EXPECT_TRUE(fs::exists(out / "models" / "vi.json"));
  EXPECT_FALSE(fs::exists(out / "models" / "mcmc.json"));
  EXPECT_FALSE(fs::exists(out / "models" / "empirical.json"));
  EXPECT_FALSE(fs::exists(out / "classification" / "mcmc.json"));
}

TEST(Pipeline, ReportIsDeterministicAndGridIsNormalized) {
  const fs::path out = scratch("report");
  RunAllConfig c = small_config(out);
  c.methods = parse_methods("vi,empirical");
  run_all(c);
  const auto first = snapshot(out / "report");
  generate_report(out);
  EXPECT_EQ(snapshot(out / "report"), first);
  EXPECT_EQ(count_lines(out / "report" / "density_pc1_pc2.csv"), 10001);

  const GaussianMixture prior = [&] {
    Vector w(2);
    w << 0.4, 0.6;
    Vector a(3), b(3);
    a << -1.0, 0.0, 0.5;
    b << 1.0, 0.5, -0.5;
    return GaussianMixture(w, {a, b}, {Matrix::Identity(3, 3), 0.5 * Matrix::Identity(3, 3)});
  }();
  const DensityGrid g = density_grid(prior, 0, 1, -6.0, 6.0, -6.0, 6.0, 100);
  EXPECT_NEAR(g.density.sum() * g.cell_area, 1.0, 0.05);
}

TEST(Pipeline, ReportOnEmptyDirectoryWritesNothing) {
  const fs::path out = scratch("empty");
  fs::create_directories(out);
  EXPECT_THROW(generate_report(out), Error);
  EXPECT_TRUE(fs::is_empty(out));
}

TEST(Pipeline, RunAllIsDeterministic) {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  RunAllConfig ca = small_config(a);
  RunAllConfig cb = small_config(b);
  ca.methods = cb.methods = parse_methods("vi,empirical");
  run_all(ca);
  run_all(cb);
  EXPECT_EQ(snapshot(a), snapshot(b));
}

TEST(Pipeline, ObservedLikelihoodMode) {
  const fs::path out = scratch("observed");
  RunAllConfig c = small_config(out);
  c.likelihood = "observed";
  c.methods = parse_methods("vi");
  const RunSummary s = run_all(c);
  EXPECT_EQ(s.reports.size(), 1u);
}

TEST(Pipeline, StageNameInErrors) {
  const fs::path out = scratch("bad");
  RunAllConfig c = small_config(out);
  c.base_features = out / "does_not_exist.csv";
  try {
    run_all(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("config"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, MethodParsing) {
  EXPECT_EQ(parse_methods("mcmc,vi").size(), 2u);
  EXPECT_THROW(parse_methods("vi,hmc"), ValidationError);
  EXPECT_THROW(parse_methods(""), ValidationError);
}
