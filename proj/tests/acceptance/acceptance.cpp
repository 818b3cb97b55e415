// Acceptance suite: one PASS/FAIL line per criterion.

#include "exvi/classifier.hpp"
#include "exvi/error.hpp"
#include "exvi/evt_tail.hpp"
#include "exvi/gmm.hpp"
#include "exvi/mcmc.hpp"
#include "exvi/pca.hpp"
#include "exvi/pipeline.hpp"
#include "exvi/vi_engine.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace exvi;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& id, const std::string& title,
            const std::function<Outcome()>& check) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::ostringstream line;
  line << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << title << "  [" << o.detail
       << "; " << std::fixed << std::setprecision(1) << seconds_since(t0) << " s]";
  std::cout << line.str() << std::endl;
  if (!o.pass) ++failures;
}

fs::path work_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "exvi_acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

RunAllConfig perfect_config(const fs::path& out, std::uint64_t seed) {
  RunAllConfig c;
  c.out_dir = out;
  c.seed = seed;
  return c;
}

// EM fits collected across the suite for the monotonicity/SPD check.
std::vector<EmFit> em_fits;

bool em_fit_ok(const EmFit& f, std::string* why) {
  for (std::size_t t = 1; t < f.log_likelihood_trace.size(); ++t) {
    const double prev = f.log_likelihood_trace[t - 1];
    if (f.log_likelihood_trace[t] < prev - 1e-9 * std::max(1.0, std::abs(prev))) {
      *why = "log-likelihood decreased at iteration " + std::to_string(t);
      return false;
    }
  }
  for (Index k = 0; k < f.model.components(); ++k) {
    if (Eigen::LLT<Matrix>(f.model.covariance(k)).info() != Eigen::Success) {
      *why = "covariance " + std::to_string(k) + " not factorizable";
      return false;
    }
  }
  return true;
}

Matrix four_cluster_data(Index n_per, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double centers[4][2] = {{0, 0}, {8, 0}, {0, 8}, {8, 8}};
  Matrix z(4 * n_per, 2);
  for (Index c = 0; c < 4; ++c)
    for (Index i = 0; i < n_per; ++i)
      z.row(c * n_per + i) << centers[c][0] + normal(rng), centers[c][1] + normal(rng);
  return z;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream f(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    out[fs::relative(e.path(), dir).generic_string()] = ss.str();
  }
  return out;
}

}  // namespace

int main() {
  const auto suite_start = Clock::now();

  report("AC1", "ELBO trace nondecreasing on 10 perfect-model runs", [] {
    const auto t0 = Clock::now();
    int bad = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      RunAllConfig c = perfect_config(work_dir("ac1"), seed);
      c.methods = {Method::kVi};
      c.report = false;
      const RunSummary s = run_all(c);
      bool ok = s.n_train == 4000 && s.n_test == 1000;
      for (std::size_t t = 1; t < s.elbo_trace.size(); ++t) {
        const double drop = s.elbo_trace[t - 1] - s.elbo_trace[t];
        worst = std::max(worst, drop);
        if (drop > 1e-6) ok = false;
      }
      bad += !ok;
    }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << bad << "/10 runs violate; largest step drop " << worst;
    return Outcome{bad == 0 && secs < 60.0, d.str()};
  });

  report("AC2", "EM log-likelihood nondecreasing and covariances SPD", [] {
    RunAllConfig c = perfect_config(work_dir("ac2"), 2);
    c.methods = {Method::kEmpirical};
    c.report = false;
    run_all(c);
    FeatureTable latent = read_feature_csv(c.out_dir / "models" / "latent.csv");
    FeatureTable train = read_feature_csv(c.out_dir / "dataset" / "latent_train.csv");
    std::vector<Index> flagged;
    for (Index i = 0; i < train.size(); ++i)
      if ((*train.extreme_flag)[static_cast<std::size_t>(i)]) flagged.push_back(i);
    const Matrix extremes = train.subset(flagged).rows;
    for (Index k = 1; k <= 8; ++k) {
      EmOptions o;
      o.seed = static_cast<std::uint64_t>(k);
      em_fits.push_back(fit_em(latent.rows, k, o));
      if (k <= 4) em_fits.push_back(fit_em(extremes, k, o));
    }
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      EmOptions o;
      o.seed = seed;
      em_fits.push_back(fit_em(four_cluster_data(150, seed), 4, o));
    }
    std::size_t bad = 0;
    std::string why;
    for (const auto& f : em_fits) bad += !em_fit_ok(f, &why);
    std::ostringstream d;
    d << em_fits.size() << " fits, " << bad << " bad" << (bad ? " (" + why + ")" : "");
    return Outcome{bad == 0, d.str()};
  });

  report("AC3", "Frechet MLE recovers (s, alpha)", [] {
    struct Case {
      double alpha, tol;
    };
    bool ok = true;
    std::ostringstream d;
    std::uint64_t seed = 7;
    for (const Case c : {Case{3.0, 0.05}, Case{1.2, 0.10}, Case{8.0, 0.10}}) {
      Rng rng(seed++);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<double> ys(10000);
      // inverse CDF: y = s (-log U)^(-1/alpha)
      for (auto& y : ys) y = 2.0 * std::pow(-std::log(u(rng)), -1.0 / c.alpha);
      const FrechetFit f = fit_frechet_mle(ys);
      const double es = std::abs(f.tail.s / 2.0 - 1.0);
      const double ea = std::abs(f.tail.alpha / c.alpha - 1.0);
      ok = ok && es < c.tol && ea < c.tol;
      if (d.tellp() > 0) d << "; ";
      d << "alpha=" << c.alpha << ": s err " << es << ", alpha err " << ea;
    }
    return Outcome{ok, d.str()};
  });

  report("AC4", "PCA full-rank round trip and orthonormality", [] {
    Rng rng(4);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Index dim = 12;
    Matrix mix(dim, dim);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j) mix(i, j) = normal(rng);
    Matrix x(1000, dim);
    for (Index i = 0; i < 1000; ++i)
      for (Index j = 0; j < dim; ++j) x(i, j) = normal(rng);
    x = x * mix;
    const PcaModel pca = fit_pca(x, DimensionPolicy::fixed(dim));
    const double recon = (pca.reconstruct_rows(pca.project_rows(x)) - x).cwiseAbs().maxCoeff();
    const Matrix& v = pca.components();
    const double ortho =
        (v.transpose() * v - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
    std::ostringstream d;
    d << "reconstruction " << recon << ", orthonormality " << ortho;
    return Outcome{recon < 1e-10 && ortho < 1e-8, d.str()};
  });

  report("AC5", "K=1 observed VI equals exceedance-subset statistics", [] {
    Rng rng(5);
    Matrix a(3, 3);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j) a(i, j) = normal(rng);
    Vector mu(3);
    mu << 1.0, -2.0, 0.5;
    const GaussianMixture prior(Vector::Ones(1), {mu},
                                {a * a.transpose() + Matrix::Identity(3, 3)});
    const Matrix z = prior.sample(5000, 6);
    std::vector<bool> flags(5000);
    std::vector<Index> idx;
    for (Index i = 0; i < 5000; ++i) {
      flags[static_cast<std::size_t>(i)] = z(i, 0) - z(i, 2) > 1.5;
      if (flags[static_cast<std::size_t>(i)]) idx.push_back(i);
    }
    Matrix sub(static_cast<Index>(idx.size()), 3);
    for (std::size_t j = 0; j < idx.size(); ++j) sub.row(static_cast<Index>(j)) = z.row(idx[j]);
    const Vector mean = sub.colwise().mean().transpose();
    const Matrix c = sub.rowwise() - mean.transpose();
    const Matrix cov = c.transpose() * c / static_cast<double>(sub.rows());
    // the default 1e-6 covariance floor would sit exactly at the tolerance
    ViOptions opt;
    opt.reg_floor = 1e-12;
    const ViResult r = run_vi(prior, z, LikelihoodProvider::observed(flags), opt);
    const double em = (r.posterior.mean(0) - mean).cwiseAbs().maxCoeff();
    const double ec = (r.posterior.covariance(0) - cov).cwiseAbs().maxCoeff();
    std::ostringstream d;
    d << idx.size() << " extremes; mean err " << em << ", cov err " << ec;
    return Outcome{em < 1e-6 && ec < 1e-6, d.str()};
  });

  report("AC6", "VI misses fewer extremes than the empirical baseline", [] {
    int tp_fnr_wins = 0;
    int sweep_wins = 0;
    std::ostringstream d;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RunAllConfig c = perfect_config(work_dir("ac6"), seed);
      c.methods = {Method::kVi, Method::kEmpirical};
      c.report = false;
      const RunSummary s = run_all(c);
      const auto& vi = s.reports.at(Method::kVi);
      const auto& emp = s.reports.at(Method::kEmpirical);
      tp_fnr_wins += vi.tp >= emp.tp && vi.fnr <= emp.fnr;
      const auto& sv = s.sweeps.at(Method::kVi);
      const auto& se = s.sweeps.at(Method::kEmpirical);
      std::size_t ok = 0;
      for (std::size_t t = 0; t < sv.size(); ++t) ok += sv[t].fnr <= se[t].fnr;
      const double frac = static_cast<double>(ok) / static_cast<double>(sv.size());
      sweep_wins += frac >= 0.8;
      d << "seed " << seed << ": TP " << vi.tp << " vs " << emp.tp << ", sweep "
        << std::setprecision(2) << frac << "; ";
    }
    d << "TP/FNR wins " << tp_fnr_wins << "/5, sweep wins " << sweep_wins << "/5";
    return Outcome{tp_fnr_wins >= 4 && sweep_wins >= 4, d.str()};
  });

  report("AC7", "MCMC conjugate tilt and flat acceptance", [] {
    const GaussianMixture p(Vector::Ones(1), {Vector::Zero(1)}, {Matrix::Identity(1, 1)});
    McmcOptions o;
    o.n_steps = 50000;
    o.burn_in = 5000;
    o.seed = 7;
    const auto tilt = LikelihoodProvider::function(
        [](const Vector& z) { return std::exp(z(0) - 6.0); });
    const McmcResult a = run_mh(p, tilt, o);
    const auto flat = LikelihoodProvider::function([](const Vector&) { return 1.0; });
    const McmcResult b = run_mh(p, flat, o);
    const double mean = a.samples.mean();
    std::ostringstream d;
    d << "tilted mean " << mean << ", flat acceptance " << b.acceptance_rate;
    return Outcome{std::abs(mean - 1.0) <= 0.05 && b.acceptance_rate == 1.0, d.str()};
  });

  report("AC8", "BIC selects K=4 on four-cluster data", [] {
    int hits = 0;
    std::ostringstream d;
    const std::vector<Index> range = {1, 2, 3, 4, 5, 6, 7, 8};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      EmOptions o;
      o.seed = seed;
      const KSelection s = select_k(four_cluster_data(150, 100 + seed), range, Criterion::kBic, o);
      hits += s.best_k == 4;
      d << s.best_k << ' ';
    }
    d << "-> " << hits << "/5";
    return Outcome{hits >= 4, d.str()};
  });

  report("AC9", "Classifier sweep monotone, confusion conserves, LLR(p,p)=0", [] {
    Rng rng(9);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.1);
    Vector scores(1000);
    std::vector<Label> truth(1000);
    for (Index i = 0; i < 1000; ++i) {
      scores(i) = normal(rng);
      truth[static_cast<std::size_t>(i)] = coin(rng) ? Label::kExtreme : Label::kNormal;
    }
    const auto grid = default_sweep_grid(scores);
    const auto curve = threshold_sweep(scores, truth, grid);
    bool mono = true;
    for (std::size_t t = 1; t < curve.size(); ++t) {
      mono = mono && curve[t].fnr >= curve[t - 1].fnr && curve[t].fpr <= curve[t - 1].fpr;
    }
    bool conserve = true;
    for (double t : grid) conserve = conserve && confusion(classify_all(scores, t), truth).total() == 1000;
    Vector w(3);
    w << 0.2, 0.5, 0.3;
    std::vector<Vector> means;
    std::vector<Matrix> covs;
    for (int k = 0; k < 3; ++k) {
      Vector m(2);
      m << normal(rng), normal(rng);
      means.push_back(3.0 * m);
      covs.push_back((k + 1) * Matrix::Identity(2, 2));
    }
    const GaussianMixture p(w, means, covs);
    const double self = llr_rows(p, p, p.sample(100, 10)).cwiseAbs().maxCoeff();
    std::ostringstream d;
    d << "monotone " << mono << ", conserved " << conserve << ", max |LLR(p,p)| " << self;
    return Outcome{mono && conserve && self <= 1e-12, d.str()};
  });

  report("AC10", "run-all deterministic; suite under 5 minutes", [&] {
    RunAllConfig a = perfect_config(work_dir("ac10_a"), 42);
    RunAllConfig b = perfect_config(work_dir("ac10_b"), 42);
    run_all(a);
    run_all(b);
    const auto sa = snapshot(a.out_dir / "report");
    const auto sb = snapshot(b.out_dir / "report");
    std::size_t differing = 0;
    for (const auto& [k, v] : sa) {
      const auto it = sb.find(k);
      differing += it == sb.end() || it->second != v;
    }
    differing += sb.size() > sa.size() ? sb.size() - sa.size() : 0;
    const double total = seconds_since(suite_start);
    std::ostringstream d;
    d << sa.size() << " report files, " << differing << " differ; suite " << total << " s";
    return Outcome{!sa.empty() && differing == 0 && total < 300.0, d.str()};
  });

  return failures == 0 ? 0 : 1;
}
