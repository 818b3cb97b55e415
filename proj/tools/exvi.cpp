// exvi: extreme-event posterior inference pipeline.

#include "exvi/classifier.hpp"
#include "exvi/error.hpp"
#include "exvi/feature_table.hpp"
#include "exvi/likelihood.hpp"
#include "exvi/mcmc.hpp"
#include "exvi/pipeline.hpp"
#include "exvi/report.hpp"
#include "exvi/serialization.hpp"
#include "exvi/synth.hpp"
#include "exvi/vi_engine.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

namespace fs = std::filesystem;
using namespace exvi;

namespace {

struct Globals {
  std::uint64_t seed = 1;
};

const std::map<std::string, ExperimentMode> kModes = {
    {"perfect", ExperimentMode::kPerfect}, {"mixed", ExperimentMode::kMixed}};
const std::map<std::string, Criterion> kCriteria = {{"bic", Criterion::kBic},
                                                    {"aic", Criterion::kAic}};
const std::map<std::string, TailLocation> kLocations = {
    {"zero", TailLocation::kZero}, {"profile", TailLocation::kProfile}};
const std::map<std::string, Standardization> kStandardizations = {
    {"zscore", Standardization::kZScore}, {"center", Standardization::kCenterOnly}};
const std::map<std::string, ViUpdate> kUpdates = {
    {"weighted-em", ViUpdate::kWeightedEm}, {"prior-ratio", ViUpdate::kPriorRatio}};

CLI::App* subcommand(CLI::App& app, const std::string& name,
                     const std::string& help) {
  auto* sub = app.add_subcommand(name, help);
  // consumed by expand_config before parsing; registered for --help
  sub->add_option("--config", "key=value file; every option may appear");
  return sub;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Replaces --config FILE with the file's key=value pairs as flags. Flags on
// the command line win over the file. "true"/"false" toggle bare flags.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args;
  std::vector<fs::path> files;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) {
      files.emplace_back(argv[++i]);
    } else if (a.rfind("--config=", 0) == 0) {
      files.emplace_back(a.substr(9));
    } else {
      args.push_back(a);
    }
  }
  std::vector<std::string> extra;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open config file " + file.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = trim(line.substr(0, line.find('#')));
      if (line.empty() || line.front() == '[') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ValidationError(file.string() + " line " + std::to_string(lineno) +
                              ": expected key=value");
      }
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        value = value.substr(1, value.size() - 2);
      }
      std::replace(key.begin(), key.end(), '_', '-');
      const std::string flag = key.rfind("--", 0) == 0 ? key : "--" + key;
      if (given(args, flag) || given(extra, flag)) continue;
      if (value == "true") {
        extra.push_back(flag);
      } else if (value != "false") {
        extra.push_back(flag);
        extra.push_back(value);
      }
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  std::reverse(args.begin(), args.end());
  return args;
}

LikelihoodProvider surrogate_provider(const fs::path& pca_path,
                                      const fs::path& stress_path,
                                      const fs::path& tail_path) {
  if (pca_path.empty() || stress_path.empty() || tail_path.empty()) {
    throw ValidationError("surrogate likelihood needs --pca, --stress-model and --tail");
  }
  auto pca = std::make_shared<const PcaModel>(load_pca(pca_path));
  auto stress = std::make_shared<const StressModel>(load_stress_model(stress_path));
  return LikelihoodProvider::surrogate(stress, pca, load_tail(tail_path));
}

void print_report(const std::string& name, const ClassificationReport& r) {
  std::cout << name << ": tp=" << r.tp << " fp=" << r.fp << " tn=" << r.tn
            << " fn=" << r.fn << " fnr=" << r.fnr << " fpr=" << r.fpr << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme-event posterior inference over latent microstructure features"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Global seed")->capture_default_str();

  // synth
  auto* synth = subcommand(app, "synth", "Generate a dataset (perfect, mixed) or a surrogate base table");
  std::string synth_mode = "perfect";
  fs::path synth_out, synth_prior, synth_pca, synth_stress, synth_exp, synth_terms;
  ExperimentConfig ec;
  SurrogateBaseConfig bc;
  synth->add_option("--mode", synth_mode, "perfect | mixed | base")
      ->check(CLI::IsMember({"perfect", "mixed", "base"}))->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--prior", synth_prior, "prior.json");
  synth->add_option("--pca", synth_pca, "pca.json");
  synth->add_option("--stress-model", synth_stress, "Stress model JSON");
  synth->add_option("--experimental", synth_exp, "Experimental feature CSV (mixed)");
  synth->add_option("--termspec", synth_terms, "Term spec JSON (base)");
  synth->add_option("--quantile", ec.quantile)->capture_default_str();
  synth->add_option("--n-total", ec.n_total)->capture_default_str();
  synth->add_option("--n-train", ec.n_train)->capture_default_str();
  synth->add_option("--n-synthetic", ec.n_synthetic)->capture_default_str();
  synth->add_option("--n-synthetic-train", ec.n_synthetic_train)->capture_default_str();
  synth->add_option("--n-experimental-train", ec.n_experimental_train)->capture_default_str();
  synth->add_option("--rows", bc.n_rows, "Base rows")->capture_default_str();
  synth->add_option("--rank", bc.latent_rank, "Base latent rank")->capture_default_str();
  synth->add_option("--clusters", bc.clusters, "Base clusters")->capture_default_str();

  // fit-prior
  auto* fp = subcommand(app, "fit-prior", "PCA + GMM prior with K selection");
  fs::path fp_features, fp_out;
  FitPriorOptions fpo;
  std::optional<Index> fp_k, fp_dim;
  std::string fp_criterion = "bic", fp_std = "zscore";
  double fp_variance = 0.95;
  fp->add_option("--features", fp_features, "Feature CSV")->required()->check(CLI::ExistingFile);
  fp->add_option("--out", fp_out, "Output directory")->required();
  fp->add_option("--k", fp_k, "Fixed K (skips selection)");
  fp->add_option("--k-min", fpo.k_min)->capture_default_str();
  fp->add_option("--k-max", fpo.k_max)->capture_default_str();
  fp->add_option("--criterion", fp_criterion)->check(CLI::IsMember({"bic", "aic"}))->capture_default_str();
  fp->add_option("--variance", fp_variance, "Explained-variance fraction")->capture_default_str();
  fp->add_option("--dim", fp_dim, "Fixed latent dimension");
  fp->add_option("--standardize", fp_std)->check(CLI::IsMember({"zscore", "center"}))->capture_default_str();
  fp->add_option("--n-init", fpo.em.n_init)->capture_default_str();

  // fit-stress
  auto* fs_cmd = subcommand(app, "fit-stress", "Ridge fit of the quadratic stress model");
  fs::path fs_features, fs_terms, fs_out;
  StressFitOptions sfo;
  fs_cmd->add_option("--features", fs_features, "Feature CSV with stress")->required()->check(CLI::ExistingFile);
  fs_cmd->add_option("--termspec", fs_terms, "Term spec JSON (default: built-in bicrystal spec)");
  fs_cmd->add_option("--ridge", sfo.ridge)->capture_default_str();
  fs_cmd->add_option("--out", fs_out, "Output JSON")->required();

  // fit-tail
  auto* ft = subcommand(app, "fit-tail", "Frechet fit to surrogate exceedances");
  fs::path ft_data, ft_pca, ft_stress, ft_out;
  double ft_sigma_bar = 0.0;
  std::string ft_loc = "zero";
  ft->add_option("--data", ft_data, "Latent CSV")->required()->check(CLI::ExistingFile);
  ft->add_option("--pca", ft_pca)->required()->check(CLI::ExistingFile);
  ft->add_option("--stress-model", ft_stress)->required()->check(CLI::ExistingFile);
  ft->add_option("--sigma-bar", ft_sigma_bar)->required();
  ft->add_option("--tail-location", ft_loc)->check(CLI::IsMember({"zero", "profile"}))->capture_default_str();
  ft->add_option("--out", ft_out)->required();

  // run-vi
  auto* rv = subcommand(app, "run-vi", "Extreme-event posterior by variational inference");
  fs::path rv_prior, rv_data, rv_tail, rv_stress, rv_pca, rv_out;
  std::string rv_lik = "surrogate", rv_update = "weighted-em";
  ViOptions vo;
  Index rv_augment = 0;
  rv->add_option("--prior", rv_prior)->required()->check(CLI::ExistingFile);
  rv->add_option("--data", rv_data, "Latent CSV")->required()->check(CLI::ExistingFile);
  rv->add_option("--likelihood", rv_lik)->check(CLI::IsMember({"observed", "surrogate"}))->capture_default_str();
  rv->add_option("--tail", rv_tail);
  rv->add_option("--stress-model", rv_stress);
  rv->add_option("--pca", rv_pca);
  rv->add_option("--max-iter", vo.max_iter)->capture_default_str();
  rv->add_option("--tol", vo.tol)->capture_default_str();
  rv->add_option("--update", rv_update)->check(CLI::IsMember({"weighted-em", "prior-ratio"}))->capture_default_str();
  rv->add_option("--augment", rv_augment, "Extra prior draws scored by the surrogate")->capture_default_str();
  rv->add_option("--out", rv_out, "posterior.json")->required();

  // run-mcmc
  auto* rm = subcommand(app, "run-mcmc", "Independence Metropolis-Hastings baseline");
  fs::path rm_prior, rm_tail, rm_stress, rm_pca, rm_out, rm_post;
  McmcOptions mo;
  std::optional<std::uint64_t> rm_seed;
  rm->add_option("--prior", rm_prior)->required()->check(CLI::ExistingFile);
  rm->add_option("--tail", rm_tail)->required();
  rm->add_option("--stress-model", rm_stress)->required();
  rm->add_option("--pca", rm_pca)->required();
  rm->add_option("--steps", mo.n_steps)->capture_default_str();
  rm->add_option("--burn-in", mo.burn_in)->capture_default_str();
  rm->add_option("--thin", mo.thin)->capture_default_str();
  rm->add_option("--chain-seed", rm_seed, "Chain seed (defaults to --seed)");
  rm->add_option("--out", rm_out, "mcmc_samples.csv")->required();
  rm->add_option("--posterior-out", rm_post, "GMM refit JSON");

  // run-empirical
  auto* re = subcommand(app, "run-empirical", "EM fit on flagged extreme rows");
  fs::path re_data, re_prior, re_out;
  re->add_option("--data", re_data, "Latent CSV with extreme column")->required()->check(CLI::ExistingFile);
  re->add_option("--prior", re_prior, "Prior whose K is reused")->required()->check(CLI::ExistingFile);
  re->add_option("--out", re_out)->required();

  // classify
  auto* cl = subcommand(app, "classify", "LLR classification and threshold sweep");
  fs::path cl_prior, cl_post, cl_data, cl_out;
  double cl_threshold = kDefaultLlrThreshold;
  Index cl_points = 101;
  std::string cl_name = "posterior";
  cl->add_option("--prior", cl_prior)->required()->check(CLI::ExistingFile);
  cl->add_option("--posterior", cl_post)->required()->check(CLI::ExistingFile);
  cl->add_option("--data", cl_data, "Latent test CSV")->required()->check(CLI::ExistingFile);
  cl->add_option("--threshold", cl_threshold)->capture_default_str();
  cl->add_option("--points", cl_points, "Sweep grid size")->capture_default_str();
  cl->add_option("--name", cl_name, "Method name used in file names")->capture_default_str();
  cl->add_option("--out", cl_out)->required();

  // run-all
  auto* ra = subcommand(app, "run-all", "Full experiment: dataset, posteriors, classification, report");
  RunAllConfig rc;
  std::string ra_mode = "perfect", ra_methods = "vi,mcmc,empirical", ra_loc = "zero",
              ra_update = "weighted-em";
  std::optional<Index> ra_k;
  double ra_variance = 0.95;
  bool ra_no_report = false;
  ra->add_option("--out", rc.out_dir, "Run directory")->required();
  ra->add_option("--mode", ra_mode)->check(CLI::IsMember({"perfect", "mixed"}))->capture_default_str();
  ra->add_option("--base-features", rc.base_features, "Feature CSV for PCA/prior (default: surrogate base)");
  ra->add_option("--experimental", rc.experimental, "Experimental CSV (mixed; default: base table)");
  ra->add_option("--termspec", rc.termspec);
  ra->add_option("--stress-model", rc.stress_model);
  ra->add_option("--quantile", rc.experiment.quantile)->capture_default_str();
  ra->add_option("--n-total", rc.experiment.n_total)->capture_default_str();
  ra->add_option("--n-train", rc.experiment.n_train)->capture_default_str();
  ra->add_option("--n-synthetic", rc.experiment.n_synthetic)->capture_default_str();
  ra->add_option("--n-synthetic-train", rc.experiment.n_synthetic_train)->capture_default_str();
  ra->add_option("--n-experimental-train", rc.experiment.n_experimental_train)->capture_default_str();
  ra->add_option("--base-rows", rc.base.n_rows)->capture_default_str();
  ra->add_option("--k", ra_k, "Fixed prior K");
  ra->add_option("--k-max", rc.prior.k_max)->capture_default_str();
  ra->add_option("--variance", ra_variance)->capture_default_str();
  ra->add_option("--likelihood", rc.likelihood)->check(CLI::IsMember({"observed", "surrogate"}))->capture_default_str();
  ra->add_option("--tail-location", ra_loc)->check(CLI::IsMember({"zero", "profile"}))->capture_default_str();
  ra->add_option("--max-iter", rc.vi.max_iter)->capture_default_str();
  ra->add_option("--tol", rc.vi.tol)->capture_default_str();
  ra->add_option("--update", ra_update)->check(CLI::IsMember({"weighted-em", "prior-ratio"}))->capture_default_str();
  ra->add_option("--augment", rc.vi_augment)->capture_default_str();
  ra->add_option("--mcmc-steps-per-row", rc.mcmc_steps_per_row)->capture_default_str();
  ra->add_option("--mcmc-burn-in", rc.mcmc_burn_in_fraction, "Fraction of steps")->capture_default_str();
  ra->add_option("--mcmc-thin", rc.mcmc_thin)->capture_default_str();
  ra->add_option("--methods", ra_methods)->capture_default_str();
  ra->add_option("--threshold", rc.llr_threshold)->capture_default_str();
  ra->add_flag("--no-report", ra_no_report);

  // report
  auto* rp = subcommand(app, "report", "Regenerate plot-ready CSVs from a run directory");
  fs::path rp_run;
  ReportOptions ro;
  rp->add_option("--run", rp_run, "Run directory")->required();
  rp->add_option("--grid-points", ro.grid_points)->capture_default_str();
  rp->add_option("--grid-span", ro.grid_span)->capture_default_str();
  rp->add_option("--pdf-samples", ro.pdf_samples)->capture_default_str();
  rp->add_option("--pdf-bins", ro.pdf_bins)->capture_default_str();

  try {
    app.parse(expand_config(argc, argv));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      fs::create_directories(synth_out);
      ec.seed = g.seed;
      if (synth_mode == "base") {
        const TermSpec ts = synth_terms.empty() ? bicrystal_termspec() : load_termspec(synth_terms);
        bc.seed = g.seed;
        const SurrogateBase base = make_surrogate_base(ts, bc);
        write_feature_csv(synth_out / "features.csv", base.table);
        save_stress_model(synth_out / "stress_truth.json", base.truth);
        save_termspec(synth_out / "termspec.json", ts);
        std::cout << "wrote " << base.table.size() << " rows to " << (synth_out / "features.csv") << '\n';
        return 0;
      }
      if (synth_prior.empty() || synth_pca.empty() || synth_stress.empty()) {
        throw ValidationError("synth needs --prior, --pca and --stress-model");
      }
      ec.mode = kModes.at(synth_mode);
      const auto prior = load_gmm(synth_prior);
      const auto pca = load_pca(synth_pca);
      const auto stress = load_stress_model(synth_stress);
      Dataset ds;
      if (ec.mode == ExperimentMode::kPerfect) {
        ds = generate_perfect(ec, prior, pca, stress);
      } else {
        if (synth_exp.empty()) throw ValidationError("mixed mode needs --experimental");
        ds = generate_mixed(ec, read_feature_csv(synth_exp), prior, pca, stress);
      }
      write_dataset(synth_out, ds);
      write_feature_csv(synth_out / "latent_train.csv", to_latent(pca, ds.train));
      write_feature_csv(synth_out / "latent_test.csv", to_latent(pca, ds.test));
      for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "sigma_bar=" << ds.sigma_bar << " train=" << ds.train.size()
                << " test=" << ds.test.size() << '\n';
    } else if (*fp) {
      fpo.criterion = kCriteria.at(fp_criterion);
      fpo.standardization = kStandardizations.at(fp_std);
      fpo.dimension = fp_dim ? DimensionPolicy::fixed(*fp_dim)
                             : DimensionPolicy::explained_variance(fp_variance);
      fpo.fixed_k = fp_k;
      fpo.em.seed = g.seed;
      const PriorFit fit = fit_prior(read_feature_csv(fp_features), fpo);
      write_prior_fit(fp_out, fit, fpo);
      for (const auto& s : fit.scores) {
        if (s.ok) {
          std::cout << "K=" << s.k << " bic=" << s.bic << " aic=" << s.aic << '\n';
        } else {
          std::cout << "K=" << s.k << " failed: " << s.message << '\n';
        }
      }
      std::cout << "d=" << fit.pca.dim() << " K=" << fit.k << '\n';
    } else if (*fs_cmd) {
      const FeatureTable t = read_feature_csv(fs_features);
      if (!t.stress) throw ValidationError("feature CSV has no stress column");
      TermSpec ts = fs_terms.empty() ? bicrystal_termspec() : load_termspec(fs_terms);
      if (!ts.feature_names.empty() && ts.feature_names != t.feature_names) {
        throw ValidationError("term spec features do not match the CSV columns");
      }
      if (ts.feature_names.empty()) ts.feature_names = t.feature_names;
      save_stress_model(fs_out, fit_stress(t.rows, *t.stress, ts, sfo));
    } else if (*ft) {
      const auto pca = load_pca(ft_pca);
      const auto stress = load_stress_model(ft_stress);
      const FeatureTable t = read_feature_csv(ft_data);
      const Vector s = stress.evaluate_rows(pca.reconstruct_rows(t.rows));
      const FrechetFit fit = fit_exceedance_tail(
          {s.data(), static_cast<std::size_t>(s.size())}, ft_sigma_bar,
          kLocations.at(ft_loc));
      save_tail(ft_out, fit.tail, kLocations.at(ft_loc));
      std::cout << "s=" << fit.tail.s << " alpha=" << fit.tail.alpha << " m=" << fit.tail.m << '\n';
    } else if (*rv) {
      vo.update = kUpdates.at(rv_update);
      const auto prior = load_gmm(rv_prior);
      const FeatureTable data = read_feature_csv(rv_data);
      ViResult res;
      if (rv_lik == "observed") {
        if (!data.extreme_flag) throw ValidationError("observed likelihood needs an 'extreme' column");
        res = run_vi(prior, data.rows, LikelihoodProvider::observed(*data.extreme_flag), vo);
      } else {
        const auto provider = surrogate_provider(rv_pca, rv_stress, rv_tail);
        Matrix z = data.rows;
        if (rv_augment > 0) {
          const Matrix extra = prior.sample(rv_augment, derive_seed(g.seed, 40));
          z.conservativeResize(z.rows() + extra.rows(), Eigen::NoChange);
          z.bottomRows(extra.rows()) = extra;
        }
        res = run_vi(prior, z, provider, vo);
      }
      GmmMetadata meta;
      meta.seed = g.seed;
      meta.source = "vi";
      const fs::path dir = rv_out.has_parent_path() ? rv_out.parent_path() : fs::path(".");
      fs::create_directories(dir);
      save_gmm(rv_out, res.posterior, meta);
      write_trace_csv(dir / "elbo_trace.csv", res.elbo_trace);
      std::cout << "iterations=" << res.iterations << " converged=" << res.converged
                << " elbo=" << res.elbo_trace.back() << '\n';
    } else if (*rm) {
      mo.seed = rm_seed.value_or(g.seed);
      const auto prior = load_gmm(rm_prior);
      const auto provider = surrogate_provider(rm_pca, rm_stress, rm_tail);
      const McmcResult res = run_mh(prior, provider, mo);
      FeatureTable samples;
      samples.feature_names = latent_names(prior.dim());
      samples.rows = res.samples;
      if (rm_out.has_parent_path()) fs::create_directories(rm_out.parent_path());
      write_feature_csv(rm_out, samples);
      if (!rm_post.empty()) {
        EmOptions eo;
        eo.seed = g.seed;
        GmmMetadata meta;
        meta.seed = mo.seed;
        meta.source = "mcmc";
        save_gmm(rm_post, fit_posterior_gmm(res, prior.components(), eo), meta);
      }
      std::cout << "acceptance=" << res.acceptance_rate << " samples=" << res.samples.rows() << '\n';
    } else if (*re) {
      const auto prior = load_gmm(re_prior);
      const FeatureTable data = read_feature_csv(re_data);
      if (!data.extreme_flag) throw ValidationError("empirical fit needs an 'extreme' column");
      std::vector<Index> idx;
      for (Index i = 0; i < data.size(); ++i) {
        if ((*data.extreme_flag)[static_cast<std::size_t>(i)]) idx.push_back(i);
      }
      EmOptions eo;
      eo.seed = g.seed;
      GmmMetadata meta;
      meta.seed = g.seed;
      meta.source = "empirical";
      if (re_out.has_parent_path()) fs::create_directories(re_out.parent_path());
      save_gmm(re_out, fit_em(data.subset(idx).rows, prior.components(), eo).model, meta);
    } else if (*cl) {
      const auto prior = load_gmm(cl_prior);
      const auto post = load_gmm(cl_post);
      const FeatureTable data = read_feature_csv(cl_data);
      if (!data.extreme_flag) throw ValidationError("classification needs an 'extreme' column");
      const Vector l = llr_rows(post, prior, data.rows);
      const auto truth = labels_from_flags(*data.extreme_flag);
      ClassificationReport r = confusion(classify_all(l, cl_threshold), truth);
      r.llr_threshold = cl_threshold;
      const auto sweep = threshold_sweep(l, truth, default_sweep_grid(l, cl_points));
      write_classification(cl_out, cl_name, r, sweep);
      print_report(cl_name, r);
    } else if (*ra) {
      rc.seed = g.seed;
      rc.experiment.mode = kModes.at(ra_mode);
      rc.methods = parse_methods(ra_methods);
      rc.tail_location = kLocations.at(ra_loc);
      rc.vi.update = kUpdates.at(ra_update);
      rc.prior.fixed_k = ra_k;
      rc.prior.dimension = DimensionPolicy::explained_variance(ra_variance);
      rc.report = !ra_no_report;
      const RunSummary s = run_all(rc);
      for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "sigma_bar=" << s.sigma_bar << " d=" << s.latent_dim << " K=" << s.k
                << " test_extremes=" << s.test_extremes << '\n';
      for (const auto& [m, r] : s.reports) print_report(to_string(m), r);
    } else if (*rp) {
      generate_report(rp_run, ro);
      std::cout << "report written to " << (rp_run / "report") << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_numerical() ? 3 : 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
