#include "exvi/pipeline.hpp"

#include "exvi/error.hpp"
#include "exvi/likelihood.hpp"
#include "exvi/report.hpp"
#include "exvi/serialization.hpp"
#include "json_io.hpp"
#include "text.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace exvi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage '") + name + "': " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::kIo, std::string("stage '") + name + "': " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kNumerical,
                std::string("stage '") + name + "': " + e.what());
  }
}

json provenance_counts(const std::vector<Provenance>& p) {
  const auto exp = std::count(p.begin(), p.end(), Provenance::kExperimental);
  return json{{"synthetic", static_cast<Index>(p.size()) - exp},
              {"experimental", exp}};
}

json report_json(const ClassificationReport& r) {
  return json{{"tp", r.tp},
              {"fp", r.fp},
              {"tn", r.tn},
              {"fn", r.fn},
              {"fnr", r.fnr},
              {"fpr", r.fpr},
              {"llr_threshold", r.llr_threshold},
              {"stress_threshold", r.stress_threshold}};
}

std::vector<Index> extreme_rows(const FeatureTable& t) {
  std::vector<Index> idx;
  for (Index i = 0; i < t.size(); ++i) {
    if ((*t.extreme_flag)[static_cast<std::size_t>(i)]) idx.push_back(i);
  }
  return idx;
}

}  // namespace

PriorFit fit_prior(const FeatureTable& features, const FitPriorOptions& options) {
  features.validate();
  PriorFit out;
  out.pca = stage("pca", [&] {
    return fit_pca(features, options.dimension, options.standardization);
  });
  out.latent = out.pca.project_rows(features.rows);
  if (options.fixed_k) {
    out.k = *options.fixed_k;
    out.prior = stage("prior", [&] { return fit_em(out.latent, out.k, options.em).model; });
    return out;
  }
  if (options.k_min < 1 || options.k_max < options.k_min) {
    throw ValidationError("K range must satisfy 1 <= k_min <= k_max");
  }
  std::vector<Index> ks(static_cast<std::size_t>(options.k_max - options.k_min + 1));
  std::iota(ks.begin(), ks.end(), options.k_min);
  auto sel = stage("select-k", [&] {
    return select_k(out.latent, ks, options.criterion, options.em);
  });
  out.k = sel.best_k;
  out.prior = std::move(sel.best_model);
  out.scores = std::move(sel.scores);
  return out;
}

void write_prior_fit(const fs::path& dir, const PriorFit& fit,
                     const FitPriorOptions& options) {
  fs::create_directories(dir);
  save_pca(dir / "pca.json", fit.pca);
  GmmMetadata meta;
  meta.seed = options.em.seed;
  meta.criterion = options.fixed_k ? "fixed" : to_string(options.criterion);
  meta.source = "prior";
  meta.scores = fit.scores;
  save_gmm(dir / "prior.json", fit.prior, meta);
  write_selection_csv(dir / "selection.csv", fit.scores);
  FeatureTable latent;
  latent.feature_names = latent_names(fit.pca.dim());
  latent.rows = fit.latent;
  write_feature_csv(dir / "latent.csv", latent);
}

void write_dataset(const fs::path& dir, const Dataset& ds) {
  fs::create_directories(dir);
  write_feature_csv(dir / "train.csv", ds.train);
  write_feature_csv(dir / "test.csv", ds.test);
  json j{{"sigma_bar", ds.sigma_bar},
         {"quantile", ds.quantile},
         {"seed", ds.seed},
         {"n_train", ds.train.size()},
         {"n_test", ds.test.size()},
         {"train_extremes", ds.train.extreme_count()},
         {"test_extremes", ds.test.extreme_count()},
         {"provenance",
          {{"train", provenance_counts(ds.train_provenance)},
           {"test", provenance_counts(ds.test_provenance)}}},
         {"warnings", ds.warnings}};
  detail::write_json(dir / "meta.json", j);
}

FeatureTable to_latent(const PcaModel& pca, const FeatureTable& table) {
  if (table.feature_names != pca.feature_names()) {
    throw ValidationError("feature columns do not match the PCA model");
  }
  FeatureTable out;
  out.feature_names = latent_names(pca.dim());
  out.rows = pca.project_rows(table.rows);
  out.stress = table.stress;
  out.extreme_flag = table.extreme_flag;
  return out;
}

void write_trace_csv(const fs::path& path, const std::vector<double>& trace) {
  detail::ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "iteration,elbo\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i << ',' << detail::format_double(trace[i]) << '\n';
  }
}

void write_classification(const fs::path& dir, const std::string& method,
                          const ClassificationReport& report,
                          const std::vector<SweepPoint>& sweep) {
  fs::create_directories(dir);
  json j = report_json(report);
  j["method"] = method;
  detail::write_json(dir / (method + ".json"), j);
  std::ofstream out(dir / ("sweep_" + method + ".csv"));
  if (!out) throw IoError("cannot write sweep for " + method);
  out << "threshold,fnr,fpr\n";
  for (const auto& p : sweep) {
    out << detail::format_double(p.threshold) << ','
        << detail::format_double(p.fnr) << ','
        << detail::format_double(p.fpr) << '\n';
  }
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kVi: return "vi";
    case Method::kMcmc: return "mcmc";
    case Method::kEmpirical: return "empirical";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "vi") return Method::kVi;
  if (s == "mcmc") return Method::kMcmc;
  if (s == "empirical") return Method::kEmpirical;
  throw ValidationError("unknown method '" + s + "' (expected vi, mcmc or empirical)");
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  for (const auto& item : detail::split_csv_line(list)) {
    if (item.empty()) continue;
    const Method m = method_from_string(item);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw ValidationError("no methods selected");
  std::sort(out.begin(), out.end());
  return out;
}

void RunAllConfig::validate() const {
  if (out_dir.empty()) throw ValidationError("run-all needs an output directory");
  experiment.validate();
  if (likelihood != "surrogate" && likelihood != "observed") {
    throw ValidationError("likelihood must be 'surrogate' or 'observed'");
  }
  if (methods.empty()) throw ValidationError("no methods selected");
  if (vi_augment < 0) throw ValidationError("vi augment count must be >= 0");
  if (mcmc_steps_per_row < 1 || mcmc_thin < 1 ||
      !(mcmc_burn_in_fraction >= 0.0 && mcmc_burn_in_fraction < 1.0)) {
    throw ValidationError("MCMC needs steps per row >= 1, thin >= 1, burn-in in [0, 1)");
  }
  if (sweep_points < 2) throw ValidationError("sweep needs at least 2 points");
  for (const auto* p : {&base_features, &experimental, &termspec, &stress_model}) {
    if (!p->empty() && !fs::exists(*p)) {
      throw IoError("input file not found: " + p->string());
    }
  }
}

RunSummary run_all(const RunAllConfig& config) {
  stage("config", [&] { config.validate(); });
  const fs::path out = config.out_dir;
  const auto has = [&](Method m) {
    return std::find(config.methods.begin(), config.methods.end(), m) !=
           config.methods.end();
  };
  stage("setup", [&] {
    for (const char* sub : {"dataset", "models", "classification"}) {
      fs::create_directories(out / sub);
    }
    fs::remove_all(out / "report");
    for (const char* m : {"vi", "mcmc", "empirical"}) {
      fs::remove(out / "models" / (std::string(m) + ".json"));
      fs::remove(out / "classification" / (std::string(m) + ".json"));
      fs::remove(out / "classification" / ("sweep_" + std::string(m) + ".csv"));
    }
    fs::remove(out / "models" / "elbo_trace.csv");
    fs::remove(out / "models" / "mcmc_samples.csv");
    return 0;
  });
  RunSummary summary;

  // base table, term spec and stress model
  const TermSpec termspec = stage("termspec", [&] {
    return config.termspec.empty() ? bicrystal_termspec() : load_termspec(config.termspec);
  });
  const FeatureTable base = stage("base", [&] {
    if (!config.base_features.empty()) return read_feature_csv(config.base_features);
    SurrogateBaseConfig bc = config.base;
    bc.seed = derive_seed(config.seed, 10);
    return make_surrogate_base(termspec, bc).table;
  });
  const auto stress = std::make_shared<const StressModel>(stage("stress-model", [&] {
    if (!config.stress_model.empty()) return load_stress_model(config.stress_model);
    if (!base.stress) throw ValidationError("base table has no stress column to fit");
    if (!termspec.feature_names.empty() && termspec.feature_names != base.feature_names) {
      throw ValidationError("term spec features do not match the base table columns");
    }
    return fit_stress(base.rows, *base.stress, termspec, config.stress_fit);
  }));
  save_stress_model(out / "models" / "stress_model.json", *stress);

  FitPriorOptions prior_opts = config.prior;
  prior_opts.em.seed = derive_seed(config.seed, 30);
  const PriorFit pf = stage("fit-prior", [&] { return fit_prior(base, prior_opts); });
  const auto pca = std::make_shared<const PcaModel>(pf.pca);
  const GaussianMixture& prior = pf.prior;
  write_prior_fit(out / "models", pf, prior_opts);
  summary.k = pf.k;
  summary.latent_dim = pca->dim();

  // dataset
  ExperimentConfig ec = config.experiment;
  ec.seed = derive_seed(config.seed, 20);
  const Dataset ds = stage("dataset", [&] {
    if (ec.mode == ExperimentMode::kPerfect) {
      return generate_perfect(ec, prior, *pca, *stress);
    }
    const FeatureTable exp =
        config.experimental.empty() ? base : read_feature_csv(config.experimental);
    return generate_mixed(ec, exp, prior, *pca, *stress);
  });
  write_dataset(out / "dataset", ds);
  summary.sigma_bar = ds.sigma_bar;
  summary.n_train = ds.train.size();
  summary.n_test = ds.test.size();
  summary.test_extremes = ds.test.extreme_count();
  summary.warnings = ds.warnings;

  const FeatureTable latent_train = to_latent(*pca, ds.train);
  const FeatureTable latent_test = to_latent(*pca, ds.test);
  write_feature_csv(out / "dataset" / "latent_train.csv", latent_train);
  write_feature_csv(out / "dataset" / "latent_test.csv", latent_test);
  const Matrix& z_train = latent_train.rows;
  const Matrix& z_test = latent_test.rows;

  // tail of the surrogate exceedances
  const FrechetFit tail = stage("tail", [&] {
    const Vector s = stress->evaluate_rows(pca->reconstruct_rows(z_train));
    return fit_exceedance_tail({s.data(), static_cast<std::size_t>(s.size())},
                               ds.sigma_bar, config.tail_location);
  });
  save_tail(out / "models" / "tail.json", tail.tail, config.tail_location);
  const auto surrogate = LikelihoodProvider::surrogate(stress, pca, tail.tail);

  std::map<Method, GaussianMixture> posteriors;
  json meta_methods = json::object();

  if (has(Method::kVi)) {
    const ViResult vi = stage("vi", [&] {
      if (config.likelihood == "observed") {
        return run_vi(prior, z_train,
                      LikelihoodProvider::observed(*latent_train.extreme_flag),
                      config.vi);
      }
      Matrix z = z_train;
      if (config.vi_augment > 0) {
        const Matrix extra = prior.sample(config.vi_augment, derive_seed(config.seed, 40));
        z.conservativeResize(z_train.rows() + extra.rows(), Eigen::NoChange);
        z.bottomRows(extra.rows()) = extra;
      }
      return run_vi(prior, z, surrogate, config.vi);
    });
    GmmMetadata meta;
    meta.seed = config.seed;
    meta.source = "vi";
    save_gmm(out / "models" / "vi.json", vi.posterior, meta);
    write_trace_csv(out / "models" / "elbo_trace.csv", vi.elbo_trace);
    summary.elbo_trace = vi.elbo_trace;
    posteriors.emplace(Method::kVi, vi.posterior);
    meta_methods["vi"] = {{"iterations", vi.iterations},
                          {"converged", vi.converged},
                          {"effective_n", vi.effective_n},
                          {"frozen_events", vi.frozen_events},
                          {"update", to_string(config.vi.update)},
                          {"likelihood", config.likelihood},
                          {"augment", config.likelihood == "surrogate" ? config.vi_augment : 0}};
  }

  if (has(Method::kMcmc)) {
    McmcOptions mo;
    mo.n_steps = config.mcmc_steps_per_row * std::max<Index>(1, ds.train.size());
    mo.burn_in = static_cast<Index>(config.mcmc_burn_in_fraction * static_cast<double>(mo.n_steps));
    mo.thin = config.mcmc_thin;
    mo.seed = derive_seed(config.seed, 50);
    const McmcResult mr = stage("mcmc", [&] { return run_mh(prior, surrogate, mo); });
    EmOptions eo = config.prior.em;
    eo.seed = derive_seed(config.seed, 51);
    GaussianMixture post = stage("mcmc-refit", [&] {
      return fit_posterior_gmm(mr, prior.components(), eo);
    });
    FeatureTable samples;
    samples.feature_names = latent_names(pca->dim());
    samples.rows = mr.samples;
    write_feature_csv(out / "models" / "mcmc_samples.csv", samples);
    GmmMetadata meta;
    meta.seed = mo.seed;
    meta.source = "mcmc";
    save_gmm(out / "models" / "mcmc.json", post, meta);
    posteriors.emplace(Method::kMcmc, std::move(post));
    summary.mcmc_acceptance = mr.acceptance_rate;
    meta_methods["mcmc"] = {{"steps", mo.n_steps},
                            {"burn_in", mo.burn_in},
                            {"thin", mo.thin},
                            {"samples", mr.samples.rows()},
                            {"acceptance_rate", mr.acceptance_rate}};
  }

  if (has(Method::kEmpirical)) {
    GaussianMixture emp = stage("empirical", [&] {
      const auto idx = extreme_rows(latent_train);
      const Matrix z_ext = latent_train.subset(idx).rows;
      EmOptions eo = config.prior.em;
      eo.seed = derive_seed(config.seed, 60);
      return fit_em(z_ext, prior.components(), eo).model;
    });
    GmmMetadata meta;
    meta.seed = derive_seed(config.seed, 60);
    meta.source = "empirical";
    save_gmm(out / "models" / "empirical.json", emp, meta);
    posteriors.emplace(Method::kEmpirical, std::move(emp));
    meta_methods["empirical"] = {{"train_extremes", ds.train.extreme_count()}};
  }

  // classification on a common sweep grid
  stage("classify", [&] {
    const auto truth = labels_from_flags(*latent_test.extreme_flag);
    std::map<Method, Vector> llrs;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& [m, post] : posteriors) {
      Vector l = llr_rows(post, prior, z_test);
      lo = std::min(lo, l.minCoeff());
      hi = std::max(hi, l.maxCoeff());
      llrs.emplace(m, std::move(l));
    }
    Vector bounds(2);
    bounds << lo, hi;
    const auto grid = default_sweep_grid(bounds, config.sweep_points);
    for (const auto& [m, l] : llrs) {
      const auto predicted = classify_all(l, config.llr_threshold);
      ClassificationReport r = confusion(predicted, truth);
      r.llr_threshold = config.llr_threshold;
      r.stress_threshold = ds.sigma_bar;
      auto sweep = threshold_sweep(l, truth, grid);
      write_classification(out / "classification", to_string(m), r, sweep);
      summary.reports.emplace(m, r);
      summary.sweeps.emplace(m, std::move(sweep));
    }
    std::ofstream sc(out / "classification" / "scores.csv");
    if (!sc) throw IoError("cannot write scores.csv");
    sc << "row,provenance,stress,extreme";
    for (const auto& [m, l] : llrs) sc << ",llr_" << to_string(m);
    sc << '\n';
    for (Index i = 0; i < z_test.rows(); ++i) {
      const auto u = static_cast<std::size_t>(i);
      sc << i << ','
         << (ds.test_provenance[u] == Provenance::kExperimental ? "experimental" : "synthetic")
         << ',' << detail::format_double((*latent_test.stress)(i)) << ','
         << ((*latent_test.extreme_flag)[u] ? 1 : 0);
      for (const auto& [m, l] : llrs) sc << ',' << detail::format_double(l(i));
      sc << '\n';
    }
    return 0;
  });

  json methods = json::array();
  for (const auto m : config.methods) methods.push_back(to_string(m));
  json results = json::object();
  for (const auto& [m, r] : summary.reports) results[to_string(m)] = report_json(r);
  json meta{{"schema", kRunSchema},
            {"seed", config.seed},
            {"mode", to_string(config.experiment.mode)},
            {"methods", methods},
            {"sigma_bar", ds.sigma_bar},
            {"quantile", ds.quantile},
            {"n_train", ds.train.size()},
            {"n_test", ds.test.size()},
            {"test_extremes", summary.test_extremes},
            {"latent_dim", pca->dim()},
            {"explained_fraction", pca->explained_fraction()},
            {"k", pf.k},
            {"tail",
             {{"s", tail.tail.s},
              {"alpha", tail.tail.alpha},
              {"m", tail.tail.m},
              {"location", to_string(config.tail_location)},
              {"log_likelihood", tail.log_likelihood}}},
            {"method_details", meta_methods},
            {"classification", results},
            {"warnings", ds.warnings}};
  detail::write_json(out / "meta.json", meta);

  if (config.report) {
    stage("report", [&] {
      generate_report(out);
      return 0;
    });
  }
  return summary;
}

}  // namespace exvi
