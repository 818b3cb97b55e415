#include "exvi/serialization.hpp"

#include "exvi/error.hpp"
#include "json_io.hpp"
#include "text.hpp"

#include <fstream>

namespace exvi {

using nlohmann::json;

namespace {

json to_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from(const json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

json matrix_json(const Matrix& m, bool row_major) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  if (row_major) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  } else {
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) data.push_back(m(i, j));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from(const json& j, bool row_major, const char* what) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols) {
    throw ValidationError(std::string(what) + ": data size does not match shape");
  }
  Matrix m(rows, cols);
  std::size_t p = 0;
  if (row_major) {
    for (Index i = 0; i < rows; ++i)
      for (Index c = 0; c < cols; ++c) m(i, c) = data[p++];
  } else {
    for (Index c = 0; c < cols; ++c)
      for (Index i = 0; i < rows; ++i) m(i, c) = data[p++];
  }
  return m;
}

template <typename F>
auto guarded(const std::filesystem::path& path, F&& f) {
  try {
    return f(detail::read_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

json termspec_json(const TermSpec& spec) {
  const bool named = !spec.feature_names.empty();
  auto ref = [&](Index i) -> json {
    if (named) return spec.feature_names[static_cast<std::size_t>(i)];
    return i;
  };
  json terms = json::array();
  for (const auto& t : spec.terms) {
    json e{{"kind", to_string(t.kind)}, {"a", ref(t.a)}};
    if (t.kind == TermKind::kProduct) e["b"] = ref(*t.b);
    terms.push_back(e);
  }
  json j{{"feature_dim", spec.feature_dim}, {"terms", terms}};
  if (named) j["features"] = spec.feature_names;
  return j;
}

TermSpec termspec_from(const json& j) {
  TermSpec spec;
  if (j.contains("features")) {
    spec.feature_names = j.at("features").get<std::vector<std::string>>();
  }
  spec.feature_dim = j.contains("feature_dim")
                         ? j.at("feature_dim").get<Index>()
                         : static_cast<Index>(spec.feature_names.size());
  auto resolve = [&](const json& r) -> Index {
    if (r.is_number_integer()) return r.get<Index>();
    const auto name = r.get<std::string>();
    for (std::size_t i = 0; i < spec.feature_names.size(); ++i) {
      if (spec.feature_names[i] == name) return static_cast<Index>(i);
    }
    throw ValidationError("term refers to unknown feature '" + name + "'");
  };
  for (const auto& e : j.at("terms")) {
    const TermKind kind = term_kind_from_string(e.at("kind").get<std::string>());
    const Index a = resolve(e.at("a"));
    switch (kind) {
      case TermKind::kLinear: spec.terms.push_back(Term::linear(a)); break;
      case TermKind::kSquare: spec.terms.push_back(Term::square(a)); break;
      case TermKind::kProduct:
        spec.terms.push_back(Term::product(a, resolve(e.at("b"))));
        break;
    }
  }
  spec.validate();
  return spec;
}

}  // namespace

void save_pca(const std::filesystem::path& path, const PcaModel& pca) {
  json j{{"feature_names", pca.feature_names()},
         {"shift", to_json(pca.shift())},
         {"scale", to_json(pca.scale())},
         {"mean", to_json(pca.mean())},
         {"components", matrix_json(pca.components(), false)},
         {"eigenvalues", to_json(pca.eigenvalues())},
         {"spectrum", to_json(pca.spectrum())}};
  detail::write_json(path, j);
}

PcaModel load_pca(const std::filesystem::path& path) {
  return guarded(path, [](const json& j) {
    return PcaModel(j.at("feature_names").get<std::vector<std::string>>(),
                    vector_from(j.at("shift"), "shift"),
                    vector_from(j.at("scale"), "scale"),
                    vector_from(j.at("mean"), "mean"),
                    matrix_from(j.at("components"), false, "components"),
                    vector_from(j.at("eigenvalues"), "eigenvalues"),
                    vector_from(j.at("spectrum"), "spectrum"));
  });
}

void save_gmm(const std::filesystem::path& path, const GaussianMixture& gmm,
              const GmmMetadata& meta) {
  json means = json::array();
  json covs = json::array();
  for (Index k = 0; k < gmm.components(); ++k) {
    means.push_back(to_json(gmm.mean(k)));
    covs.push_back(matrix_json(gmm.covariance(k), true));
  }
  json scores = json::array();
  for (const auto& s : meta.scores) {
    json e{{"k", s.k}, {"ok", s.ok}};
    if (s.ok) {
      e["log_likelihood"] = s.log_likelihood;
      e["bic"] = s.bic;
      e["aic"] = s.aic;
    } else {
      e["message"] = s.message;
    }
    scores.push_back(e);
  }
  json j{{"K", gmm.components()},
         {"d", gmm.dim()},
         {"weights", to_json(gmm.weights())},
         {"means", means},
         {"covariances", covs},
         {"metadata",
          {{"seed", meta.seed},
           {"criterion", meta.criterion},
           {"source", meta.source},
           {"scores", scores}}}};
  detail::write_json(path, j);
}

GaussianMixture load_gmm(const std::filesystem::path& path, GmmMetadata* meta) {
  return guarded(path, [&](const json& j) {
    const Index k = j.at("K").get<Index>();
    const Index d = j.at("d").get<Index>();
    std::vector<Vector> means;
    std::vector<Matrix> covs;
    for (const auto& m : j.at("means")) means.push_back(vector_from(m, "means"));
    for (const auto& c : j.at("covariances")) {
      covs.push_back(matrix_from(c, true, "covariances"));
    }
    if (static_cast<Index>(means.size()) != k ||
        static_cast<Index>(covs.size()) != k) {
      throw ValidationError(path.string() + ": component count does not match K");
    }
    for (Index c = 0; c < k; ++c) {
      const auto i = static_cast<std::size_t>(c);
      if (means[i].size() != d || covs[i].rows() != d || covs[i].cols() != d) {
        throw ValidationError(path.string() + ": component shape does not match d");
      }
    }
    if (meta != nullptr && j.contains("metadata")) {
      const auto& m = j.at("metadata");
      meta->seed = m.value("seed", std::uint64_t{0});
      meta->criterion = m.value("criterion", std::string());
      meta->source = m.value("source", std::string());
      meta->scores.clear();
      for (const auto& e : m.value("scores", json::array())) {
        KScore s;
        s.k = e.at("k").get<Index>();
        s.ok = e.at("ok").get<bool>();
        s.log_likelihood = e.value("log_likelihood", 0.0);
        s.bic = e.value("bic", 0.0);
        s.aic = e.value("aic", 0.0);
        s.message = e.value("message", std::string());
        meta->scores.push_back(s);
      }
    }
    return GaussianMixture(vector_from(j.at("weights"), "weights"),
                           std::move(means), std::move(covs));
  });
}

void save_termspec(const std::filesystem::path& path, const TermSpec& spec) {
  detail::write_json(path, termspec_json(spec));
}

TermSpec load_termspec(const std::filesystem::path& path) {
  return guarded(path, [](const json& j) { return termspec_from(j); });
}

void save_stress_model(const std::filesystem::path& path,
                       const StressModel& model) {
  json j = termspec_json(model.termspec);
  j["beta"] = to_json(model.beta);
  j["intercept"] = model.intercept;
  detail::write_json(path, j);
}

StressModel load_stress_model(const std::filesystem::path& path) {
  return guarded(path, [](const json& j) {
    StressModel m;
    m.termspec = termspec_from(j);
    m.beta = vector_from(j.at("beta"), "beta");
    m.intercept = j.value("intercept", 0.0);
    m.validate();
    return m;
  });
}

void save_tail(const std::filesystem::path& path, const FrechetTail& tail,
               TailLocation location) {
  json j{{"s", tail.s},
         {"alpha", tail.alpha},
         {"m", tail.m},
         {"sigma_bar", tail.sigma_bar},
         {"floor", tail.floor},
         {"location", to_string(location)}};
  detail::write_json(path, j);
}

FrechetTail load_tail(const std::filesystem::path& path) {
  return guarded(path, [](const json& j) {
    FrechetTail t;
    t.s = j.at("s").get<double>();
    t.alpha = j.at("alpha").get<double>();
    t.m = j.value("m", 0.0);
    t.sigma_bar = j.at("sigma_bar").get<double>();
    t.floor = j.value("floor", kProbabilityFloor);
    t.validate();
    return t;
  });
}

void write_selection_csv(const std::filesystem::path& path,
                         const std::vector<KScore>& scores) {
  detail::ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "k,ok,log_likelihood,bic,aic\n";
  for (const auto& s : scores) {
    out << s.k << ',' << (s.ok ? 1 : 0) << ','
        << (s.ok ? detail::format_double(s.log_likelihood) : "nan") << ','
        << (s.ok ? detail::format_double(s.bic) : "nan") << ','
        << (s.ok ? detail::format_double(s.aic) : "nan") << '\n';
  }
}

}  // namespace exvi
