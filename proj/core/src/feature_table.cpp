#include "exvi/feature_table.hpp"

#include "exvi/error.hpp"
#include "text.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace exvi {

void FeatureTable::validate() const {
  if (static_cast<Index>(feature_names.size()) != rows.cols()) {
    throw ValidationError("feature table has " +
                          std::to_string(feature_names.size()) +
                          " names but " + std::to_string(rows.cols()) +
                          " columns");
  }
  std::set<std::string> seen;
  for (const auto& name : feature_names) {
    if (name.empty()) throw ValidationError("empty feature name");
    if (!seen.insert(name).second) {
      throw ValidationError("duplicate feature name '" + name + "'");
    }
  }
  for (Index i = 0; i < rows.rows(); ++i) {
    if (!rows.row(i).allFinite()) {
      throw ValidationError("non-finite feature value in row " +
                            std::to_string(i));
    }
  }
  if (stress) {
    if (stress->size() != rows.rows()) {
      throw ValidationError("stress column length does not match row count");
    }
    if (!stress->allFinite()) throw ValidationError("non-finite stress value");
  }
  if (extreme_flag &&
      static_cast<Index>(extreme_flag->size()) != rows.rows()) {
    throw ValidationError("extreme column length does not match row count");
  }
}

Index FeatureTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    if (feature_names[j] == name) return static_cast<Index>(j);
  }
  throw ValidationError("unknown feature '" + name + "'");
}

FeatureTable FeatureTable::subset(std::span<const Index> indices) const {
  FeatureTable out;
  out.feature_names = feature_names;
  out.rows.resize(static_cast<Index>(indices.size()), rows.cols());
  if (stress) out.stress = Vector(static_cast<Index>(indices.size()));
  if (extreme_flag) out.extreme_flag = std::vector<bool>(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const Index i = indices[r];
    if (i < 0 || i >= rows.rows()) {
      throw ValidationError("row index out of range in subset");
    }
    out.rows.row(static_cast<Index>(r)) = rows.row(i);
    if (stress) (*out.stress)(static_cast<Index>(r)) = (*stress)(i);
    if (extreme_flag) (*out.extreme_flag)[r] = (*extreme_flag)[i];
  }
  return out;
}

Index FeatureTable::extreme_count() const {
  if (!extreme_flag) return 0;
  Index n = 0;
  for (bool f : *extreme_flag) n += f ? 1 : 0;
  return n;
}

FeatureTable concat(const FeatureTable& a, const FeatureTable& b) {
  if (a.feature_names != b.feature_names) {
    throw ValidationError("cannot concatenate tables with different features");
  }
  if (a.stress.has_value() != b.stress.has_value() ||
      a.extreme_flag.has_value() != b.extreme_flag.has_value()) {
    throw ValidationError(
        "cannot concatenate tables with different optional columns");
  }
  FeatureTable out;
  out.feature_names = a.feature_names;
  out.rows.resize(a.size() + b.size(), a.dim());
  out.rows << a.rows, b.rows;
  if (a.stress) {
    out.stress = Vector(a.size() + b.size());
    *out.stress << *a.stress, *b.stress;
  }
  if (a.extreme_flag) {
    out.extreme_flag = *a.extreme_flag;
    out.extreme_flag->insert(out.extreme_flag->end(), b.extreme_flag->begin(),
                             b.extreme_flag->end());
  }
  return out;
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("'" + path.string() + "' is empty");
  }
  auto header = detail::split_csv_line(line);

  FeatureTable table;
  std::ptrdiff_t stress_col = -1;
  std::ptrdiff_t extreme_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "stress") {
      stress_col = static_cast<std::ptrdiff_t>(j);
    } else if (header[j] == "extreme") {
      extreme_col = static_cast<std::ptrdiff_t>(j);
    } else {
      if (stress_col >= 0 || extreme_col >= 0) {
        throw ValidationError("'" + path.string() +
                              "': stress/extreme must be trailing columns");
      }
      table.feature_names.push_back(header[j]);
    }
  }

  std::vector<std::vector<double>> values;
  std::vector<double> stress;
  std::vector<bool> flags;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ValidationError("'" + path.string() + "' line " +
                            std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(table.feature_names.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v = 0.0;
      if (!detail::parse_double(fields[j], v)) {
        throw ValidationError("'" + path.string() + "' line " +
                              std::to_string(line_no) + ": cannot parse '" +
                              fields[j] + "'");
      }
      if (static_cast<std::ptrdiff_t>(j) == stress_col) {
        stress.push_back(v);
      } else if (static_cast<std::ptrdiff_t>(j) == extreme_col) {
        if (v != 0.0 && v != 1.0) {
          throw ValidationError("'" + path.string() + "' line " +
                                std::to_string(line_no) +
                                ": extreme must be 0 or 1");
        }
        flags.push_back(v == 1.0);
      } else {
        row.push_back(v);
      }
    }
    values.push_back(std::move(row));
  }

  const auto n = static_cast<Index>(values.size());
  const auto d = static_cast<Index>(table.feature_names.size());
  table.rows.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) {
      table.rows(i, j) = values[static_cast<std::size_t>(i)]
                               [static_cast<std::size_t>(j)];
    }
  }
  if (stress_col >= 0) {
    table.stress = Eigen::Map<Vector>(stress.data(), n);
  }
  if (extreme_col >= 0) table.extreme_flag = std::move(flags);
  table.validate();
  return table;
}

void write_feature_csv(const std::filesystem::path& path,
                       const FeatureTable& table) {
  table.validate();
  std::ostringstream out;
  for (std::size_t j = 0; j < table.feature_names.size(); ++j) {
    if (j) out << ',';
    out << table.feature_names[j];
  }
  if (table.stress) out << ",stress";
  if (table.extreme_flag) out << ",extreme";
  out << '\n';
  for (Index i = 0; i < table.size(); ++i) {
    for (Index j = 0; j < table.dim(); ++j) {
      if (j) out << ',';
      out << detail::format_double(table.rows(i, j));
    }
    if (table.stress) {
      out << ',' << detail::format_double((*table.stress)(i));
    }
    if (table.extreme_flag) {
      out << ',' << ((*table.extreme_flag)[static_cast<std::size_t>(i)] ? 1 : 0);
    }
    out << '\n';
  }
  detail::ensure_parent(path);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write '" + path.string() + "'");
  file << out.str();
}

std::vector<std::string> latent_names(Index d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (Index k = 0; k < d; ++k) names.push_back("z" + std::to_string(k + 1));
  return names;
}

}  // namespace exvi
