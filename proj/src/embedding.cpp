#include "plotline/embedding.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "plotline/error.hpp"
#include "plotline/text_util.hpp"

namespace plotline::graph {

Eigen::VectorXd hashed_unit_vector(std::string_view surface, std::size_t dim) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  if (dim == 0) return v;
  std::mt19937_64 engine(text::fnv1a64(surface));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // 53 high bits -> [0, 1) -> [-1, 1)
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    v[i] = 2.0 * u - 1.0;
  }
  const double norm = v.norm();
  if (norm == 0.0) {
    v.setZero();
    v[0] = 1.0;
    return v;
  }
  return v / norm;
}

EmbeddingProvider EmbeddingProvider::fallback(std::size_t dim) {
  EmbeddingProvider p;
  p.dim_ = dim;
  p.fallback_ = true;
  return p;
}

EmbeddingProvider EmbeddingProvider::from_table(std::unordered_map<std::string, Eigen::VectorXd> table,
                                                bool fallback_for_missing) {
  EmbeddingProvider p;
  p.fallback_ = fallback_for_missing;
  for (const auto& [surface, vec] : table) {
    if (p.dim_ == 0) p.dim_ = static_cast<std::size_t>(vec.size());
    if (static_cast<std::size_t>(vec.size()) != p.dim_) {
      throw ProviderFailure("embedding for '" + surface + "' has dimension " + std::to_string(vec.size()) +
                            ", expected " + std::to_string(p.dim_));
    }
  }
  p.table_ = std::move(table);
  return p;
}

EmbeddingProvider EmbeddingProvider::load_table(const std::string& path, bool fallback_for_missing) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open embedding table " + path);
  std::unordered_map<std::string, Eigen::VectorXd> table;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw ParseError(line_no, "expected 'surface<TAB>values'");
    std::vector<double> values;
    std::istringstream fields(line.substr(tab + 1));
    std::string field;
    while (fields >> field) {
      try {
        values.push_back(text::parse_double(field));
      } catch (const Error&) {
        throw ParseError(line_no, "bad number '" + field + "'");
      }
    }
    if (values.empty()) throw ParseError(line_no, "no vector values");
    if (dim == 0) dim = values.size();
    if (values.size() != dim) {
      throw ParseError(line_no, "vector has " + std::to_string(values.size()) + " values, expected " + std::to_string(dim));
    }
    table[line.substr(0, tab)] = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  return from_table(std::move(table), fallback_for_missing);
}

Eigen::VectorXd EmbeddingProvider::embed(const std::string& surface) const {
  if (auto it = table_.find(surface); it != table_.end()) return it->second;
  if (!fallback_) throw MissingEntry("no embedding for '" + surface + "'");
  return hashed_unit_vector(surface, dim_);
}

}  // namespace plotline::graph
