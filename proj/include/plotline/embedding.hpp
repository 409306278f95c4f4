#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace plotline::graph {

/// Source of entity-name vectors. Either backed by a precomputed table
/// (`surface<TAB>v1 v2 ...` per line) or by a deterministic fallback that
/// derives a unit vector from a stable hash of the surface string. A table
/// provider may also enable the fallback for surfaces it does not contain.
///
/// Lookups are const and safe to run concurrently.
class EmbeddingProvider {
 public:
  static EmbeddingProvider fallback(std::size_t dim = 32);
  static EmbeddingProvider from_table(std::unordered_map<std::string, Eigen::VectorXd> table,
                                      bool fallback_for_missing = false);
  // Throws ParseError on malformed lines or inconsistent dimensions.
  static EmbeddingProvider load_table(const std::string& path, bool fallback_for_missing = false);

  std::size_t dim() const { return dim_; }
  bool has_fallback() const { return fallback_; }
  bool contains(const std::string& surface) const { return table_.count(surface) != 0; }

  // Throws MissingEntry when table-backed, the surface is absent and the
  // fallback is disabled.
  Eigen::VectorXd embed(const std::string& surface) const;

 private:
  std::unordered_map<std::string, Eigen::VectorXd> table_;
  std::size_t dim_ = 0;
  bool fallback_ = false;
};

// Unit-norm vector from the FNV-1a hash of `surface`. Bit-identical on every
// platform: uses the standard-specified mt19937_64 engine and a fixed
// integer-to-double mapping instead of library distributions.
Eigen::VectorXd hashed_unit_vector(std::string_view surface, std::size_t dim);

inline Eigen::VectorXd embed_entity(const EmbeddingProvider& provider, const std::string& surface) {
  return provider.embed(surface);
}

}  // namespace plotline::graph
