#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "plotline/error.hpp"

namespace plotline::eval {

struct BoundaryReference {
  std::string book_id;
  std::vector<int> boundaries;  // sorted, unique
};

// Reads `{ "book_id", "boundaries" }` objects: a single object, an array of
// them, or one per line.
std::vector<BoundaryReference> load_references(const std::string& path);

struct BoundaryScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  int matches = 0;
};

double harmonic_f1(double precision, double recall);

/// One-to-one matching of predicted to gold boundaries within +/- window.
/// Predictions are swept in ascending order and each takes the earliest
/// unmatched gold boundary inside its window; this yields a maximum matching.
/// accuracy = matches / max(|pred|, |gold|). Both empty scores 1 everywhere.
BoundaryScores boundary_prf(std::vector<int> pred, std::vector<int> gold, int window = 1);

// Number of pairs ordered differently by the two sequences, O(n log n).
std::int64_t count_inversions(std::vector<int> sequence);

/// Kendall tau-a between two orderings of the same items.
/// Throws MismatchedItems if they are not permutations of one another or n < 2.
template <typename T>
double kendall_tau(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) throw MismatchedItems("rankings have different lengths");
  if (a.size() < 2) throw MismatchedItems("kendall tau needs at least two items");
  std::map<T, int> position;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!position.emplace(b[i], static_cast<int>(i)).second) throw MismatchedItems("duplicate item in ranking");
  }
  std::vector<int> mapped;
  mapped.reserve(a.size());
  for (const auto& item : a) {
    auto it = position.find(item);
    if (it == position.end()) throw MismatchedItems("item missing from second ranking");
    mapped.push_back(it->second);
  }
  std::vector<int> check = mapped;
  std::sort(check.begin(), check.end());
  if (std::adjacent_find(check.begin(), check.end()) != check.end()) {
    throw MismatchedItems("duplicate item in ranking");
  }
  const double n = static_cast<double>(a.size());
  const double pairs = n * (n - 1.0) / 2.0;
  const double discordant = static_cast<double>(count_inversions(std::move(mapped)));
  return (pairs - 2.0 * discordant) / pairs;
}

struct BookMetrics {
  std::string book_id;
  BoundaryScores scores;
  double tau = 1.0;
};

struct MetricReport {
  std::vector<BookMetrics> books;
  int window = 1;

  BookMetrics macro() const;  // arithmetic means; all zero for no books
};

std::string report_csv(const MetricReport& report);
std::string report_table(const MetricReport& report);
// Writes <stem>.csv and <stem>.txt. Throws IoFailure.
void emit_report(const MetricReport& report, const std::string& csv_path, const std::string& table_path);

}  // namespace plotline::eval
