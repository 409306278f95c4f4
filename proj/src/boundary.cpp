#include "plotline/boundary.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "plotline/error.hpp"
#include "plotline/eval.hpp"

namespace plotline::boundary {

std::vector<int> BoundaryLabels::interior() const {
  std::vector<int> out;
  for (int m = 1; m < size(); ++m) {
    if (labels[static_cast<std::size_t>(m - 1)] == 1) out.push_back(m);
  }
  return out;
}

double embedding_unit(const EmbeddingSequence& seq, int m) {
  if (m < 2 || m > seq.size()) {
    throw IndexOutOfRange("EU(" + std::to_string(m) + ") undefined for a sequence of " + std::to_string(seq.size()) +
                          " chapters");
  }
  const auto& a = seq.embeddings[static_cast<std::size_t>(m - 1)];
  const auto& b = seq.embeddings[static_cast<std::size_t>(m - 2)];
  if (a.size() != b.size()) throw IndexOutOfRange("embeddings differ in dimension");
  return (a - b).norm();
}

double threshold(const EmbeddingSequence& seq, int m, const BoundaryConfig& config) {
  const int lo = std::max(2, m - config.alpha + 1);
  double sum = 0.0;
  for (int k = lo; k <= m; ++k) sum += embedding_unit(seq, k);
  return config.beta * sum / static_cast<double>(m - lo + 1);
}

BoundaryLabels detect_boundaries(const EmbeddingSequence& seq, const BoundaryConfig& config) {
  const int n = seq.size();
  BoundaryLabels out;
  out.labels.assign(static_cast<std::size_t>(std::max(n, 0)), 0);
  if (n == 0) return out;
  int m = std::max(config.alpha + 1, 2);
  while (m <= n - 1) {
    if (embedding_unit(seq, m + 1) > threshold(seq, m, config)) {
      out.labels[static_cast<std::size_t>(m - 1)] = 1;
      m += std::max(config.safety_distance, 1);
    } else {
      ++m;
    }
  }
  out.labels.back() = 1;
  return out;
}

std::vector<double> default_beta_grid() {
  std::vector<double> grid;
  for (int i = 5; i <= 30; ++i) grid.push_back(static_cast<double>(i) / 10.0);
  return grid;
}

double calibrate_beta(const std::vector<LabeledSequence>& sequences, const BoundaryConfig& config,
                      const std::vector<double>& grid, int window) {
  if (grid.empty()) throw EmptyGrid("beta grid is empty");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  double best_beta = sorted.front();
  double best_f1 = -1.0;
  for (double beta : sorted) {
    BoundaryConfig trial = config;
    trial.beta = beta;
    double total = 0.0;
    for (const auto& s : sequences) {
      const auto pred = detect_boundaries(s.sequence, trial).interior();
      total += eval::boundary_prf(pred, s.gold, window).f1;
    }
    const double mean = sequences.empty() ? 0.0 : total / static_cast<double>(sequences.size());
    if (mean > best_f1) {
      best_f1 = mean;
      best_beta = beta;
    }
  }
  return best_beta;
}

std::vector<PlotSegment> segments_from_labels(const BoundaryLabels& labels) {
  std::vector<PlotSegment> out;
  const int n = labels.size();
  int start = 1;
  for (int m = 1; m <= n; ++m) {
    if (labels.labels[static_cast<std::size_t>(m - 1)] == 1 || m == n) {
      out.push_back({static_cast<int>(out.size()) + 1, start, m});
      start = m + 1;
    }
  }
  return out;
}

BoundaryLabels labels_from_boundaries(int n, const std::vector<int>& boundaries) {
  BoundaryLabels out;
  out.labels.assign(static_cast<std::size_t>(std::max(n, 0)), 0);
  for (int b : boundaries) {
    if (b < 1 || b > n) throw IndexOutOfRange("boundary " + std::to_string(b) + " outside 1.." + std::to_string(n));
    out.labels[static_cast<std::size_t>(b - 1)] = 1;
  }
  if (n > 0) out.labels.back() = 1;
  return out;
}

std::string to_json(const std::string& book_id, const BoundaryLabels& labels, const std::vector<PlotSegment>& segments,
                    const BoundaryConfig& config) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : segments) segs.push_back({{"start", s.start_chapter}, {"end", s.end_chapter}});
  nlohmann::json j = {{"book_id", book_id},
                      {"labels", labels.labels},
                      {"segments", std::move(segs)},
                      {"config", {{"alpha", config.alpha}, {"beta", config.beta}, {"d_d", config.safety_distance}}}};
  return j.dump();
}

}  // namespace plotline::boundary
