#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace plotline::boundary {

struct EmbeddingSequence {
  std::string book_id;
  std::vector<Eigen::VectorXd> embeddings;  // embeddings[m-1] belongs to chapter m

  int size() const { return static_cast<int>(embeddings.size()); }
};

enum class EmbeddingSpace { full, projected_2d };

struct BoundaryConfig {
  int alpha = 5;
  double beta = 1.5;
  int safety_distance = 3;
  EmbeddingSpace space = EmbeddingSpace::full;
};

// labels[m-1] == 1 marks chapter m as the last chapter of a segment.
struct BoundaryLabels {
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
  // Boundary chapters, 1-based, excluding the forced final chapter.
  std::vector<int> interior() const;
};

struct PlotSegment {
  int segment_index = 0;  // 1-based
  int start_chapter = 0;
  int end_chapter = 0;    // inclusive
  int chapter_count() const { return end_chapter - start_chapter + 1; }
  bool operator==(const PlotSegment&) const = default;
};

// Euclidean step from chapter m-1 to chapter m (1-based, 2 <= m <= n).
// Throws IndexOutOfRange.
double embedding_unit(const EmbeddingSequence& seq, int m);

// beta * mean of EU(k) for k in [max(2, m - alpha + 1), m].
double threshold(const EmbeddingSequence& seq, int m, const BoundaryConfig& config);

/// Path-dependent scan. From m = alpha + 1, chapter m closes a segment when
/// EU(m+1) > threshold(m); after a hit the scan resumes at m + d_d. The last
/// chapter is always labelled 1.
BoundaryLabels detect_boundaries(const EmbeddingSequence& seq, const BoundaryConfig& config);

struct LabeledSequence {
  EmbeddingSequence sequence;
  std::vector<int> gold;  // interior boundary chapters
};

std::vector<double> default_beta_grid();

// Grid beta with the best mean window-1 boundary F1; ties go to the smaller
// beta. Throws EmptyGrid.
double calibrate_beta(const std::vector<LabeledSequence>& sequences, const BoundaryConfig& config,
                      const std::vector<double>& grid = default_beta_grid(), int window = 1);

std::vector<PlotSegment> segments_from_labels(const BoundaryLabels& labels);

// Labels for n chapters with the given interior boundary chapters.
BoundaryLabels labels_from_boundaries(int n, const std::vector<int>& boundaries);

std::string to_json(const std::string& book_id, const BoundaryLabels& labels,
                    const std::vector<PlotSegment>& segments, const BoundaryConfig& config);

}  // namespace plotline::boundary
