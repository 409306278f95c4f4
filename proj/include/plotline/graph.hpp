#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "plotline/corpus.hpp"
#include "plotline/embedding.hpp"

namespace plotline::graph {

struct TokenLocation {
  int sentence = 0;
  int start = 0;
  int end = 0;  // exclusive
  bool operator==(const TokenLocation&) const = default;
};

struct EntityNode {
  std::string surface;
  int mention_count = 0;
  std::vector<TokenLocation> locations;
};

// Symmetric 0/1 matrix with an empty diagonal.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(std::size_t n) : n_(n), entries_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j] != 0; }
  // Sets (i,j) and (j,i); ignores i == j.
  void connect(std::size_t i, std::size_t j);
  // Edge list with i < j, row-major order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  std::size_t edge_count() const;

  bool operator==(const AdjacencyMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> entries_;
};

struct NodeSelection {
  std::vector<std::string> noun_tags = corpus::default_noun_tags();
  // Glue between token texts when forming a surface form; empty for CJK.
  std::string token_joiner;
};

std::string span_surface(const corpus::Sentence& sentence, const corpus::EntitySpan& span,
                         std::string_view joiner);

std::vector<EntityNode> select_entity_nodes(const corpus::AnnotatedChapter& chapter,
                                            const NodeSelection& selection = {});

// Throws MalformedTree when a sentence's head pointers contain a cycle or point
// outside the sentence.
AdjacencyMatrix build_adjacency(const corpus::AnnotatedChapter& chapter,
                                const std::vector<EntityNode>& nodes, int max_path_len = 2);

// Undirected distances between all token pairs of a sentence's dependency tree
// (-1 when disconnected). Exposed for diagnostics and tests.
std::vector<std::vector<int>> dependency_distances(const corpus::Sentence& sentence,
                                                   std::size_t sentence_index = 0);

/// tf-idf over the chapters of one book, with entity surfaces as terms.
///
///   tf(t, c) = mentions of t in c / tokens in c
///   idf(t)   = ln((1 + N) / (1 + df(t))) + 1
struct TfidfTable {
  std::size_t document_count = 0;
  std::map<std::string, std::size_t> document_frequency;
  std::map<int, std::map<std::string, double>> scores;  // chapter_index -> term -> score

  double score(int chapter_index, const std::string& term) const;
  double idf(const std::string& term) const;
};

TfidfTable compute_tfidf(const std::vector<corpus::AnnotatedChapter>& chapters,
                         const NodeSelection& selection = {});

using RankedTerms = std::vector<std::pair<std::string, double>>;

// Highest scores first; equal scores in ascending byte order of the term.
RankedTerms top_k_tfidf(const TfidfTable& table, int chapter_index, int k = 10);

// Rows are [embedding | k rank slots | chapter_index / total_chapters].
Eigen::MatrixXd assemble_features(const std::vector<EntityNode>& nodes,
                                  const EmbeddingProvider& provider, const RankedTerms& topk,
                                  int chapter_index, int total_chapters, int k = 10);

struct CorpusStats {
  TfidfTable tfidf;
  int total_chapters = 0;
};

CorpusStats corpus_stats(const std::vector<corpus::AnnotatedChapter>& book,
                         const NodeSelection& selection = {});

struct GraphConfig {
  int max_path_len = 2;
  int top_k = 10;
  NodeSelection selection;
};

struct ChapterGraph {
  std::string book_id;
  int chapter_index = 0;
  std::vector<EntityNode> nodes;
  Eigen::MatrixXd features;
  AdjacencyMatrix adjacency;
  bool placeholder = false;

  std::size_t node_count() const { return nodes.size(); }
  Eigen::Index feature_dim() const { return features.cols(); }
};

inline constexpr std::string_view kPlaceholderSurface = "<no-entities>";

ChapterGraph build_chapter_graph(const corpus::AnnotatedChapter& chapter, const CorpusStats& stats,
                                 const EmbeddingProvider& provider, const GraphConfig& config = {});

// Builds every chapter of every book. Chapters of different books never share
// tf-idf statistics. Results keep the input order.
std::vector<ChapterGraph> build_corpus_graphs(const std::vector<corpus::AnnotatedChapter>& chapters,
                                              const EmbeddingProvider& provider,
                                              const GraphConfig& config = {}, int threads = 1);

// One JSON object per chapter: nodes, row-major features, [i,j] edges with i<j.
std::string to_json_line(const ChapterGraph& graph);
ChapterGraph graph_from_json_line(std::string_view line);

std::vector<ChapterGraph> load_graphs(const std::string& path);
void save_graphs(const std::string& path, const std::vector<ChapterGraph>& graphs);

}  // namespace plotline::graph
