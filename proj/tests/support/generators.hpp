// Seeded random instances for property tests.
#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plotline/boundary.hpp"
#include "plotline/corpus.hpp"
#include "plotline/graph.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline double normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -scale, scale);
  return m;
}

// Random dependency tree: each token other than the root attaches to a token
// placed earlier in a random ordering.
inline std::vector<int> random_heads(Rng& rng, int n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> heads(n, 0);
  for (int i = 1; i < n; ++i) heads[order[i]] = order[uniform_int(rng, 0, i - 1)] + 1;
  return heads;
}

inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> v = {"Ada", "Bo", "Cy", "Dee", "Eli", "Fay", "Gus", "Hal", "Ivy", "Jo"};
  return v;
}

inline plotline::corpus::Sentence random_sentence(Rng& rng, int min_tokens = 1, int max_tokens = 9) {
  static const std::vector<std::string> tags = {"NOUN", "PROPN", "VERB", "ADJ", "nh", "v", "ns"};
  plotline::corpus::Sentence s;
  const int n = uniform_int(rng, min_tokens, max_tokens);
  const auto heads = random_heads(rng, n);
  for (int t = 0; t < n; ++t) {
    s.tokens.push_back({vocabulary()[uniform_int(rng, 0, 9)], tags[uniform_int(rng, 0, 6)], heads[t], "dep"});
  }
  const int spans = uniform_int(rng, 0, 3);
  for (int e = 0; e < spans; ++e) {
    const int start = uniform_int(rng, 0, n - 1);
    const int end = std::min(n, start + uniform_int(rng, 1, 2));
    s.entities.push_back({start, end, "ENT"});
  }
  return s;
}

inline plotline::corpus::AnnotatedChapter random_chapter(Rng& rng, const std::string& book, int index,
                                                         int max_sentences = 5) {
  plotline::corpus::AnnotatedChapter ch;
  ch.book_id = book;
  ch.chapter_index = index;
  const int n = uniform_int(rng, 1, max_sentences);
  for (int s = 0; s < n; ++s) ch.sentences.push_back(random_sentence(rng));
  return ch;
}

inline std::vector<plotline::corpus::AnnotatedChapter> random_book(Rng& rng, const std::string& book, int chapters) {
  std::vector<plotline::corpus::AnnotatedChapter> out;
  for (int i = 1; i <= chapters; ++i) out.push_back(random_chapter(rng, book, i));
  return out;
}

inline plotline::graph::AdjacencyMatrix random_adjacency(Rng& rng, int n, double p) {
  plotline::graph::AdjacencyMatrix a(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (uniform(rng, 0, 1) < p) a.connect(i, j);
  return a;
}

inline plotline::graph::ChapterGraph random_graph(Rng& rng, int n, int d, double p = 0.4) {
  plotline::graph::ChapterGraph g;
  g.book_id = "g";
  for (int i = 0; i < n; ++i) g.nodes.push_back({"n" + std::to_string(i), 1, {}});
  g.features = random_matrix(rng, n, d);
  g.adjacency = random_adjacency(rng, n, p);
  return g;
}

// Two equal communities; features are i.i.d. Gaussian and carry no label.
inline plotline::graph::ChapterGraph two_community_graph(Rng& rng, int n, int d, double p_in, double p_out) {
  plotline::graph::ChapterGraph g;
  g.book_id = "community";
  for (int i = 0; i < n; ++i) g.nodes.push_back({"v" + std::to_string(i), 1, {}});
  g.features.resize(n, d);
  for (Eigen::Index i = 0; i < g.features.size(); ++i) g.features.data()[i] = normal(rng);
  g.adjacency = plotline::graph::AdjacencyMatrix(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const bool same = (i < n / 2) == (j < n / 2);
      if (uniform(rng, 0, 1) < (same ? p_in : p_out)) g.adjacency.connect(i, j);
    }
  return g;
}

inline plotline::graph::ChapterGraph permuted(const plotline::graph::ChapterGraph& g, const std::vector<int>& perm) {
  // Row i of the result is row perm[i] of the input.
  plotline::graph::ChapterGraph out = g;
  const int n = static_cast<int>(perm.size());
  out.adjacency = plotline::graph::AdjacencyMatrix(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.features.row(i) = g.features.row(perm[i]);
    out.nodes[i] = g.nodes[perm[i]];
    for (int j = 0; j < n; ++j)
      if (g.adjacency.at(perm[i], perm[j])) out.adjacency.connect(i, j);
  }
  return out;
}

struct Planted {
  plotline::boundary::EmbeddingSequence sequence;
  std::vector<int> gold;  // interior boundaries
};

// `clusters` runs of `per_cluster` chapters around means whose pairwise
// distances are at least `separation` times the intra-cluster std.
inline Planted planted_clusters(Rng& rng, int clusters, int per_cluster, int dim, double separation, double sigma = 1.0) {
  std::vector<Eigen::VectorXd> means;
  const double box = separation * sigma * clusters;
  while (static_cast<int>(means.size()) < clusters) {
    Eigen::VectorXd c(dim);
    for (int k = 0; k < dim; ++k) c(k) = uniform(rng, -box, box);
    bool ok = true;
    for (const auto& m : means) ok = ok && (m - c).norm() >= separation * sigma;
    if (ok) means.push_back(c);
  }
  Planted p;
  p.sequence.book_id = "planted";
  for (int c = 0; c < clusters; ++c) {
    for (int i = 0; i < per_cluster; ++i) {
      Eigen::VectorXd e(dim);
      for (int k = 0; k < dim; ++k) e(k) = means[c](k) + sigma * normal(rng);
      p.sequence.embeddings.push_back(e);
    }
    if (c + 1 < clusters) p.gold.push_back((c + 1) * per_cluster);
  }
  return p;
}

inline std::vector<int> random_permutation(Rng& rng, int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

inline std::vector<int> random_subset(Rng& rng, int lo, int hi, int max_size) {
  std::vector<int> all(hi - lo + 1);
  std::iota(all.begin(), all.end(), lo);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min<std::size_t>(all.size(), uniform_int(rng, 0, max_size)));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace gen
