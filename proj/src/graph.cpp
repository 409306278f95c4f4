#include "plotline/graph.hpp"

#include <algorithm>
#include <exception>
#include <queue>
#include <thread>
#include <unordered_map>

#include "plotline/error.hpp"

namespace plotline::graph {

void AdjacencyMatrix::connect(std::size_t i, std::size_t j) {
  if (i == j) return;
  entries_[i * n_ + j] = 1;
  entries_[j * n_ + i] = 1;
}

std::vector<std::pair<std::size_t, std::size_t>> AdjacencyMatrix::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (at(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::size_t AdjacencyMatrix::edge_count() const { return edges().size(); }

std::string span_surface(const corpus::Sentence& sentence, const corpus::EntitySpan& span, std::string_view joiner) {
  std::string out;
  for (int t = span.start; t < span.end; ++t) {
    if (t > span.start) out += joiner;
    out += sentence.tokens[static_cast<std::size_t>(t)].text;
  }
  return out;
}

std::vector<EntityNode> select_entity_nodes(const corpus::AnnotatedChapter& chapter, const NodeSelection& selection) {
  std::vector<EntityNode> nodes;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t s = 0; s < chapter.sentences.size(); ++s) {
    const auto& sent = chapter.sentences[s];
    for (const auto& span : sent.entities) {
      const int head = corpus::span_head(sent, span);
      if (!corpus::is_noun_tag(sent.tokens[static_cast<std::size_t>(head)].pos, selection.noun_tags)) continue;
      std::string surface = span_surface(sent, span, selection.token_joiner);
      if (surface.empty()) continue;
      auto [it, fresh] = index.try_emplace(surface, nodes.size());
      if (fresh) nodes.push_back(EntityNode{std::move(surface), 0, {}});
      auto& node = nodes[it->second];
      ++node.mention_count;
      node.locations.push_back({static_cast<int>(s), span.start, span.end});
    }
  }
  return nodes;
}

std::vector<std::vector<int>> dependency_distances(const corpus::Sentence& sentence, std::size_t sentence_index) {
  if (auto defect = corpus::tree_defect(sentence); !defect.empty()) throw MalformedTree(sentence_index, defect);
  const std::size_t n = sentence.tokens.size();
  std::vector<std::vector<int>> links(n);
  for (std::size_t t = 0; t < n; ++t) {
    const int h = sentence.tokens[t].head;
    if (h == 0) continue;
    links[t].push_back(h - 1);
    links[static_cast<std::size_t>(h - 1)].push_back(static_cast<int>(t));
  }
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (std::size_t src = 0; src < n; ++src) {
    auto& row = dist[src];
    std::queue<int> frontier;
    row[src] = 0;
    frontier.push(static_cast<int>(src));
    while (!frontier.empty()) {
      const int cur = frontier.front();
      frontier.pop();
      for (int next : links[static_cast<std::size_t>(cur)]) {
        if (row[static_cast<std::size_t>(next)] < 0) {
          row[static_cast<std::size_t>(next)] = row[static_cast<std::size_t>(cur)] + 1;
          frontier.push(next);
        }
      }
    }
  }
  return dist;
}

AdjacencyMatrix build_adjacency(const corpus::AnnotatedChapter& chapter, const std::vector<EntityNode>& nodes,
                                int max_path_len) {
  AdjacencyMatrix adj(nodes.size());
  // sentence -> (node, head token) for every mention
  std::vector<std::vector<std::pair<std::size_t, int>>> mentions(chapter.sentences.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (const auto& loc : nodes[i].locations) {
      const auto& sent = chapter.sentences[static_cast<std::size_t>(loc.sentence)];
      const int head = corpus::span_head(sent, corpus::EntitySpan{loc.start, loc.end, {}});
      mentions[static_cast<std::size_t>(loc.sentence)].emplace_back(i, head);
    }
  }
  for (std::size_t s = 0; s < chapter.sentences.size(); ++s) {
    const auto dist = dependency_distances(chapter.sentences[s], s);
    const auto& ms = mentions[s];
    for (std::size_t a = 0; a < ms.size(); ++a) {
      for (std::size_t b = a + 1; b < ms.size(); ++b) {
        if (ms[a].first == ms[b].first) continue;
        const int d = dist[static_cast<std::size_t>(ms[a].second)][static_cast<std::size_t>(ms[b].second)];
        if (d >= 0 && d <= max_path_len) adj.connect(ms[a].first, ms[b].first);
      }
    }
  }
  return adj;
}

Eigen::MatrixXd assemble_features(const std::vector<EntityNode>& nodes, const EmbeddingProvider& provider,
                                  const RankedTerms& topk, int chapter_index, int total_chapters, int k) {
  const auto d_e = static_cast<Eigen::Index>(provider.dim());
  const Eigen::Index d = d_e + k + 1;
  Eigen::MatrixXd features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nodes.size()), d);
  std::unordered_map<std::string, std::size_t> rank;
  for (std::size_t r = 0; r < topk.size() && r < static_cast<std::size_t>(k); ++r) rank.emplace(topk[r].first, r);
  const double chapter_pos =
      total_chapters > 0 ? static_cast<double>(chapter_index) / static_cast<double>(total_chapters) : 0.0;

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    Eigen::VectorXd vec;
    try {
      vec = provider.embed(nodes[i].surface);
    } catch (const MissingEntry& e) {
      throw ProviderFailure(e.what());
    }
    if (vec.size() != d_e) throw ProviderFailure("provider returned a vector of the wrong dimension");
    features.row(row).head(d_e) = vec.transpose();
    if (auto it = rank.find(nodes[i].surface); it != rank.end()) {
      features(row, d_e + static_cast<Eigen::Index>(it->second)) = topk[it->second].second;
    }
    features(row, d - 1) = chapter_pos;
  }
  return features;
}

CorpusStats corpus_stats(const std::vector<corpus::AnnotatedChapter>& book, const NodeSelection& selection) {
  CorpusStats stats;
  stats.tfidf = compute_tfidf(book, selection);
  for (const auto& ch : book) stats.total_chapters = std::max(stats.total_chapters, ch.chapter_index);
  return stats;
}

ChapterGraph build_chapter_graph(const corpus::AnnotatedChapter& chapter, const CorpusStats& stats,
                                 const EmbeddingProvider& provider, const GraphConfig& config) {
  ChapterGraph g;
  g.book_id = chapter.book_id;
  g.chapter_index = chapter.chapter_index;
  g.nodes = select_entity_nodes(chapter, config.selection);
  if (g.nodes.empty()) {
    g.placeholder = true;
    g.nodes.push_back(EntityNode{std::string(kPlaceholderSurface), 0, {}});
    const auto d = static_cast<Eigen::Index>(provider.dim()) + config.top_k + 1;
    g.features = Eigen::MatrixXd::Zero(1, d);
    g.features(0, d - 1) = stats.total_chapters > 0
                               ? static_cast<double>(chapter.chapter_index) / static_cast<double>(stats.total_chapters)
                               : 0.0;
    g.adjacency = AdjacencyMatrix(1);
    return g;
  }
  g.adjacency = build_adjacency(chapter, g.nodes, config.max_path_len);
  const auto topk = top_k_tfidf(stats.tfidf, chapter.chapter_index, config.top_k);
  g.features = assemble_features(g.nodes, provider, topk, chapter.chapter_index, stats.total_chapters, config.top_k);
  return g;
}

std::vector<ChapterGraph> build_corpus_graphs(const std::vector<corpus::AnnotatedChapter>& chapters,
                                              const EmbeddingProvider& provider, const GraphConfig& config,
                                              int threads) {
  // Books are contiguous runs of the same book_id.
  std::vector<std::pair<std::size_t, std::size_t>> books;
  for (std::size_t i = 0; i < chapters.size(); ++i) {
    if (books.empty() || chapters[books.back().first].book_id != chapters[i].book_id) books.emplace_back(i, i);
    books.back().second = i + 1;
  }
  std::vector<CorpusStats> stats;
  std::vector<std::size_t> book_of(chapters.size());
  for (std::size_t b = 0; b < books.size(); ++b) {
    std::vector<corpus::AnnotatedChapter> book(chapters.begin() + static_cast<std::ptrdiff_t>(books[b].first),
                                               chapters.begin() + static_cast<std::ptrdiff_t>(books[b].second));
    stats.push_back(corpus_stats(book, config.selection));
    for (std::size_t i = books[b].first; i < books[b].second; ++i) book_of[i] = b;
  }

  std::vector<ChapterGraph> graphs(chapters.size());
  const std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t i = w; i < chapters.size(); i += workers) {
        graphs[i] = build_chapter_graph(chapters[i], stats[book_of[i]], provider, config);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return graphs;
}

}  // namespace plotline::graph
