#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plotline/graph.hpp"

namespace plotline::graph {

double TfidfTable::score(int chapter_index, const std::string& term) const {
  auto ch = scores.find(chapter_index);
  if (ch == scores.end()) return 0.0;
  auto it = ch->second.find(term);
  return it == ch->second.end() ? 0.0 : it->second;
}

double TfidfTable::idf(const std::string& term) const {
  auto it = document_frequency.find(term);
  const double df = it == document_frequency.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(document_count)) / (1.0 + df)) + 1.0;
}

TfidfTable compute_tfidf(const std::vector<corpus::AnnotatedChapter>& chapters, const NodeSelection& selection) {
  TfidfTable table;
  table.document_count = chapters.size();

  std::map<int, std::map<std::string, int>> mentions;
  for (const auto& ch : chapters) {
    auto [slot, fresh] = mentions.try_emplace(ch.chapter_index);
    if (!fresh) {
      throw std::invalid_argument("duplicate chapter_index " + std::to_string(ch.chapter_index) +
                                  " in tf-idf corpus; pass one book at a time");
    }
    for (const auto& s : ch.sentences) {
      for (const auto& span : s.entities) {
        const int head = corpus::span_head(s, span);
        if (!corpus::is_noun_tag(s.tokens[static_cast<std::size_t>(head)].pos, selection.noun_tags)) continue;
        ++slot->second[span_surface(s, span, selection.token_joiner)];
      }
    }
    for (const auto& [term, count] : slot->second) ++table.document_frequency[term];
  }

  for (const auto& ch : chapters) {
    const double tokens = static_cast<double>(ch.token_count());
    auto& row = table.scores[ch.chapter_index];
    for (const auto& [term, count] : mentions[ch.chapter_index]) {
      row[term] = (static_cast<double>(count) / tokens) * table.idf(term);
    }
  }
  return table;
}

RankedTerms top_k_tfidf(const TfidfTable& table, int chapter_index, int k) {
  RankedTerms ranked;
  auto ch = table.scores.find(chapter_index);
  if (ch == table.scores.end() || k <= 0) return ranked;
  ranked.assign(ch->second.begin(), ch->second.end());
  auto better = [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; };
  const auto keep = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), better);
  ranked.resize(keep);
  return ranked;
}

}  // namespace plotline::graph
