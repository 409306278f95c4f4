#include "plotline/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plotline/text_util.hpp"
#include "prompt_templates.hpp"

namespace plotline::summarize {

std::size_t TokenProxy::estimate(std::string_view text) const {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(text::codepoint_count(text)) / chars_per_token));
}

std::size_t TokenProxy::char_budget(std::size_t tokens) const {
  return static_cast<std::size_t>(std::floor(static_cast<double>(tokens) * chars_per_token));
}

namespace {

// Closing punctuation takes no joiner in front of it.
bool attaches_left(std::string_view token) {
  return !token.empty() && token.find_first_not_of(".,;:!?)]}'\"") == std::string_view::npos;
}

}  // namespace

std::string sentence_text(const corpus::Sentence& sentence, std::string_view joiner) {
  std::string out;
  for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
    if (t > 0 && !attaches_left(sentence.tokens[t].text)) out += joiner;
    out += sentence.tokens[t].text;
  }
  return out;
}

std::string chapter_marker(int chapter_index) { return "[Chapter " + std::to_string(chapter_index) + "]\n"; }

namespace {

// Summed tf-idf of the noun entities mentioned in each sentence.
std::vector<double> sentence_scores(const corpus::AnnotatedChapter& ch, const graph::TfidfTable& tfidf,
                                    const graph::NodeSelection& selection) {
  std::vector<double> scores;
  for (const auto& s : ch.sentences) {
    double total = 0.0;
    for (const auto& span : s.entities) {
      const int head = corpus::span_head(s, span);
      if (!corpus::is_noun_tag(s.tokens[static_cast<std::size_t>(head)].pos, selection.noun_tags)) continue;
      total += tfidf.score(ch.chapter_index, graph::span_surface(s, span, selection.token_joiner));
    }
    scores.push_back(total);
  }
  return scores;
}

// Indices sorted by descending score, document order among equals.
std::vector<std::size_t> rank_desc(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

std::string compress_segment(const std::vector<corpus::AnnotatedChapter>& chapters, const graph::TfidfTable& tfidf,
                             std::size_t budget_tokens, const CompressOptions& options) {
  std::string full;
  for (const auto& ch : chapters) full += chapter_marker(ch.chapter_index) + ch.raw_text + "\n";
  if (options.proxy.estimate(full) <= budget_tokens) return full;

  const std::size_t budget_chars = options.proxy.char_budget(budget_tokens);
  std::size_t marker_chars = 0;
  for (const auto& ch : chapters) marker_chars += text::codepoint_count(chapter_marker(ch.chapter_index));
  if (marker_chars >= budget_chars || chapters.empty()) {
    std::string markers;
    for (const auto& ch : chapters) markers += chapter_marker(ch.chapter_index);
    return std::string(text::codepoint_prefix(markers, budget_chars));
  }
  const std::size_t share = (budget_chars - marker_chars) / chapters.size();

  std::string out;
  for (const auto& ch : chapters) {
    const auto scores = sentence_scores(ch, tfidf, options.selection);
    std::vector<bool> chosen(ch.sentences.size(), false);
    std::size_t used = 0;
    for (std::size_t idx : rank_desc(scores)) {
      const std::size_t cost = text::codepoint_count(sentence_text(ch.sentences[idx], options.selection.token_joiner)) + 1;
      if (used + cost <= share) {
        chosen[idx] = true;
        used += cost;
      }
    }
    out += chapter_marker(ch.chapter_index);
    for (std::size_t s = 0; s < ch.sentences.size(); ++s) {
      if (chosen[s]) out += sentence_text(ch.sentences[s], options.selection.token_joiner) + "\n";
    }
  }
  return out;
}

std::string range_text(int start, int end) {
  return "chapters " + std::to_string(start) + "–" + std::to_string(end);
}

std::string render_template(std::string_view tmpl, std::string_view book, std::string_view range, std::string_view body) {
  std::string out;
  out.reserve(tmpl.size() + body.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const auto key = tmpl.substr(i + 1, close - i - 1);
        if (key == "book" || key == "range" || key == "text") {
          out += key == "book" ? book : key == "range" ? range : body;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string_view default_segment_template() { return prompts::segment_summary; }
std::string_view default_synopsis_template() { return prompts::global_synopsis; }

ParsedResponse parse_response(std::string_view response) {
  ParsedResponse out;
  const std::string_view trimmed = text::trim(response);
  const auto nl = trimmed.find('\n');
  const std::string_view first = text::trim(trimmed.substr(0, nl));
  for (std::string_view prefix : {std::string_view("TITLE:"), std::string_view("TITLE：")}) {
    if (first.substr(0, prefix.size()) == prefix) {
      out.title = std::string(text::trim(first.substr(prefix.size())));
      out.summary = nl == std::string_view::npos ? std::string() : std::string(text::trim(trimmed.substr(nl + 1)));
      if (!out.title.empty()) return out;
    }
  }
  out.parse_fallback = true;
  out.summary = std::string(trimmed);
  out.title = std::string(text::trim(text::codepoint_prefix(trimmed, 20)));
  return out;
}

SegmentSummary summarize_segment(llm::Completer& completer, const std::string& book_id,
                                 const boundary::PlotSegment& segment, const std::string& compressed_text,
                                 std::string_view tmpl) {
  const std::string prompt =
      render_template(tmpl, book_id, range_text(segment.start_chapter, segment.end_chapter), compressed_text);
  const auto parsed = parse_response(completer.complete(prompt));
  SegmentSummary s;
  s.segment_index = segment.segment_index;
  s.start_chapter = segment.start_chapter;
  s.end_chapter = segment.end_chapter;
  s.source = Source::llm;
  s.title = parsed.title;
  s.summary = parsed.summary;
  s.parse_fallback = parsed.parse_fallback;
  if (s.title.empty()) {
    s.title = "Chapters " + std::to_string(segment.start_chapter) + "–" + std::to_string(segment.end_chapter);
  }
  return s;
}

SegmentSummary fallback_summarize(const boundary::PlotSegment& segment,
                                  const std::vector<corpus::AnnotatedChapter>& chapters,
                                  const graph::TfidfTable& tfidf, const graph::NodeSelection& selection) {
  SegmentSummary out;
  out.segment_index = segment.segment_index;
  out.start_chapter = segment.start_chapter;
  out.end_chapter = segment.end_chapter;
  out.source = Source::fallback;

  std::vector<const corpus::AnnotatedChapter*> in_range;
  for (const auto& ch : chapters) {
    if (ch.chapter_index >= segment.start_chapter && ch.chapter_index <= segment.end_chapter) in_range.push_back(&ch);
  }
  std::sort(in_range.begin(), in_range.end(),
            [](const auto* a, const auto* b) { return a->chapter_index < b->chapter_index; });

  std::map<std::string, double> totals;
  for (const auto* ch : in_range) {
    if (auto row = tfidf.scores.find(ch->chapter_index); row != tfidf.scores.end()) {
      for (const auto& [term, score] : row->second) totals[term] += score;
    }
  }

  // Every sentence of the segment in document order, with its score.
  std::vector<std::string> sentences;
  std::vector<double> scores;
  for (const auto* ch : in_range) {
    const auto sc = sentence_scores(*ch, tfidf, selection);
    for (std::size_t s = 0; s < ch->sentences.size(); ++s) {
      sentences.push_back(sentence_text(ch->sentences[s], selection.token_joiner));
      scores.push_back(sc[s]);
    }
  }

  if (totals.empty()) {
    out.title = "Chapters " + std::to_string(segment.start_chapter) + "–" + std::to_string(segment.end_chapter);
    out.summary = sentences.empty() ? std::string() : sentences.front();
    return out;
  }

  std::vector<std::pair<std::string, double>> ranked(totals.begin(), totals.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  out.title = ranked[0].first;
  if (ranked.size() > 1) out.title += " & " + ranked[1].first;

  auto order = rank_desc(scores);
  order.resize(std::min<std::size_t>(3, order.size()));
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0) out.summary += " ";
    out.summary += sentences[order[i]];
  }
  return out;
}

}  // namespace plotline::summarize
