#include "plotline/corpus.hpp"

#include <regex>
#include <stdexcept>

#include "plotline/error.hpp"
#include "plotline/text_util.hpp"

namespace plotline::corpus {

std::string_view RawChapter::heading() const {
  std::string_view t = title;
  if (!t.empty() && t.back() == '\n') t.remove_suffix(1);
  if (!t.empty() && t.back() == '\r') t.remove_suffix(1);
  return t;
}

std::string RawChapter::source_text() const { return synthetic_title ? body : title + body; }

HeadingPatterns HeadingPatterns::defaults() {
  // std::regex works on bytes, so multi-byte numerals go in alternations
  // rather than bracket expressions.
  const std::string indent = "(?:[ \\t]|\u3000)*";
  const std::string cjk_digit =
      "(?:[0-9]|\uFF10|\uFF11|\uFF12|\uFF13|\uFF14|\uFF15|\uFF16|\uFF17|\uFF18|\uFF19|"
      "\u96F6|\u3007|\u4E00|\u4E8C|\u4E24|\u4E09|\u56DB|\u4E94|\u516D|\u4E03|\u516B|\u4E5D|"
      "\u5341|\u767E|\u5343|\u4E07)";
  return HeadingPatterns{{
      indent + "\u7B2C" + cjk_digit + "+\u7AE0",
      indent + "(?:[Cc]hapter|CHAPTER)[ \\t]+(?:[0-9]+|[IVXLCDM]+)(?![0-9A-Za-z])",
  }};
}

SplitResult split_chapters(std::string_view raw_text, const HeadingPatterns& patterns, std::string_view book_id) {
  if (!text::is_valid_utf8(raw_text)) throw std::invalid_argument("input text is not valid UTF-8");

  std::vector<std::regex> compiled;
  compiled.reserve(patterns.patterns.size());
  for (const auto& p : patterns.patterns) {
    try {
      compiled.emplace_back(p, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw InvalidPattern("heading pattern '" + p + "' does not compile: " + e.what());
    }
  }

  auto is_heading = [&](std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    for (const auto& re : compiled) {
      std::match_results<std::string_view::const_iterator> m;
      if (std::regex_search(line.begin(), line.end(), m, re, std::regex_constants::match_continuous)) return true;
    }
    return false;
  };

  // Start offsets of heading lines, and where each heading line ends (after '\n').
  std::vector<std::pair<std::size_t, std::size_t>> headings;
  std::size_t pos = 0;
  while (pos <= raw_text.size()) {
    const auto nl = raw_text.find('\n', pos);
    const std::size_t line_end = nl == std::string_view::npos ? raw_text.size() : nl;
    const std::size_t next = nl == std::string_view::npos ? raw_text.size() : nl + 1;
    if (line_end > pos && is_heading(raw_text.substr(pos, line_end - pos))) headings.emplace_back(pos, next);
    if (nl == std::string_view::npos) break;
    pos = next;
  }

  SplitResult result;
  if (headings.empty()) {
    RawChapter only;
    only.book_id = std::string(book_id);
    only.chapter_index = 1;
    only.title = std::string(kSyntheticTitle);
    only.body = std::string(raw_text);
    only.synthetic_title = true;
    result.chapters.push_back(std::move(only));
    return result;
  }

  result.preamble = std::string(raw_text.substr(0, headings.front().first));
  for (std::size_t i = 0; i < headings.size(); ++i) {
    const auto [start, body_start] = headings[i];
    const std::size_t end = i + 1 < headings.size() ? headings[i + 1].first : raw_text.size();
    RawChapter ch;
    ch.book_id = std::string(book_id);
    ch.chapter_index = static_cast<int>(i) + 1;
    ch.title = std::string(raw_text.substr(start, body_start - start));
    ch.body = std::string(raw_text.substr(body_start, end - body_start));
    ch.offset = start;
    result.chapters.push_back(std::move(ch));
  }
  return result;
}

std::size_t AnnotatedChapter::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

std::size_t AnnotatedChapter::entity_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.entities.size();
  return n;
}

const std::vector<std::string>& default_noun_tags() {
  static const std::vector<std::string> tags = {"n",    "nh",    "ni", "nl",  "ns",  "nz",  "NOUN",
                                                "PROPN", "NN",   "NNS", "NNP", "NNPS", "NR"};
  return tags;
}

}  // namespace plotline::corpus
