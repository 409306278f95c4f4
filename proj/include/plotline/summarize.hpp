#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plotline/boundary.hpp"
#include "plotline/corpus.hpp"
#include "plotline/graph.hpp"
#include "plotline/llm.hpp"

namespace plotline::summarize {

// Token counts are estimated as ceil(code points / chars_per_token).
struct TokenProxy {
  double chars_per_token = 2.0;
  std::size_t estimate(std::string_view text) const;
  std::size_t char_budget(std::size_t tokens) const;
};

std::string sentence_text(const corpus::Sentence& sentence, std::string_view joiner);
std::string chapter_marker(int chapter_index);

struct CompressOptions {
  TokenProxy proxy;
  graph::NodeSelection selection;
};

/// Fits a segment's chapters into `budget_tokens`. If the raw chapter texts
/// fit they pass through untouched; otherwise each chapter gets an equal share
/// filled with its highest tf-idf sentences, emitted in document order.
std::string compress_segment(const std::vector<corpus::AnnotatedChapter>& chapters, const graph::TfidfTable& tfidf,
                             std::size_t budget_tokens, const CompressOptions& options = {});

enum class Source { llm, fallback };

struct SegmentSummary {
  int segment_index = 0;
  std::string title;
  std::string summary;
  Source source = Source::fallback;
  int start_chapter = 0;
  int end_chapter = 0;
  bool parse_fallback = false;
};

std::string range_text(int start, int end);  // "chapters 4–9"

// Substitutes {book}, {range} and {text}.
std::string render_template(std::string_view tmpl, std::string_view book, std::string_view range,
                            std::string_view text);

std::string_view default_segment_template();
std::string_view default_synopsis_template();

struct ParsedResponse {
  std::string title;
  std::string summary;
  bool parse_fallback = false;
};

// Expects a "TITLE:" line followed by the body. Anything else becomes the
// summary with its first 20 code points as the title.
ParsedResponse parse_response(std::string_view response);

SegmentSummary summarize_segment(llm::Completer& completer, const std::string& book_id,
                                 const boundary::PlotSegment& segment, const std::string& compressed_text,
                                 std::string_view tmpl = default_segment_template());

/// Offline summary: title from the two entities with the largest summed
/// tf-idf over the segment, summary from its three best sentences.
SegmentSummary fallback_summarize(const boundary::PlotSegment& segment,
                                  const std::vector<corpus::AnnotatedChapter>& chapters,
                                  const graph::TfidfTable& tfidf, const graph::NodeSelection& selection = {});

struct OutlineMetadata {
  std::string model;
  std::string config_hash;
  std::optional<std::string> timestamp;
};

struct Outline {
  std::string book_id;
  std::optional<SegmentSummary> preface;  // global synopsis, segment_index 0
  std::vector<SegmentSummary> entries;
  OutlineMetadata metadata;
};

struct GlobalPass {
  llm::Completer* completer = nullptr;
  std::string_view tmpl = default_synopsis_template();
};

// Sorts by segment_index and requires indices 1..N with no gaps
// (MissingSegment otherwise). With a global pass, the concatenated summaries
// are rewritten into a synopsis stored as the preface.
Outline assemble_outline(const std::string& book_id, std::vector<SegmentSummary> summaries,
                         OutlineMetadata metadata = {}, std::optional<GlobalPass> global = std::nullopt,
                         std::optional<std::size_t> expected_segments = std::nullopt);

std::string to_markdown(const std::vector<Outline>& outlines);
std::string to_json(const std::vector<Outline>& outlines);
std::vector<Outline> outlines_from_json(std::string_view json);

}  // namespace plotline::summarize
