#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace plotline::corpus {

/// One chapter cut out of a raw book text.
///
/// `title` is the matched heading line including its line terminator, so
/// `preamble + title_1 + body_1 + ... + title_n + body_n` reproduces the input.
/// When no heading matches, a single chapter is produced whose title is
/// synthetic: it does not occur in the source and `source_text()` omits it.
struct RawChapter {
  std::string book_id;
  int chapter_index = 0;
  std::string title;
  std::string body;
  std::size_t offset = 0;  // byte offset of the title in the input
  bool synthetic_title = false;

  // Heading line without its terminator.
  std::string_view heading() const;
  // Bytes this chapter occupies in the input text.
  std::string source_text() const;
};

struct SplitResult {
  std::string preamble;
  std::vector<RawChapter> chapters;
};

/// ECMAScript patterns tried at the start of every line. A line is a heading
/// when any pattern matches a prefix of it.
struct HeadingPatterns {
  std::vector<std::string> patterns;

  // "第<number>章" with Arabic or Chinese numerals, and "Chapter <number>".
  static HeadingPatterns defaults();
};

inline constexpr std::string_view kSyntheticTitle = "Full text";

// Throws InvalidPattern if a pattern fails to compile.
SplitResult split_chapters(std::string_view raw_text, const HeadingPatterns& patterns,
                           std::string_view book_id = "");

struct Token {
  std::string text;
  std::string pos;
  int head = 0;  // 0 = root, otherwise 1-based index into the sentence
  std::string deprel;
};

struct EntitySpan {
  int start = 0;  // token index, inclusive
  int end = 0;    // token index, exclusive
  std::string label;
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<EntitySpan> entities;
};

struct AnnotatedChapter {
  std::string book_id;
  int chapter_index = 0;
  std::vector<Sentence> sentences;
  std::string raw_text;

  std::size_t token_count() const;
  std::size_t entity_count() const;
};

// One JSON record per line. Throws ParseError, SchemaError or OrderError.
std::vector<AnnotatedChapter> parse_annotations(std::istream& in);
std::vector<AnnotatedChapter> load_annotations(const std::string& path);

std::string to_json_line(const AnnotatedChapter& chapter);

struct ChapterCounts {
  int chapter_index = 0;
  std::size_t tokens = 0;
  std::size_t entities = 0;
  std::size_t noun_entities = 0;
};

struct Issue {
  std::string book_id;
  int chapter_index = 0;
  std::string message;
};

struct ValidationReport {
  std::map<std::string, std::vector<ChapterCounts>> books;
  std::vector<Issue> violations;
  std::vector<Issue> warnings;

  bool ok() const { return violations.empty(); }
};

// Tags counted as nouns for node selection: LTP (n, nh, ni, nl, ns, nz),
// Universal Dependencies (NOUN, PROPN) and Penn/CTB (NN*, NR).
const std::vector<std::string>& default_noun_tags();

bool is_noun_tag(std::string_view tag, const std::vector<std::string>& noun_tags);

// Index of the syntactic head of a span: the first token of the span whose
// dependency head lies outside it (falls back to the last token).
int span_head(const Sentence& sentence, const EntitySpan& span);

// Empty when the head pointers form a tree; otherwise a description of the defect.
std::string tree_defect(const Sentence& sentence);

ValidationReport validate_corpus(const std::vector<AnnotatedChapter>& chapters,
                                 const std::vector<std::string>& noun_tags = default_noun_tags());

std::string to_json(const ValidationReport& report);

}  // namespace plotline::corpus
