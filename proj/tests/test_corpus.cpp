#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "generators.hpp"
#include "plotline/corpus.hpp"
#include "plotline/error.hpp"

using namespace plotline;
using namespace plotline::corpus;

namespace {

std::string joined(const SplitResult& r) {
  std::string out = r.preamble;
  for (const auto& ch : r.chapters) out += ch.source_text();
  return out;
}

const HeadingPatterns kDefaults = HeadingPatterns::defaults();

}  // namespace

TEST(Split, EmptyInputGivesOneSyntheticChapter) {
  auto r = split_chapters("", kDefaults);
  ASSERT_EQ(r.chapters.size(), 1u);
  EXPECT_TRUE(r.chapters[0].synthetic_title);
  EXPECT_EQ(r.chapters[0].body, "");
  EXPECT_EQ(r.chapters[0].chapter_index, 1);
  EXPECT_EQ(joined(r), "");
}

TEST(Split, ChineseHeadings) {
  const std::string text = "第1章 A\nxx\n第2章 B\nyy\n第3章 C\nzz";
  auto r = split_chapters(text, kDefaults, "b");
  ASSERT_EQ(r.chapters.size(), 3u);
  EXPECT_EQ(r.chapters[0].heading(), "第1章 A");
  EXPECT_EQ(r.chapters[0].body, "xx\n");
  EXPECT_EQ(r.chapters[1].body, "yy\n");
  EXPECT_EQ(r.chapters[2].body, "zz");
  EXPECT_EQ(r.chapters[2].chapter_index, 3);
  EXPECT_EQ(r.chapters[1].book_id, "b");
  EXPECT_EQ(joined(r), text);
}

TEST(Split, ChineseNumeralHeadings) {
  const std::string text = "序\n第一章 开端\n甲\n第十二章 终\n乙\n";
  auto r = split_chapters(text, kDefaults);
  ASSERT_EQ(r.chapters.size(), 2u);
  EXPECT_EQ(r.preamble, "序\n");
  EXPECT_EQ(r.chapters[1].heading(), "第十二章 终");
  EXPECT_EQ(joined(r), text);
}

TEST(Split, MidLineMentionsAreIgnored) {
  std::string text = "Front matter.\n";
  for (int i = 1; i <= 12; ++i) {
    text += "Chapter " + std::to_string(i) + "\n";
    text += "Body text; see Chapter 3 for context.\nAs Chapter 7 explained, it rained.\n";
  }
  auto r = split_chapters(text, kDefaults);
  ASSERT_EQ(r.chapters.size(), 12u);
  EXPECT_EQ(r.preamble, "Front matter.\n");
  for (int i = 0; i < 12; ++i) EXPECT_EQ(r.chapters[i].heading(), "Chapter " + std::to_string(i + 1));
  EXPECT_EQ(joined(r), text);
}

TEST(Split, NumberMustEndTheWord) {
  auto r = split_chapters("Chapter 12b\nnot a heading\nChapters 3\n", kDefaults);
  ASSERT_EQ(r.chapters.size(), 1u);
  EXPECT_TRUE(r.chapters[0].synthetic_title);
}

TEST(Split, CrlfLineEndingsRoundTrip) {
  const std::string text = "Chapter 1\r\nab\r\nChapter 2\r\ncd\r\n";
  auto r = split_chapters(text, kDefaults);
  ASSERT_EQ(r.chapters.size(), 2u);
  EXPECT_EQ(r.chapters[0].heading(), "Chapter 1");
  EXPECT_EQ(r.chapters[0].body, "ab\r\n");
  EXPECT_EQ(joined(r), text);
}

TEST(Split, InvalidPatternAndEncoding) {
  EXPECT_THROW(split_chapters("x", HeadingPatterns{{"(unclosed"}}), InvalidPattern);
  EXPECT_THROW(split_chapters("\xFF\xFE", kDefaults), std::invalid_argument);
}

TEST(Split, CustomPatterns) {
  auto r = split_chapters("== One\na\n== Two\nb\n", HeadingPatterns{{"== "}});
  ASSERT_EQ(r.chapters.size(), 2u);
  EXPECT_EQ(r.chapters[1].body, "b\n");
}

// Random documents: round trip, increasing offsets, and re-splitting the
// concatenated output finds the same boundaries.
TEST(SplitProperty, RoundTripMonotoneIdempotent) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> pieces = {"Chapter 1", "Chapter 22", "第3章", "第十章 标题", "text", "see Chapter 4",
                                           "", "  Chapter 9 indented", "\r", "中文内容", "CHAPTER IV"};
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const int lines = static_cast<int>(rng() % 12);
    for (int l = 0; l < lines; ++l) {
      text += pieces[rng() % pieces.size()];
      if (rng() % 5 != 0) text += "\n";
    }
    auto r = split_chapters(text, kDefaults);
    ASSERT_EQ(joined(r), text);
    for (std::size_t i = 0; i < r.chapters.size(); ++i) {
      EXPECT_EQ(r.chapters[i].chapter_index, static_cast<int>(i) + 1);
      if (i > 0) EXPECT_GT(r.chapters[i].offset, r.chapters[i - 1].offset);
    }
    auto again = split_chapters(joined(r), kDefaults);
    ASSERT_EQ(again.chapters.size(), r.chapters.size());
    for (std::size_t i = 0; i < r.chapters.size(); ++i) EXPECT_EQ(again.chapters[i].offset, r.chapters[i].offset);
  }
}

namespace {

std::string record(const std::string& book, int index, const std::string& sentences) {
  return R"({"book_id":")" + book + R"(","chapter_index":)" + std::to_string(index) +
         R"(,"raw_text":"t","sentences":)" + sentences + "}\n";
}

const std::string kSentence =
    R"([{"tokens":[{"text":"A","pos":"PROPN","head":2,"deprel":"nsubj"},)"
    R"({"text":"attacked","pos":"VERB","head":0,"deprel":"root"},)"
    R"({"text":"B","pos":"PROPN","head":2,"deprel":"obj"}],)"
    R"("entities":[{"start":0,"end":1,"label":"PER"},{"start":2,"end":3,"label":"PER"}]}])";

std::vector<AnnotatedChapter> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_annotations(in);
}

}  // namespace

TEST(Annotations, WellFormedFile) {
  auto chs = parse(record("b", 1, kSentence) + record("b", 2, kSentence));
  ASSERT_EQ(chs.size(), 2u);
  EXPECT_EQ(chs[1].chapter_index, 2);
  EXPECT_EQ(chs[0].sentences[0].tokens[1].text, "attacked");
  EXPECT_EQ(chs[0].token_count(), 3u);
  EXPECT_EQ(chs[0].entity_count(), 2u);
}

TEST(Annotations, UnknownFieldsIgnoredAndRoundTrip) {
  auto chs = parse(R"({"extra":1,"book_id":"b","chapter_index":1,"raw_text":"t","sentences":[]})" "\n");
  ASSERT_EQ(chs.size(), 1u);
  auto back = parse(to_json_line(chs[0]) + "\n");
  EXPECT_EQ(back[0].book_id, "b");
  auto full = parse(record("b", 1, kSentence));
  auto again = parse(to_json_line(full[0]) + "\n");
  EXPECT_EQ(again[0].sentences[0].entities[1].start, 2);
}

TEST(Annotations, EntityOutOfRange) {
  const std::string bad = R"([{"tokens":[{"text":"A","pos":"n","head":0,"deprel":"root"}],)"
                          R"("entities":[{"start":0,"end":2,"label":"X"}]}])";
  try {
    parse(record("b", 1, bad));
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("entity span out of range"), std::string::npos);
  }
}

TEST(Annotations, GapIsOrderError) {
  EXPECT_THROW(parse(record("b", 1, "[]") + record("b", 3, "[]")), OrderError);
  EXPECT_THROW(parse(record("b", 2, "[]")), OrderError);
  EXPECT_THROW(parse(record("b", 1, "[]") + record("a", 1, "[]")), OrderError);
  EXPECT_NO_THROW(parse(record("a", 1, "[]") + record("b", 1, "[]")));
}

TEST(Annotations, ParseErrorCarriesLine) {
  try {
    parse(record("b", 1, "[]") + "{not json\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Annotations, MissingFieldAndBadHead) {
  EXPECT_THROW(parse(R"({"book_id":"b","chapter_index":1,"sentences":[]})" "\n"), SchemaError);
  const std::string bad_head = R"([{"tokens":[{"text":"A","pos":"n","head":5,"deprel":"x"}],"entities":[]}])";
  EXPECT_THROW(parse(record("b", 1, bad_head)), SchemaError);
}

TEST(Validate, CountsWarningsAndGrouping) {
  auto chs = parse(record("a", 1, kSentence) + record("a", 2, "[]") + record("b", 1, kSentence) +
                   record("c", 1, kSentence));
  auto rep = validate_corpus(chs);
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.books.size(), 3u);
  ASSERT_EQ(rep.books["a"].size(), 2u);
  EXPECT_EQ(rep.books["a"][0].tokens, 3u);
  EXPECT_EQ(rep.books["a"][0].noun_entities, 2u);
  ASSERT_EQ(rep.warnings.size(), 1u);
  EXPECT_EQ(rep.warnings[0].message, "no entity nodes; chapter graph will be a placeholder");
  EXPECT_EQ(rep.warnings[0].chapter_index, 2);
}

TEST(Validate, CycleIsAViolation) {
  AnnotatedChapter ch;
  ch.book_id = "b";
  ch.chapter_index = 1;
  Sentence s;
  s.tokens = {{"x", "n", 2, "d"}, {"y", "n", 1, "d"}};
  ch.sentences.push_back(s);
  auto rep = validate_corpus({ch});
  EXPECT_FALSE(rep.ok());
  EXPECT_NE(tree_defect(s), "");
}

TEST(Validate, SpanHeadIsTokenAttachedOutside) {
  Sentence s;
  // "Old Town" compound: Old -> Town, Town -> root verb
  s.tokens = {{"Old", "ADJ", 2, "compound"}, {"Town", "PROPN", 3, "nsubj"}, {"slept", "VERB", 0, "root"}};
  EXPECT_EQ(span_head(s, {0, 2, "LOC"}), 1);
  EXPECT_EQ(span_head(s, {0, 1, "LOC"}), 0);
}

TEST(ValidateProperty, RandomTreesAreWellFormed) {
  gen::Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    auto s = gen::random_sentence(rng);
    EXPECT_EQ(tree_defect(s), "");
  }
}
