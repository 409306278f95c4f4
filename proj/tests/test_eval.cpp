#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "generators.hpp"
#include "oracles.hpp"
#include "plotline/checkeval.hpp"
#include "plotline/error.hpp"
#include "plotline/eval.hpp"
#include "plotline/text_util.hpp"

using namespace plotline;
using namespace plotline::eval;

TEST(BoundaryPrf, WorkedExample) {
  auto s = boundary_prf({10, 21}, {10, 20, 30}, 1);
  EXPECT_EQ(s.matches, 2);
  EXPECT_DOUBLE_EQ(s.precision, 1.0);
  EXPECT_DOUBLE_EQ(s.recall, 2.0 / 3.0);
  EXPECT_NEAR(s.f1, 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(s.accuracy, 2.0 / 3.0);
  EXPECT_EQ(boundary_prf({10, 21}, {10, 20, 30}, 0).matches, 1);
}

TEST(BoundaryPrf, EmptyCases) {
  auto both = boundary_prf({}, {});
  EXPECT_DOUBLE_EQ(both.f1, 1.0);
  EXPECT_DOUBLE_EQ(both.accuracy, 1.0);
  auto no_pred = boundary_prf({}, {4});
  EXPECT_DOUBLE_EQ(no_pred.f1, 0.0);
  EXPECT_DOUBLE_EQ(no_pred.recall, 0.0);
  auto no_gold = boundary_prf({4}, {});
  EXPECT_DOUBLE_EQ(no_gold.precision, 0.0);
  EXPECT_DOUBLE_EQ(harmonic_f1(0, 0), 0.0);
}

TEST(BoundaryPrf, OneToOne) {
  // one gold boundary cannot absorb two predictions
  auto s = boundary_prf({9, 11}, {10}, 1);
  EXPECT_EQ(s.matches, 1);
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  // closest-first pairs 4 with 4 and strands 5; the sweep matches both
  EXPECT_EQ(boundary_prf({4, 5}, {3, 4}, 1).matches, 2);
}

TEST(BoundaryPrf, MatchesExhaustiveOracle) {
  gen::Rng rng(1);
  for (int trial = 0; trial < 800; ++trial) {
    const int n = gen::uniform_int(rng, 1, 25);
    auto pred = gen::random_subset(rng, 1, n, 6);
    auto gold = gen::random_subset(rng, 1, n, 6);
    const int w = gen::uniform_int(rng, 0, 3);
    auto s = boundary_prf(pred, gold, w);
    EXPECT_EQ(s.matches, oracle::best_matching(pred, gold, w)) << "trial " << trial;
    EXPECT_GE(s.precision, 0.0);
    EXPECT_LE(s.precision, 1.0);
    EXPECT_LE(s.recall, 1.0);
    EXPECT_LE(s.accuracy, std::min(s.precision, s.recall) + 1e-15);
  }
}

TEST(BoundaryPrf, SwapSymmetryAndWindowMonotone) {
  gen::Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    auto pred = gen::random_subset(rng, 1, 30, 8);
    auto gold = gen::random_subset(rng, 1, 30, 8);
    auto a = boundary_prf(pred, gold, 1);
    auto b = boundary_prf(gold, pred, 1);
    EXPECT_EQ(a.matches, b.matches);
    EXPECT_DOUBLE_EQ(a.precision, b.recall);
    EXPECT_DOUBLE_EQ(a.f1, b.f1);
    int prev = -1;
    for (int w = 0; w <= 5; ++w) {
      const int m = boundary_prf(pred, gold, w).matches;
      EXPECT_GE(m, prev);
      prev = m;
    }
  }
}

TEST(Kendall, KnownValues) {
  std::vector<int> id = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(kendall_tau(id, id), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(id, std::vector<int>{4, 3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(id, std::vector<int>{2, 1, 3, 4}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(kendall_tau(std::vector<std::string>{"a", "b"}, std::vector<std::string>{"b", "a"}), -1.0);
  EXPECT_THROW(kendall_tau(id, std::vector<int>{1, 2, 3}), MismatchedItems);
  EXPECT_THROW(kendall_tau(id, std::vector<int>{1, 2, 3, 5}), MismatchedItems);
  EXPECT_THROW(kendall_tau(std::vector<int>{1}, std::vector<int>{1}), MismatchedItems);
  EXPECT_THROW(kendall_tau(std::vector<int>{1, 1}, std::vector<int>{1, 1}), MismatchedItems);
}

TEST(Kendall, MatchesPairCountOracle) {
  gen::Rng rng(3);
  for (int trial = 0; trial < 600; ++trial) {
    const int n = gen::uniform_int(rng, 2, 40);
    auto a = gen::random_permutation(rng, n);
    auto b = gen::random_permutation(rng, n);
    const double t = kendall_tau(a, b);
    EXPECT_NEAR(t, oracle::kendall(a, b), 1e-12);
    EXPECT_NEAR(t, kendall_tau(b, a), 1e-12);
    EXPECT_GE(t, -1.0);
    EXPECT_LE(t, 1.0);
  }
  std::vector<int> seq = {3, 1, 2};
  EXPECT_EQ(count_inversions(seq), 2);
  EXPECT_EQ(count_inversions({}), 0);
}

TEST(Report, CsvAndTable) {
  MetricReport empty;
  EXPECT_EQ(report_csv(empty), "book_id,precision,recall,f1,accuracy,tau\n");
  EXPECT_EQ(empty.macro().scores.f1, 0.0);

  MetricReport r;
  r.books.push_back({"a", boundary_prf({10, 21}, {10, 20, 30}), 1.0});
  r.books.push_back({"b", boundary_prf({}, {5}), 0.0});
  auto csv = report_csv(r);
  std::istringstream in(csv);
  std::string header, row_a, row_b;
  std::getline(in, header);
  std::getline(in, row_a);
  std::getline(in, row_b);
  auto fields = text::split(row_a, ',');
  ASSERT_EQ(fields.size(), 6u);
  EXPECT_EQ(fields[0], "a");
  EXPECT_DOUBLE_EQ(std::stod(std::string(fields[3])), 0.8);
  auto macro = r.macro();
  EXPECT_DOUBLE_EQ(macro.scores.f1, 0.4);
  EXPECT_DOUBLE_EQ(macro.tau, 0.5);
  auto table = report_table(r);
  EXPECT_NE(table.find("+/-1"), std::string::npos);
  EXPECT_NE(table.find("macro"), std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "plotline_report";
  std::filesystem::create_directories(dir);
  emit_report(r, (dir / "r.csv").string(), (dir / "r.txt").string());
  EXPECT_EQ(text::read_file((dir / "r.csv").string()), csv);
  EXPECT_THROW(emit_report(r, (dir / "missing" / "r.csv").string(), (dir / "r.txt").string()), IoFailure);
  std::filesystem::remove_all(dir);
}

TEST(References, AllFormats) {
  const auto dir = std::filesystem::temp_directory_path() / "plotline_refs";
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    const auto p = (dir / name).string();
    text::write_file(p, body);
    return p;
  };
  auto one = load_references(write("one.json", R"({"book_id": "x", "boundaries": [9, 3, 3]})"));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].boundaries, (std::vector<int>{3, 9}));
  auto arr = load_references(write("arr.json", R"([{"book_id": "x", "boundaries": []}, {"book_id": "y", "boundaries": [2]}])"));
  EXPECT_EQ(arr.size(), 2u);
  auto lines = load_references(write("l.jsonl", "{\"book_id\": \"x\", \"boundaries\": [1]}\n\n{\"book_id\": \"y\", \"boundaries\": [2]}\n"));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[1].book_id, "y");
  try {
    load_references(write("bad.jsonl", "{\"book_id\": \"x\", \"boundaries\": [1]}\n{\"book_id\": 3}\n"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(load_references(write("nofield.json", R"({"book_id": "x"})")), ParseError);
  std::filesystem::remove_all(dir);
}

namespace {

class Scripted : public llm::Completer {
 public:
  explicit Scripted(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const std::string& prompt) override {
    prompts.push_back(prompt);
    return replies_[(prompts.size() - 1) % replies_.size()];
  }
  std::vector<std::string> prompts;

 private:
  std::vector<std::string> replies_;
};

summarize::Outline tiny_outline() {
  summarize::Outline o;
  o.book_id = "book";
  summarize::SegmentSummary s;
  s.segment_index = 1;
  s.title = "Arrival";
  s.summary = "Someone arrives.";
  s.start_chapter = 1;
  s.end_chapter = 3;
  o.entries.push_back(s);
  return o;
}

}  // namespace

TEST(Checkeval, YesNoParsing) {
  EXPECT_EQ(parse_yes_no("  Yes, it is."), true);
  EXPECT_EQ(parse_yes_no("NO"), false);
  EXPECT_EQ(parse_yes_no("是的"), true);
  EXPECT_EQ(parse_yes_no("否"), false);
  EXPECT_EQ(parse_yes_no("nope"), std::nullopt);
  EXPECT_EQ(parse_yes_no("maybe"), std::nullopt);
  EXPECT_EQ(parse_yes_no(""), std::nullopt);
}

TEST(Checkeval, ScoresAndFlags) {
  Scripted c({"yes", "no", "unclear"});
  auto r = checkeval_readability(tiny_outline(), c, {"clear titles?", "consistent tense?", "no repetition?"});
  ASSERT_EQ(r.criteria.size(), 3u);
  EXPECT_DOUBLE_EQ(r.mean, 1.0 / 3.0);
  EXPECT_FALSE(r.criteria[0].flagged);
  EXPECT_TRUE(r.criteria[2].flagged);
  EXPECT_EQ(r.criteria[2].score, 0.0);
  EXPECT_NE(c.prompts[1].find("consistent tense?"), std::string::npos);
  EXPECT_NE(c.prompts[1].find("Arrival"), std::string::npos);
  EXPECT_THROW(checkeval_readability(tiny_outline(), c, {}), std::invalid_argument);
}
