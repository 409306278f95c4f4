#include <fstream>
#include <set>

#include <json.hpp>

#include "plotline/corpus.hpp"
#include "plotline/error.hpp"

namespace plotline::corpus {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, std::size_t line, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(line, where + "missing field '" + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line, const std::string& where) {
  const auto& v = require(obj, key, line, where);
  if (!v.is_string()) throw SchemaError(line, where + "field '" + key + "' must be a string");
  return v.get<std::string>();
}

int require_int(const json& obj, const char* key, std::size_t line, const std::string& where) {
  const auto& v = require(obj, key, line, where);
  if (!v.is_number_integer()) throw SchemaError(line, where + "field '" + key + "' must be an integer");
  return v.get<int>();
}

Sentence parse_sentence(const json& js, std::size_t line, std::size_t s_idx) {
  const std::string where = "sentence " + std::to_string(s_idx) + ": ";
  if (!js.is_object()) throw SchemaError(line, where + "must be an object");
  const auto& tokens = require(js, "tokens", line, where);
  const auto& entities = require(js, "entities", line, where);
  if (!tokens.is_array()) throw SchemaError(line, where + "field 'tokens' must be an array");
  if (!entities.is_array()) throw SchemaError(line, where + "field 'entities' must be an array");

  Sentence s;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto& tj = tokens[t];
    const std::string tw = where + "token " + std::to_string(t) + ": ";
    if (!tj.is_object()) throw SchemaError(line, tw + "must be an object");
    Token tok;
    tok.text = require_string(tj, "text", line, tw);
    tok.pos = require_string(tj, "pos", line, tw);
    tok.head = require_int(tj, "head", line, tw);
    tok.deprel = require_string(tj, "deprel", line, tw);
    s.tokens.push_back(std::move(tok));
  }
  const int n = static_cast<int>(s.tokens.size());
  for (std::size_t t = 0; t < s.tokens.size(); ++t) {
    if (s.tokens[t].head < 0 || s.tokens[t].head > n) {
      throw SchemaError(line, where + "token " + std::to_string(t) + ": dependency head out of range");
    }
  }
  for (std::size_t e = 0; e < entities.size(); ++e) {
    const auto& ej = entities[e];
    const std::string ew = where + "entity " + std::to_string(e) + ": ";
    if (!ej.is_object()) throw SchemaError(line, ew + "must be an object");
    EntitySpan span;
    span.start = require_int(ej, "start", line, ew);
    span.end = require_int(ej, "end", line, ew);
    span.label = require_string(ej, "label", line, ew);
    if (span.start < 0 || span.start >= span.end || span.end > n) {
      throw SchemaError(line, ew + "entity span out of range");
    }
    s.entities.push_back(std::move(span));
  }
  return s;
}

AnnotatedChapter parse_record(const std::string& text, std::size_t line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line, e.what());
  }
  if (!j.is_object()) throw SchemaError(line, "record must be a JSON object");
  AnnotatedChapter ch;
  ch.book_id = require_string(j, "book_id", line, "");
  ch.chapter_index = require_int(j, "chapter_index", line, "");
  ch.raw_text = require_string(j, "raw_text", line, "");
  const auto& sentences = require(j, "sentences", line, "");
  if (!sentences.is_array()) throw SchemaError(line, "field 'sentences' must be an array");
  for (std::size_t s = 0; s < sentences.size(); ++s) ch.sentences.push_back(parse_sentence(sentences[s], line, s));
  return ch;
}

}  // namespace

std::vector<AnnotatedChapter> parse_annotations(std::istream& in) {
  std::vector<AnnotatedChapter> out;
  std::string text;
  std::size_t line = 0;
  std::size_t prev_line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    AnnotatedChapter ch = parse_record(text, line);
    if (out.empty() || out.back().book_id != ch.book_id) {
      if (!out.empty() && ch.book_id < out.back().book_id) {
        throw OrderError("line " + std::to_string(line) + ": book '" + ch.book_id + "' appears after '" +
                         out.back().book_id + "'; records must be sorted by (book_id, chapter_index)");
      }
      if (ch.chapter_index != 1) {
        throw OrderError("line " + std::to_string(line) + ": book '" + ch.book_id + "' starts at chapter " +
                         std::to_string(ch.chapter_index) + ", expected 1");
      }
    } else if (ch.chapter_index != out.back().chapter_index + 1) {
      throw OrderError("line " + std::to_string(line) + ": chapter_index " + std::to_string(ch.chapter_index) +
                       " follows " + std::to_string(out.back().chapter_index) + " (line " +
                       std::to_string(prev_line) + "); indices must be consecutive");
    }
    prev_line = line;
    out.push_back(std::move(ch));
  }
  return out;
}

std::vector<AnnotatedChapter> load_annotations(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open annotations file " + path);
  return parse_annotations(in);
}

std::string to_json_line(const AnnotatedChapter& chapter) {
  json sentences = json::array();
  for (const auto& s : chapter.sentences) {
    json tokens = json::array();
    for (const auto& t : s.tokens) {
      tokens.push_back({{"text", t.text}, {"pos", t.pos}, {"head", t.head}, {"deprel", t.deprel}});
    }
    json entities = json::array();
    for (const auto& e : s.entities) entities.push_back({{"start", e.start}, {"end", e.end}, {"label", e.label}});
    sentences.push_back({{"tokens", std::move(tokens)}, {"entities", std::move(entities)}});
  }
  json j = {{"book_id", chapter.book_id},
            {"chapter_index", chapter.chapter_index},
            {"raw_text", chapter.raw_text},
            {"sentences", std::move(sentences)}};
  return j.dump();
}

bool is_noun_tag(std::string_view tag, const std::vector<std::string>& noun_tags) {
  for (const auto& t : noun_tags) {
    if (t == tag) return true;
  }
  return false;
}

int span_head(const Sentence& sentence, const EntitySpan& span) {
  for (int t = span.start; t < span.end; ++t) {
    const int head = sentence.tokens[static_cast<std::size_t>(t)].head;  // 1-based, 0 = root
    if (head == 0 || head - 1 < span.start || head - 1 >= span.end) return t;
  }
  return span.end - 1;
}

std::string tree_defect(const Sentence& sentence) {
  const int n = static_cast<int>(sentence.tokens.size());
  for (int t = 0; t < n; ++t) {
    const int h = sentence.tokens[static_cast<std::size_t>(t)].head;
    if (h < 0 || h > n) return "token " + std::to_string(t) + " has head " + std::to_string(h) + " out of range";
    if (h == t + 1) return "token " + std::to_string(t) + " is its own head";
  }
  for (int t = 0; t < n; ++t) {
    int cur = t;
    for (int steps = 0; steps <= n; ++steps) {
      const int h = sentence.tokens[static_cast<std::size_t>(cur)].head;
      if (h == 0) break;
      cur = h - 1;
      if (steps == n) return "head pointers form a cycle through token " + std::to_string(t);
    }
  }
  return {};
}

ValidationReport validate_corpus(const std::vector<AnnotatedChapter>& chapters,
                                 const std::vector<std::string>& noun_tags) {
  ValidationReport report;
  std::map<std::string, int> last_index;
  for (const auto& ch : chapters) {
    auto violation = [&](std::string msg) { report.violations.push_back({ch.book_id, ch.chapter_index, std::move(msg)}); };

    auto [it, fresh] = last_index.emplace(ch.book_id, ch.chapter_index);
    if (fresh && ch.chapter_index != 1) violation("first chapter of book has index " + std::to_string(ch.chapter_index));
    if (!fresh) {
      if (ch.chapter_index != it->second + 1) {
        violation("chapter_index " + std::to_string(ch.chapter_index) + " does not follow " +
                  std::to_string(it->second));
      }
      it->second = ch.chapter_index;
    }

    ChapterCounts counts;
    counts.chapter_index = ch.chapter_index;
    for (std::size_t s = 0; s < ch.sentences.size(); ++s) {
      const auto& sent = ch.sentences[s];
      const int n = static_cast<int>(sent.tokens.size());
      counts.tokens += sent.tokens.size();
      counts.entities += sent.entities.size();
      const std::string defect = tree_defect(sent);
      if (!defect.empty()) violation("sentence " + std::to_string(s) + ": " + defect);
      for (std::size_t e = 0; e < sent.entities.size(); ++e) {
        const auto& span = sent.entities[e];
        if (span.start < 0 || span.start >= span.end || span.end > n) {
          violation("sentence " + std::to_string(s) + ": entity " + std::to_string(e) + " span out of range");
          continue;
        }
        const int head = span_head(sent, span);
        if (is_noun_tag(sent.tokens[static_cast<std::size_t>(head)].pos, noun_tags)) ++counts.noun_entities;
      }
    }
    if (counts.noun_entities == 0) {
      report.warnings.push_back({ch.book_id, ch.chapter_index, "no entity nodes; chapter graph will be a placeholder"});
    }
    report.books[ch.book_id].push_back(counts);
  }
  return report;
}

std::string to_json(const ValidationReport& report) {
  json books = json::object();
  for (const auto& [book, rows] : report.books) {
    json arr = json::array();
    for (const auto& c : rows) {
      arr.push_back({{"chapter_index", c.chapter_index},
                     {"tokens", c.tokens},
                     {"entities", c.entities},
                     {"noun_entities", c.noun_entities}});
    }
    books[book] = std::move(arr);
  }
  auto issues = [](const std::vector<Issue>& list) {
    json arr = json::array();
    for (const auto& i : list) arr.push_back({{"book_id", i.book_id}, {"chapter_index", i.chapter_index}, {"message", i.message}});
    return arr;
  };
  json j = {{"books", std::move(books)}, {"violations", issues(report.violations)}, {"warnings", issues(report.warnings)}};
  return j.dump(2) + "\n";
}

}  // namespace plotline::corpus
