#include <algorithm>

#include <json.hpp>

#include "plotline/error.hpp"
#include "plotline/summarize.hpp"

namespace plotline::summarize {

using nlohmann::json;

Outline assemble_outline(const std::string& book_id, std::vector<SegmentSummary> summaries, OutlineMetadata metadata,
                         std::optional<GlobalPass> global, std::optional<std::size_t> expected_segments) {
  std::stable_sort(summaries.begin(), summaries.end(),
                   [](const auto& a, const auto& b) { return a.segment_index < b.segment_index; });
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    if (summaries[i].segment_index != static_cast<int>(i) + 1) {
      throw MissingSegment("book " + book_id + ": expected segment " + std::to_string(i + 1) + ", found " +
                           std::to_string(summaries[i].segment_index));
    }
  }
  if (expected_segments && summaries.size() != *expected_segments) {
    throw MissingSegment("book " + book_id + ": " + std::to_string(summaries.size()) + " summaries for " +
                         std::to_string(*expected_segments) + " segments");
  }

  Outline outline;
  outline.book_id = book_id;
  outline.metadata = std::move(metadata);
  if (global && global->completer && !summaries.empty()) {
    std::string joined;
    for (const auto& s : summaries) {
      joined += s.title + " (" + range_text(s.start_chapter, s.end_chapter) + "): " + s.summary + "\n";
    }
    const std::string prompt = render_template(
        global->tmpl, book_id, range_text(summaries.front().start_chapter, summaries.back().end_chapter), joined);
    const auto parsed = parse_response(global->completer->complete(prompt));
    SegmentSummary preface;
    preface.segment_index = 0;
    preface.title = parsed.title.empty() ? "Synopsis" : parsed.title;
    preface.summary = parsed.summary;
    preface.source = Source::llm;
    preface.start_chapter = summaries.front().start_chapter;
    preface.end_chapter = summaries.back().end_chapter;
    preface.parse_fallback = parsed.parse_fallback;
    outline.preface = std::move(preface);
  }
  outline.entries = std::move(summaries);
  return outline;
}

namespace {

std::string chapter_span(const SegmentSummary& s) {
  return s.start_chapter == s.end_chapter ? "chapter " + std::to_string(s.start_chapter)
                                          : range_text(s.start_chapter, s.end_chapter);
}

json summary_json(const SegmentSummary& s) {
  return {{"segment_index", s.segment_index},
          {"title", s.title},
          {"summary", s.summary},
          {"source", s.source == Source::llm ? "llm" : "fallback"},
          {"start", s.start_chapter},
          {"end", s.end_chapter},
          {"parse_fallback", s.parse_fallback}};
}

SegmentSummary summary_from_json(const json& j) {
  SegmentSummary s;
  s.segment_index = j.at("segment_index").get<int>();
  s.title = j.at("title").get<std::string>();
  s.summary = j.at("summary").get<std::string>();
  s.source = j.at("source").get<std::string>() == "llm" ? Source::llm : Source::fallback;
  s.start_chapter = j.at("start").get<int>();
  s.end_chapter = j.at("end").get<int>();
  s.parse_fallback = j.value("parse_fallback", false);
  return s;
}

}  // namespace

std::string to_markdown(const std::vector<Outline>& outlines) {
  std::string out;
  for (const auto& o : outlines) {
    out += "# " + o.book_id + "\n\n";
    if (o.preface) out += "> **" + o.preface->title + "** " + o.preface->summary + "\n\n";
    for (const auto& s : o.entries) {
      out += "## " + s.title + " (" + chapter_span(s) + ")\n\n";
      out += s.summary + "\n\n";
    }
  }
  return out;
}

std::string to_json(const std::vector<Outline>& outlines) {
  json arr = json::array();
  for (const auto& o : outlines) {
    json entries = json::array();
    for (const auto& s : o.entries) entries.push_back(summary_json(s));
    json meta = {{"model", o.metadata.model}, {"config_hash", o.metadata.config_hash}};
    meta["timestamp"] = o.metadata.timestamp ? json(*o.metadata.timestamp) : json(nullptr);
    json j = {{"book_id", o.book_id}, {"metadata", std::move(meta)}, {"entries", std::move(entries)}};
    j["preface"] = o.preface ? summary_json(*o.preface) : json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::vector<Outline> outlines_from_json(std::string_view text) {
  std::vector<Outline> out;
  for (const auto& j : json::parse(text)) {
    Outline o;
    o.book_id = j.at("book_id").get<std::string>();
    const auto& meta = j.at("metadata");
    o.metadata.model = meta.value("model", "");
    o.metadata.config_hash = meta.value("config_hash", "");
    if (meta.contains("timestamp") && meta["timestamp"].is_string()) o.metadata.timestamp = meta["timestamp"].get<std::string>();
    if (j.contains("preface") && !j["preface"].is_null()) o.preface = summary_from_json(j["preface"]);
    for (const auto& e : j.at("entries")) o.entries.push_back(summary_from_json(e));
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace plotline::summarize
