#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "plotline/error.hpp"
#include "plotline/eval.hpp"
#include "plotline/pipeline.hpp"
#include "plotline/summarize.hpp"
#include "plotline/text_util.hpp"

namespace plotline::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const Stage kOrder[] = {Stage::split, Stage::graph, Stage::train, Stage::embed,
                        Stage::segment, Stage::outline, Stage::eval};

// Input problems that map to exit code 1.
class ValidationFailure : public Error {
 public:
  using Error::Error;
};

std::string out_path(const PipelineConfig& c, const char* name) { return (fs::path(c.output_dir) / name).string(); }

std::string require(const PipelineConfig& c, const char* name, Stage producer) {
  const std::string p = out_path(c, name);
  if (!fs::exists(p)) throw MissingArtifact(p, to_string(producer));
  return p;
}

void require_input(const std::string& path, const std::string& key) {
  if (path.empty()) throw ConfigError("'" + key + "' is not set");
  if (!fs::exists(path)) throw ConfigError("'" + key + "' points to a missing file: " + path);
}

std::vector<corpus::AnnotatedChapter> load_corpus(const PipelineConfig& c) {
  require_input(c.annotations, "paths.annotations");
  return corpus::load_annotations(c.annotations);
}

std::map<std::string, std::vector<corpus::AnnotatedChapter>> by_book(std::vector<corpus::AnnotatedChapter> chapters) {
  std::map<std::string, std::vector<corpus::AnnotatedChapter>> out;
  for (auto& ch : chapters) out[ch.book_id].push_back(std::move(ch));
  return out;
}

// ---- split

void run_split(const PipelineConfig& c, std::ostream& log) {
  if (c.raw_texts.empty()) throw ConfigError("'paths.raw_texts' is empty");
  const corpus::HeadingPatterns patterns =
      c.heading_patterns.empty() ? corpus::HeadingPatterns::defaults() : corpus::HeadingPatterns{c.heading_patterns};
  std::string out;
  for (const auto& raw : c.raw_texts) {
    require_input(raw.path, "paths.raw_texts[" + raw.book_id + "]");
    corpus::SplitResult split;
    try {
      split = corpus::split_chapters(text::read_file(raw.path), patterns, raw.book_id);
    } catch (const std::invalid_argument& e) {
      throw ValidationFailure(raw.path + ": " + e.what());
    }
    for (const auto& ch : split.chapters) {
      json j = {{"book_id", ch.book_id},
                {"chapter_index", ch.chapter_index},
                {"title", ch.title},
                {"heading", std::string(ch.heading())},
                {"body", ch.body},
                {"offset", ch.offset},
                {"synthetic_title", ch.synthetic_title}};
      if (ch.chapter_index == 1) j["preamble"] = split.preamble;
      out += j.dump() + "\n";
    }
    log << "split: " << raw.book_id << ": " << split.chapters.size() << " chapters\n";
  }
  text::write_file(out_path(c, artifacts::chapters), out);
}

// ---- graph

std::map<std::string, int> chapter_counts(const std::string& chapters_path) {
  std::map<std::string, int> counts;
  std::istringstream in(text::read_file(chapters_path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      counts[j.at("book_id").get<std::string>()]++;
    } catch (const json::exception& e) {
      throw ParseError(lineno, chapters_path + ": " + e.what());
    }
  }
  return counts;
}

graph::EmbeddingProvider make_provider(const PipelineConfig& c) {
  if (c.embedding_table.empty()) return graph::EmbeddingProvider::fallback(static_cast<std::size_t>(c.embedding_dim));
  require_input(c.embedding_table, "paths.embedding_table");
  return graph::EmbeddingProvider::load_table(c.embedding_table);
}

void run_graph(const PipelineConfig& c, std::ostream& log) {
  auto chapters = load_corpus(c);
  const auto report = corpus::validate_corpus(chapters, c.graph.selection.noun_tags);
  text::write_file(out_path(c, artifacts::validation), corpus::to_json(report));
  for (const auto& w : report.warnings) log << "warning: " << w.book_id << " ch" << w.chapter_index << ": " << w.message << "\n";
  if (!report.ok()) {
    for (const auto& v : report.violations) log << "error: " << v.book_id << " ch" << v.chapter_index << ": " << v.message << "\n";
    throw ValidationFailure("annotation corpus failed validation");
  }

  // When split ran, every split book must be annotated chapter for chapter.
  const std::string chapters_path = out_path(c, artifacts::chapters);
  if (fs::exists(chapters_path)) {
    std::map<std::string, int> annotated;
    for (const auto& ch : chapters) annotated[ch.book_id]++;
    for (const auto& [book, n] : chapter_counts(chapters_path)) {
      auto it = annotated.find(book);
      if (it == annotated.end()) {
        log << "warning: book " << book << " was split but has no annotations\n";
      } else if (it->second != n) {
        throw ValidationFailure("book " + book + ": " + std::to_string(n) + " split chapters but " +
                                std::to_string(it->second) + " annotated chapters");
      }
    }
  }

  const auto provider = make_provider(c);
  const auto graphs = graph::build_corpus_graphs(chapters, provider, c.graph, c.threads);
  graph::save_graphs(out_path(c, artifacts::graphs), graphs);
  log << "graph: " << graphs.size() << " chapter graphs\n";
}

// ---- train

void run_train(const PipelineConfig& c, std::ostream& log) {
  const auto graphs = graph::load_graphs(require(c, artifacts::graphs, Stage::graph));
  if (graphs.empty()) throw ValidationFailure("no chapter graphs to train on");
  const std::uint64_t seed = stage_seed(c.seed, Stage::train);
  gat::GatModel model = gat::make_model(static_cast<int>(graphs.front().feature_dim()), c.model, seed);
  gat::TrainConfig tc = c.train;
  tc.seed = seed;
  tc.threads = c.threads;
  const auto result = gat::train(std::move(model), graphs, tc);
  gat::save_checkpoint(out_path(c, artifacts::model), result.model);
  text::write_file(out_path(c, artifacts::model_header), gat::checkpoint_header_json(result.model));
  text::write_file(out_path(c, artifacts::loss), gat::loss_trace_csv(result.loss_trace));
  log << "train: " << result.loss_trace.size() << " epochs, loss " << text::format_double(result.loss_trace.front())
      << " -> " << text::format_double(result.loss_trace.back()) << "\n";
}

// ---- embed

void run_embed(const PipelineConfig& c, std::ostream& log) {
  const std::string model_path = require(c, artifacts::model, Stage::train);
  const auto graphs = graph::load_graphs(require(c, artifacts::graphs, Stage::graph));
  const auto model = gat::load_checkpoint(model_path);
  std::vector<ChapterEmbedding> rows;
  rows.reserve(graphs.size());
  for (const auto& g : graphs) {
    if (g.feature_dim() != model.in_dim()) {
      throw DimensionMismatch("graph features have " + std::to_string(g.feature_dim()) + " columns, model expects " +
                              std::to_string(model.in_dim()));
    }
    rows.push_back({g.book_id, g.chapter_index, gat::chapter_embedding(model, g)});
  }
  text::write_file(out_path(c, artifacts::embeddings), embeddings_csv(rows));
  log << "embed: " << rows.size() << " chapter embeddings\n";
}

// ---- segment

std::map<std::string, boundary::EmbeddingSequence> sequences_from(const std::vector<ChapterEmbedding>& rows) {
  std::map<std::string, std::vector<const ChapterEmbedding*>> grouped;
  for (const auto& r : rows) grouped[r.book_id].push_back(&r);
  std::map<std::string, boundary::EmbeddingSequence> out;
  for (auto& [book, list] : grouped) {
    std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->chapter_index < b->chapter_index; });
    boundary::EmbeddingSequence seq{book, {}};
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i]->chapter_index != static_cast<int>(i) + 1) {
        throw ValidationFailure("embeddings for book " + book + " are not chapters 1..n");
      }
      seq.embeddings.push_back(list[i]->z);
    }
    out.emplace(book, std::move(seq));
  }
  return out;
}

boundary::EmbeddingSequence in_space(const boundary::EmbeddingSequence& seq, boundary::EmbeddingSpace space,
                                     std::ostream& log) {
  if (space == boundary::EmbeddingSpace::full || seq.size() < 2) return seq;
  const auto proj = gat::project_2d(seq.embeddings);
  if (proj.degenerate) log << "warning: " << seq.book_id << ": " << proj.warning << "\n";
  boundary::EmbeddingSequence out{seq.book_id, {}};
  for (Eigen::Index i = 0; i < proj.points.rows(); ++i) out.embeddings.push_back(proj.points.row(i).transpose());
  return out;
}

std::map<std::string, std::vector<int>> reference_map(const PipelineConfig& c) {
  require_input(c.references, "paths.references");
  std::map<std::string, std::vector<int>> out;
  for (auto& r : eval::load_references(c.references)) out[r.book_id] = std::move(r.boundaries);
  return out;
}

std::vector<int> interior_only(std::vector<int> boundaries, int n) {
  boundaries.erase(std::remove_if(boundaries.begin(), boundaries.end(), [n](int b) { return b >= n || b < 1; }),
                   boundaries.end());
  return boundaries;
}

void run_segment(const PipelineConfig& c, std::ostream& log) {
  const auto rows = parse_embeddings_csv(text::read_file(require(c, artifacts::embeddings, Stage::embed)));
  auto sequences = sequences_from(rows);
  for (auto& [book, seq] : sequences) seq = in_space(seq, c.boundary.space, log);

  boundary::BoundaryConfig bc = c.boundary;
  if (c.calibrate_beta) {
    const auto refs = reference_map(c);
    std::vector<boundary::LabeledSequence> labeled;
    for (const auto& [book, seq] : sequences) {
      auto it = refs.find(book);
      if (it != refs.end()) labeled.push_back({seq, interior_only(it->second, seq.size())});
    }
    if (labeled.empty()) throw ValidationFailure("beta calibration found no books with references");
    bc.beta = boundary::calibrate_beta(labeled, bc, boundary::default_beta_grid(), c.eval_window);
    log << "segment: calibrated beta = " << text::format_double(bc.beta) << "\n";
  }

  json out = json::array();
  for (const auto& [book, seq] : sequences) {
    const auto labels = boundary::detect_boundaries(seq, bc);
    const auto segments = boundary::segments_from_labels(labels);
    out.push_back(json::parse(boundary::to_json(book, labels, segments, bc)));
    log << "segment: " << book << ": " << segments.size() << " segments\n";
  }
  text::write_file(out_path(c, artifacts::segments), out.dump(2) + "\n");
}

struct BookSegments {
  std::string book_id;
  std::vector<int> labels;
  std::vector<boundary::PlotSegment> segments;
};

std::vector<BookSegments> load_segments(const std::string& path) {
  json j;
  try {
    j = json::parse(text::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(0, path + ": " + e.what());
  }
  std::vector<BookSegments> out;
  try {
    for (const auto& b : j) {
      BookSegments bs;
      bs.book_id = b.at("book_id").get<std::string>();
      bs.labels = b.at("labels").get<std::vector<int>>();
      bs.segments = boundary::segments_from_labels(boundary::BoundaryLabels{bs.labels});
      out.push_back(std::move(bs));
    }
  } catch (const json::exception& e) {
    throw SchemaError(0, path + ": " + e.what());
  }
  return out;
}

// ---- outline

bool network_disabled() {
  const char* v = std::getenv("PLOTLINE_NO_NETWORK");
  return v && std::string_view(v) == "1";
}

std::optional<std::string> source_timestamp() {
  const char* v = std::getenv("SOURCE_DATE_EPOCH");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const long long secs = std::strtoll(v, &end, 10);
  if (*end != '\0') return std::nullopt;
  const std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

std::string template_or(const std::string& path, std::string_view fallback) {
  if (path.empty()) return std::string(fallback);
  require_input(path, "paths template");
  return text::read_file(path);
}

void run_outline(const PipelineConfig& c, std::ostream& log) {
  const auto books = load_segments(require(c, artifacts::segments, Stage::segment));
  auto corpus_books = by_book(load_corpus(c));

  std::unique_ptr<llm::LlmClient> client;
  if (c.llm_enabled && !network_disabled()) {
    client = std::make_unique<llm::LlmClient>(c.llm, std::shared_ptr<llm::Transport>(llm::make_http_transport()),
                                              llm::Sleeper{}, stage_seed(c.seed, Stage::outline));
  } else {
    log << "outline: using offline fallback summarizer\n";
  }
  const std::string seg_tmpl = template_or(c.segment_template, summarize::default_segment_template());
  const std::string syn_tmpl = template_or(c.synopsis_template, summarize::default_synopsis_template());

  summarize::CompressOptions opts;
  opts.proxy.chars_per_token = c.chars_per_token;
  opts.selection = c.graph.selection;

  summarize::OutlineMetadata meta;
  meta.model = client ? client->model_name() : "fallback";
  meta.config_hash = text::hex64(text::fnv1a64(to_json(c)));
  meta.timestamp = source_timestamp();

  std::vector<summarize::Outline> outlines;
  for (const auto& book : books) {
    auto it = corpus_books.find(book.book_id);
    if (it == corpus_books.end()) throw ValidationFailure("no annotations for segmented book " + book.book_id);
    const auto& chapters = it->second;
    if (static_cast<int>(chapters.size()) != static_cast<int>(book.labels.size())) {
      throw ValidationFailure("book " + book.book_id + ": segment labels do not cover the annotated chapters");
    }
    const auto tfidf = graph::compute_tfidf(chapters, c.graph.selection);

    std::vector<summarize::SegmentSummary> summaries;
    for (const auto& seg : book.segments) {
      const std::vector<corpus::AnnotatedChapter> slice(chapters.begin() + (seg.start_chapter - 1),
                                                        chapters.begin() + seg.end_chapter);
      if (client) {
        try {
          const std::string text = summarize::compress_segment(slice, tfidf, c.budget_tokens, opts);
          summaries.push_back(summarize::summarize_segment(*client, book.book_id, seg, text, seg_tmpl));
          continue;
        } catch (const llm::LlmError& e) {
          log << "warning: " << book.book_id << " segment " << seg.segment_index << ": " << e.what()
              << "; using fallback\n";
        }
      }
      summaries.push_back(summarize::fallback_summarize(seg, slice, tfidf, c.graph.selection));
    }

    std::optional<summarize::GlobalPass> global;
    if (c.global_pass && client) global = summarize::GlobalPass{client.get(), syn_tmpl};
    try {
      outlines.push_back(summarize::assemble_outline(book.book_id, summaries, meta, global, book.segments.size()));
    } catch (const llm::LlmError& e) {
      log << "warning: " << book.book_id << " global pass failed: " << e.what() << "\n";
      outlines.push_back(summarize::assemble_outline(book.book_id, std::move(summaries), meta, std::nullopt,
                                                     book.segments.size()));
    }
  }
  text::write_file(out_path(c, artifacts::outline_md), summarize::to_markdown(outlines));
  text::write_file(out_path(c, artifacts::outline_json), summarize::to_json(outlines));
  log << "outline: " << outlines.size() << " books\n";
}

// ---- eval

void run_eval(const PipelineConfig& c, std::ostream& log) {
  const auto books = load_segments(require(c, artifacts::segments, Stage::segment));
  const auto refs = reference_map(c);

  std::map<std::string, std::vector<int>> outline_order;
  const std::string outline_path = out_path(c, artifacts::outline_json);
  if (fs::exists(outline_path)) {
    for (const auto& o : summarize::outlines_from_json(text::read_file(outline_path))) {
      auto& order = outline_order[o.book_id];
      for (const auto& e : o.entries) order.push_back(e.start_chapter);
    }
  }

  eval::MetricReport report;
  report.window = c.eval_window;
  for (const auto& book : books) {
    auto it = refs.find(book.book_id);
    if (it == refs.end()) {
      log << "warning: no reference boundaries for " << book.book_id << "; skipped\n";
      continue;
    }
    const int n = static_cast<int>(book.labels.size());
    const auto pred = boundary::BoundaryLabels{book.labels}.interior();
    eval::BookMetrics m{book.book_id, eval::boundary_prf(pred, interior_only(it->second, n), c.eval_window), 1.0};
    // Order agreement between the outline's entry sequence and chronology.
    auto oit = outline_order.find(book.book_id);
    if (oit != outline_order.end() && oit->second.size() >= 2) {
      std::vector<int> chronological = oit->second;
      std::sort(chronological.begin(), chronological.end());
      m.tau = eval::kendall_tau(oit->second, chronological);
    }
    report.books.push_back(m);
  }
  for (const auto& [book, _] : refs) {
    if (std::none_of(books.begin(), books.end(), [&](const BookSegments& b) { return b.book_id == book; })) {
      log << "warning: reference book " << book << " has no predicted segments\n";
    }
  }
  eval::emit_report(report, out_path(c, artifacts::report), out_path(c, artifacts::report_table));
  log << eval::report_table(report);
}

void run_one(Stage stage, const PipelineConfig& c, std::ostream& log) {
  switch (stage) {
    case Stage::split: return run_split(c, log);
    case Stage::graph: return run_graph(c, log);
    case Stage::train: return run_train(c, log);
    case Stage::embed: return run_embed(c, log);
    case Stage::segment: return run_segment(c, log);
    case Stage::outline: return run_outline(c, log);
    case Stage::eval: return run_eval(c, log);
    case Stage::all:
      for (Stage s : kOrder) {
        if (s == Stage::eval && c.references.empty()) {
          log << "eval: skipped (no references configured)\n";
          continue;
        }
        run_one(s, c, log);
      }
      return;
  }
}

}  // namespace

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : kOrder) {
    if (name == to_string(s)) return s;
  }
  if (name == "all") return Stage::all;
  return std::nullopt;
}

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::split: return "split";
    case Stage::graph: return "graph";
    case Stage::train: return "train";
    case Stage::embed: return "embed";
    case Stage::segment: return "segment";
    case Stage::outline: return "outline";
    case Stage::eval: return "eval";
    case Stage::all: return "all";
  }
  return "?";
}

std::uint64_t stage_seed(std::uint64_t master, Stage stage) {
  std::uint64_t counter = 0;
  for (std::size_t i = 0; i < std::size(kOrder); ++i) {
    if (kOrder[i] == stage) counter = i + 1;
  }
  std::uint64_t z = master + counter * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int run_stage(Stage stage, const PipelineConfig& config, std::ostream& log) {
  try {
    const auto problems = validate(config);
    if (!problems.empty()) {
      for (const auto& p : problems) log << "error: " << p << "\n";
      return kExitValidation;
    }
    fs::create_directories(config.output_dir);
    run_one(stage, config, log);
    return kExitOk;
  } catch (const MissingArtifact& e) {
    log << "error: " << e.what() << "\n";
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
  } catch (const ValidationFailure& e) {
    log << "error: " << e.what() << "\n";
  } catch (const ParseError& e) {
    log << "error: " << e.what() << "\n";
  } catch (const SchemaError& e) {
    log << "error: " << e.what() << "\n";
  } catch (const OrderError& e) {
    log << "error: " << e.what() << "\n";
  } catch (const InvalidPattern& e) {
    log << "error: " << e.what() << "\n";
  } catch (const MalformedTree& e) {
    log << "error: " << e.what() << "\n";
  } catch (const ProviderFailure& e) {
    log << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    log << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

std::string embeddings_csv(const std::vector<ChapterEmbedding>& rows) {
  std::string out = "book_id,chapter_index";
  const Eigen::Index d = rows.empty() ? 0 : rows.front().z.size();
  for (Eigen::Index k = 1; k <= d; ++k) out += ",z" + std::to_string(k);
  out += "\n";
  for (const auto& r : rows) {
    if (r.book_id.find_first_of(",\"\n") != std::string::npos) {
      throw ConfigError("book_id '" + r.book_id + "' cannot be written to CSV");
    }
    if (r.z.size() != d) throw DimensionMismatch("embedding rows have different widths");
    out += r.book_id + "," + std::to_string(r.chapter_index);
    for (Eigen::Index k = 0; k < d; ++k) out += "," + text::format_double(r.z(k));
    out += "\n";
  }
  return out;
}

std::vector<ChapterEmbedding> parse_embeddings_csv(std::string_view csv) {
  std::vector<ChapterEmbedding> rows;
  auto lines = text::split(csv, '\n');
  if (lines.empty() || !text::trim(lines.front()).starts_with("book_id,chapter_index")) {
    throw ParseError(1, "embeddings CSV header missing");
  }
  const std::size_t width = text::split(text::trim(lines.front()), ',').size();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty()) continue;
    const auto cells = text::split(line, ',');
    if (cells.size() != width) throw ParseError(static_cast<int>(i + 1), "wrong number of columns");
    ChapterEmbedding r;
    r.book_id = std::string(cells[0]);
    try {
      r.chapter_index = static_cast<int>(text::parse_double(cells[1]));
      r.z.resize(static_cast<Eigen::Index>(width - 2));
      for (std::size_t k = 2; k < width; ++k) r.z(static_cast<Eigen::Index>(k - 2)) = text::parse_double(cells[k]);
    } catch (const std::exception& e) {
      throw ParseError(static_cast<int>(i + 1), e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace plotline::pipeline
