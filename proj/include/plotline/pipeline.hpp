#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plotline/boundary.hpp"
#include "plotline/gat.hpp"
#include "plotline/graph.hpp"
#include "plotline/llm.hpp"

namespace plotline::pipeline {

struct RawText {
  std::string book_id;
  std::string path;
};

struct PipelineConfig {
  // Paths are resolved against the config file's directory.
  std::vector<RawText> raw_texts;
  std::string annotations;
  std::string embedding_table;  // empty = hashed fallback vectors
  std::string output_dir = "out";
  std::string references;  // empty = eval stage unavailable
  std::string segment_template;
  std::string synopsis_template;

  std::vector<std::string> heading_patterns;  // empty = defaults
  graph::GraphConfig graph;
  int embedding_dim = 32;

  gat::ModelConfig model;
  gat::TrainConfig train;

  boundary::BoundaryConfig boundary;
  bool calibrate_beta = false;

  llm::LlmConfig llm;
  bool llm_enabled = true;
  bool global_pass = false;
  std::size_t budget_tokens = 3000;
  double chars_per_token = 2.0;

  int eval_window = 1;

  std::uint64_t seed = 42;
  int threads = 1;
};

// Throws ConfigError with the offending key.
PipelineConfig parse_config(std::string_view json_text, const std::string& base_dir = ".");
PipelineConfig load_config(const std::string& path);
// Applies "section.key=value" style overrides to a JSON config document.
std::string apply_overrides(std::string_view json_text, const std::vector<std::string>& assignments);
std::string to_json(const PipelineConfig& config);

// Range checks on numeric parameters. Returns human-readable problems.
std::vector<std::string> validate(const PipelineConfig& config);

enum class Stage { split, graph, train, embed, segment, outline, eval, all };

std::optional<Stage> parse_stage(std::string_view name);
const char* to_string(Stage stage);

// Stage seeds: splitmix64(master + counter * golden_gamma) with the counter
// equal to the stage's position (split = 1 ... eval = 7).
std::uint64_t stage_seed(std::uint64_t master, Stage stage);

// Stable artifact names inside output_dir.
namespace artifacts {
inline constexpr const char* chapters = "chapters.jsonl";
inline constexpr const char* validation = "validation.json";
inline constexpr const char* graphs = "graphs.jsonl";
inline constexpr const char* model = "model.bin";
inline constexpr const char* model_header = "model.json";
inline constexpr const char* loss = "loss.csv";
inline constexpr const char* embeddings = "embeddings.csv";
inline constexpr const char* segments = "segments.json";
inline constexpr const char* outline_md = "outline.md";
inline constexpr const char* outline_json = "outline.json";
inline constexpr const char* report = "report.csv";
inline constexpr const char* report_table = "report.txt";
}  // namespace artifacts

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Runs one stage (or all, in order). Errors are reported on `log` and mapped
// to exit codes: 1 for invalid inputs or missing artifacts, 2 otherwise.
int run_stage(Stage stage, const PipelineConfig& config, std::ostream& log);

// Embeddings CSV: book_id,chapter_index,z1,...,zd
struct ChapterEmbedding {
  std::string book_id;
  int chapter_index = 0;
  Eigen::VectorXd z;
};
std::string embeddings_csv(const std::vector<ChapterEmbedding>& rows);
std::vector<ChapterEmbedding> parse_embeddings_csv(std::string_view csv);

}  // namespace plotline::pipeline
