// plotline: staged plot-outline pipeline.
//
//   plotline <stage> --config <path> [--threads N] [--seed S] [key=value ...]
//   plotline config validate --config <path>
//
// Precedence: --threads/--seed > key=value overrides > config file > defaults.
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "plotline/error.hpp"
#include "plotline/pipeline.hpp"
#include "plotline/text_util.hpp"

namespace {

namespace pl = plotline::pipeline;

struct Options {
  std::string config_path;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--threads", o.threads, "Worker threads for parallel stages")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Master seed; every stage seed derives from it");
  cmd->add_option("overrides", o.overrides, "Config overrides such as train.epochs=50 or boundary.beta=1.2");
}

pl::PipelineConfig resolve(const Options& o) {
  const std::string raw = plotline::text::read_file(o.config_path);
  const std::string merged = o.overrides.empty() ? raw : pl::apply_overrides(raw, o.overrides);
  auto base = std::filesystem::path(o.config_path).parent_path().string();
  pl::PipelineConfig c = pl::parse_config(merged, base.empty() ? "." : base);
  if (o.threads) c.threads = *o.threads;
  if (o.seed) c.seed = *o.seed;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plot outline extraction from annotated novels"};
  app.require_subcommand(1);

  Options opts;
  std::optional<pl::Stage> chosen;
  const char* stage_help[] = {
      "Cut raw book texts into chapters (chapters.jsonl)",
      "Validate annotations and build per-chapter entity graphs (graphs.jsonl)",
      "Train the graph attention autoencoder (model.bin, loss.csv)",
      "Pool node embeddings into chapter embeddings (embeddings.csv)",
      "Detect plot boundaries (segments.json)",
      "Summarize segments into an outline (outline.md, outline.json)",
      "Score boundaries against references (report.csv)",
      "Run every stage in order",
  };
  const pl::Stage stages[] = {pl::Stage::split,   pl::Stage::graph,   pl::Stage::train, pl::Stage::embed,
                              pl::Stage::segment, pl::Stage::outline, pl::Stage::eval,  pl::Stage::all};
  for (std::size_t i = 0; i < std::size(stages); ++i) {
    auto* cmd = app.add_subcommand(pl::to_string(stages[i]), stage_help[i]);
    add_common(cmd, opts);
    cmd->callback([&chosen, s = stages[i]] { chosen = s; });
  }

  auto* config_cmd = app.add_subcommand("config", "Inspect a config file");
  config_cmd->require_subcommand(1);
  bool validate_only = false;
  bool show = false;
  auto* validate_cmd = config_cmd->add_subcommand("validate", "Check a config file and report problems");
  add_common(validate_cmd, opts);
  validate_cmd->callback([&] { validate_only = true; });
  auto* show_cmd = config_cmd->add_subcommand("show", "Print the resolved config with defaults filled in");
  add_common(show_cmd, opts);
  show_cmd->callback([&] { show = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pl::kExitValidation;
  }

  pl::PipelineConfig config;
  try {
    config = resolve(opts);
  } catch (const plotline::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pl::kExitValidation;
  }

  if (validate_only || show) {
    const auto problems = pl::validate(config);
    for (const auto& p : problems) std::cerr << "error: " << p << "\n";
    if (show) std::cout << pl::to_json(config);
    if (validate_only && problems.empty()) std::cout << "config ok\n";
    return problems.empty() ? pl::kExitOk : pl::kExitValidation;
  }
  return pl::run_stage(*chosen, config, std::cerr);
}
