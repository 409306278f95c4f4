#include <filesystem>
#include <set>

#include <json.hpp>

#include "plotline/error.hpp"
#include "plotline/pipeline.hpp"
#include "plotline/text_util.hpp"

namespace plotline::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads typed values from one object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    if (root.is_null()) return;
    if (!root.is_object()) throw ConfigError("'" + name_ + "' must be an object");
    obj_ = &root;
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_) return;
    auto it = obj_->find(key);
    if (it == obj_->end() || it->is_null()) return;
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!it->is_number_integer()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw ConfigError("");
      }
      out = it->get<T>();
    } catch (const std::exception&) {
      throw ConfigError("'" + path(key) + "' has the wrong type");
    }
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    if (!obj_) return nullptr;
    auto it = obj_->find(key);
    return it == obj_->end() || it->is_null() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  void finish() const {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + path(key) + "'");
    }
  }

 private:
  const json* obj_ = nullptr;
  std::string name_;
  std::set<std::string> seen_;
};

const json& sub(const json* section) {
  static const json null_section;
  return section ? *section : null_section;
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? p : (fs::path(base) / path).lexically_normal().string();
}

std::vector<std::string> string_list(const json* j, const std::string& key) {
  std::vector<std::string> out;
  if (!j) return out;
  if (!j->is_array()) throw ConfigError("'" + key + "' must be an array of strings");
  for (const auto& v : *j) {
    if (!v.is_string()) throw ConfigError("'" + key + "' must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

PipelineConfig parse_config(std::string_view json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  PipelineConfig c;
  Section top(root, "");
  top.read("seed", c.seed);
  top.read("threads", c.threads);

  Section paths(sub(top.raw("paths")), "paths");
  if (const json* raws = paths.raw("raw_texts")) {
    if (!raws->is_array()) throw ConfigError("'paths.raw_texts' must be an array");
    for (const auto& r : *raws) {
      if (!r.is_object() || !r.contains("book_id") || !r.contains("path") || !r["book_id"].is_string() ||
          !r["path"].is_string()) {
        throw ConfigError("'paths.raw_texts' entries need string 'book_id' and 'path'");
      }
      c.raw_texts.push_back({r["book_id"].get<std::string>(), resolve(base_dir, r["path"].get<std::string>())});
    }
  }
  paths.read("annotations", c.annotations);
  paths.read("embedding_table", c.embedding_table);
  paths.read("output_dir", c.output_dir);
  paths.read("references", c.references);
  paths.read("segment_template", c.segment_template);
  paths.read("synopsis_template", c.synopsis_template);
  paths.finish();
  c.annotations = resolve(base_dir, c.annotations);
  c.embedding_table = resolve(base_dir, c.embedding_table);
  c.output_dir = resolve(base_dir, c.output_dir);
  c.references = resolve(base_dir, c.references);
  c.segment_template = resolve(base_dir, c.segment_template);
  c.synopsis_template = resolve(base_dir, c.synopsis_template);

  Section corpus(sub(top.raw("corpus")), "corpus");
  c.heading_patterns = string_list(corpus.raw("heading_patterns"), "corpus.heading_patterns");
  corpus.read("token_joiner", c.graph.selection.token_joiner);
  if (const json* tags = corpus.raw("noun_tags")) c.graph.selection.noun_tags = string_list(tags, "corpus.noun_tags");
  corpus.finish();

  Section graph(sub(top.raw("graph")), "graph");
  graph.read("max_path_len", c.graph.max_path_len);
  graph.read("top_k", c.graph.top_k);
  graph.read("embedding_dim", c.embedding_dim);
  graph.finish();

  Section model(sub(top.raw("model")), "model");
  model.read("n_layers", c.model.n_layers);
  model.read("hidden_heads", c.model.hidden_heads);
  model.read("output_heads", c.model.output_heads);
  model.read("d_head", c.model.d_head);
  model.read("d_z", c.model.d_z);
  model.read("leaky_slope", c.model.leaky_slope);
  model.finish();

  Section train(sub(top.raw("train")), "train");
  train.read("epochs", c.train.epochs);
  train.read("learning_rate", c.train.learning_rate);
  train.read("beta1", c.train.beta1);
  train.read("beta2", c.train.beta2);
  train.read("epsilon", c.train.epsilon);
  if (const json* pw = train.raw("pos_weight")) {
    if (pw->is_number()) {
      c.train.fixed_pos_weight = pw->get<double>();
    } else if (!(pw->is_string() && pw->get<std::string>() == "auto")) {
      throw ConfigError("'train.pos_weight' must be \"auto\" or a number");
    }
  }
  train.finish();

  Section boundary(sub(top.raw("boundary")), "boundary");
  boundary.read("alpha", c.boundary.alpha);
  boundary.read("beta", c.boundary.beta);
  boundary.read("safety_distance", c.boundary.safety_distance);
  boundary.read("calibrate", c.calibrate_beta);
  std::string space = "full";
  boundary.read("embedding_space", space);
  if (space == "full") {
    c.boundary.space = boundary::EmbeddingSpace::full;
  } else if (space == "projected-2d") {
    c.boundary.space = boundary::EmbeddingSpace::projected_2d;
  } else {
    throw ConfigError("'boundary.embedding_space' must be \"full\" or \"projected-2d\"");
  }
  boundary.finish();

  Section llm(sub(top.raw("llm")), "llm");
  llm.read("enabled", c.llm_enabled);
  llm.read("endpoint", c.llm.endpoint);
  llm.read("model", c.llm.model);
  llm.read("api_key_env", c.llm.api_key_env);
  llm.read("max_tokens", c.llm.max_tokens);
  llm.read("temperature", c.llm.temperature);
  llm.read("timeout_seconds", c.llm.timeout_seconds);
  llm.read("max_retries", c.llm.max_retries);
  llm.read("max_concurrent_requests", c.llm.max_concurrent_requests);
  llm.read("budget_tokens", c.budget_tokens);
  llm.read("chars_per_token", c.chars_per_token);
  llm.read("global_pass", c.global_pass);
  llm.finish();

  Section eval(sub(top.raw("eval")), "eval");
  eval.read("window", c.eval_window);
  eval.finish();

  top.finish();
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = text::read_file(path);
  } catch (const IoFailure& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, fs::path(path).parent_path().string().empty() ? "." : fs::path(path).parent_path().string());
}

std::string apply_overrides(std::string_view json_text, const std::vector<std::string>& assignments) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + a + "' is not key=value");
    std::string pointer;
    for (auto part : text::split(std::string_view(a).substr(0, eq), '.')) pointer += "/" + std::string(part);
    const std::string value = a.substr(eq + 1);
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::parse_error&) {
      parsed = value;  // bare strings need no quotes
    }
    root[json::json_pointer(pointer)] = parsed;
  }
  return root.dump();
}

std::string to_json(const PipelineConfig& c) {
  json raws = json::array();
  for (const auto& r : c.raw_texts) raws.push_back({{"book_id", r.book_id}, {"path", r.path}});
  json j = {
      {"seed", c.seed},
      {"threads", c.threads},
      {"paths",
       {{"raw_texts", raws},
        {"annotations", c.annotations},
        {"embedding_table", c.embedding_table},
        {"output_dir", c.output_dir},
        {"references", c.references},
        {"segment_template", c.segment_template},
        {"synopsis_template", c.synopsis_template}}},
      {"corpus",
       {{"heading_patterns", c.heading_patterns},
        {"token_joiner", c.graph.selection.token_joiner},
        {"noun_tags", c.graph.selection.noun_tags}}},
      {"graph", {{"max_path_len", c.graph.max_path_len}, {"top_k", c.graph.top_k}, {"embedding_dim", c.embedding_dim}}},
      {"model",
       {{"n_layers", c.model.n_layers},
        {"hidden_heads", c.model.hidden_heads},
        {"output_heads", c.model.output_heads},
        {"d_head", c.model.d_head},
        {"d_z", c.model.d_z},
        {"leaky_slope", c.model.leaky_slope}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"learning_rate", c.train.learning_rate},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"epsilon", c.train.epsilon},
        {"pos_weight", c.train.fixed_pos_weight ? json(*c.train.fixed_pos_weight) : json("auto")}}},
      {"boundary",
       {{"alpha", c.boundary.alpha},
        {"beta", c.boundary.beta},
        {"safety_distance", c.boundary.safety_distance},
        {"calibrate", c.calibrate_beta},
        {"embedding_space", c.boundary.space == boundary::EmbeddingSpace::full ? "full" : "projected-2d"}}},
      {"llm",
       {{"enabled", c.llm_enabled},
        {"endpoint", c.llm.endpoint},
        {"model", c.llm.model},
        {"api_key_env", c.llm.api_key_env},
        {"max_tokens", c.llm.max_tokens},
        {"temperature", c.llm.temperature},
        {"timeout_seconds", c.llm.timeout_seconds},
        {"max_retries", c.llm.max_retries},
        {"max_concurrent_requests", c.llm.max_concurrent_requests},
        {"budget_tokens", c.budget_tokens},
        {"chars_per_token", c.chars_per_token},
        {"global_pass", c.global_pass}}},
      {"eval", {{"window", c.eval_window}}},
  };
  return j.dump(2) + "\n";
}

std::vector<std::string> validate(const PipelineConfig& c) {
  std::vector<std::string> problems;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };
  need(c.threads >= 1, "threads must be >= 1");
  need(c.graph.max_path_len >= 1, "graph.max_path_len must be >= 1");
  need(c.graph.top_k >= 1, "graph.top_k must be >= 1");
  need(c.embedding_dim >= 1, "graph.embedding_dim must be >= 1");
  need(c.model.n_layers >= 1, "model.n_layers must be >= 1");
  need(c.model.hidden_heads >= 1 && c.model.output_heads >= 1, "model head counts must be >= 1");
  need(c.model.d_head >= 1 && c.model.d_z >= 1, "model.d_head and model.d_z must be >= 1");
  need(c.model.leaky_slope >= 0.0 && c.model.leaky_slope < 1.0, "model.leaky_slope must be in [0, 1)");
  need(c.train.epochs >= 1, "train.epochs must be >= 1");
  need(c.train.learning_rate > 0.0, "train.learning_rate must be > 0");
  need(c.train.beta1 >= 0.0 && c.train.beta1 < 1.0 && c.train.beta2 >= 0.0 && c.train.beta2 < 1.0,
       "train.beta1 and train.beta2 must be in [0, 1)");
  need(c.train.epsilon > 0.0, "train.epsilon must be > 0");
  need(!c.train.fixed_pos_weight || *c.train.fixed_pos_weight > 0.0, "train.pos_weight must be > 0");
  need(c.boundary.alpha >= 1, "boundary.alpha must be >= 1");
  need(c.boundary.beta > 0.0, "boundary.beta must be > 0");
  need(c.boundary.safety_distance >= 0, "boundary.safety_distance must be >= 0");
  need(c.llm.max_retries >= 0, "llm.max_retries must be >= 0");
  need(c.llm.timeout_seconds > 0.0, "llm.timeout_seconds must be > 0");
  need(c.llm.max_concurrent_requests >= 1, "llm.max_concurrent_requests must be >= 1");
  need(c.budget_tokens > 0, "llm.budget_tokens must be > 0");
  need(c.chars_per_token > 0.0, "llm.chars_per_token must be > 0");
  need(c.eval_window >= 0, "eval.window must be >= 0");
  return problems;
}

}  // namespace plotline::pipeline
