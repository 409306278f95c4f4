#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "plotline/error.hpp"
#include "plotline/gat.hpp"

namespace plotline::gat {

namespace {

constexpr char kMagic[8] = {'P', 'L', 'O', 'T', 'G', 'A', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string raw(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw CheckpointError("checkpoint is truncated");
  }
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const GatModel& model) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(model.layers.size()));
  put_u64(out, model.seed);
  put_f64(out, model.leaky_slope);
  put_f64(out, model.elu_alpha);
  for (const auto& layer : model.layers) {
    put_u32(out, static_cast<std::uint32_t>(layer.heads));
    put_u32(out, static_cast<std::uint32_t>(layer.d_in));
    put_u32(out, static_cast<std::uint32_t>(layer.d_head));
    put_u32(out, layer.aggregation == Aggregation::concat ? 0u : 1u);
  }
  const Eigen::VectorXd params = flatten(model);
  for (Eigen::Index i = 0; i < params.size(); ++i) put_f64(out, params[i]);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoFailure("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoFailure("write failed for " + path);
}

GatModel load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes));
  if (r.raw(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) throw CheckpointError(path + " is not a model checkpoint");
  if (const auto v = r.u32(); v != kVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(v));
  const auto n_layers = r.u32();
  if (n_layers == 0 || n_layers > 64) throw CheckpointError("implausible layer count");
  GatModel model;
  model.seed = r.u64();
  model.leaky_slope = r.f64();
  model.elu_alpha = r.f64();
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    GatLayer layer;
    layer.heads = static_cast<int>(r.u32());
    layer.d_in = static_cast<int>(r.u32());
    layer.d_head = static_cast<int>(r.u32());
    layer.aggregation = r.u32() == 0 ? Aggregation::concat : Aggregation::average;
    if (layer.heads < 1 || layer.d_in < 1 || layer.d_head < 1) throw CheckpointError("bad layer header");
    if (l > 0 && layer.d_in != model.layers.back().out_dim()) throw CheckpointError("layer dimensions do not compose");
    for (int k = 0; k < layer.heads; ++k) {
      layer.W.push_back(Eigen::MatrixXd::Zero(layer.d_in, layer.d_head));
      layer.a.push_back(Eigen::VectorXd::Zero(2 * layer.d_head));
    }
    model.layers.push_back(std::move(layer));
  }
  Eigen::VectorXd params(static_cast<Eigen::Index>(model.parameter_count()));
  for (Eigen::Index i = 0; i < params.size(); ++i) params[i] = r.f64();
  if (!r.done()) throw CheckpointError("trailing bytes after parameters");
  unflatten(model, params);
  return model;
}

std::string checkpoint_header_json(const GatModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.layers) {
    layers.push_back({{"heads", l.heads},
                      {"d_in", l.d_in},
                      {"d_head", l.d_head},
                      {"d_out", l.out_dim()},
                      {"aggregation", l.aggregation == Aggregation::concat ? "concat" : "average"}});
  }
  nlohmann::json j = {{"format", "plotline-gat"},
                      {"version", kVersion},
                      {"n_layers", model.layers.size()},
                      {"seed", model.seed},
                      {"leaky_slope", model.leaky_slope},
                      {"elu_alpha", model.elu_alpha},
                      {"parameters", model.parameter_count()},
                      {"layers", std::move(layers)},
                      {"encoding", "little-endian float64, layer by layer, head by head, W column-major then a"}};
  return j.dump(2) + "\n";
}

}  // namespace plotline::gat
