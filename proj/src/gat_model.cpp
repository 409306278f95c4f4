#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "gat_internal.hpp"
#include "plotline/error.hpp"

namespace plotline::gat {

std::size_t GatModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.parameter_count();
  return n;
}

namespace {

GatLayer make_layer(int d_in, int heads, int d_head, Aggregation aggregation, std::mt19937_64& rng) {
  GatLayer layer;
  layer.d_in = d_in;
  layer.heads = heads;
  layer.d_head = d_head;
  layer.aggregation = aggregation;
  const double w_limit = std::sqrt(6.0 / static_cast<double>(d_in + d_head));
  const double a_limit = std::sqrt(6.0 / static_cast<double>(2 * d_head + 1));
  std::uniform_real_distribution<double> w_dist(-w_limit, w_limit);
  std::uniform_real_distribution<double> a_dist(-a_limit, a_limit);
  for (int k = 0; k < heads; ++k) {
    Eigen::MatrixXd W(d_in, d_head);
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
      for (Eigen::Index r = 0; r < W.rows(); ++r) W(r, c) = w_dist(rng);
    }
    Eigen::VectorXd a(2 * d_head);
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = a_dist(rng);
    layer.W.push_back(std::move(W));
    layer.a.push_back(std::move(a));
  }
  return layer;
}

}  // namespace

GatModel make_model(int input_dim, const ModelConfig& config, std::uint64_t seed) {
  if (config.n_layers < 1) throw std::invalid_argument("a model needs at least one layer");
  if (input_dim < 1 || config.d_head < 1 || config.d_z < 1 || config.hidden_heads < 1 || config.output_heads < 1) {
    throw std::invalid_argument("model dimensions and head counts must be positive");
  }
  GatModel model;
  model.seed = seed;
  model.leaky_slope = config.leaky_slope;
  std::mt19937_64 rng(seed);
  int d_in = input_dim;
  for (int l = 0; l + 1 < config.n_layers; ++l) {
    model.layers.push_back(make_layer(d_in, config.hidden_heads, config.d_head, Aggregation::concat, rng));
    d_in = model.layers.back().out_dim();
  }
  model.layers.push_back(make_layer(d_in, config.output_heads, config.d_z, Aggregation::average, rng));
  return model;
}

NodeEmbeddings encode(const GatModel& model, const Eigen::MatrixXd& features, const Neighborhoods& nbrs,
                      std::vector<LayerCache>* caches) {
  if (model.layers.empty()) throw std::invalid_argument("model has no layers");
  if (caches) caches->assign(model.layers.size(), {});
  Eigen::MatrixXd H = features;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const bool hidden = l + 1 < model.layers.size();
    H = layer_forward(model.layers[l], H, nbrs, model.leaky_slope, hidden, model.elu_alpha,
                      caches ? &(*caches)[l] : nullptr);
  }
  return NodeEmbeddings{std::move(H)};
}

NodeEmbeddings encode(const GatModel& model, const graph::ChapterGraph& graph) {
  if (graph.features.cols() != model.in_dim()) {
    throw DimensionMismatch("graph " + graph.book_id + "#" + std::to_string(graph.chapter_index) + " has feature dim " +
                            std::to_string(graph.features.cols()) + ", model expects " + std::to_string(model.in_dim()));
  }
  return encode(model, graph.features, neighborhoods(graph.adjacency));
}

Gradients Gradients::zeros_like(const GatModel& model) {
  Gradients g;
  for (const auto& layer : model.layers) {
    auto& dW = g.dW.emplace_back();
    auto& da = g.da.emplace_back();
    for (int k = 0; k < layer.heads; ++k) {
      dW.push_back(Eigen::MatrixXd::Zero(layer.d_in, layer.d_head));
      da.push_back(Eigen::VectorXd::Zero(2 * layer.d_head));
    }
  }
  return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  for (std::size_t l = 0; l < dW.size(); ++l) {
    for (std::size_t k = 0; k < dW[l].size(); ++k) {
      dW[l][k] += other.dW[l][k];
      da[l][k] += other.da[l][k];
    }
  }
  return *this;
}

Eigen::VectorXd flatten(const GatModel& model) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(model.parameter_count()));
  Eigen::Index pos = 0;
  for (const auto& layer : model.layers) {
    for (int k = 0; k < layer.heads; ++k) {
      const auto& W = layer.W[static_cast<std::size_t>(k)];
      const auto& a = layer.a[static_cast<std::size_t>(k)];
      out.segment(pos, W.size()) = Eigen::Map<const Eigen::VectorXd>(W.data(), W.size());
      pos += W.size();
      out.segment(pos, a.size()) = a;
      pos += a.size();
    }
  }
  return out;
}

void unflatten(GatModel& model, const Eigen::VectorXd& params) {
  if (params.size() != static_cast<Eigen::Index>(model.parameter_count())) {
    throw DimensionMismatch("parameter vector has the wrong length");
  }
  Eigen::Index pos = 0;
  for (auto& layer : model.layers) {
    for (int k = 0; k < layer.heads; ++k) {
      auto& W = layer.W[static_cast<std::size_t>(k)];
      auto& a = layer.a[static_cast<std::size_t>(k)];
      Eigen::Map<Eigen::VectorXd>(W.data(), W.size()) = params.segment(pos, W.size());
      pos += W.size();
      a = params.segment(pos, a.size());
      pos += a.size();
    }
  }
}

Eigen::VectorXd flatten(const Gradients& gradients) {
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < gradients.dW.size(); ++l) {
    for (std::size_t k = 0; k < gradients.dW[l].size(); ++k) total += gradients.dW[l][k].size() + gradients.da[l][k].size();
  }
  Eigen::VectorXd out(total);
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < gradients.dW.size(); ++l) {
    for (std::size_t k = 0; k < gradients.dW[l].size(); ++k) {
      const auto& W = gradients.dW[l][k];
      out.segment(pos, W.size()) = Eigen::Map<const Eigen::VectorXd>(W.data(), W.size());
      pos += W.size();
      out.segment(pos, gradients.da[l][k].size()) = gradients.da[l][k];
      pos += gradients.da[l][k].size();
    }
  }
  return out;
}

}  // namespace plotline::gat
