#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plotline/graph.hpp"

namespace plotline::gat {

enum class Aggregation { concat, average };

/// One multi-head attention layer. Head k owns a projection W[k]
/// (d_in x d_head) and an attention vector a[k] of length 2 * d_head whose
/// first half scores the receiving node and second half the neighbour.
struct GatLayer {
  int heads = 1;
  int d_in = 0;
  int d_head = 0;
  Aggregation aggregation = Aggregation::concat;
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> a;

  int out_dim() const { return aggregation == Aggregation::concat ? heads * d_head : d_head; }
  std::size_t parameter_count() const;
};

/// Stacked layers. Hidden layers are followed by ELU, the last layer is linear.
struct GatModel {
  std::vector<GatLayer> layers;
  double leaky_slope = 0.2;
  double elu_alpha = 1.0;
  std::uint64_t seed = 0;

  int in_dim() const { return layers.front().d_in; }
  int out_dim() const { return layers.back().out_dim(); }
  std::size_t parameter_count() const;
};

struct ModelConfig {
  int n_layers = 2;
  int hidden_heads = 4;
  int output_heads = 1;
  int d_head = 16;
  int d_z = 16;
  double leaky_slope = 0.2;
};

// Glorot-uniform initialisation from `seed`. The output layer averages its
// heads so the embedding width is d_z regardless of output_heads.
GatModel make_model(int input_dim, const ModelConfig& config, std::uint64_t seed);

// Neighbourhoods with self-loops, each list ascending and containing i.
using Neighborhoods = std::vector<std::vector<int>>;
Neighborhoods neighborhoods(const graph::AdjacencyMatrix& adjacency);

// Per-head d_ij = leaky(a_k . [W_k h_i ; W_k h_j]).
Eigen::VectorXd attention_logits(const GatLayer& layer, const Eigen::VectorXd& h_i,
                                 const Eigen::VectorXd& h_j, double leaky_slope = 0.2);

// Max-shifted softmax.
std::vector<double> attention_coefficients(std::span<const double> logits);

struct LayerCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> projected;                // per head, n x d_head
  std::vector<std::vector<std::vector<double>>> scores;  // per head, per node, per neighbour (pre-leaky)
  std::vector<std::vector<std::vector<double>>> alpha;   // same layout, softmax weights
  Eigen::MatrixXd pre_activation;
  Eigen::MatrixXd output;
};

Eigen::MatrixXd layer_forward(const GatLayer& layer, const Eigen::MatrixXd& H,
                              const Neighborhoods& nbrs, double leaky_slope, bool apply_elu,
                              double elu_alpha = 1.0, LayerCache* cache = nullptr);

struct NodeEmbeddings {
  Eigen::MatrixXd Z;
};

NodeEmbeddings encode(const GatModel& model, const Eigen::MatrixXd& features, const Neighborhoods& nbrs,
                      std::vector<LayerCache>* caches = nullptr);
NodeEmbeddings encode(const GatModel& model, const graph::ChapterGraph& graph);

// sigmoid(Z Z^T), clamped to the open interval (0, 1).
Eigen::MatrixXd decode(const Eigen::MatrixXd& Z);

// Adjacency with the diagonal set to 1.
Eigen::MatrixXd reconstruction_target(const graph::AdjacencyMatrix& adjacency);

// #zeros / #ones of the target.
double auto_pos_weight(const Eigen::MatrixXd& target);

// Mean weighted binary cross-entropy over all entries.
double reconstruction_loss(const Eigen::MatrixXd& target, const Eigen::MatrixXd& a_hat, double pos_weight);
// Same loss evaluated from Z Z^T logits with log-sigmoid identities; used in training.
double reconstruction_loss_from_logits(const Eigen::MatrixXd& target, const Eigen::MatrixXd& logits,
                                       double pos_weight);

struct Gradients {
  std::vector<std::vector<Eigen::MatrixXd>> dW;
  std::vector<std::vector<Eigen::VectorXd>> da;

  static Gradients zeros_like(const GatModel& model);
  Gradients& operator+=(const Gradients& other);
};

struct LossAndGradients {
  double loss = 0.0;
  Gradients gradients;
};

// Loss of one graph and its exact gradient w.r.t. every W and a.
// pos_weight defaults to auto_pos_weight of the graph's target.
LossAndGradients backward(const GatModel& model, const graph::ChapterGraph& graph,
                          std::optional<double> pos_weight = std::nullopt);
LossAndGradients backward(const GatModel& model, const Eigen::MatrixXd& features, const Neighborhoods& nbrs,
                          const Eigen::MatrixXd& target, double pos_weight);

double graph_loss(const GatModel& model, const graph::ChapterGraph& graph,
                  std::optional<double> pos_weight = std::nullopt);

// Flat parameter order: layer by layer, head by head, W (column-major) then a.
Eigen::VectorXd flatten(const GatModel& model);
void unflatten(GatModel& model, const Eigen::VectorXd& params);
Eigen::VectorXd flatten(const Gradients& gradients);

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 5e-3;
  std::uint64_t seed = 0;
  std::optional<double> fixed_pos_weight;  // unset = auto per graph
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int threads = 1;
};

struct TrainResult {
  GatModel model;
  std::vector<double> loss_trace;  // L_r = sum of graph losses, per epoch, before that epoch's update
};

/// Full-batch Adam over the summed reconstruction loss of all graphs.
/// Graph order in each epoch is a seeded shuffle and fixes the summation
/// order, so results are bitwise reproducible for any thread count.
/// Throws NonFiniteLoss, DimensionMismatch.
TrainResult train(GatModel model, const std::vector<graph::ChapterGraph>& graphs, const TrainConfig& config);

// Mean of the node embeddings.
Eigen::VectorXd chapter_embedding(const GatModel& model, const graph::ChapterGraph& graph);

struct Projection {
  Eigen::MatrixXd points;       // m x 2
  Eigen::MatrixXd components;   // d x 2
  Eigen::VectorXd eigenvalues;  // sample-covariance eigenvalues, descending
  bool degenerate = false;
  std::string warning;
};

// PCA onto the top two components. Each component's first nonzero coordinate
// is made positive.
Projection project_2d(const std::vector<Eigen::VectorXd>& embeddings);

// Binary little-endian checkpoint plus a JSON rendering of its header.
void save_checkpoint(const std::string& path, const GatModel& model);
GatModel load_checkpoint(const std::string& path);
std::string checkpoint_header_json(const GatModel& model);

std::string loss_trace_csv(const std::vector<double>& trace);

}  // namespace plotline::gat
