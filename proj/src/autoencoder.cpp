#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "gat_internal.hpp"
#include "plotline/error.hpp"
#include "plotline/text_util.hpp"

namespace plotline::gat {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

struct PreparedGraph {
  const graph::ChapterGraph* graph = nullptr;
  Neighborhoods nbrs;
  Eigen::MatrixXd target;
  double pos_weight = 1.0;
};

}  // namespace

Eigen::MatrixXd decode(const Eigen::MatrixXd& Z) {
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  const Eigen::MatrixXd logits = Z * Z.transpose();
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    for (Eigen::Index j = i; j < logits.cols(); ++j) {
      const double p = std::clamp(sigmoid(logits(i, j)), lo, hi);
      out(i, j) = p;
      out(j, i) = p;
    }
  }
  return out;
}

Eigen::MatrixXd reconstruction_target(const graph::AdjacencyMatrix& adjacency) {
  const auto n = static_cast<Eigen::Index>(adjacency.size());
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      A(i, j) = (i == j || adjacency.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) ? 1.0 : 0.0;
    }
  }
  return A;
}

double auto_pos_weight(const Eigen::MatrixXd& target) {
  const double ones = target.sum();
  const double zeros = static_cast<double>(target.size()) - ones;
  return ones > 0.0 ? zeros / ones : 1.0;
}

double reconstruction_loss(const Eigen::MatrixXd& target, const Eigen::MatrixXd& a_hat, double pos_weight) {
  if (target.rows() != a_hat.rows() || target.cols() != a_hat.cols()) {
    throw DimensionMismatch("target and reconstruction differ in shape");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    const double y = target.data()[i];
    const double p = a_hat.data()[i];
    total -= pos_weight * y * std::log(p) + (1.0 - y) * std::log1p(-p);
  }
  return total / static_cast<double>(target.size());
}

double reconstruction_loss_from_logits(const Eigen::MatrixXd& target, const Eigen::MatrixXd& logits,
                                       double pos_weight) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    const double y = target.data()[i];
    const double x = logits.data()[i];
    total += pos_weight * y * softplus(-x) + (1.0 - y) * softplus(x);
  }
  return total / static_cast<double>(target.size());
}

LossAndGradients backward(const GatModel& model, const Eigen::MatrixXd& features, const Neighborhoods& nbrs,
                          const Eigen::MatrixXd& target, double pos_weight) {
  std::vector<LayerCache> caches;
  const Eigen::MatrixXd Z = encode(model, features, nbrs, &caches).Z;
  const Eigen::MatrixXd logits = Z * Z.transpose();

  LossAndGradients out;
  out.loss = reconstruction_loss_from_logits(target, logits, pos_weight);

  const double scale = 1.0 / static_cast<double>(target.size());
  Eigen::MatrixXd d_logits(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double y = target.data()[i];
    const double s = sigmoid(logits.data()[i]);
    d_logits.data()[i] = scale * (-pos_weight * y * (1.0 - s) + (1.0 - y) * s);
  }
  Eigen::MatrixXd grad = (d_logits + d_logits.transpose()) * Z;

  out.gradients = Gradients::zeros_like(model);
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const bool hidden = l + 1 < model.layers.size();
    grad = detail::layer_backward(model.layers[l], caches[l], nbrs, grad, model.leaky_slope, hidden, model.elu_alpha,
                                  out.gradients.dW[l], out.gradients.da[l]);
  }
  return out;
}

LossAndGradients backward(const GatModel& model, const graph::ChapterGraph& graph, std::optional<double> pos_weight) {
  if (graph.features.cols() != model.in_dim()) throw DimensionMismatch("graph feature dim does not match the model");
  const Eigen::MatrixXd target = reconstruction_target(graph.adjacency);
  return backward(model, graph.features, neighborhoods(graph.adjacency), target,
                  pos_weight.value_or(auto_pos_weight(target)));
}

double graph_loss(const GatModel& model, const graph::ChapterGraph& graph, std::optional<double> pos_weight) {
  const Eigen::MatrixXd target = reconstruction_target(graph.adjacency);
  const Eigen::MatrixXd Z = encode(model, graph).Z;
  return reconstruction_loss_from_logits(target, Z * Z.transpose(), pos_weight.value_or(auto_pos_weight(target)));
}

TrainResult train(GatModel model, const std::vector<graph::ChapterGraph>& graphs, const TrainConfig& config) {
  if (config.epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (!(config.learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be non-negative");

  std::vector<PreparedGraph> prepared(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto& g = graphs[i];
    if (g.features.cols() != model.in_dim()) {
      throw DimensionMismatch("graph " + g.book_id + "#" + std::to_string(g.chapter_index) + " has feature dim " +
                              std::to_string(g.features.cols()) + ", model expects " + std::to_string(model.in_dim()));
    }
    prepared[i].graph = &g;
    prepared[i].nbrs = neighborhoods(g.adjacency);
    prepared[i].target = reconstruction_target(g.adjacency);
    prepared[i].pos_weight = config.fixed_pos_weight.value_or(auto_pos_weight(prepared[i].target));
  }

  TrainResult result;
  Eigen::VectorXd params = flatten(model);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(params.size());
  std::mt19937_64 order_rng(config.seed);
  std::vector<std::size_t> order(graphs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<LossAndGradients> per_graph(graphs.size());
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, config.threads)),
                                                    std::max<std::size_t>(1, graphs.size()));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);

    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](std::size_t w) {
      try {
        for (std::size_t i = w; i < prepared.size(); i += workers) {
          const auto& p = prepared[i];
          per_graph[i] = backward(model, p.graph->features, p.nbrs, p.target, p.pos_weight);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    // Single aggregation point, in the seeded order.
    double epoch_loss = 0.0;
    Gradients total = Gradients::zeros_like(model);
    for (std::size_t i : order) {
      epoch_loss += per_graph[i].loss;
      total += per_graph[i].gradients;
    }
    if (!std::isfinite(epoch_loss)) throw NonFiniteLoss(epoch, "reconstruction loss is not finite");
    result.loss_trace.push_back(epoch_loss);

    const Eigen::VectorXd g = flatten(total);
    if (!g.allFinite()) throw NonFiniteLoss(epoch, "gradient is not finite");
    const double t = static_cast<double>(epoch + 1);
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    const double m_corr = 1.0 - std::pow(config.beta1, t);
    const double v_corr = 1.0 - std::pow(config.beta2, t);
    for (Eigen::Index i = 0; i < params.size(); ++i) {
      const double m_hat = m[i] / m_corr;
      const double v_hat = v[i] / v_corr;
      params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
    unflatten(model, params);
  }
  result.model = std::move(model);
  return result;
}

Eigen::VectorXd chapter_embedding(const GatModel& model, const graph::ChapterGraph& graph) {
  return encode(model, graph).Z.colwise().mean().transpose();
}

std::string loss_trace_csv(const std::vector<double>& trace) {
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < trace.size(); ++e) {
    out += std::to_string(e + 1) + "," + text::format_double(trace[e]) + "\n";
  }
  return out;
}

}  // namespace plotline::gat
