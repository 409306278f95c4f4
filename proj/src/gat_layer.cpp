#include <algorithm>
#include <cmath>
#include <string>

#include "gat_internal.hpp"
#include "plotline/error.hpp"

namespace plotline::gat {

using detail::leaky;

std::size_t GatLayer::parameter_count() const {
  return static_cast<std::size_t>(heads) * static_cast<std::size_t>(d_in * d_head + 2 * d_head);
}

Neighborhoods neighborhoods(const graph::AdjacencyMatrix& adjacency) {
  const std::size_t n = adjacency.size();
  Neighborhoods nbrs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || adjacency.at(i, j)) nbrs[i].push_back(static_cast<int>(j));
    }
  }
  return nbrs;
}

Eigen::VectorXd attention_logits(const GatLayer& layer, const Eigen::VectorXd& h_i, const Eigen::VectorXd& h_j,
                                 double leaky_slope) {
  if (h_i.size() != layer.d_in || h_j.size() != layer.d_in) {
    throw DimensionMismatch("attention input has dimension " + std::to_string(h_i.size()) + ", layer expects " +
                            std::to_string(layer.d_in));
  }
  Eigen::VectorXd out(layer.heads);
  for (int k = 0; k < layer.heads; ++k) {
    const auto& W = layer.W[static_cast<std::size_t>(k)];
    const auto& a = layer.a[static_cast<std::size_t>(k)];
    const Eigen::VectorXd wi = W.transpose() * h_i;
    const Eigen::VectorXd wj = W.transpose() * h_j;
    out[k] = leaky(a.head(layer.d_head).dot(wi) + a.tail(layer.d_head).dot(wj), leaky_slope);
  }
  return out;
}

std::vector<double> attention_coefficients(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

Eigen::MatrixXd layer_forward(const GatLayer& layer, const Eigen::MatrixXd& H, const Neighborhoods& nbrs,
                              double leaky_slope, bool apply_elu, double elu_alpha, LayerCache* cache) {
  if (H.cols() != layer.d_in) {
    throw DimensionMismatch("layer input has " + std::to_string(H.cols()) + " columns, expected " +
                            std::to_string(layer.d_in));
  }
  if (static_cast<std::size_t>(H.rows()) != nbrs.size()) {
    throw DimensionMismatch("feature rows do not match the number of nodes");
  }
  const Eigen::Index n = H.rows();
  const int dh = layer.d_head;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, layer.out_dim());
  if (cache) {
    cache->input = H;
    cache->projected.assign(static_cast<std::size_t>(layer.heads), {});
    cache->scores.assign(static_cast<std::size_t>(layer.heads), {});
    cache->alpha.assign(static_cast<std::size_t>(layer.heads), {});
  }

  std::vector<double> logits;
  for (int k = 0; k < layer.heads; ++k) {
    const auto& a = layer.a[static_cast<std::size_t>(k)];
    const Eigen::MatrixXd G = H * layer.W[static_cast<std::size_t>(k)];
    const Eigen::VectorXd self_score = G * a.head(dh);
    const Eigen::VectorXd nbr_score = G * a.tail(dh);
    Eigen::MatrixXd head_out = Eigen::MatrixXd::Zero(n, dh);
    std::vector<std::vector<double>> scores(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> alphas(static_cast<std::size_t>(n));

    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& nb = nbrs[static_cast<std::size_t>(i)];
      auto& e = scores[static_cast<std::size_t>(i)];
      e.resize(nb.size());
      logits.resize(nb.size());
      for (std::size_t t = 0; t < nb.size(); ++t) {
        e[t] = self_score[i] + nbr_score[nb[t]];
        logits[t] = leaky(e[t], leaky_slope);
      }
      auto alpha = attention_coefficients(logits);
      for (std::size_t t = 0; t < nb.size(); ++t) head_out.row(i) += alpha[t] * G.row(nb[t]);
      alphas[static_cast<std::size_t>(i)] = std::move(alpha);
    }

    if (layer.aggregation == Aggregation::concat) {
      P.middleCols(static_cast<Eigen::Index>(k) * dh, dh) = head_out;
    } else {
      P += head_out / static_cast<double>(layer.heads);
    }
    if (cache) {
      cache->projected[static_cast<std::size_t>(k)] = G;
      cache->scores[static_cast<std::size_t>(k)] = std::move(scores);
      cache->alpha[static_cast<std::size_t>(k)] = std::move(alphas);
    }
  }

  Eigen::MatrixXd out = P;
  if (apply_elu) {
    out = P.unaryExpr([elu_alpha](double x) { return x > 0.0 ? x : elu_alpha * std::expm1(x); });
  }
  if (cache) {
    cache->pre_activation = std::move(P);
    cache->output = out;
  }
  return out;
}

namespace detail {

Eigen::MatrixXd layer_backward(const GatLayer& layer, const LayerCache& cache, const Neighborhoods& nbrs,
                               const Eigen::MatrixXd& d_out, double leaky_slope, bool apply_elu, double elu_alpha,
                               std::vector<Eigen::MatrixXd>& dW, std::vector<Eigen::VectorXd>& da) {
  const Eigen::Index n = cache.input.rows();
  const int dh = layer.d_head;
  Eigen::MatrixXd dP = d_out;
  if (apply_elu) {
    dP = d_out.cwiseProduct(cache.pre_activation.unaryExpr(
        [elu_alpha](double x) { return x > 0.0 ? 1.0 : elu_alpha * std::exp(x); }));
  }

  Eigen::MatrixXd dH = Eigen::MatrixXd::Zero(n, layer.d_in);
  for (int k = 0; k < layer.heads; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Eigen::MatrixXd dO = layer.aggregation == Aggregation::concat
                                   ? Eigen::MatrixXd(dP.middleCols(static_cast<Eigen::Index>(k) * dh, dh))
                                   : Eigen::MatrixXd(dP / static_cast<double>(layer.heads));
    const auto& G = cache.projected[ks];
    const auto& a = layer.a[ks];
    Eigen::MatrixXd dG = Eigen::MatrixXd::Zero(n, dh);
    Eigen::VectorXd d_self = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd d_nbr = Eigen::VectorXd::Zero(n);

    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& nb = nbrs[static_cast<std::size_t>(i)];
      const auto& alpha = cache.alpha[ks][static_cast<std::size_t>(i)];
      const auto& e = cache.scores[ks][static_cast<std::size_t>(i)];
      std::vector<double> d_alpha(nb.size());
      double weighted = 0.0;
      for (std::size_t t = 0; t < nb.size(); ++t) {
        dG.row(nb[t]) += alpha[t] * dO.row(i);
        d_alpha[t] = dO.row(i).dot(G.row(nb[t]));
        weighted += alpha[t] * d_alpha[t];
      }
      for (std::size_t t = 0; t < nb.size(); ++t) {
        const double d_logit = alpha[t] * (d_alpha[t] - weighted);
        const double d_score = d_logit * (e[t] > 0.0 ? 1.0 : leaky_slope);
        d_self[i] += d_score;
        d_nbr[nb[t]] += d_score;
      }
    }

    da[ks].head(dh) += G.transpose() * d_self;
    da[ks].tail(dh) += G.transpose() * d_nbr;
    dG += d_self * a.head(dh).transpose() + d_nbr * a.tail(dh).transpose();
    dW[ks] += cache.input.transpose() * dG;
    dH += dG * layer.W[ks].transpose();
  }
  return dH;
}

}  // namespace detail
}  // namespace plotline::gat
