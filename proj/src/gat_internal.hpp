#pragma once

#include <vector>

#include <Eigen/Dense>

#include "plotline/gat.hpp"

namespace plotline::gat::detail {

// Back-propagates d_out through one layer. Accumulates into dW/da (sized per
// head) and returns the gradient w.r.t. the layer input.
Eigen::MatrixXd layer_backward(const GatLayer& layer, const LayerCache& cache, const Neighborhoods& nbrs,
                               const Eigen::MatrixXd& d_out, double leaky_slope, bool apply_elu, double elu_alpha,
                               std::vector<Eigen::MatrixXd>& dW, std::vector<Eigen::VectorXd>& da);

inline double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }

}  // namespace plotline::gat::detail
