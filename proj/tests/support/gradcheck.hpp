#pragma once

#include <algorithm>
#include <cmath>

#include "plotline/gat.hpp"

namespace oracle {

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t parameters = 0;
};

// Central differences on every parameter against the analytic gradient.
// Relative error uses max(|analytic|, |numeric|, floor) as denominator. The
// floor sits well above the cancellation noise of the difference quotient
// (about eps * |loss| / step, ~1e-11 here), so vanishing gradients do not
// report noise as error while a wrong gradient of 1e-7 or more still does.
inline GradCheck finite_difference_check(const plotline::gat::GatModel& model, const plotline::graph::ChapterGraph& g,
                                         double pos_weight, double step = 1e-5, double floor = 1e-6) {
  using namespace plotline::gat;
  const Eigen::VectorXd analytic = flatten(backward(model, g, pos_weight).gradients);
  Eigen::VectorXd params = flatten(model);
  GatModel probe = model;
  GradCheck out;
  out.parameters = static_cast<std::size_t>(params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + step;
    unflatten(probe, params);
    const double up = graph_loss(probe, g, pos_weight);
    params[i] = keep - step;
    unflatten(probe, params);
    const double down = graph_loss(probe, g, pos_weight);
    params[i] = keep;
    const double numeric = (up - down) / (2 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic[i] - numeric) / denom);
  }
  return out;
}

// Area under the ROC curve of scores for positive vs negative pairs, ties
// counted as one half.
inline double auc(const std::vector<double>& positives, const std::vector<double>& negatives) {
  double wins = 0;
  for (double p : positives)
    for (double n : negatives) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return wins / (static_cast<double>(positives.size()) * static_cast<double>(negatives.size()));
}

}  // namespace oracle
