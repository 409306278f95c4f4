#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "plotline/gat.hpp"

namespace plotline::gat {

Projection project_2d(const std::vector<Eigen::VectorXd>& embeddings) {
  if (embeddings.size() < 2) throw std::invalid_argument("projection needs at least two embeddings");
  const auto m = static_cast<Eigen::Index>(embeddings.size());
  const Eigen::Index d = embeddings.front().size();
  Eigen::MatrixXd X(m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (embeddings[static_cast<std::size_t>(i)].size() != d) throw std::invalid_argument("embeddings differ in dimension");
    X.row(i) = embeddings[static_cast<std::size_t>(i)].transpose();
  }
  bool identical = true;
  for (Eigen::Index i = 1; i < m && identical; ++i) identical = X.row(i) == X.row(0);
  const Eigen::RowVectorXd mean = X.colwise().mean();
  X.rowwise() -= mean;

  Projection out;
  out.points = Eigen::MatrixXd::Zero(m, 2);
  out.components = Eigen::MatrixXd::Zero(d, 2);
  if (identical) {
    out.degenerate = true;
    out.eigenvalues = Eigen::VectorXd::Zero(d);
    out.warning = "all embeddings are identical; projection is all zeros";
    return out;
  }

  const Eigen::MatrixXd cov = X.transpose() * X / static_cast<double>(m - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  out.eigenvalues = eig.eigenvalues().reverse();
  const Eigen::Index keep = std::min<Eigen::Index>(2, d);
  for (Eigen::Index c = 0; c < keep; ++c) {
    Eigen::VectorXd comp = eig.eigenvectors().col(d - 1 - c);
    for (Eigen::Index r = 0; r < d; ++r) {
      if (std::abs(comp[r]) > 1e-12) {
        if (comp[r] < 0.0) comp = -comp;
        break;
      }
    }
    out.components.col(c) = comp;
  }
  out.points = X * out.components;
  return out;
}

}  // namespace plotline::gat
