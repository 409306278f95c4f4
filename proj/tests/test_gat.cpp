#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "generators.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "plotline/error.hpp"
#include "plotline/gat.hpp"

using namespace plotline;
using namespace plotline::gat;

namespace {

std::vector<std::vector<int>> dense_adj(const graph::AdjacencyMatrix& a) {
  std::vector<std::vector<int>> out(a.size(), std::vector<int>(a.size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) out[i][j] = a.at(i, j);
  return out;
}

ModelConfig small_config(int layers = 2, int heads = 2, int d_head = 3) {
  ModelConfig c;
  c.n_layers = layers;
  c.hidden_heads = heads;
  c.output_heads = heads;
  c.d_head = d_head;
  c.d_z = d_head;
  return c;
}

graph::ChapterGraph path_graph(gen::Rng& rng, int n, int d) {
  auto g = gen::random_graph(rng, n, d, 0.0);
  for (int i = 0; i + 1 < n; ++i) g.adjacency.connect(i, i + 1);
  return g;
}

}  // namespace

TEST(Attention, ZeroVectorGivesZeroLogits) {
  gen::Rng rng(1);
  auto m = make_model(4, small_config(1), 9);
  m.layers[0].a[0].setZero();
  m.layers[0].a[1].setZero();
  auto d = attention_logits(m.layers[0], Eigen::VectorXd::Random(4), Eigen::VectorXd::Random(4));
  EXPECT_EQ(d, Eigen::VectorXd::Zero(2));
}

TEST(Attention, SymmetricHalvesAndEqualInputs) {
  auto m = make_model(4, small_config(1), 3);
  auto& L = m.layers[0];
  for (auto& a : L.a) a.tail(L.d_head) = a.head(L.d_head);
  Eigen::VectorXd h = Eigen::VectorXd::LinSpaced(4, -1, 1);
  EXPECT_EQ(attention_logits(L, h, h), attention_logits(L, h, h));
  Eigen::VectorXd h2 = Eigen::VectorXd::LinSpaced(4, 2, -3);
  auto dij = attention_logits(L, h, h2);
  auto dji = attention_logits(L, h2, h);
  for (int k = 0; k < L.heads; ++k) EXPECT_NEAR(dij[k], dji[k], 1e-15);
}

TEST(Attention, MatchesHandEvaluation) {
  gen::Rng rng(2);
  auto m = make_model(3, small_config(1, 2, 2), 5);
  const auto& L = m.layers[0];
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd hi = gen::random_matrix(rng, 3, 1);
    Eigen::VectorXd hj = gen::random_matrix(rng, 3, 1);
    auto d = attention_logits(L, hi, hj, 0.2);
    for (int k = 0; k < 2; ++k) {
      double s = 0;
      for (int c = 0; c < 2; ++c) {
        double wi = 0, wj = 0;
        for (int r = 0; r < 3; ++r) {
          wi += L.W[k](r, c) * hi[r];
          wj += L.W[k](r, c) * hj[r];
        }
        s += L.a[k][c] * wi + L.a[k][2 + c] * wj;
      }
      EXPECT_NEAR(d[k], s > 0 ? s : 0.2 * s, 1e-14);
    }
  }
  EXPECT_THROW(attention_logits(L, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)), DimensionMismatch);
}

TEST(Softmax, AnalyticCases) {
  auto eq = attention_coefficients(std::vector<double>{0.3, 0.3});
  EXPECT_DOUBLE_EQ(eq[0], 0.5);
  auto two = attention_coefficients(std::vector<double>{std::log(2.0), 0.0});
  EXPECT_NEAR(two[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(two[1], 1.0 / 3.0, 1e-15);
  auto big = attention_coefficients(std::vector<double>{1000.0, 999.0});
  EXPECT_TRUE(std::isfinite(big[0]));
  EXPECT_NEAR(big[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(big[1], 1.0 - 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(Layer, IsolatedNodeAttendsToItself) {
  gen::Rng rng(3);
  auto m = make_model(4, small_config(1, 2, 3), 1);
  Eigen::MatrixXd H = gen::random_matrix(rng, 1, 4);
  Neighborhoods nbrs = {{0}};
  auto out = layer_forward(m.layers[0], H, nbrs, 0.2, false);
  // average of heads of W_k h
  Eigen::RowVectorXd expect = (H * m.layers[0].W[0] + H * m.layers[0].W[1]) / 2.0;
  EXPECT_LT((out - expect).norm(), 1e-14);
}

TEST(Layer, PathGraphMatchesDenseOracle) {
  gen::Rng rng(4);
  auto m = make_model(5, small_config(2, 3, 2), 17);
  auto g = path_graph(rng, 4, 5);
  auto nbrs = neighborhoods(g.adjacency);
  for (std::size_t l = 0; l < 2; ++l) {
    const bool hidden = l == 0;
    Eigen::MatrixXd H = gen::random_matrix(rng, 4, m.layers[l].d_in);
    auto got = layer_forward(m.layers[l], H, nbrs, 0.2, hidden);
    auto want = oracle::dense_layer(m.layers[l], H, dense_adj(g.adjacency), 0.2, hidden);
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Layer, CachedAlphaRowsSumToOne) {
  gen::Rng rng(5);
  auto g = gen::random_graph(rng, 6, 4, 0.5);
  auto m = make_model(4, small_config(), 2);
  std::vector<LayerCache> caches;
  encode(m, g.features, neighborhoods(g.adjacency), &caches);
  for (const auto& c : caches)
    for (const auto& head : c.alpha)
      for (const auto& row : head) {
        double s = 0;
        for (double a : row) {
          EXPECT_GE(a, 0.0);
          s += a;
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
      }
}

TEST(Encode, OneLayerEqualsLayerForward) {
  gen::Rng rng(6);
  auto g = gen::random_graph(rng, 5, 4);
  auto m = make_model(4, small_config(1), 8);
  auto nbrs = neighborhoods(g.adjacency);
  EXPECT_EQ(encode(m, g).Z, layer_forward(m.layers[0], g.features, nbrs, m.leaky_slope, false));
}

TEST(Encode, TwoLayersReachTwoHops) {
  gen::Rng rng(7);
  auto g = path_graph(rng, 3, 4);
  auto m = make_model(4, small_config(2), 4);
  auto base = encode(m, g).Z;
  auto moved = g;
  moved.features.row(2).array() += 0.5;
  EXPECT_GT((encode(m, moved).Z.row(0) - base.row(0)).norm(), 1e-9);
  auto one = make_model(4, small_config(1), 4);
  EXPECT_EQ(encode(one, moved).Z.row(0), encode(one, g).Z.row(0));
}

TEST(Encode, MatchesDenseOracleAndPinnedValues) {
  gen::Rng rng(8);
  auto g = gen::random_graph(rng, 5, 4, 0.5);
  auto m = make_model(4, small_config(2, 2, 3), 1234);
  auto Z = encode(m, g).Z;
  auto want = oracle::dense_encode(m, g.features, dense_adj(g.adjacency));
  EXPECT_LT((Z - want).cwiseAbs().maxCoeff(), 1e-13);
  // Pinned after the comparison above first passed.
  EXPECT_NEAR(Z(0, 0), -0.00015887453815374708, 1e-15);
  EXPECT_NEAR(Z(4, 2), -0.0041437822972820587, 1e-15);
}

TEST(Encode, FeatureDimMismatch) {
  gen::Rng rng(9);
  auto g = gen::random_graph(rng, 3, 5);
  auto m = make_model(4, small_config(), 1);
  EXPECT_THROW(encode(m, g), DimensionMismatch);
}

TEST(Decode, ZeroAndOrthogonal) {
  auto P = decode(Eigen::MatrixXd::Zero(3, 2));
  EXPECT_EQ(P, Eigen::MatrixXd::Constant(3, 3, 0.5));
  Eigen::MatrixXd Z(2, 2);
  Z << 3, 0, 0, -2;
  auto Q = decode(Z);
  EXPECT_EQ(Q(0, 1), 0.5);
  EXPECT_GT(Q(0, 0), 0.99);
}

TEST(Decode, SymmetricAndOpenInterval) {
  gen::Rng rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd Z = gen::random_matrix(rng, gen::uniform_int(rng, 1, 7), 3, 40.0);
    auto P = decode(Z);
    EXPECT_LT((P - P.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GT(P.minCoeff(), 0.0);
    EXPECT_LT(P.maxCoeff(), 1.0);
  }
}

TEST(Loss, HalfEverywhereIsLn2) {
  Eigen::MatrixXd A(2, 2);
  A << 1, 0, 0, 1;
  EXPECT_NEAR(reconstruction_loss(A, Eigen::MatrixXd::Constant(2, 2, 0.5), 1.0), std::log(2.0), 1e-15);
}

TEST(Loss, DecreasesAsLogitsScaleTowardTarget) {
  Eigen::MatrixXd Z(3, 2);
  Z << 1, 0, 1, 0.1, -1, 1;
  graph::AdjacencyMatrix adj(3);
  adj.connect(0, 1);
  auto A = reconstruction_target(adj);
  double prev = 1e9;
  for (double s : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double l = reconstruction_loss(A, decode(s * Z), 1.0);
    EXPECT_LT(l, prev);
    prev = l;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(Loss, MatchesScalarOracleAndLogitForm) {
  gen::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto adj = gen::random_adjacency(rng, 4, 0.5);
    auto A = reconstruction_target(adj);
    EXPECT_EQ(A.diagonal(), Eigen::VectorXd::Ones(4));
    Eigen::MatrixXd Z = gen::random_matrix(rng, 4, 3);
    auto P = decode(Z);
    const double pw = auto_pos_weight(A);
    EXPECT_NEAR(reconstruction_loss(A, P, pw), oracle::scalar_loss(A, P, pw), 1e-12);
    EXPECT_NEAR(reconstruction_loss_from_logits(A, Z * Z.transpose(), pw), oracle::scalar_loss(A, P, pw), 1e-12);
  }
}

TEST(Loss, AutoPosWeight) {
  graph::AdjacencyMatrix adj(4);
  adj.connect(0, 1);
  // target ones: 4 diagonal + 2 = 6, zeros 10
  EXPECT_DOUBLE_EQ(auto_pos_weight(reconstruction_target(adj)), 10.0 / 6.0);
}

TEST(Backward, MatchesFiniteDifferences) {
  gen::Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = gen::random_graph(rng, 5, 4, 0.4);
    auto m = make_model(4, small_config(2, 2, 3), 100 + trial);
    auto check = oracle::finite_difference_check(m, g, auto_pos_weight(reconstruction_target(g.adjacency)));
    EXPECT_LT(check.max_rel_error, 1e-4) << "trial " << trial;
    EXPECT_EQ(check.parameters, m.parameter_count());
  }
}

TEST(Backward, ZeroAttentionVectorGivesUniformWeights) {
  // Every logit sits on the leaky-ReLU kink, where the loss is not
  // differentiable in a, so only the forward pass is checked here.
  gen::Rng rng(13);
  auto g = gen::random_graph(rng, 5, 4, 0.5);
  auto m = make_model(4, small_config(2, 2, 3), 77);
  m.layers.back().a[1].setZero();
  std::vector<LayerCache> caches;
  encode(m, g.features, neighborhoods(g.adjacency), &caches);
  for (const auto& row : caches.back().alpha[1])
    for (double a : row) EXPECT_DOUBLE_EQ(a, 1.0 / static_cast<double>(row.size()));
}

TEST(Backward, SaturatedTargetHasVanishingGradient) {
  // One isolated node, embedding far from zero: target 1, sigmoid(|z|^2) ~ 1.
  graph::ChapterGraph g;
  g.nodes = {{"x", 1, {}}};
  g.features = Eigen::MatrixXd::Constant(1, 2, 30.0);
  g.adjacency = graph::AdjacencyMatrix(1);
  auto m = make_model(2, small_config(1, 1, 2), 3);
  m.layers[0].W[0] = Eigen::MatrixXd::Identity(2, 2);
  auto r = backward(m, g, 1.0);
  EXPECT_LT(flatten(r.gradients).cwiseAbs().maxCoeff(), 1e-100);
}

TEST(Pooling, SingleNodeAndPermutationInvariance) {
  gen::Rng rng(14);
  auto m = make_model(4, small_config(), 5);
  auto one = gen::random_graph(rng, 1, 4);
  EXPECT_EQ(chapter_embedding(m, one), encode(m, one).Z.row(0).transpose());
  auto g = gen::random_graph(rng, 6, 4, 0.5);
  auto base = chapter_embedding(m, g);
  auto Z = encode(m, g).Z;
  for (int trial = 0; trial < 20; ++trial) {
    auto perm = gen::random_permutation(rng, 6);
    auto pg = gen::permuted(g, perm);
    EXPECT_LT((chapter_embedding(m, pg) - base).cwiseAbs().maxCoeff(), 1e-12);
    auto PZ = encode(m, pg).Z;
    for (int i = 0; i < 6; ++i) EXPECT_LT((PZ.row(i) - Z.row(perm[i])).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_EQ(base.size(), 3);
}

TEST(Projection, CenteredTwoDimensionalIsRotation) {
  gen::Rng rng(15);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(gen::random_matrix(rng, 2, 1));
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (auto& p : pts) mean += p;
  mean /= 8;
  for (auto& p : pts) p -= mean;
  auto proj = project_2d(pts);
  EXPECT_FALSE(proj.degenerate);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      EXPECT_NEAR((proj.points.row(i) - proj.points.row(j)).norm(), (pts[i] - pts[j]).norm(), 1e-9);
}

TEST(Projection, IdenticalInputsDegenerate) {
  std::vector<Eigen::VectorXd> pts(4, Eigen::Vector3d(0.1, 0.7, -0.3));
  auto proj = project_2d(pts);
  EXPECT_TRUE(proj.degenerate);
  EXPECT_FALSE(proj.warning.empty());
  EXPECT_EQ(proj.points, Eigen::MatrixXd::Zero(4, 2));
  EXPECT_THROW(project_2d({Eigen::Vector3d::Zero()}), std::invalid_argument);
}

TEST(Projection, ResidualEqualsDroppedEigenvalues) {
  gen::Rng rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 10; ++i) pts.push_back(gen::random_matrix(rng, 8, 1));
    auto proj = project_2d(pts);
    Eigen::MatrixXd X(10, 8);
    for (int i = 0; i < 10; ++i) X.row(i) = pts[i].transpose();
    X.rowwise() -= X.colwise().mean();
    const Eigen::MatrixXd recon = proj.points * proj.components.transpose();
    const double residual = (X - recon).squaredNorm() / 9.0;
    EXPECT_NEAR(residual, proj.eigenvalues.tail(6).sum(), 1e-9);
    for (int c = 0; c < 2; ++c) {
      int first = 0;
      while (std::abs(proj.components(first, c)) <= 1e-12) ++first;
      EXPECT_GT(proj.components(first, c), 0.0);
    }
  }
}

TEST(Checkpoint, RoundTripAndCorruption) {
  auto m = make_model(7, small_config(2, 3, 4), 99);
  const auto dir = std::filesystem::temp_directory_path() / "plotline_ckpt";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "m.bin").string();
  save_checkpoint(path, m);
  auto back = load_checkpoint(path);
  EXPECT_EQ(flatten(back), flatten(m));
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.layers.size(), 2u);
  EXPECT_EQ(back.layers[0].heads, 3);
  EXPECT_NE(checkpoint_header_json(m).find("\"n_layers\""), std::string::npos);

  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 8));
  }
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "not a model";
  }
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  std::filesystem::remove_all(dir);
}

TEST(Model, ShapesAndParameterCount) {
  ModelConfig c;  // defaults: 2 layers, 4 hidden heads x 16, output 16
  auto m = make_model(43, c, 1);
  EXPECT_EQ(m.layers[0].out_dim(), 64);
  EXPECT_EQ(m.out_dim(), 16);
  EXPECT_EQ(m.layers[0].parameter_count(), 4u * (43 * 16 + 32));
  EXPECT_EQ(static_cast<std::size_t>(flatten(m).size()), m.parameter_count());
  EXPECT_EQ(make_model(43, c, 1).layers[1].W[0], m.layers[1].W[0]);
  EXPECT_NE(make_model(43, c, 2).layers[1].W[0], m.layers[1].W[0]);
}
