#include <fstream>

#include <json.hpp>

#include "plotline/error.hpp"
#include "plotline/graph.hpp"

namespace plotline::graph {

using nlohmann::json;

std::string to_json_line(const ChapterGraph& graph) {
  json nodes = json::array();
  for (const auto& n : graph.nodes) {
    json locs = json::array();
    for (const auto& l : n.locations) locs.push_back({l.sentence, l.start, l.end});
    nodes.push_back({{"surface", n.surface}, {"mentions", n.mention_count}, {"locations", std::move(locs)}});
  }
  json features = json::array();
  for (Eigen::Index r = 0; r < graph.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < graph.features.cols(); ++c) features.push_back(graph.features(r, c));
  }
  json edges = json::array();
  for (const auto& [i, j] : graph.adjacency.edges()) edges.push_back({i, j});
  json j = {{"book_id", graph.book_id},
            {"chapter_index", graph.chapter_index},
            {"placeholder", graph.placeholder},
            {"dim", graph.features.cols()},
            {"nodes", std::move(nodes)},
            {"features", std::move(features)},
            {"adjacency", std::move(edges)}};
  return j.dump();
}

ChapterGraph graph_from_json_line(std::string_view line) {
  const json j = json::parse(line);
  ChapterGraph g;
  g.book_id = j.at("book_id").get<std::string>();
  g.chapter_index = j.at("chapter_index").get<int>();
  g.placeholder = j.value("placeholder", false);
  for (const auto& n : j.at("nodes")) {
    EntityNode node;
    node.surface = n.at("surface").get<std::string>();
    node.mention_count = n.value("mentions", 0);
    for (const auto& l : n.value("locations", json::array())) node.locations.push_back({l.at(0), l.at(1), l.at(2)});
    g.nodes.push_back(std::move(node));
  }
  const auto n = static_cast<Eigen::Index>(g.nodes.size());
  const auto d = j.at("dim").get<Eigen::Index>();
  const auto& features = j.at("features");
  if (static_cast<Eigen::Index>(features.size()) != n * d) throw Error("graph features do not match nodes x dim");
  g.features.resize(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) g.features(r, c) = features.at(static_cast<std::size_t>(r * d + c)).get<double>();
  }
  g.adjacency = AdjacencyMatrix(static_cast<std::size_t>(n));
  for (const auto& e : j.at("adjacency")) {
    const auto a = e.at(0).get<std::size_t>();
    const auto b = e.at(1).get<std::size_t>();
    if (a >= g.nodes.size() || b >= g.nodes.size()) throw Error("graph edge refers to a missing node");
    g.adjacency.connect(a, b);
  }
  return g;
}

std::vector<ChapterGraph> load_graphs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::vector<ChapterGraph> graphs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      graphs.push_back(graph_from_json_line(line));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return graphs;
}

void save_graphs(const std::string& path, const std::vector<ChapterGraph>& graphs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path);
  for (const auto& g : graphs) out << to_json_line(g) << '\n';
  if (!out) throw IoFailure("write failed for " + path);
}

}  // namespace plotline::graph
