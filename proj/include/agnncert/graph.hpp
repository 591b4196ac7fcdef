#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace agnncert {

using NodeId = std::int64_t;
using Edge = std::pair<NodeId, NodeId>;
using FeatureVec = std::vector<double>;

/// Canonical storage form of an edge: directed edges keep their orientation,
/// undirected edges put the smaller endpoint first.
inline Edge canonicalize_edge(NodeId u, NodeId v, bool directed) {
  if (directed || u <= v) return {u, v};
  return {v, u};
}

/// Node/graph data shared by every other component. Immutable by convention
/// once built: all operations below are pure and return fresh graphs.
class Graph {
 public:
  Graph() = default;
  explicit Graph(bool directed) : directed_(directed) {}

  bool directed() const { return directed_; }

  void add_node(NodeId id, FeatureVec features,
                std::optional<int> label = std::nullopt) {
    if (features_.count(id) > 0) {
      throw std::invalid_argument("duplicate node id " + std::to_string(id));
    }
    features_.emplace(id, std::move(features));
    if (label) node_labels_[id] = *label;
  }

  /// Inserts the canonical form; duplicates collapse. Endpoint membership is
  /// checked by validate(), not here, so invalid graphs can be constructed
  /// and reported as data.
  void add_edge(NodeId u, NodeId v) {
    edges_.insert(canonicalize_edge(u, v, directed_));
  }

  void set_node_label(NodeId id, int label) { node_labels_[id] = label; }
  void clear_node_labels() { node_labels_.clear(); }
  void set_graph_label(std::optional<int> label) { graph_label_ = label; }

  std::size_t num_nodes() const { return features_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  bool has_node(NodeId id) const { return features_.count(id) > 0; }

  bool has_edge(NodeId u, NodeId v) const {
    return edges_.count(canonicalize_edge(u, v, directed_)) > 0;
  }

  std::vector<NodeId> nodes() const {
    std::vector<NodeId> out;
    out.reserve(features_.size());
    for (const auto& [id, feat] : features_) out.push_back(id);
    return out;
  }

  const std::set<Edge>& edges() const { return edges_; }

  const FeatureVec& feature(NodeId id) const {
    auto it = features_.find(id);
    if (it == features_.end()) {
      throw std::invalid_argument("unknown node id " + std::to_string(id));
    }
    return it->second;
  }

  const std::map<NodeId, FeatureVec>& features() const { return features_; }

  /// Feature dimensionality of the first node, 0 for an empty graph.
  std::size_t feature_dim() const {
    return features_.empty() ? 0 : features_.begin()->second.size();
  }

  std::optional<int> node_label(NodeId id) const {
    auto it = node_labels_.find(id);
    if (it == node_labels_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<NodeId, int>& node_labels() const { return node_labels_; }
  std::optional<int> graph_label() const { return graph_label_; }

  NodeId max_node_id() const {
    return features_.empty() ? -1 : features_.rbegin()->first;
  }

  /// Nodes whose message reaches v. Undirected: all neighbours. Directed:
  /// in-neighbours only (sources of edges ending at v).
  std::set<NodeId> in_neighbors(NodeId v) const {
    std::set<NodeId> out;
    for (const auto& [a, b] : edges_) {
      if (directed_) {
        if (b == v) out.insert(a);
      } else {
        if (a == v) out.insert(b);
        if (b == v) out.insert(a);
      }
    }
    return out;
  }

  std::vector<Edge> incident_edges(NodeId v) const {
    std::vector<Edge> out;
    for (const auto& e : edges_) {
      if (e.first == v || e.second == v) out.push_back(e);
    }
    return out;
  }

  std::size_t degree(NodeId v) const { return incident_edges(v).size(); }

  bool operator==(const Graph& other) const {
    return directed_ == other.directed_ && features_ == other.features_ &&
           edges_ == other.edges_ && node_labels_ == other.node_labels_ &&
           graph_label_ == other.graph_label_;
  }

 private:
  bool directed_ = false;
  std::map<NodeId, FeatureVec> features_;  // node set == key set
  std::set<Edge> edges_;                   // canonical form
  std::map<NodeId, int> node_labels_;
  std::optional<int> graph_label_;
};

/// Structural invariant check. Violations are data, not failures: an empty
/// report means the graph is valid.
inline std::vector<std::string> validate(const Graph& g,
                                         std::optional<int> num_classes = std::nullopt) {
  std::vector<std::string> report;
  for (const auto& [u, v] : g.edges()) {
    if (!g.has_node(u)) {
      report.push_back("edge endpoint " + std::to_string(u) + " not in node set");
    }
    if (v != u && !g.has_node(v)) {
      report.push_back("edge endpoint " + std::to_string(v) + " not in node set");
    }
    if (!g.directed() && u > v) {
      report.push_back("undirected edge (" + std::to_string(u) + "," +
                       std::to_string(v) + ") not in canonical order");
    }
  }
  const std::size_t d = g.feature_dim();
  if (g.num_nodes() > 0 && d == 0) {
    report.push_back("feature vectors must have dimensionality >= 1");
  }
  for (const auto& [id, feat] : g.features()) {
    if (feat.size() != d) {
      std::ostringstream os;
      os << "node " << id << " feature dim " << feat.size()
         << " != expected " << d;
      report.push_back(os.str());
    }
    if (id < 0) {
      report.push_back("node id " + std::to_string(id) + " is negative");
    }
  }
  auto check_class = [&](int y, const std::string& what) {
    if (y < 0 || (num_classes && y >= *num_classes)) {
      report.push_back(what + " class index " + std::to_string(y) +
                       " out of range");
    }
  };
  for (const auto& [id, y] : g.node_labels()) {
    if (!g.has_node(id)) {
      report.push_back("label on unknown node " + std::to_string(id));
    }
    check_class(y, "node " + std::to_string(id));
  }
  if (g.graph_label()) check_class(*g.graph_label(), "graph");
  return report;
}

/// Declarative arbitrary attack: edge edits, node injections/deletions with
/// their incident edges, and feature rewrites.
struct InjectedNode {
  FeatureVec features;
  std::set<Edge> incident_edges;  // each edge touches the injected id
};

struct Perturbation {
  std::set<Edge> edges_added;
  std::set<Edge> edges_deleted;
  std::map<NodeId, InjectedNode> nodes_added;
  std::set<NodeId> nodes_deleted;
  std::map<NodeId, FeatureVec> features_rewritten;

  bool empty() const {
    return edges_added.empty() && edges_deleted.empty() &&
           nodes_added.empty() && nodes_deleted.empty() &&
           features_rewritten.empty();
  }
};

/// Consistency of a perturbation against its target graph. Empty report
/// means apply_perturbation will accept it.
inline std::vector<std::string> check_perturbation(const Graph& g,
                                                   const Perturbation& p) {
  std::vector<std::string> report;
  auto name = [](const Edge& e) {
    return "(" + std::to_string(e.first) + "," + std::to_string(e.second) + ")";
  };
  auto touches = [](const Edge& e, NodeId v) {
    return e.first == v || e.second == v;
  };

  const NodeId max_id = g.max_node_id();
  for (const auto& [id, inj] : p.nodes_added) {
    if (g.has_node(id)) {
      report.push_back("injected node " + std::to_string(id) + " already exists");
    }
    if (id <= max_id) {
      report.push_back("injected node id " + std::to_string(id) +
                       " must exceed max original id " + std::to_string(max_id));
    }
    if (g.num_nodes() > 0 && inj.features.size() != g.feature_dim()) {
      report.push_back("injected node " + std::to_string(id) +
                       " feature dim mismatch");
    }
    for (const auto& e : inj.incident_edges) {
      if (!touches(e, id)) {
        report.push_back("edge " + name(e) + " in entry of injected node " +
                         std::to_string(id) + " does not touch it");
      }
      const NodeId other = e.first == id ? e.second : e.first;
      const bool other_injected = p.nodes_added.count(other) > 0;
      if (other != id && !other_injected && !g.has_node(other)) {
        report.push_back("edge " + name(e) + " endpoint " +
                         std::to_string(other) + " unknown");
      }
      if (p.nodes_deleted.count(other) > 0) {
        report.push_back("edge " + name(e) + " touches deleted node " +
                         std::to_string(other));
      }
    }
  }
  for (NodeId v : p.nodes_deleted) {
    if (!g.has_node(v)) {
      report.push_back("deleted node " + std::to_string(v) + " not in graph");
    }
  }
  for (const auto& [v, feat] : p.features_rewritten) {
    if (!g.has_node(v)) {
      report.push_back("rewritten node " + std::to_string(v) + " not in graph");
    } else if (feat.size() != g.feature_dim()) {
      report.push_back("rewritten node " + std::to_string(v) +
                       " feature dim mismatch");
    }
    if (p.nodes_deleted.count(v) > 0) {
      report.push_back("node " + std::to_string(v) +
                       " both deleted and feature-rewritten");
    }
  }
  auto check_edge_nodes = [&](const Edge& e, const std::string& what) {
    for (NodeId v : {e.first, e.second}) {
      if (!g.has_node(v)) {
        report.push_back(what + " edge " + name(e) + " endpoint " +
                         std::to_string(v) + " unknown");
      }
      if (p.nodes_added.count(v) > 0 || p.nodes_deleted.count(v) > 0) {
        report.push_back(what + " edge " + name(e) +
                         " touches an injected or deleted node");
      }
    }
  };
  for (const auto& e : p.edges_added) {
    check_edge_nodes(e, "added");
    if (g.has_edge(e.first, e.second)) {
      report.push_back("added edge " + name(e) + " already exists");
    }
  }
  for (const auto& e : p.edges_deleted) {
    check_edge_nodes(e, "deleted");
    if (!g.has_edge(e.first, e.second)) {
      report.push_back("deleted edge " + name(e) + " does not exist");
    }
  }
  return report;
}

/// Edges of g incident to any node of the given set. Each edge appears once
/// even when both endpoints are in the set.
inline std::set<Edge> edges_incident_to(const Graph& g,
                                        const std::set<NodeId>& nodes) {
  std::set<Edge> out;
  for (const auto& e : g.edges()) {
    if (nodes.count(e.first) > 0 || nodes.count(e.second) > 0) out.insert(e);
  }
  return out;
}

/// The induced edge set of injected nodes, deduplicated across entries (an
/// edge between two injected nodes may be recorded in either entry).
inline std::set<Edge> induced_added_edges(const Perturbation& p, bool directed) {
  std::set<Edge> out;
  for (const auto& [id, inj] : p.nodes_added) {
    for (const auto& [a, b] : inj.incident_edges) {
      out.insert(canonicalize_edge(a, b, directed));
    }
  }
  return out;
}

inline std::set<NodeId> rewritten_node_set(const Perturbation& p) {
  std::set<NodeId> out;
  for (const auto& [id, feat] : p.features_rewritten) out.insert(id);
  return out;
}

/// Applies the attack, returning the perturbed graph. The input graph is
/// untouched. Inconsistent perturbations are rejected with the first
/// diagnostic from check_perturbation.
inline Graph apply_perturbation(const Graph& g, const Perturbation& p) {
  auto report = check_perturbation(g, p);
  if (!report.empty()) {
    throw std::invalid_argument("inconsistent perturbation: " + report.front());
  }
  Graph out(g.directed());
  for (const auto& [id, feat] : g.features()) {
    if (p.nodes_deleted.count(id) > 0) continue;
    auto rewritten = p.features_rewritten.find(id);
    out.add_node(id, rewritten != p.features_rewritten.end() ? rewritten->second
                                                             : feat,
                 g.node_label(id));
  }
  for (const auto& [id, inj] : p.nodes_added) {
    out.add_node(id, inj.features);
  }
  for (const auto& e : g.edges()) {
    if (p.edges_deleted.count(e) > 0) continue;
    if (p.nodes_deleted.count(e.first) > 0 || p.nodes_deleted.count(e.second) > 0)
      continue;
    out.add_edge(e.first, e.second);
  }
  for (const auto& e : p.edges_added) out.add_edge(e.first, e.second);
  for (const auto& [id, inj] : p.nodes_added) {
    for (const auto& e : inj.incident_edges) out.add_edge(e.first, e.second);
  }
  out.set_graph_label(g.graph_label());
  return out;
}

/// Classification target: one node of the graph, or the graph itself.
struct Task {
  enum class Kind { NodeClassification, GraphClassification };

  Kind kind = Kind::GraphClassification;
  NodeId target = -1;

  static Task node_classification(NodeId v) {
    return Task{Kind::NodeClassification, v};
  }
  static Task graph_classification() {
    return Task{Kind::GraphClassification, -1};
  }
};

}  // namespace agnncert
