#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "agnncert/graph.hpp"
#include "agnncert/hash.hpp"

namespace agnncert {

enum class Strategy { EdgeCentric, NodeCentric };

inline std::string to_string(Strategy s) {
  return s == Strategy::EdgeCentric ? "edge" : "node";
}

/// Memoizes subgraph indices for one fixed (T, scheme) pair. Digesting the
/// same edge or node repeatedly dominates brute-force verification runs, so
/// the attack loops share one cache per context.
class HashCache {
 public:
  HashCache(int T, const HashScheme& scheme) : T_(T), scheme_(scheme) {}

  int edge_index(NodeId u, NodeId v, bool directed) {
    const Edge key = canonicalize_edge(u, v, directed);
    auto it = edge_idx_.find(key);
    if (it != edge_idx_.end()) return it->second;
    const int idx = edge_subgraph_index(u, v, T_, scheme_, directed);
    edge_idx_.emplace(key, idx);
    return idx;
  }

  int node_index(NodeId u) {
    auto it = node_idx_.find(u);
    if (it != node_idx_.end()) return it->second;
    const int idx = node_subgraph_index(u, T_, scheme_);
    node_idx_.emplace(u, idx);
    return idx;
  }

 private:
  int T_;
  HashScheme scheme_;
  std::map<Edge, int> edge_idx_;
  std::map<NodeId, int> node_idx_;
};

/// T subgraphs of one division, indexed 1..T (stored at position i-1).
/// virtual_nodes records the zero-feature aggregator node inserted into
/// node-centric graph-classification subgraphs, nullopt elsewhere.
struct SubgraphSet {
  int T = 0;
  Strategy strategy = Strategy::EdgeCentric;
  Task::Kind task = Task::Kind::NodeClassification;
  std::vector<Graph> subgraphs;
  std::vector<std::optional<NodeId>> virtual_nodes;

  const Graph& subgraph(int index) const { return subgraphs.at(index - 1); }
};

namespace detail {

inline void copy_all_nodes(const Graph& g, Graph& out) {
  for (const auto& [id, feat] : g.features()) {
    out.add_node(id, feat, g.node_label(id));
  }
}

inline int resolve_edge_index(HashCache* cache, NodeId u, NodeId v, int T,
                              const HashScheme& scheme, bool directed) {
  return cache ? cache->edge_index(u, v, directed)
               : edge_subgraph_index(u, v, T, scheme, directed);
}

inline int resolve_node_index(HashCache* cache, NodeId u, int T,
                              const HashScheme& scheme) {
  return cache ? cache->node_index(u) : node_subgraph_index(u, T, scheme);
}

}  // namespace detail

/// Edge-centric division: every edge hashes into exactly one of T buckets,
/// so subgraph edge sets are pairwise disjoint and their union is E. Node
/// classification keeps the full node set in every subgraph; graph
/// classification drops the nodes left isolated in each subgraph.
inline SubgraphSet divide_edge_centric(const Graph& g, int T,
                                       const HashScheme& scheme,
                                       const Task& task,
                                       HashCache* cache = nullptr) {
  if (T < 1) throw std::invalid_argument("subgraph count T must be >= 1");
  std::vector<std::set<Edge>> buckets(T);
  for (const auto& [u, v] : g.edges()) {
    const int idx =
        detail::resolve_edge_index(cache, u, v, T, scheme, g.directed());
    buckets[idx - 1].insert({u, v});
  }

  SubgraphSet out;
  out.T = T;
  out.strategy = Strategy::EdgeCentric;
  out.task = task.kind;
  out.subgraphs.reserve(T);
  out.virtual_nodes.assign(T, std::nullopt);
  for (int i = 0; i < T; ++i) {
    Graph sub(g.directed());
    if (task.kind == Task::Kind::NodeClassification) {
      detail::copy_all_nodes(g, sub);
    } else {
      std::set<NodeId> kept;
      for (const auto& [u, v] : buckets[i]) {
        kept.insert(u);
        kept.insert(v);
      }
      for (NodeId id : kept) sub.add_node(id, g.feature(id), g.node_label(id));
    }
    for (const auto& [u, v] : buckets[i]) sub.add_edge(u, v);
    sub.set_graph_label(g.graph_label());
    out.subgraphs.push_back(std::move(sub));
  }
  return out;
}

/// Node-centric division: each undirected edge becomes two directed edges,
/// and a directed edge u->v lands in the subgraph hashed from its source u,
/// co-locating every node's outgoing edges. Graph classification purifies
/// subgraph i down to the index-i nodes and adds a zero-feature aggregator
/// node fed by all of them.
inline SubgraphSet divide_node_centric(const Graph& g, int T,
                                       const HashScheme& scheme,
                                       const Task& task,
                                       HashCache* cache = nullptr) {
  if (T < 1) throw std::invalid_argument("subgraph count T must be >= 1");
  std::vector<std::set<Edge>> buckets(T);
  auto place = [&](NodeId src, NodeId dst) {
    const int idx = detail::resolve_node_index(cache, src, T, scheme);
    buckets[idx - 1].insert({src, dst});
  };
  for (const auto& [u, v] : g.edges()) {
    if (g.directed()) {
      place(u, v);
    } else if (u == v) {
      place(u, u);  // self-loop stays a single directed edge
    } else {
      place(u, v);
      place(v, u);
    }
  }

  SubgraphSet out;
  out.T = T;
  out.strategy = Strategy::NodeCentric;
  out.task = task.kind;
  out.subgraphs.reserve(T);
  out.virtual_nodes.assign(T, std::nullopt);
  for (int i = 0; i < T; ++i) {
    Graph sub(true);
    if (task.kind == Task::Kind::NodeClassification) {
      detail::copy_all_nodes(g, sub);
      for (const auto& [u, v] : buckets[i]) sub.add_edge(u, v);
    } else {
      std::set<NodeId> kept;
      for (const auto& [id, feat] : g.features()) {
        if (detail::resolve_node_index(cache, id, T, scheme) == i + 1) {
          kept.insert(id);
        }
      }
      for (NodeId id : kept) sub.add_node(id, g.feature(id), g.node_label(id));
      for (const auto& [u, v] : buckets[i]) {
        if (kept.count(v) > 0) sub.add_edge(u, v);  // source index is i+1 already
      }
      if (!kept.empty()) {
        const NodeId virt = g.max_node_id() + 1 + (i + 1);
        sub.add_node(virt, FeatureVec(g.feature_dim(), 0.0));
        for (NodeId id : kept) sub.add_edge(id, virt);
        out.virtual_nodes[i] = virt;
      }
    }
    sub.set_graph_label(g.graph_label());
    out.subgraphs.push_back(std::move(sub));
  }
  return out;
}

inline SubgraphSet divide(const Graph& g, int T, const HashScheme& scheme,
                          Strategy strategy, const Task& task,
                          HashCache* cache = nullptr) {
  return strategy == Strategy::EdgeCentric
             ? divide_edge_centric(g, T, scheme, task, cache)
             : divide_node_centric(g, T, scheme, task, cache);
}

}  // namespace agnncert
