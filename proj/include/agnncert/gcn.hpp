#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agnncert/division.hpp"
#include "agnncert/graph.hpp"
#include "agnncert/rng.hpp"

namespace agnncert {

/// Class predicted for an empty graph (purified subgraphs can have no nodes).
inline constexpr int kEmptyGraphClass = 0;

/// K-layer GCN parameters. layers[k] is W^(k+1) with shape d_{k+1} x d_k;
/// dims chains d_0 (input features) through d_K (classes).
struct GcnParams {
  std::vector<int> dims;
  std::vector<Eigen::MatrixXd> layers;

  int num_layers() const { return static_cast<int>(layers.size()); }
  int num_classes() const { return dims.empty() ? 0 : dims.back(); }
};

inline void validate_params(const GcnParams& p) {
  if (p.dims.size() != p.layers.size() + 1) {
    throw std::invalid_argument("dims must chain one entry per layer plus input");
  }
  for (int k = 0; k < p.num_layers(); ++k) {
    const auto& w = p.layers[k];
    if (w.rows() != p.dims[k + 1] || w.cols() != p.dims[k]) {
      std::ostringstream os;
      os << "layer " << k + 1 << " shape " << w.rows() << "x" << w.cols()
         << " does not match dims " << p.dims[k + 1] << "x" << p.dims[k];
      throw std::invalid_argument(os.str());
    }
    if (!w.allFinite()) {
      throw std::invalid_argument("layer " + std::to_string(k + 1) +
                                  " has non-finite entries");
    }
  }
}

/// Seeded uniform init in [-1/sqrt(d_in), +1/sqrt(d_in)], row-major order.
inline GcnParams init_params(std::vector<int> dims, std::uint64_t seed) {
  if (dims.size() < 2) throw std::invalid_argument("need at least one layer");
  GcnParams p;
  p.dims = std::move(dims);
  Xoshiro256ss rng(seed);
  for (std::size_t k = 0; k + 1 < p.dims.size(); ++k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(p.dims[k]));
    Eigen::MatrixXd w(p.dims[k + 1], p.dims[k]);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = rng.uniform(-bound, bound);
      }
    }
    p.layers.push_back(std::move(w));
  }
  return p;
}

namespace detail {

/// Row indices feeding each node's mean: in-neighbours plus the node itself,
/// deduplicated (a self-loop adds nothing beyond the self term).
struct Neighborhoods {
  std::vector<NodeId> order;          // row -> node id, sorted
  std::map<NodeId, int> row_of;       // node id -> row
  std::vector<std::vector<int>> rows; // per node, sorted source rows incl. self
};

inline Neighborhoods build_neighborhoods(const Graph& g) {
  Neighborhoods nb;
  nb.order = g.nodes();
  for (std::size_t i = 0; i < nb.order.size(); ++i) {
    nb.row_of[nb.order[i]] = static_cast<int>(i);
  }
  nb.rows.resize(nb.order.size());
  std::vector<std::set<int>> sources(nb.order.size());
  for (std::size_t i = 0; i < nb.order.size(); ++i) {
    sources[i].insert(static_cast<int>(i));
  }
  for (const auto& [a, b] : g.edges()) {
    const int ra = nb.row_of.at(a);
    const int rb = nb.row_of.at(b);
    if (g.directed()) {
      sources[rb].insert(ra);
    } else {
      sources[ra].insert(rb);
      sources[rb].insert(ra);
    }
  }
  for (std::size_t i = 0; i < nb.order.size(); ++i) {
    nb.rows[i].assign(sources[i].begin(), sources[i].end());
  }
  return nb;
}

inline Eigen::MatrixXd aggregate(const Neighborhoods& nb,
                                 const Eigen::MatrixXd& h) {
  Eigen::MatrixXd z(h.rows(), h.cols());
  for (std::size_t v = 0; v < nb.rows.size(); ++v) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(h.cols());
    for (int u : nb.rows[v]) acc += h.row(u);
    z.row(static_cast<Eigen::Index>(v)) =
        acc / static_cast<double>(nb.rows[v].size());
  }
  return z;
}

/// Transpose of aggregate: scatters each row's averaged gradient back to the
/// rows that fed it.
inline Eigen::MatrixXd aggregate_adjoint(const Neighborhoods& nb,
                                         const Eigen::MatrixXd& grad) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(grad.rows(), grad.cols());
  for (std::size_t v = 0; v < nb.rows.size(); ++v) {
    const double coeff = 1.0 / static_cast<double>(nb.rows[v].size());
    for (int u : nb.rows[v]) {
      out.row(u) += coeff * grad.row(static_cast<Eigen::Index>(v));
    }
  }
  return out;
}

}  // namespace detail

/// Intermediate activations kept for backpropagation.
struct ForwardTrace {
  detail::Neighborhoods neighborhoods;
  std::vector<Eigen::MatrixXd> pooled;   // Z^(k) = A H^(k-1)
  std::vector<Eigen::MatrixXd> pre;      // S^(k) = Z^(k) W^(k)T
};

/// Per-node final-layer logits, rows in sorted node-id order. Every layer
/// averages each node's in-neighbour representations together with its own,
/// applies the layer weights and ReLU; the final layer stays linear so
/// logits can be negative.
inline Eigen::MatrixXd gcn_forward(const Graph& g, const GcnParams& params,
                                   ForwardTrace* trace = nullptr) {
  validate_params(params);
  if (g.num_nodes() > 0 &&
      static_cast<int>(g.feature_dim()) != params.dims.front()) {
    std::ostringstream os;
    os << "feature dim " << g.feature_dim() << " does not match input dim "
       << params.dims.front();
    throw std::invalid_argument(os.str());
  }
  auto nb = detail::build_neighborhoods(g);
  const Eigen::Index n = static_cast<Eigen::Index>(nb.order.size());
  Eigen::MatrixXd h(n, params.dims.front());
  for (Eigen::Index i = 0; i < n; ++i) {
    const FeatureVec& x = g.feature(nb.order[i]);
    for (Eigen::Index j = 0; j < h.cols(); ++j) h(i, j) = x[j];
  }
  if (trace) {
    trace->neighborhoods = nb;
    trace->pooled.clear();
    trace->pre.clear();
  }
  const int K = params.num_layers();
  for (int k = 0; k < K; ++k) {
    Eigen::MatrixXd z = detail::aggregate(nb, h);
    Eigen::MatrixXd s = z * params.layers[k].transpose();
    if (trace) {
      trace->pooled.push_back(z);
      trace->pre.push_back(s);
    }
    h = (k + 1 < K) ? s.cwiseMax(0.0).eval() : std::move(s);
  }
  return h;
}

/// Numerically stable softmax of one logit row.
inline std::vector<double> softmax(const Eigen::VectorXd& logits) {
  const double shift = logits.maxCoeff();
  std::vector<double> out(logits.size());
  double denom = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - shift);
    denom += out[i];
  }
  for (double& p : out) p /= denom;
  return out;
}

inline int argmax_smaller_index(const std::vector<double>& probs) {
  int best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = static_cast<int>(i);
  }
  return best;
}

inline int predict_node(const Graph& g, const GcnParams& params, NodeId v) {
  if (!g.has_node(v)) {
    throw std::invalid_argument("target node " + std::to_string(v) +
                                " not in graph");
  }
  ForwardTrace trace;
  const Eigen::MatrixXd logits = gcn_forward(g, params, &trace);
  const int row = trace.neighborhoods.row_of.at(v);
  return argmax_smaller_index(softmax(logits.row(row).transpose()));
}

/// Graph prediction: argmax of the softmax of the mean final-layer logits.
/// pool_exclude removes nodes (e.g. a virtual aggregator) from the mean;
/// an empty pooling set falls back to the configured default class.
inline int predict_graph(const Graph& g, const GcnParams& params,
                         const std::set<NodeId>& pool_exclude = {}) {
  if (g.num_nodes() == 0) return kEmptyGraphClass;
  ForwardTrace trace;
  const Eigen::MatrixXd logits = gcn_forward(g, params, &trace);
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(logits.cols());
  int pooled_count = 0;
  for (std::size_t i = 0; i < trace.neighborhoods.order.size(); ++i) {
    if (pool_exclude.count(trace.neighborhoods.order[i]) > 0) continue;
    pooled += logits.row(static_cast<Eigen::Index>(i)).transpose();
    ++pooled_count;
  }
  if (pooled_count == 0) return kEmptyGraphClass;
  pooled /= static_cast<double>(pooled_count);
  return argmax_smaller_index(softmax(pooled));
}

struct LossGrad {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> grads;  // one per layer, same shapes as W
};

/// Exact analytic gradient of the mean cross-entropy loss with respect to
/// every layer. Node task: mean over labelled nodes. Graph task: single
/// cross-entropy on the pooled logits.
inline LossGrad loss_and_grad(const Graph& g, const GcnParams& params,
                              Task::Kind task) {
  validate_params(params);
  if (g.num_nodes() == 0) {
    throw std::invalid_argument("cannot compute loss on an empty graph");
  }
  ForwardTrace trace;
  const Eigen::MatrixXd logits = gcn_forward(g, params, &trace);
  const auto& nb = trace.neighborhoods;
  const Eigen::Index n = logits.rows();
  const int num_classes = params.num_classes();

  double loss = 0.0;
  Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(n, num_classes);
  auto row_ce = [&](Eigen::Index row, int label) {
    const auto probs = softmax(logits.row(row).transpose());
    for (int c = 0; c < num_classes; ++c) dlogits(row, c) = probs[c];
    dlogits(row, label) -= 1.0;
    return -std::log(std::max(probs[label], 1e-300));
  };

  if (task == Task::Kind::NodeClassification) {
    const auto& labels = g.node_labels();
    if (labels.empty()) {
      throw std::invalid_argument("node classification needs node labels");
    }
    for (const auto& [id, y] : labels) {
      if (y < 0 || y >= num_classes) {
        throw std::invalid_argument("label " + std::to_string(y) +
                                    " out of range");
      }
      loss += row_ce(nb.row_of.at(id), y);
    }
    loss /= static_cast<double>(labels.size());
    dlogits /= static_cast<double>(labels.size());
  } else {
    if (!g.graph_label()) {
      throw std::invalid_argument("graph classification needs a graph label");
    }
    const int y = *g.graph_label();
    if (y < 0 || y >= num_classes) {
      throw std::invalid_argument("label " + std::to_string(y) +
                                  " out of range");
    }
    Eigen::VectorXd pooled = logits.colwise().mean().transpose();
    const auto probs = softmax(pooled);
    loss = -std::log(std::max(probs[y], 1e-300));
    Eigen::RowVectorXd dpool(num_classes);
    for (int c = 0; c < num_classes; ++c) dpool(c) = probs[c];
    dpool(y) -= 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      dlogits.row(i) = dpool / static_cast<double>(n);
    }
  }

  LossGrad out;
  out.loss = loss;
  out.grads.resize(params.num_layers());
  Eigen::MatrixXd ds = dlogits;  // gradient w.r.t. S^(K)
  for (int k = params.num_layers() - 1; k >= 0; --k) {
    out.grads[k] = ds.transpose() * trace.pooled[k];
    if (k > 0) {
      Eigen::MatrixXd dz = ds * params.layers[k];
      Eigen::MatrixXd dh = detail::aggregate_adjoint(nb, dz);
      ds = dh.cwiseProduct(
          (trace.pre[k - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return out;
}

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  bool augment_with_subgraphs = false;
  int augment_T = 6;
  HashScheme scheme;
  Strategy strategy = Strategy::EdgeCentric;
};

/// Deterministic full-batch gradient descent. With augmentation, each
/// training graph's T subgraphs join the batch once, labels inherited;
/// subgraphs purified down to zero nodes are skipped (no loss is defined on
/// them).
inline GcnParams train(const std::vector<Graph>& dataset, Task::Kind task,
                       const std::vector<int>& dims, const TrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("empty training set");
  if (cfg.learning_rate <= 0.0) {
    throw std::invalid_argument("learning rate must be positive");
  }
  std::vector<Graph> batch;
  for (const Graph& g : dataset) {
    batch.push_back(g);
    if (cfg.augment_with_subgraphs) {
      Task div_task = task == Task::Kind::NodeClassification
                          ? Task::node_classification(-1)
                          : Task::graph_classification();
      SubgraphSet subs =
          divide(g, cfg.augment_T, cfg.scheme, cfg.strategy, div_task);
      for (Graph& sub : subs.subgraphs) {
        if (sub.num_nodes() == 0) continue;
        if (task == Task::Kind::NodeClassification &&
            sub.node_labels().empty()) {
          continue;
        }
        batch.push_back(std::move(sub));
      }
    }
  }

  GcnParams params = init_params(dims, cfg.seed);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<Eigen::MatrixXd> total;
    for (int k = 0; k < params.num_layers(); ++k) {
      total.emplace_back(
          Eigen::MatrixXd::Zero(params.layers[k].rows(), params.layers[k].cols()));
    }
    double total_loss = 0.0;
    for (const Graph& g : batch) {
      LossGrad lg = loss_and_grad(g, params, task);
      total_loss += lg.loss;
      for (int k = 0; k < params.num_layers(); ++k) total[k] += lg.grads[k];
    }
    total_loss /= static_cast<double>(batch.size());
    if (!std::isfinite(total_loss)) {
      throw std::runtime_error("training diverged to non-finite loss at epoch " +
                               std::to_string(epoch));
    }
    const double scale = cfg.learning_rate / static_cast<double>(batch.size());
    for (int k = 0; k < params.num_layers(); ++k) {
      params.layers[k] -= scale * total[k];
    }
  }
  return params;
}

}  // namespace agnncert
