#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "xsql/rng.hpp"
#include "xsql/tensor.hpp"

namespace xsql {

/// A trainable tensor with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Owns parameters in a deterministic registration order. The order is fixed
/// by construction sequence and is the canonical order for checkpoints and
/// optimizer state.
class ParameterStore {
 public:
  Parameter& create(const std::string& name, std::vector<int> shape);
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;

  std::size_t count() const { return params_.size(); }
  Parameter& at(std::size_t i) { return *params_[i]; }
  const Parameter& at(std::size_t i) const { return *params_[i]; }

  std::size_t total_values() const;
  void zero_grads();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

using NodeId = int;

/// Record of one forward pass: a tape of primitive ops whose creation order
/// is a topological order. backward() walks the tape once in reverse,
/// accumulating gradients into Parameter::grad for every parameter leaf.
/// One backward per recorded forward; a second call is an error.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  NodeId constant(Tensor t);
  NodeId param(Parameter& p);

  NodeId matmul(NodeId a, NodeId b);
  NodeId transpose(NodeId a);
  NodeId add(NodeId a, NodeId b);
  /// [n x k] + [1 x k], broadcast over rows.
  NodeId add_row(NodeId m, NodeId row);
  /// [n x k] + scalar.
  NodeId add_scalar(NodeId m, NodeId s);
  NodeId scale(NodeId a, Real c);
  /// Row-wise softmax with max subtraction.
  NodeId softmax(NodeId a);
  /// Row-wise layer normalization followed by the gain/bias affine map.
  NodeId layer_norm(NodeId x, NodeId gain, NodeId bias, Real eps);
  NodeId gelu(NodeId a);
  NodeId tanh(NodeId a);
  /// Gather rows of an embedding table; gradients scatter back into the
  /// table parameter.
  NodeId gather_rows(Parameter& table, std::vector<int> ids);
  NodeId slice_rows(NodeId a, int begin, int end);
  NodeId slice_cols(NodeId a, int begin, int end);
  NodeId concat_rows(const std::vector<NodeId>& parts);
  NodeId concat_cols(const std::vector<NodeId>& parts);
  /// Inverted dropout with a mask drawn at record time. Identity when
  /// rate == 0.
  NodeId dropout(NodeId a, Real rate, Rng& rng);
  NodeId sum(NodeId a);
  NodeId add_scalars(const std::vector<NodeId>& parts);
  /// -log softmax(logits)[gold] for a single-row logits tensor.
  NodeId cross_entropy(NodeId logits, int gold);
  /// sum_k q_k * ln(q_k / p_k) with 0 * ln(0/p) := 0. q is a fixed target
  /// distribution; p must be a strictly positive distribution node.
  NodeId kl_divergence(Tensor q, NodeId p);

  const Tensor& value(NodeId id) const;
  /// Gradient of the last backward() w.r.t. a non-parameter node. Parameter
  /// leaves accumulate into Parameter::grad instead.
  const Tensor& grad(NodeId id) const;

  void backward(NodeId loss, Real seed = 1.0);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor val;                  // owned value; empty for parameter leaves
    Tensor grad;                 // sized lazily during backward
    Parameter* bound = nullptr;  // parameter leaf
    std::function<void(Graph&, const Tensor&)> backward_fn;  // null for leaves
  };

  const Tensor& value_of(const Node& n) const { return n.bound ? n.bound->value : n.val; }
  Tensor& grad_of(NodeId id);
  void accumulate(NodeId id, const Tensor& g);
  NodeId push(Tensor val, std::function<void(Graph&, const Tensor&)> fn);
  const Node& node(NodeId id) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace xsql
