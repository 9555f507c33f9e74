#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "cgc/linalg.hpp"

namespace cgc {

/// Samples as rows of `inputs`, one class index per sample.
struct Batch {
  Matrix inputs;
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return inputs.cols(); }
  Batch subset(std::span<const std::size_t> rows) const;
};

/// Bias-free fully connected ReLU network.
///
/// Weight layer k (0-based) is a layer_sizes[k+1] × layer_sizes[k] matrix mapping
/// activations of node layer k to pre-activations of node layer k+1. ReLU follows
/// every weight layer except the last, which emits logits.
class FeedForwardNet {
 public:
  FeedForwardNet() = default;
  /// Zero weights.
  explicit FeedForwardNet(std::vector<std::size_t> layer_sizes);
  FeedForwardNet(std::vector<std::size_t> layer_sizes, ParamBlock weights);

  /// N(0, 1/fan_in) weights drawn from `seed`.
  static FeedForwardNet gaussian(std::vector<std::size_t> layer_sizes, std::uint64_t seed);

  const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }
  /// Number of weight matrices.
  std::size_t depth() const { return layer_sizes_.size() - 1; }
  std::size_t input_dim() const { return layer_sizes_.front(); }
  std::size_t output_dim() const { return layer_sizes_.back(); }
  std::size_t num_nodes() const;

  const ParamBlock& weights() const { return weights_; }
  ParamBlock& weights() { return weights_; }
  void set_weights(ParamBlock w);

  double weight(std::size_t k, std::size_t target, std::size_t source) const { return weights_(k, target, source); }

  friend bool operator==(const FeedForwardNet&, const FeedForwardNet&) = default;

 private:
  std::vector<std::size_t> layer_sizes_;
  ParamBlock weights_;
};

/// Per-layer activations: [0] is the input, hidden layers are post-ReLU, the last is the logits.
std::vector<Matrix> forward(const FeedForwardNet& net, const Matrix& inputs);
inline std::vector<Matrix> forward(const FeedForwardNet& net, const Batch& batch) { return forward(net, batch.inputs); }

struct LossGradient {
  double loss = 0.0;        ///< mean softmax cross-entropy
  ParamBlock grad;          ///< d loss / d weights, same shapes as the weights
  double error_rate = 0.0;  ///< fraction of argmax(logits) != label
};

LossGradient loss_and_gradient(const FeedForwardNet& net, const Batch& batch);
double loss(const FeedForwardNet& net, const Batch& batch);
double error_rate(const FeedForwardNet& net, const Batch& batch);

/// Path-norm scaling factors: γ_in, γ_out per node, γ_e per edge.
struct GammaTable {
  std::vector<std::vector<double>> gamma_in;   ///< [node layer][node]
  std::vector<std::vector<double>> gamma_out;  ///< [node layer][node]
  ParamBlock gamma_edge;                       ///< γ_in(source)·γ_out(target), weight layout

  /// √γ_e for weight layer k: the diagonal Γ̂ with ‖Γ̂ W_k‖₂ = ‖W‖_π.
  std::vector<double> path_scaling(std::size_t k) const;
};

/// γ_in by forward DP from inputs (seeded 1), γ_out by backward DP from outputs (seeded 1).
GammaTable compute_gammas(const FeedForwardNet& net);

/// ‖W‖_π: square root of the sum over input→output paths of the squared weight product. O(|E|).
double path_norm(const FeedForwardNet& net);

/// Multiply incoming weights of hidden node (layer, node) by c and divide outgoing ones by c.
FeedForwardNet rescale_node(const FeedForwardNet& net, std::size_t layer, std::size_t node, double c);

struct Edge {
  std::size_t source = 0;
  std::size_t target = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Node-by-edge incidence matrix: column e has +1 at source(e) and −1 at target(e).
class IncidenceMatrix {
 public:
  IncidenceMatrix() = default;
  IncidenceMatrix(std::size_t num_nodes, std::vector<Edge> edges);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  /// A·w: net outflow at every node for edge values w.
  std::vector<double> apply(std::span<const double> w) const;
  /// Aᵀ·v: v(source) − v(target) for every edge.
  std::vector<double> apply_transposed(std::span<const double> v) const;
  Matrix dense() const;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
};

/// Global node index of `node` in node layer `layer` (input layer is 0).
std::size_t node_index(const FeedForwardNet& net, std::size_t layer, std::size_t node);

/// Edges in canonical order: weight layer, then target, then source. Matches the
/// flat order of net.weights().
IncidenceMatrix incidence_matrix(const FeedForwardNet& net);

/// Text format:
///   layers = 784,50,10
///   weights[1] = <row-major values of the layer_sizes[1] × layer_sizes[0] matrix>
///   weights[2] = ...
void write_network(std::ostream& out, const FeedForwardNet& net);
FeedForwardNet read_network(std::istream& in);
void save_network(const std::filesystem::path& path, const FeedForwardNet& net);
FeedForwardNet load_network(const std::filesystem::path& path);

}  // namespace cgc
