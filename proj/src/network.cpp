#include "cgc/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>

namespace cgc {

namespace {

std::vector<Shape> weight_shapes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw DimensionError("network needs at least an input and an output layer");
  std::vector<Shape> shapes;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    if (sizes[k] == 0 || sizes[k + 1] == 0) throw DimensionError("network layers must be nonempty");
    shapes.push_back({sizes[k + 1], sizes[k]});
  }
  return shapes;
}

std::size_t argmax(std::span<const double> x) {
  return static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
}

}  // namespace

Batch Batch::subset(std::span<const std::size_t> rows) const {
  Batch out{Matrix(rows.size(), inputs.cols()), {}};
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = inputs.row(rows[i]);
    std::copy(src.begin(), src.end(), out.inputs.row(i).begin());
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

FeedForwardNet::FeedForwardNet(std::vector<std::size_t> layer_sizes)
    : layer_sizes_(std::move(layer_sizes)), weights_(weight_shapes(layer_sizes_)) {}

FeedForwardNet::FeedForwardNet(std::vector<std::size_t> layer_sizes, ParamBlock weights)
    : FeedForwardNet(std::move(layer_sizes)) {
  set_weights(std::move(weights));
}

FeedForwardNet FeedForwardNet::gaussian(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
  FeedForwardNet net(std::move(layer_sizes));
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < net.depth(); ++k) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(net.layer_sizes_[k])));
    for (double& w : net.weights_.layer(k)) w = normal(rng);
  }
  return net;
}

std::size_t FeedForwardNet::num_nodes() const {
  std::size_t n = 0;
  for (auto s : layer_sizes_) n += s;
  return n;
}

void FeedForwardNet::set_weights(ParamBlock w) {
  if (!w.same_shape(weights_)) throw DimensionError("weights do not match the network layer sizes");
  for (double v : w.values()) {
    if (!std::isfinite(v)) throw DimensionError("network weights must be finite");
  }
  weights_ = std::move(w);
}

std::vector<Matrix> forward(const FeedForwardNet& net, const Matrix& inputs) {
  if (inputs.cols() != net.input_dim()) {
    throw DimensionError("forward: input dimension " + std::to_string(inputs.cols()) + ", network expects " +
                         std::to_string(net.input_dim()));
  }
  const auto& sizes = net.layer_sizes();
  std::vector<Matrix> acts;
  acts.reserve(sizes.size());
  acts.push_back(inputs);
  for (std::size_t k = 0; k < net.depth(); ++k) {
    const Matrix& in = acts.back();
    const bool hidden = k + 1 < net.depth();
    Matrix out(in.rows(), sizes[k + 1]);
    const auto w = net.weights().layer(k);
    const std::size_t fan_in = sizes[k];
    for (std::size_t i = 0; i < in.rows(); ++i) {
      const auto x = in.row(i);
      auto z = out.row(i);
      for (std::size_t r = 0; r < z.size(); ++r) {
        const double* wr = w.data() + r * fan_in;
        double s = 0.0;
        for (std::size_t c = 0; c < fan_in; ++c) s += wr[c] * x[c];
        z[r] = hidden ? std::max(s, 0.0) : s;
      }
    }
    acts.push_back(std::move(out));
  }
  return acts;
}

LossGradient loss_and_gradient(const FeedForwardNet& net, const Batch& batch) {
  const std::size_t n = batch.size();
  if (n == 0) throw DegenerateInputError("loss_and_gradient: empty batch");
  if (batch.inputs.rows() != n) throw DimensionError("batch: sample count differs from label count");

  const auto acts = forward(net, batch);
  const auto& sizes = net.layer_sizes();
  const double inv_n = 1.0 / static_cast<double>(n);

  LossGradient out;
  out.grad = net.weights().zeros_like();

  // delta = dLoss/dz for the current weight layer's outputs.
  Matrix delta(n, net.output_dim());
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = acts.back().row(i);
    const std::size_t y = batch.labels[i];
    if (y >= z.size()) throw DimensionError("label " + std::to_string(y) + " exceeds output dimension");
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double lse = zmax + std::log(sum);
    out.loss += lse - z[y];
    auto d = delta.row(i);
    for (std::size_t c = 0; c < z.size(); ++c) d[c] = std::exp(z[c] - lse) * inv_n;
    d[y] -= inv_n;
    if (argmax(z) != y) ++wrong;
  }
  out.loss *= inv_n;
  out.error_rate = static_cast<double>(wrong) * inv_n;

  for (std::size_t k = net.depth(); k-- > 0;) {
    const Matrix& a = acts[k];
    const std::size_t fan_in = sizes[k];
    const std::size_t fan_out = sizes[k + 1];
    auto g = out.grad.layer(k);
    for (std::size_t i = 0; i < n; ++i) {
      const auto d = delta.row(i);
      const auto x = a.row(i);
      for (std::size_t r = 0; r < fan_out; ++r) {
        const double dr = d[r];
        if (dr == 0.0) continue;
        double* gr = g.data() + r * fan_in;
        for (std::size_t c = 0; c < fan_in; ++c) gr[c] += dr * x[c];
      }
    }
    if (k == 0) break;
    const auto w = net.weights().layer(k);
    Matrix prev(n, fan_in);
    for (std::size_t i = 0; i < n; ++i) {
      const auto d = delta.row(i);
      const auto x = a.row(i);
      auto p = prev.row(i);
      for (std::size_t r = 0; r < fan_out; ++r) {
        const double dr = d[r];
        if (dr == 0.0) continue;
        const double* wr = w.data() + r * fan_in;
        for (std::size_t c = 0; c < fan_in; ++c) p[c] += dr * wr[c];
      }
      for (std::size_t c = 0; c < fan_in; ++c) {
        if (x[c] <= 0.0) p[c] = 0.0;
      }
    }
    delta = std::move(prev);
  }
  return out;
}

double loss(const FeedForwardNet& net, const Batch& batch) {
  if (batch.size() == 0) throw DegenerateInputError("loss: empty batch");
  const auto logits = forward(net, batch).back();
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto z = logits.row(i);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    total += zmax + std::log(sum) - z[batch.labels[i]];
  }
  return total / static_cast<double>(batch.size());
}

double error_rate(const FeedForwardNet& net, const Batch& batch) {
  if (batch.size() == 0) return 0.0;
  const auto logits = forward(net, batch).back();
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (argmax(logits.row(i)) != batch.labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(batch.size());
}

std::vector<double> GammaTable::path_scaling(std::size_t k) const {
  const auto g = gamma_edge.layer(k);
  std::vector<double> out(g.size());
  std::transform(g.begin(), g.end(), out.begin(), [](double v) { return std::sqrt(v); });
  return out;
}

GammaTable compute_gammas(const FeedForwardNet& net) {
  const auto& sizes = net.layer_sizes();
  const std::size_t depth = net.depth();
  const auto& w = net.weights();

  GammaTable t;
  t.gamma_in.resize(sizes.size());
  t.gamma_out.resize(sizes.size());
  t.gamma_in[0].assign(sizes[0], 1.0);
  for (std::size_t k = 0; k < depth; ++k) {
    auto& next = t.gamma_in[k + 1];
    next.assign(sizes[k + 1], 0.0);
    for (std::size_t r = 0; r < sizes[k + 1]; ++r)
      for (std::size_t c = 0; c < sizes[k]; ++c) next[r] += t.gamma_in[k][c] * w(k, r, c) * w(k, r, c);
  }
  t.gamma_out[depth].assign(sizes[depth], 1.0);
  for (std::size_t k = depth; k-- > 0;) {
    auto& prev = t.gamma_out[k];
    prev.assign(sizes[k], 0.0);
    for (std::size_t r = 0; r < sizes[k + 1]; ++r)
      for (std::size_t c = 0; c < sizes[k]; ++c) prev[c] += t.gamma_out[k + 1][r] * w(k, r, c) * w(k, r, c);
  }
  t.gamma_edge = w.zeros_like();
  for (std::size_t k = 0; k < depth; ++k)
    for (std::size_t r = 0; r < sizes[k + 1]; ++r)
      for (std::size_t c = 0; c < sizes[k]; ++c) t.gamma_edge(k, r, c) = t.gamma_in[k][c] * t.gamma_out[k + 1][r];
  return t;
}

double path_norm(const FeedForwardNet& net) {
  const auto& sizes = net.layer_sizes();
  const auto& w = net.weights();
  std::vector<double> gin(sizes[0], 1.0);
  for (std::size_t k = 0; k < net.depth(); ++k) {
    std::vector<double> next(sizes[k + 1], 0.0);
    for (std::size_t r = 0; r < sizes[k + 1]; ++r)
      for (std::size_t c = 0; c < sizes[k]; ++c) next[r] += gin[c] * w(k, r, c) * w(k, r, c);
    gin = std::move(next);
  }
  double sq = 0.0;
  for (double v : gin) sq += v;
  return std::sqrt(sq);
}

FeedForwardNet rescale_node(const FeedForwardNet& net, std::size_t layer, std::size_t node, double c) {
  if (layer == 0 || layer >= net.layer_sizes().size() - 1) {
    throw DimensionError("rescale_node: layer " + std::to_string(layer) + " is not a hidden layer");
  }
  if (node >= net.layer_sizes()[layer]) throw DimensionError("rescale_node: node index out of range");
  if (!(c > 0.0)) throw DegenerateInputError("rescale_node: scale must be positive");
  FeedForwardNet out = net;
  auto& w = out.weights();
  for (std::size_t src = 0; src < net.layer_sizes()[layer - 1]; ++src) w(layer - 1, node, src) *= c;
  for (std::size_t dst = 0; dst < net.layer_sizes()[layer + 1]; ++dst) w(layer, dst, node) /= c;
  return out;
}

IncidenceMatrix::IncidenceMatrix(std::size_t num_nodes, std::vector<Edge> edges)
    : num_nodes_(num_nodes), edges_(std::move(edges)) {
  for (const auto& e : edges_) {
    if (e.source >= num_nodes_ || e.target >= num_nodes_) throw DimensionError("incidence: edge endpoint out of range");
    if (e.source == e.target) throw DimensionError("incidence: self loops have a zero column");
  }
}

std::vector<double> IncidenceMatrix::apply(std::span<const double> w) const {
  if (w.size() != edges_.size()) throw DimensionError("incidence apply: expected one value per edge");
  std::vector<double> out(num_nodes_, 0.0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    out[edges_[e].source] += w[e];
    out[edges_[e].target] -= w[e];
  }
  return out;
}

std::vector<double> IncidenceMatrix::apply_transposed(std::span<const double> v) const {
  if (v.size() != num_nodes_) throw DimensionError("incidence apply_transposed: expected one value per node");
  std::vector<double> out(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) out[e] = v[edges_[e].source] - v[edges_[e].target];
  return out;
}

Matrix IncidenceMatrix::dense() const {
  Matrix a(num_nodes_, edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    a(edges_[e].source, e) = 1.0;
    a(edges_[e].target, e) = -1.0;
  }
  return a;
}

std::size_t node_index(const FeedForwardNet& net, std::size_t layer, std::size_t node) {
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layer; ++l) offset += net.layer_sizes()[l];
  return offset + node;
}

IncidenceMatrix incidence_matrix(const FeedForwardNet& net) {
  const auto& sizes = net.layer_sizes();
  std::vector<Edge> edges;
  edges.reserve(net.weights().size());
  for (std::size_t k = 0; k < net.depth(); ++k)
    for (std::size_t r = 0; r < sizes[k + 1]; ++r)
      for (std::size_t c = 0; c < sizes[k]; ++c) edges.push_back({node_index(net, k, c), node_index(net, k + 1, r)});
  return IncidenceMatrix(net.num_nodes(), std::move(edges));
}

void write_network(std::ostream& out, const FeedForwardNet& net) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "layers = ";
  for (std::size_t i = 0; i < net.layer_sizes().size(); ++i) out << (i ? "," : "") << net.layer_sizes()[i];
  out << '\n';
  for (std::size_t k = 0; k < net.depth(); ++k) {
    out << "weights[" << k + 1 << "] =";
    for (double v : net.weights().layer(k)) out << ' ' << v;
    out << '\n';
  }
}

FeedForwardNet read_network(std::istream& in) {
  std::vector<std::size_t> sizes;
  std::vector<std::vector<double>> layers;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    if (eq == std::string::npos) throw ParseError("network file: expected 'key = value', got '" + line + "'");
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    key.erase(0, key.find_first_not_of(" \t"));
    std::string value = line.substr(eq + 1);
    if (key == "layers") {
      std::replace(value.begin(), value.end(), ',', ' ');
      std::istringstream vs(value);
      std::size_t s;
      while (vs >> s) sizes.push_back(s);
    } else if (key.starts_with("weights[") && key.ends_with("]")) {
      const std::size_t idx = std::stoul(key.substr(8, key.size() - 9));
      if (idx != layers.size() + 1) throw ParseError("network file: weights[" + std::to_string(idx) + "] out of order");
      std::istringstream vs(value);
      std::vector<double> vals;
      double v;
      while (vs >> v) vals.push_back(v);
      if (!vs.eof()) throw ParseError("network file: bad number in " + key);
      layers.push_back(std::move(vals));
    } else {
      throw ParseError("network file: unknown key '" + key + "'");
    }
  }
  FeedForwardNet net(sizes);
  if (layers.size() != net.depth()) throw ParseError("network file: wrong number of weight layers");
  ParamBlock w = net.weights();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].size() != w.shape(k).size()) {
      throw ParseError("network file: weights[" + std::to_string(k + 1) + "] has wrong length");
    }
    std::copy(layers[k].begin(), layers[k].end(), w.layer(k).begin());
  }
  net.set_weights(std::move(w));
  return net;
}

void save_network(const std::filesystem::path& path, const FeedForwardNet& net) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_network(out, net);
}

FeedForwardNet load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_network(in);
}

}  // namespace cgc
