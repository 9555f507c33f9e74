#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cgc/network.hpp"
#include "cgc/oracles.hpp"

using namespace cgc;

namespace {

FeedForwardNet line_net(double w1, double w2) {
  FeedForwardNet net({1, 1, 1});
  net.weights()[0] = w1;
  net.weights()[1] = w2;
  return net;
}

Batch random_batch(std::size_t n, std::size_t dim, std::size_t classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Batch b{Matrix(n, dim), std::vector<std::size_t>(n)};
  for (double& v : b.inputs.data()) v = normal(rng);
  for (std::size_t i = 0; i < n; ++i) b.labels[i] = i % classes;
  return b;
}

/// Mean cross-entropy by a straightforward loop, independent of forward().
double reference_loss(const std::vector<std::size_t>& sizes, std::span<const double> w, const Batch& batch) {
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::vector<double> a(batch.inputs.row(i).begin(), batch.inputs.row(i).end());
    std::size_t offset = 0;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
      std::vector<double> z(sizes[k + 1], 0.0);
      for (std::size_t t = 0; t < sizes[k + 1]; ++t) {
        for (std::size_t s = 0; s < sizes[k]; ++s) z[t] += w[offset + t * sizes[k] + s] * a[s];
      }
      offset += sizes[k] * sizes[k + 1];
      if (k + 2 < sizes.size()) {
        for (double& v : z) v = std::max(0.0, v);
      }
      a = z;
    }
    double mx = a[0];
    for (double v : a) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : a) sum += std::exp(v - mx);
    total += std::log(sum) + mx - a[batch.labels[i]];
  }
  return total / static_cast<double>(batch.size());
}

double max_gradient_deviation(const FeedForwardNet& net, const Batch& batch) {
  const LossGradient lg = loss_and_gradient(net, batch);
  std::vector<double> w(net.weights().values().begin(), net.weights().values().end());
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double keep = w[i];
    w[i] = keep + h;
    const double up = reference_loss(net.layer_sizes(), w, batch);
    w[i] = keep - h;
    const double down = reference_loss(net.layer_sizes(), w, batch);
    w[i] = keep;
    worst = std::max(worst, std::abs((up - down) / (2 * h) - lg.grad[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("forward through a 1-1-1 identity chain") {
  const FeedForwardNet net = line_net(1.0, 1.0);
  CHECK(forward(net, Matrix{{2.0}}).back()(0, 0) == 2.0);
  CHECK(forward(net, Matrix{{-2.0}}).back()(0, 0) == 0.0);
  const FeedForwardNet zero({3, 4, 2});
  const Matrix out = forward(zero, Matrix{{1, 2, 3}}).back();
  CHECK(out(0, 0) == 0.0);
  CHECK(out(0, 1) == 0.0);
  CHECK_THROWS_AS(forward(zero, Matrix{{1, 2}}), DimensionError);
}

TEST_CASE("network construction validates shapes") {
  CHECK_THROWS_AS(FeedForwardNet(std::vector<std::size_t>{3}), DimensionError);
  FeedForwardNet net({2, 2});
  CHECK_THROWS_AS(net.set_weights(ParamBlock::vector({1, 2, 3})), DimensionError);
  ParamBlock bad = net.weights();
  bad[0] = std::nan("");
  CHECK_THROWS_AS(net.set_weights(bad), DimensionError);
}

TEST_CASE("gaussian init has fan-in variance") {
  const FeedForwardNet net = FeedForwardNet::gaussian({400, 300}, 5);
  double ss = 0.0;
  for (double v : net.weights().values()) ss += v * v;
  CHECK(ss / net.weights().size() == doctest::Approx(1.0 / 400).epsilon(0.02));
  CHECK(FeedForwardNet::gaussian({4, 3, 2}, 9) == FeedForwardNet::gaussian({4, 3, 2}, 9));
}

TEST_CASE("zero network has uniform softmax") {
  const FeedForwardNet net({3, 2});
  const Batch b = random_batch(5, 3, 2, 1);
  const LossGradient lg = loss_and_gradient(net, b);
  CHECK(lg.loss == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(loss(net, b) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("gradient matches central finite differences") {
  for (const auto& sizes : std::vector<std::vector<std::size_t>>{{3, 4, 3, 2}, {2, 3, 2}, {4, 3, 3, 3, 2}, {5, 3}}) {
    const FeedForwardNet net = FeedForwardNet::gaussian(sizes, 17);
    const Batch b = random_batch(7, sizes.front(), sizes.back(), 23);
    CHECK(max_gradient_deviation(net, b) <= 1e-6);
  }
}

TEST_CASE("duplicating every sample leaves loss and gradient unchanged") {
  const FeedForwardNet net = FeedForwardNet::gaussian({3, 4, 2}, 3);
  const Batch b = random_batch(4, 3, 2, 8);
  std::vector<std::size_t> twice{0, 1, 2, 3, 0, 1, 2, 3};
  const LossGradient a = loss_and_gradient(net, b);
  const LossGradient c = loss_and_gradient(net, b.subset(twice));
  CHECK(a.loss == doctest::Approx(c.loss).epsilon(1e-14));
  for (std::size_t i = 0; i < a.grad.size(); ++i) CHECK(a.grad[i] == doctest::Approx(c.grad[i]).epsilon(1e-12));
  CHECK(a.error_rate == c.error_rate);
}

TEST_CASE("empty batch and bad labels are rejected") {
  const FeedForwardNet net({2, 2});
  CHECK_THROWS_AS(loss_and_gradient(net, Batch{Matrix(0, 2), {}}), DegenerateInputError);
  CHECK_THROWS_AS(loss_and_gradient(net, Batch{Matrix{{1, 1}}, {5}}), DimensionError);
}

TEST_CASE("error rate counts argmax mistakes") {
  FeedForwardNet net({2, 2});
  net.weights() = ParamBlock::from_matrices(std::vector<Matrix>{Matrix{{1, 0}, {0, 1}}});
  const Batch b{Matrix{{2, 1}, {1, 2}, {3, 0}, {0, 3}}, {0, 1, 1, 1}};
  CHECK(error_rate(net, b) == doctest::Approx(0.25));
}

TEST_CASE("path norm of a line graph") {
  const FeedForwardNet net = line_net(2.0, 3.0);
  CHECK(path_norm(net) * path_norm(net) == doctest::Approx(36.0));
  CHECK(brute_force_path_norm(net) == doctest::Approx(36.0));
  CHECK(path_norm(FeedForwardNet({3, 4, 2})) == 0.0);
}

TEST_CASE("path norm DP agrees with path enumeration") {
  const FeedForwardNet small = FeedForwardNet::gaussian({2, 2, 1}, 4);
  CHECK(count_paths(small) == 4);
  const double pn = path_norm(small);
  CHECK(std::abs(pn * pn - brute_force_path_norm(small)) <= 1e-10 * brute_force_path_norm(small));

  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> depth(1, 4), width(1, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> sizes(depth(rng) + 1);
    for (auto& s : sizes) s = width(rng);
    const FeedForwardNet net = FeedForwardNet::gaussian(sizes, 1000 + trial);
    const double brute = brute_force_path_norm(net);
    const double p = path_norm(net);
    CHECK(std::abs(p * p - brute) <= 1e-10 * brute);
  }
}

TEST_CASE("gamma table on a line graph") {
  const GammaTable g = compute_gammas(line_net(2.0, 3.0));
  CHECK(g.gamma_edge[0] == doctest::Approx(9.0));
  CHECK(g.gamma_edge[1] == doctest::Approx(4.0));
  CHECK(g.gamma_in[0][0] == 1.0);
  CHECK(g.gamma_out[2][0] == 1.0);
  CHECK(g.path_scaling(0)[0] == doctest::Approx(3.0));
}

TEST_CASE("gamma table of a zero network") {
  const GammaTable deep = compute_gammas(FeedForwardNet({2, 3, 2}));
  for (double v : deep.gamma_edge.values()) CHECK(v == 0.0);
  const GammaTable single = compute_gammas(FeedForwardNet({2, 3}));
  for (double v : single.gamma_edge.values()) CHECK(v == 1.0);
}

TEST_CASE("per-layer gamma identity on a 2-3-2 net") {
  const FeedForwardNet net = FeedForwardNet::gaussian({2, 3, 2}, 12);
  const GammaTable g = compute_gammas(net);
  const double brute = brute_force_path_norm(net);
  for (std::size_t k = 0; k < net.depth(); ++k) {
    double sum = 0.0;
    for (std::size_t e = 0; e < net.weights().layer(k).size(); ++e) {
      sum += g.gamma_edge.layer(k)[e] * net.weights().layer(k)[e] * net.weights().layer(k)[e];
    }
    CHECK(std::abs(sum - brute) <= 1e-10 * brute);
  }
}

TEST_CASE("rescale_node keeps outputs and path norm") {
  const FeedForwardNet net = FeedForwardNet::gaussian({4, 5, 3, 2}, 31);
  CHECK(rescale_node(net, 1, 2, 1.0) == net);
  const Batch b = random_batch(100, 4, 2, 44);
  const Matrix before = forward(net, b).back();
  for (double c : {0.5, 2.0, 10.0}) {
    const FeedForwardNet scaled = rescale_node(net, 1, 2, c);
    CHECK(scaled.weight(0, 2, 0) == doctest::Approx(c * net.weight(0, 2, 0)));
    CHECK(scaled.weight(1, 0, 2) == doctest::Approx(net.weight(1, 0, 2) / c));
    const Matrix after = forward(scaled, b).back();
    for (std::size_t i = 0; i < after.size(); ++i) CHECK(std::abs(after.data()[i] - before.data()[i]) <= 1e-9);
    CHECK(std::abs(path_norm(scaled) - path_norm(net)) <= 1e-9 * path_norm(net));
  }
  CHECK_THROWS_AS(rescale_node(net, 0, 0, 2.0), DimensionError);
  CHECK_THROWS_AS(rescale_node(net, 3, 0, 2.0), DimensionError);
  CHECK_THROWS_AS(rescale_node(net, 1, 0, 0.0), DegenerateInputError);
  CHECK_THROWS_AS(rescale_node(net, 1, 0, -1.0), DegenerateInputError);
}

TEST_CASE("incidence matrix of a line graph and a 2-2-1 net") {
  const IncidenceMatrix line = incidence_matrix(FeedForwardNet({1, 1, 1}));
  CHECK(line.dense() == Matrix{{1, 0}, {-1, 1}, {0, -1}});

  const FeedForwardNet net({2, 2, 1});
  const IncidenceMatrix a = incidence_matrix(net);
  CHECK(a.num_nodes() == 5);
  CHECK(a.num_edges() == 6);
  const Matrix d = a.dense();
  for (std::size_t e = 0; e < a.num_edges(); ++e) {
    double sum = 0.0;
    int nonzeros = 0;
    for (std::size_t v = 0; v < a.num_nodes(); ++v) {
      sum += d(v, e);
      nonzeros += d(v, e) != 0.0;
    }
    CHECK(sum == 0.0);
    CHECK(nonzeros == 2);
  }
  // Canonical order: layer, then target, then source.
  CHECK(a.edges()[1] == Edge{node_index(net, 0, 1), node_index(net, 1, 0)});
  CHECK(a.edges()[2] == Edge{node_index(net, 0, 0), node_index(net, 1, 1)});
  CHECK(a.edges()[5] == Edge{node_index(net, 1, 1), node_index(net, 2, 0)});
}

TEST_CASE("incidence apply and transpose agree with the dense matrix") {
  const FeedForwardNet net({2, 3, 2});
  const IncidenceMatrix a = incidence_matrix(net);
  const Matrix d = a.dense();
  std::vector<double> w(a.num_edges()), v(a.num_nodes());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.5 * i - 1.0;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + i);
  CHECK(a.apply(w) == multiply(d, w));
  CHECK(a.apply_transposed(v) == multiply_transposed(d, v));
  CHECK_THROWS_AS(IncidenceMatrix(2, {Edge{0, 0}}), DimensionError);
}

TEST_CASE("network text round trip") {
  const FeedForwardNet net = FeedForwardNet::gaussian({3, 2, 2}, 77);
  std::stringstream ss;
  write_network(ss, net);
  CHECK(ss.str().rfind("layers = 3,2,2\n", 0) == 0);
  CHECK(ss.str().find("weights[1] = ") != std::string::npos);
  CHECK(read_network(ss) == net);

  std::stringstream bad1("layers = 2,2\nweights[1] = 1 2 3\n");
  CHECK_THROWS_AS(read_network(bad1), ParseError);
  std::stringstream bad2("layers = 2,2\nbiases[1] = 1 2 3 4\n");
  CHECK_THROWS_AS(read_network(bad2), ParseError);
  std::stringstream bad3("layers = 2,2\nweights[1] = 1 2 x 4\n");
  CHECK_THROWS_AS(read_network(bad3), ParseError);
}
