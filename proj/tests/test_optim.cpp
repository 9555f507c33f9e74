#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cgc/data.hpp"
#include "cgc/optim.hpp"

using namespace cgc;

namespace {

const Dataset& blobs() {
  static const Dataset d = synthetic_dataset(SyntheticSpec{SyntheticKind::GaussianBlobs, 300, 4, 3, 4.0, 0.2});
  return d;
}

TrainOptions options(std::size_t iterations, std::uint64_t seed = 1) {
  TrainOptions o;
  o.iterations = iterations;
  o.batch_size = 32;
  o.seed = seed;
  o.eval_every = 50;
  return o;
}

StepSchedule schedule(std::size_t burn_in = 10) {
  StepSchedule s;
  s.burn_in_iters = burn_in;
  return s;
}

bool same_except_time(const RunMetrics& a, const RunMetrics& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    if (x.iter != y.iter || x.loss != y.loss || x.train_err != y.train_err || x.test_err != y.test_err ||
        x.constraint_value != y.constraint_value || x.eta != y.eta) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("cg step") {
  const ParamBlock w = ParamBlock::vector({1, 0});
  const ParamBlock s = ParamBlock::vector({0, 1});
  bool clamped = true;
  const ParamBlock out = cg_step(w, s, 0.25, &clamped);
  CHECK_FALSE(clamped);
  CHECK(out[0] == 0.25);
  CHECK(out[1] == 0.75);

  const ParamBlock one = cg_step(w, s, 1.0, &clamped);
  CHECK(clamped);
  CHECK(one[0] == doctest::Approx(1.0));
  CHECK(one[1] > 0.0);
  const ParamBlock zero = cg_step(w, s, -0.5, &clamped);
  CHECK(clamped);
  CHECK(zero[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(cg_step(w, ParamBlock::vector({1, 2, 3}), 0.5), DimensionError);
}

TEST_CASE("sgd and pgd steps") {
  const ParamBlock w = ParamBlock::vector({1, 2});
  const ParamBlock g = ParamBlock::vector({2, 2});
  CHECK(sgd_step(w, g, 0.5) == ParamBlock::vector({0, 1}));

  const ParamBlock p = pgd_step(ParamBlock::vector({0, 0}), ParamBlock::vector({-3, -4}), 1.0,
                                ConstraintSpec{ConstraintKind::Frobenius, 1.0});
  CHECK(p[0] == doctest::Approx(0.6));
  CHECK(p[1] == doctest::Approx(0.8));
  CHECK_THROWS_AS(pgd_step(w, g, 0.1, ConstraintSpec{ConstraintKind::Nuclear, 1.0}), UnsupportedError);
}

TEST_CASE("step schedule") {
  StepSchedule s;
  s.eta0 = 0.9;
  s.burn_in_iters = 8;
  CHECK(step_schedule(0, s) == 0.9);
  CHECK(step_schedule(7, s) == 0.9);
  CHECK(step_schedule(8, s) == doctest::Approx(0.9));
  CHECK(1.0 - step_schedule(16, s) == doctest::Approx(0.05));
  CHECK(1.0 - step_schedule(80, s) == doctest::Approx(0.01));
  s.mode = ScheduleMode::Constant;
  CHECK(step_schedule(1000, s) == 0.9);

  StepSchedule bad;
  bad.eta0 = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.eta0 = 0.5;
  bad.burn_in_iters = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("frank-wolfe gap vanishes at the optimum of a quadratic over the ball") {
  // min ½‖w − c‖² over ‖w‖ ≤ λ with ‖c‖ > λ: the optimum is λ c / ‖c‖.
  const std::vector<double> c{3, -1, 2, 0.5};
  const double lambda = 1.5;
  const double nc = norm2(c);
  ParamBlock optimum = ParamBlock::vector(c);
  for (double& v : optimum.values()) v *= lambda / nc;
  auto grad = [&](const ParamBlock& w) {
    ParamBlock g = w;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = w[i] - c[i];
    return g;
  };
  const ParamBlock g_opt = grad(optimum);
  CHECK(fw_gap(g_opt, optimum, lmo_frobenius(g_opt, lambda).direction) <= 1e-12);

  ParamBlock w = ParamBlock::vector({0, 0, 0, 0});
  for (std::size_t t = 0; t < 2000; ++t) {
    const ParamBlock g = grad(w);
    w = cg_step(w, lmo_frobenius(g, lambda).direction, static_cast<double>(t) / (t + 2.0));
  }
  const ParamBlock g = grad(w);
  CHECK(fw_gap(g, w, lmo_frobenius(g, lambda).direction) <= 1e-6);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(w[i] - optimum[i]) <= 1e-4);
}

TEST_CASE("gradient steps reach the minimizer of a quadratic") {
  const std::vector<double> c{0.5, -2, 1};
  ParamBlock w = ParamBlock::vector({0, 0, 0});
  for (int t = 0; t < 400; ++t) {
    ParamBlock g = w;
    for (std::size_t i = 0; i < 3; ++i) g[i] = w[i] - c[i];
    w = sgd_step(w, g, 0.1);
  }
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(w[i] - c[i]) <= 1e-4);
}

TEST_CASE("batch sampler covers every sample once per epoch") {
  BatchSampler a(10, 4, 7), b(10, 4, 7);
  CHECK(a.batches_per_epoch() == 3);
  for (int epoch = 0; epoch < 3; ++epoch) {
    std::multiset<std::size_t> seen;
    std::vector<std::size_t> sizes;
    for (int i = 0; i < 3; ++i) {
      const auto batch = a.next();
      CHECK(batch == b.next());
      sizes.push_back(batch.size());
      seen.insert(batch.begin(), batch.end());
    }
    CHECK(sizes == std::vector<std::size_t>{4, 4, 2});
    CHECK(seen.size() == 10);
    CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == 10);
  }
  BatchSampler c(10, 4, 8);
  BatchSampler d(10, 4, 7);
  CHECK(c.next() != d.next());
  CHECK_THROWS_AS(BatchSampler(0, 4, 1), DegenerateInputError);
}

TEST_CASE("zero iterations return the starting net") {
  const FeedForwardNet net = FeedForwardNet::gaussian({2, 4, 3}, 1);
  const ConstraintSpec spec{ConstraintKind::Frobenius, 100.0};
  const TrainResult r = train_cg(net, blobs().train, blobs().test, spec, schedule(), options(0));
  CHECK(r.net == net);
  CHECK(r.metrics.records.empty());
  std::ostringstream csv;
  write_csv(csv, r.metrics);
  CHECK(csv.str() == "iter,loss,train_err,test_err,constraint_value,eta,wall_ms\n");
}

TEST_CASE("infeasible starting point is rejected") {
  const FeedForwardNet net = FeedForwardNet::gaussian({2, 4, 3}, 1);
  const ConstraintSpec spec{ConstraintKind::L1, 1e-3};
  CHECK_THROWS_AS(train_cg(net, blobs().train, blobs().test, spec, schedule(), options(5)), InfeasibleError);
  CHECK_THROWS_AS(path_cg(net, blobs().train, blobs().test, 1e-3, schedule(), options(5)), InfeasibleError);
  CHECK_THROWS_AS(train_pgd(net, blobs().train, blobs().test, ConstraintSpec{ConstraintKind::Nuclear, 1.0}, 0.1,
                            options(5)),
                  UnsupportedError);
}

TEST_CASE("feasible start scales into half the ball") {
  const FeedForwardNet net = FeedForwardNet::gaussian({2, 4, 3}, 2);
  for (auto kind : {ConstraintKind::Frobenius, ConstraintKind::L1, ConstraintKind::PathNorm}) {
    const ConstraintSpec spec{kind, 0.3};
    CHECK(constraint_value(spec, feasible_start(net, spec)) == doctest::Approx(0.15));
  }
  const ConstraintSpec loose{ConstraintKind::Frobenius, 1e6};
  CHECK(feasible_start(net, loose) == net);
}

TEST_CASE("iterates stay feasible for every constraint kind") {
  const FeedForwardNet net = FeedForwardNet::gaussian({2, 4, 3}, 3);
  for (auto kind : {ConstraintKind::Frobenius, ConstraintKind::Nuclear, ConstraintKind::L1, ConstraintKind::LInf,
                    ConstraintKind::GroupL1Inf, ConstraintKind::TV, ConstraintKind::PathNorm}) {
    CAPTURE(to_string(kind));
    ConstraintSpec spec{kind, 2.0};
    if (kind == ConstraintKind::TV) spec.incidence = incidence_matrix(net);
    const FeedForwardNet start = feasible_start(net, spec);
    const TrainResult r = train_cg(start, blobs().train, blobs().test, spec, schedule(), options(200));
    REQUIRE(r.metrics.records.size() == 200);
    double worst = 0.0;
    for (const auto& rec : r.metrics.records) {
      worst = std::max(worst, rec.constraint_value);
      CHECK(std::isfinite(rec.loss));
    }
    CHECK(worst <= spec.lambda * (1 + 1e-9));
    CHECK(constraint_value(spec, r.net) == doctest::Approx(r.metrics.records.back().constraint_value));
  }
}

TEST_CASE("path-cg with a huge radius stays finite and feasible") {
  const FeedForwardNet net = FeedForwardNet::gaussian({2, 4, 3}, 5);
  const double lambda = 1e12;
  const TrainResult r = path_cg(net, blobs().train, blobs().test, lambda, schedule(), options(50));
  for (const auto& rec : r.metrics.records) {
    CHECK(std::isfinite(rec.constraint_value));
    CHECK(rec.constraint_value <= lambda * (1 + 1e-9));
  }
}

TEST_CASE("one path-cg step on a two-layer scalar network by hand") {
  // 1 → 1 → 2 network, one training sample.
  Batch batch{Matrix{{1.0}}, {0}};
  const double w1 = 0.5, a = 0.3, b = -0.2;
  const std::vector<Matrix> layers{Matrix{{w1}}, Matrix{{a}, {b}}};
  const FeedForwardNet net({1, 1, 2}, ParamBlock::from_matrices(layers));
  const double lambda = 1.0, eta = 0.5;
  StepSchedule s;
  s.mode = ScheduleMode::Constant;
  s.eta0 = eta;
  TrainOptions o;
  o.iterations = 1;
  o.batch_size = 1;

  // Gradient of the cross-entropy, written out: logits z = (a, b)·w1, p = softmax(z).
  const double za = a * w1, zb = b * w1;
  const double pa = std::exp(za) / (std::exp(za) + std::exp(zb));
  const double pb = 1 - pa;
  const double ga = (pa - 1) * w1, gb = pb * w1;
  const double g1 = (pa - 1) * a + pb * b;

  // Layer 0 first: Γ = ‖(a, b)‖, s = −λ sign(g)/Γ.
  const double gamma0 = std::hypot(a, b);
  const double w1_new = eta * w1 + (1 - eta) * (-lambda * (g1 > 0 ? 1 : -1) / gamma0);
  // Layer 1 with γ recomputed from the new w1: Γ = |w1_new| on both edges.
  const double gn = std::hypot(ga, gb);
  const double sa = -lambda * ga / (std::abs(w1_new) * gn);
  const double sb = -lambda * gb / (std::abs(w1_new) * gn);

  const TrainResult r = path_cg(net, batch, Batch{}, lambda, s, o);
  CHECK(r.net.weight(0, 0, 0) == doctest::Approx(w1_new).epsilon(1e-12));
  CHECK(r.net.weight(1, 0, 0) == doctest::Approx(eta * a + (1 - eta) * sa).epsilon(1e-12));
  CHECK(r.net.weight(1, 1, 0) == doctest::Approx(eta * b + (1 - eta) * sb).epsilon(1e-12));
  CHECK(r.metrics.records[0].loss == doctest::Approx(-std::log(pa)).epsilon(1e-12));
}

TEST_CASE("path-cg is invariant to node rescaling") {
  const FeedForwardNet net = feasible_start(FeedForwardNet::gaussian({2, 5, 4, 3}, 9),
                                            ConstraintSpec{ConstraintKind::PathNorm, 3.0});
  TrainOptions plain = options(120, 4);
  TrainOptions hooked = plain;
  hooked.before_iteration = [](std::size_t t, FeedForwardNet& n) {
    if (t % 10 == 3) n = rescale_node(n, 1 + t % 2, t % 4, t % 20 == 3 ? 3.0 : 0.25);
  };
  const TrainResult a = path_cg(net, blobs().train, blobs().test, 3.0, schedule(), plain);
  const TrainResult b = path_cg(net, blobs().train, blobs().test, 3.0, schedule(), hooked);
  for (std::size_t t = 0; t < 120; ++t) {
    CHECK(std::abs(a.metrics.records[t].loss - b.metrics.records[t].loss) <= 1e-7);
    CHECK(std::abs(a.metrics.records[t].constraint_value - b.metrics.records[t].constraint_value) <= 1e-7);
  }
}

TEST_CASE("sgd and pgd lower the loss on separable blobs") {
  const FeedForwardNet net = FeedForwardNet::gaussian({2, 8, 3}, 6);
  const TrainResult s = train_sgd(net, blobs().train, blobs().test, 0.1, options(300));
  CHECK(s.metrics.records.back().test_err.value() <= 0.1);
  CHECK(s.metrics.records.back().constraint_value == doctest::Approx(path_norm(s.net)));
  const ConstraintSpec ball{ConstraintKind::Frobenius, 5.0};
  const TrainResult p = train_pgd(feasible_start(net, ball), blobs().train, blobs().test, ball, 0.1, options(300));
  CHECK(p.metrics.records.back().test_err.value() <= 0.1);
  for (const auto& rec : p.metrics.records) CHECK(rec.constraint_value <= 5.0 * (1 + 1e-12));
}

TEST_CASE("runs are deterministic and the csv is well formed") {
  const FeedForwardNet net = FeedForwardNet::gaussian({2, 4, 3}, 8);
  const ConstraintSpec spec{ConstraintKind::L1, 4.0};
  const TrainResult a = train_cg(feasible_start(net, spec), blobs().train, blobs().test, spec, schedule(), options(60));
  const TrainResult b = train_cg(feasible_start(net, spec), blobs().train, blobs().test, spec, schedule(), options(60));
  CHECK(a.net == b.net);
  CHECK(same_except_time(a.metrics, b.metrics));
  const TrainResult c = train_cg(feasible_start(net, spec), blobs().train, blobs().test, spec, schedule(), options(60, 2));
  CHECK_FALSE(same_except_time(a.metrics, c.metrics));

  std::ostringstream out;
  write_csv(out, a.metrics);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "iter,loss,train_err,test_err,constraint_value,eta,wall_ms");
  std::size_t rows = 0, with_test = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
    std::vector<std::size_t> commas;
    for (std::size_t i = 0; i < line.size(); ++i)
      if (line[i] == ',') commas.push_back(i);
    CHECK(std::stoul(line.substr(0, commas[0])) == rows);
    if (commas[3] > commas[2] + 1) ++with_test;
    ++rows;
  }
  CHECK(rows == 60);
  CHECK(with_test == 2);  // iteration 49 and the last one
}
