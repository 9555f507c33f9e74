#pragma once

#include <cstddef>
#include <vector>

namespace cgc {

/// Dinic's algorithm on real capacities. Residual capacities below `epsilon`
/// count as saturated.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t num_nodes, double epsilon = 1e-13);

  /// Returns the arc id; flow(id) reports the flow pushed along it.
  std::size_t add_arc(std::size_t from, std::size_t to, double capacity);
  double solve(std::size_t source, std::size_t sink);
  double flow(std::size_t arc) const;

 private:
  struct Arc {
    std::size_t to;
    std::size_t rev;
    double cap;
    double initial;
  };

  bool build_levels(std::size_t source, std::size_t sink);
  double push(std::size_t node, std::size_t sink, double limit);

  std::vector<std::vector<Arc>> graph_;
  std::vector<std::pair<std::size_t, std::size_t>> arcs_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
  double epsilon_;
};

}  // namespace cgc
