#include "cgc/maxflow.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "cgc/errors.hpp"

namespace cgc {

MaxFlow::MaxFlow(std::size_t num_nodes, double epsilon)
    : graph_(num_nodes), level_(num_nodes), next_(num_nodes), epsilon_(epsilon) {}

std::size_t MaxFlow::add_arc(std::size_t from, std::size_t to, double capacity) {
  if (from >= graph_.size() || to >= graph_.size()) throw DimensionError("MaxFlow: arc endpoint out of range");
  graph_[from].push_back({to, graph_[to].size(), capacity, capacity});
  graph_[to].push_back({from, graph_[from].size() - 1, 0.0, 0.0});
  arcs_.emplace_back(from, graph_[from].size() - 1);
  return arcs_.size() - 1;
}

bool MaxFlow::build_levels(std::size_t source, std::size_t sink) {
  std::fill(level_.begin(), level_.end(), -1);
  std::queue<std::size_t> q;
  level_[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop();
    for (const Arc& a : graph_[v]) {
      if (a.cap > epsilon_ && level_[a.to] < 0) {
        level_[a.to] = level_[v] + 1;
        q.push(a.to);
      }
    }
  }
  return level_[sink] >= 0;
}

double MaxFlow::push(std::size_t node, std::size_t sink, double limit) {
  if (node == sink) return limit;
  for (std::size_t& i = next_[node]; i < graph_[node].size(); ++i) {
    Arc& a = graph_[node][i];
    if (a.cap <= epsilon_ || level_[a.to] != level_[node] + 1) continue;
    const double pushed = push(a.to, sink, std::min(limit, a.cap));
    if (pushed > 0.0) {
      a.cap -= pushed;
      graph_[a.to][a.rev].cap += pushed;
      return pushed;
    }
  }
  return 0.0;
}

double MaxFlow::solve(std::size_t source, std::size_t sink) {
  double total = 0.0;
  while (build_levels(source, sink)) {
    std::fill(next_.begin(), next_.end(), 0);
    for (;;) {
      const double pushed = push(source, sink, std::numeric_limits<double>::infinity());
      if (pushed <= 0.0) break;
      total += pushed;
    }
  }
  return total;
}

double MaxFlow::flow(std::size_t arc) const {
  const auto [from, idx] = arcs_[arc];
  const Arc& a = graph_[from][idx];
  return a.initial - a.cap;
}

}  // namespace cgc
