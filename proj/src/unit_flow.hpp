#pragma once

#include <vector>

namespace critlab::detail {

// Augmenting-path max flow for unit capacities with an early stop, used for
// vertex-disjoint crossings after node splitting. Reused across trials.
class UnitFlow {
 public:
  void reset(int nodes) {
    head_.assign(nodes, -1);
    to_.clear();
    cap_.clear();
    next_.clear();
  }

  int add_node() {
    head_.push_back(-1);
    return int(head_.size()) - 1;
  }

  void add_edge(int u, int v, int cap = 1) {
    push(u, v, cap);
    push(v, u, 0);
  }

  // Returns min(maxflow, limit).
  int run(int s, int t, int limit) {
    int flow = 0;
    std::vector<int> via(head_.size());
    std::vector<int> queue;
    while (flow < limit) {
      std::fill(via.begin(), via.end(), -1);
      queue.assign(1, s);
      via[s] = -2;
      bool found = false;
      for (std::size_t qi = 0; qi < queue.size() && !found; ++qi) {
        const int u = queue[qi];
        for (int e = head_[u]; e >= 0; e = next_[e]) {
          const int v = to_[e];
          if (cap_[e] <= 0 || via[v] != -1) continue;
          via[v] = e;
          if (v == t) {
            found = true;
            break;
          }
          queue.push_back(v);
        }
      }
      if (!found) break;
      for (int v = t; v != s;) {
        const int e = via[v];
        cap_[e] -= 1;
        cap_[e ^ 1] += 1;
        v = to_[e ^ 1];
      }
      ++flow;
    }
    return flow;
  }

  // Decompose the flow into s-t node sequences (excluding s and t).
  std::vector<std::vector<int>> paths(int s, int t) const {
    std::vector<int> used(cap_.size(), 0);
    std::vector<std::vector<int>> out;
    while (true) {
      std::vector<int> path;
      int u = s;
      bool advanced = true;
      while (u != t && advanced) {
        advanced = false;
        for (int e = head_[u]; e >= 0; e = next_[e]) {
          // forward edges have even index; flow on e equals residual of its twin
          if ((e & 1) == 0 && cap_[e ^ 1] - used[e] > 0) {
            ++used[e];
            u = to_[e];
            if (u != t) path.push_back(u);
            advanced = true;
            break;
          }
        }
      }
      if (u != t) break;
      out.push_back(std::move(path));
    }
    return out;
  }

 private:
  void push(int u, int v, int cap) {
    to_.push_back(v);
    cap_.push_back(cap);
    next_.push_back(head_[u]);
    head_[u] = int(to_.size()) - 1;
  }

  std::vector<int> head_, to_, cap_, next_;
};

}  // namespace critlab::detail
