#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "critlab/arms.hpp"

namespace critlab::oracle {

inline std::vector<bool> mask_states(std::uint64_t mask, std::size_t n) {
  std::vector<bool> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = (mask >> i) & 1;
  return s;
}

// Exhaustive path search on a small shell: every simple path that meets the
// inner sphere only at its start and the outer sphere only at its end.
struct BrutePaths {
  std::vector<Site> sites;
  std::vector<std::vector<int>> adj;
  std::vector<int> rad;
  int r, R;

  BrutePaths(const Region& region, int inner, int outer) : sites(region_sites(region)), r(inner), R(outer) {
    for (Site s : sites) rad.push_back(hex_distance(s));
    adj.resize(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i)
      for (std::size_t j = 0; j < sites.size(); ++j)
        if (hex_distance({sites[i].a - sites[j].a, sites[i].b - sites[j].b}) == 1) adj[i].push_back(int(j));
  }

  struct Path {
    std::uint32_t mask;
    int start;
  };

  std::vector<Path> paths(std::uint32_t allowed) const {
    std::vector<Path> out;
    std::function<void(int, std::uint32_t, int)> dfs = [&](int v, std::uint32_t used, int start) {
      for (int u : adj[v]) {
        if (!((allowed >> u) & 1) || ((used >> u) & 1) || rad[u] == r) continue;
        if (rad[u] == R) {
          out.push_back({used | (1u << u), start});
          continue;
        }
        dfs(u, used | (1u << u), start);
      }
    };
    for (int s = 0; s < int(sites.size()); ++s)
      if (rad[s] == r && ((allowed >> s) & 1)) dfs(s, 1u << s, s);
    return out;
  }

  int max_disjoint(std::uint32_t allowed, int cap) const {
    const auto ps = paths(allowed);
    int best = 0;
    std::function<void(std::size_t, std::uint32_t, int)> rec = [&](std::size_t i, std::uint32_t used, int k) {
      best = std::max(best, k);
      for (std::size_t j = i; j < ps.size() && best < cap; ++j)
        if (!(ps[j].mask & used)) rec(j + 1, used | ps[j].mask, k + 1);
    };
    rec(0, 0, 0);
    return std::min(best, cap);
  }

  double angle(int i) const {
    const auto z = embed(sites[i]);
    double t = std::atan2(z.imag(), z.real());
    return t < 0 ? t + 2 * std::numbers::pi : t;
  }

  // ordered from the upper boundary ray downward by inner endpoint
  bool half_sequence(std::uint32_t open, const std::vector<Color>& colors) const {
    const std::uint32_t all = sites.size() == 32 ? ~0u : ((1u << sites.size()) - 1);
    const auto po = paths(open), pc = paths(all & ~open);
    std::function<bool(std::size_t, std::uint32_t, double)> rec = [&](std::size_t k, std::uint32_t used, double last) {
      if (k == colors.size()) return true;
      for (const auto& p : colors[k] == Color::open ? po : pc)
        if (angle(p.start) > last && !(p.mask & used) && rec(k + 1, used | p.mask, angle(p.start))) return true;
      return false;
    };
    return rec(0, 0, -1.0);
  }
};

inline std::vector<Color> colors_of(const std::string& code) {
  std::vector<Color> out;
  for (char ch : code) out.push_back(ch == 'o' ? Color::open : Color::closed);
  return out;
}

}  // namespace critlab::oracle
