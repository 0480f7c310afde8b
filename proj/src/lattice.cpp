#include "critlab/lattice.hpp"

#include <cmath>
#include <numeric>

#include "critlab/errors.hpp"
#include "critlab/rng.hpp"

namespace critlab {

namespace {

const double kRowHeight = std::sqrt(3.0) / 2.0;

int rows_below(double y) { return int(std::floor(y / kRowHeight + 1e-9)); }

}  // namespace

std::array<Site, 6> site_neighbors(Site s) {
  std::array<Site, 6> out;
  for (int k = 0; k < 6; ++k) out[k] = s + kNeighborOffsets[k];
  return out;
}

std::complex<double> embed(Site s) { return {s.a + 0.5 * s.b, kRowHeight * s.b}; }

int radius_of(Site s, Metric metric) {
  if (metric == Metric::graph) return hex_distance(s);
  return int(std::llround(std::abs(embed(s))));
}

Region Region::disk(int R, Metric m) {
  require(R >= 0, "disk radius must be nonnegative");
  return {RegionKind::disk, 0, R, 0, 0, m};
}

Region Region::annulus(int R1, int R2, Metric m) {
  require(R1 >= 0 && R1 < R2, "annulus needs 0 <= R1 < R2");
  return {RegionKind::annulus, R1, R2, 0, 0, m};
}

Region Region::half_plane_annulus(int r, int R, Metric m) {
  require(r >= 1 && r < R, "half-plane annulus needs 1 <= r < R");
  return {RegionKind::halfPlaneAnnulus, r, R, 0, 0, m};
}

Region Region::strip(int R) {
  require(R >= 1, "strip width must be positive");
  return {RegionKind::strip, 0, R, 0, 0, Metric::graph};
}

Region Region::rhombus(int L) {
  require(L >= 1, "rhombus side must be positive");
  return {RegionKind::rhombus, 0, L, 0, 0, Metric::graph};
}

Region Region::rectangle(double W, double H) {
  require(W > 0 && H > 0, "rectangle sides must be positive");
  return {RegionKind::rectangle, 0, 0, W, H, Metric::graph};
}

bool Region::contains(Site s) const {
  switch (kind) {
    case RegionKind::disk:
      return radius(s) <= outer;
    case RegionKind::annulus: {
      const int d = radius(s);
      return d > inner && d <= outer;
    }
    case RegionKind::halfPlaneAnnulus: {
      if (!in_half_plane(s)) return false;
      const int d = radius(s);
      return d >= inner && d <= outer;
    }
    case RegionKind::strip: {
      const int tx = twice_x(s);
      const int bmax = rows_below(kStripHalfHeight * outer);
      return tx >= -2 * outer && tx <= 0 && std::abs(s.b) <= bmax;
    }
    case RegionKind::rhombus:
      return s.a >= 0 && s.b >= 0 && s.a < outer && s.b < outer;
    case RegionKind::rectangle: {
      const int tx = twice_x(s);
      return s.b >= 0 && s.b <= rows_below(height) && tx >= 0 && tx <= int(std::floor(2.0 * width + 1e-9));
    }
  }
  return false;
}

Box Region::bounding_box() const {
  switch (kind) {
    case RegionKind::disk:
    case RegionKind::annulus:
    case RegionKind::halfPlaneAnnulus: {
      if (metric == Metric::graph) return {-outer, outer, -outer, outer};
      const int bm = rows_below(outer + 0.5) + 1;
      const int am = outer + 1 + bm / 2 + 1;
      return {-am, am, -bm, bm};
    }
    case RegionKind::strip: {
      const int bm = rows_below(kStripHalfHeight * outer);
      return {-outer - bm / 2 - 1, bm / 2 + 1, -bm, bm};
    }
    case RegionKind::rhombus:
      return {0, outer - 1, 0, outer - 1};
    case RegionKind::rectangle: {
      const int bm = rows_below(height);
      return {-bm / 2 - 1, int(std::ceil(width)) + 1, 0, bm};
    }
  }
  return {};
}

std::vector<Site> region_sites(const Region& r) {
  std::vector<Site> out;
  const Box box = r.bounding_box();
  for (int b = box.bmin; b <= box.bmax; ++b)
    for (int a = box.amin; a <= box.amax; ++a)
      if (r.contains({a, b})) out.push_back({a, b});
  return out;
}

double site_uniform(std::uint64_t seed, Site s) {
  const std::uint64_t key = (std::uint64_t(std::uint32_t(s.a)) << 32) | std::uint32_t(s.b);
  return to_unit(mix64(seed, key));
}

Configuration Configuration::sample(const Region& region, double p, std::uint64_t seed) {
  require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
  return Configuration(region, p, seed);
}

Configuration Configuration::from_states(const Region& region, const std::vector<bool>& states) {
  const auto sites = region_sites(region);
  require(states.size() == sites.size(), "state vector does not match the region's site count");
  Configuration c(region, 0.5, 0);
  auto buf = std::make_shared<std::vector<std::uint8_t>>(c.box_.size(), 0);
  for (std::size_t i = 0; i < sites.size(); ++i) (*buf)[c.box_.index(sites[i])] = states[i] ? 1 : 0;
  c.explicit_ = std::move(buf);
  return c;
}

Configuration Configuration::from_open_sites(const Region& region, const std::vector<Site>& open) {
  Configuration c(region, 0.5, 0);
  auto buf = std::make_shared<std::vector<std::uint8_t>>(c.box_.size(), 0);
  for (Site s : open) {
    require(region.contains(s), "open site outside the region");
    (*buf)[c.box_.index(s)] = 1;
  }
  c.explicit_ = std::move(buf);
  return c;
}

std::vector<bool> Configuration::states() const {
  const auto sites = region_sites(region_);
  std::vector<bool> out(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) out[i] = is_open(sites[i]);
  return out;
}

Configuration sample_configuration(const Region& r, double p, std::uint64_t seed) {
  return Configuration::sample(r, p, seed);
}

namespace {

struct DisjointSets {
  std::vector<int> parent;

  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int x, int y) {
    x = find(x);
    y = find(y);
    if (x != y) parent[std::max(x, y)] = std::min(x, y);
  }
};

}  // namespace

ClusterLabeling label_clusters(const Configuration& c) {
  ClusterLabeling out;
  out.sites = region_sites(c.region());
  const Box box = c.region().bounding_box();
  std::vector<int> slot(box.size(), -1);
  std::vector<bool> open(out.sites.size());
  for (std::size_t i = 0; i < out.sites.size(); ++i) {
    open[i] = c.is_open(out.sites[i]);
    if (open[i]) slot[box.index(out.sites[i])] = int(i);
  }
  DisjointSets sets(out.sites.size());
  for (std::size_t i = 0; i < out.sites.size(); ++i) {
    if (!open[i]) continue;
    for (Site n : site_neighbors(out.sites[i])) {
      if (!box.contains(n)) continue;
      const int j = slot[box.index(n)];
      if (j >= 0) sets.unite(int(i), j);
    }
  }
  // ids numbered by first appearance in region order
  out.labels.assign(out.sites.size(), ClusterLabeling::kClosed);
  std::vector<int> id_of_root(out.sites.size(), -1);
  for (std::size_t i = 0; i < out.sites.size(); ++i) {
    if (!open[i]) continue;
    const int root = sets.find(int(i));
    if (id_of_root[root] < 0) id_of_root[root] = out.clusterCount++;
    out.labels[i] = id_of_root[root];
  }
  return out;
}

}  // namespace critlab
