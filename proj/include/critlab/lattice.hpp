#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

namespace critlab {

// Axial coordinates on the triangular lattice.
struct Site {
  int a = 0;
  int b = 0;

  friend constexpr bool operator==(Site, Site) = default;
  friend constexpr auto operator<=>(Site, Site) = default;
  friend constexpr Site operator+(Site s, Site t) { return {s.a + t.a, s.b + t.b}; }
};

// counterclockwise starting from (1,0)
inline constexpr std::array<Site, 6> kNeighborOffsets{{{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};

std::array<Site, 6> site_neighbors(Site s);

constexpr int hex_distance(Site s) {
  auto abs = [](int v) { return v < 0 ? -v : v; };
  return (abs(s.a) + abs(s.b) + abs(s.a + s.b)) / 2;
}

std::complex<double> embed(Site s);

// twice the embedded x coordinate, exact in integers
constexpr int twice_x(Site s) { return 2 * s.a + s.b; }

constexpr bool in_half_plane(Site s) { return twice_x(s) <= 0; }

enum class Metric { graph, euclidean };

// Radius of a site: hex distance, or |embedding| rounded to the nearest integer.
int radius_of(Site s, Metric metric);

enum class RegionKind { disk, annulus, halfPlaneAnnulus, strip, rhombus, rectangle };

struct Box {
  int amin = 0, amax = -1, bmin = 0, bmax = -1;

  int width() const { return amax - amin + 1; }
  int height() const { return bmax - bmin + 1; }
  std::size_t size() const { return width() > 0 && height() > 0 ? std::size_t(width()) * std::size_t(height()) : 0; }
  bool contains(Site s) const { return s.a >= amin && s.a <= amax && s.b >= bmin && s.b <= bmax; }
  std::size_t index(Site s) const { return std::size_t(s.b - bmin) * std::size_t(width()) + std::size_t(s.a - amin); }
  Site site(std::size_t i) const {
    return {amin + int(i % std::size_t(width())), bmin + int(i / std::size_t(width()))};
  }
};

// Finite site sets. Radii are in lattice units under the chosen metric.
//   disk(R):                 radius <= R
//   annulus(R1,R2):          R1 < radius <= R2
//   halfPlaneAnnulus(r,R):   r <= radius <= R and x <= 0 (boundary column included)
//   strip(R):                -R <= x <= 0, |y| <= kStripHalfHeight * R
//   rhombus(L):              0 <= a,b < L
//   rectangle(W,H):          0 <= x <= W, 0 <= y <= H in the embedding
struct Region {
  static constexpr int kStripHalfHeight = 3;

  RegionKind kind = RegionKind::disk;
  int inner = 0;
  int outer = 0;
  double width = 0.0;
  double height = 0.0;
  Metric metric = Metric::graph;

  static Region disk(int R, Metric m = Metric::graph);
  static Region annulus(int R1, int R2, Metric m = Metric::graph);
  static Region half_plane_annulus(int r, int R, Metric m = Metric::graph);
  static Region strip(int R);
  static Region rhombus(int L);
  static Region rectangle(double W, double H);

  bool contains(Site s) const;
  Box bounding_box() const;
  int radius(Site s) const { return radius_of(s, metric); }
};

std::vector<Site> region_sites(const Region& r);

// Per-site uniform variate as a pure function of (seed, site); open iff u < p.
double site_uniform(std::uint64_t seed, Site s);

// Site states over a region. Sampled configurations are evaluated lazily from
// the per-site hash, so a configuration over a huge region costs nothing until
// a detector touches it. Explicit configurations carry their own states.
class Configuration {
 public:
  static Configuration sample(const Region& region, double p, std::uint64_t seed);
  // states listed in region_sites(region) order
  static Configuration from_states(const Region& region, const std::vector<bool>& states);
  static Configuration from_open_sites(const Region& region, const std::vector<Site>& open);

  const Region& region() const { return region_; }
  double p() const { return p_; }
  std::uint64_t seed() const { return seed_; }
  bool is_explicit() const { return explicit_ != nullptr; }

  bool contains(Site s) const { return region_.contains(s); }
  // precondition: contains(s)
  bool is_open(Site s) const {
    if (explicit_) return (*explicit_)[box_.index(s)] != 0;
    return site_uniform(seed_, s) < p_;
  }

  // states in region_sites order
  std::vector<bool> states() const;

 private:
  Configuration(Region r, double p, std::uint64_t seed) : region_(r), box_(r.bounding_box()), p_(p), seed_(seed) {}

  Region region_;
  Box box_;
  double p_ = 0.5;
  std::uint64_t seed_ = 0;
  std::shared_ptr<const std::vector<std::uint8_t>> explicit_;
};

Configuration sample_configuration(const Region& r, double p, std::uint64_t seed);

struct ClusterLabeling {
  static constexpr int kClosed = -1;

  std::vector<Site> sites;  // region_sites order
  std::vector<int> labels;  // cluster id in [0, clusterCount) or kClosed
  int clusterCount = 0;
};

ClusterLabeling label_clusters(const Configuration& c);

}  // namespace critlab
