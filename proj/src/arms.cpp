#include "critlab/arms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "critlab/errors.hpp"
#include "critlab/parallel.hpp"
#include "scratch.hpp"
#include "unit_flow.hpp"

namespace critlab {

namespace {

const double kRowHeight = std::sqrt(3.0) / 2.0;

int rows_below(double y) { return int(std::floor(y / kRowHeight + 1e-9)); }

// Closed shell r <= radius <= R, optionally cut to the half-plane.
struct Shell {
  const Configuration& c;
  Box box;
  int r;
  int R;
  bool half;

  Shell(const Configuration& conf, int inner, int outer, bool halfPlane)
      : c(conf), box(conf.region().bounding_box()), r(inner), R(outer), half(halfPlane) {}

  int radius(Site s) const { return c.region().radius(s); }
  bool inside(Site s) const {
    if (!box.contains(s)) return false;
    if (half && !in_half_plane(s)) return false;
    const int d = radius(s);
    return d >= r && d <= R;
  }
  std::size_t index(Site s) const { return box.index(s); }

  std::vector<Site> sphere(int rho) const {
    std::vector<Site> out;
    const Box b = Region::disk(rho, c.region().metric).bounding_box();
    for (int y = b.bmin; y <= b.bmax; ++y)
      for (int x = b.amin; x <= b.amax; ++x) {
        const Site s{x, y};
        if (radius(s) == rho && (!half || in_half_plane(s))) out.push_back(s);
      }
    return out;
  }
};

Region closed_shell_region(int r, int R, bool half, Metric m) {
  if (half) return Region::half_plane_annulus(std::max(r, 1), R, m);
  return r >= 1 ? Region::annulus(r - 1, R, m) : Region::disk(R, m);
}

void require_cover(const Configuration& c, const Region& want) {
  require(region_covers(c.region(), want), "configuration region does not cover the event domain");
}

thread_local detail::Scratch<int> tl_mark;
thread_local detail::Scratch<int> tl_tag;
thread_local std::vector<Site> tl_queue;

// Multi-source BFS over sites of colour col inside the shell; true once a site at radius R is reached.
bool shell_reaches(const Shell& sh, Color col, const std::vector<Site>& sources) {
  auto& mark = tl_mark;
  auto& queue = tl_queue;
  mark.begin(sh.box.size());
  queue.clear();
  for (Site s : sources) {
    if (!sh.inside(s) || !has_color(sh.c, s, col) || mark.has(sh.index(s))) continue;
    mark.set(sh.index(s), 1);
    queue.push_back(s);
  }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const Site s = queue[qi];
    if (sh.radius(s) == sh.R) return true;
    for (Site n : site_neighbors(s)) {
      if (!sh.inside(n) || mark.has(sh.index(n)) || !has_color(sh.c, n, col)) continue;
      mark.set(sh.index(n), 1);
      queue.push_back(n);
    }
  }
  return false;
}

struct ArmPath {
  std::vector<Site> sites;
};

// Vertex-disjoint crossings of colour col by unit-capacity max flow on the
// explored part of the shell. Returns the flow value (capped) and optionally the paths.
int disjoint_crossings(const Shell& sh, Color col, int cap, std::vector<ArmPath>* paths) {
  auto& id = tl_mark;
  std::vector<Site> explored;
  id.begin(sh.box.size());
  bool reached = false;
  for (Site s : sh.sphere(sh.r)) {
    if (!sh.inside(s) || !has_color(sh.c, s, col)) continue;
    id.set(sh.index(s), int(explored.size()));
    explored.push_back(s);
  }
  for (std::size_t qi = 0; qi < explored.size(); ++qi) {
    const Site s = explored[qi];
    if (sh.radius(s) == sh.R) reached = true;
    for (Site n : site_neighbors(s)) {
      if (!sh.inside(n) || id.has(sh.index(n)) || !has_color(sh.c, n, col)) continue;
      id.set(sh.index(n), int(explored.size()));
      explored.push_back(n);
    }
  }
  if (!reached) return 0;

  const int n = int(explored.size());
  detail::UnitFlow flow;
  flow.reset(2 + 2 * n);
  const int S = 0, T = 1;
  for (int v = 0; v < n; ++v) {
    const Site s = explored[v];
    flow.add_edge(2 + 2 * v, 3 + 2 * v);
    const int d = sh.radius(s);
    if (d == sh.r) flow.add_edge(S, 2 + 2 * v);
    if (d == sh.R) flow.add_edge(3 + 2 * v, T);
    for (Site nb : site_neighbors(s)) {
      if (!sh.inside(nb) || !id.has(sh.index(nb))) continue;
      flow.add_edge(3 + 2 * v, 2 + 2 * id.get(sh.index(nb)));
    }
  }
  const int value = flow.run(S, T, cap);
  if (paths) {
    for (const auto& nodes : flow.paths(S, T)) {
      ArmPath p;
      for (int node : nodes)
        if (node % 2 == 0) p.sites.push_back(explored[(node - 2) / 2]);
      paths->push_back(std::move(p));
    }
  }
  return value;
}

// Greedy topmost crossings in the half-annulus. Stage k finds the highest
// crossing of colors[k] below the previous one: Z collects non-matching sites
// connected to the region above, N the matching sites bordering Z, and a
// crossing exists iff N crosses. The next stage works below N.
bool half_plane_sequence(const Shell& sh, const std::vector<Color>& colors) {
  auto& level = tl_mark;  // stage at which a site is still available
  auto& tag = tl_tag;     // 2k+1: in Z at stage k, 2k+2: in N at stage k
  level.begin(sh.box.size());
  tag.begin(sh.box.size());
  std::vector<Site> prevN, zQueue, nList, cross, below;
  const int stages = int(colors.size());

  auto available = [&](Site s, int k) { return sh.inside(s) && level.get(sh.index(s), 0) == k; };

  for (int k = 0; k < stages; ++k) {
    const Color col = colors[k];
    const int zTag = 2 * k + 1, nTag = 2 * k + 2;
    zQueue.clear();
    nList.clear();
    auto seed_site = [&](Site s) {
      if (!available(s, k) || tag.get(sh.index(s), 0) >= zTag) return;
      if (has_color(sh.c, s, col)) {
        tag.set(sh.index(s), nTag);
        nList.push_back(s);
      } else {
        tag.set(sh.index(s), zTag);
        zQueue.push_back(s);
      }
    };
    if (k == 0) {
      // upper boundary column, walked outward from the inner sphere
      for (int b = 1; b <= 2 * sh.R + 2; ++b)
        for (int tx : {0, -1}) {
          if ((tx - b) % 2 != 0) continue;
          seed_site({(tx - b) / 2, b});
        }
    } else {
      for (Site s : prevN)
        for (Site n : site_neighbors(s)) seed_site(n);
    }
    for (std::size_t qi = 0; qi < zQueue.size(); ++qi) {
      for (Site n : site_neighbors(zQueue[qi])) {
        if (!available(n, k) || tag.get(sh.index(n), 0) >= zTag) continue;
        if (has_color(sh.c, n, col)) {
          tag.set(sh.index(n), nTag);
          nList.push_back(n);
        } else {
          tag.set(sh.index(n), zTag);
          zQueue.push_back(n);
        }
      }
    }
    // crossing inside N
    bool crosses = false;
    cross.clear();
    for (Site s : nList)
      if (sh.radius(s) == sh.r) {
        tag.set(sh.index(s), nTag + 2 * stages + 2);
        cross.push_back(s);
      }
    for (std::size_t qi = 0; qi < cross.size() && !crosses; ++qi) {
      const Site s = cross[qi];
      if (sh.radius(s) == sh.R) crosses = true;
      for (Site n : site_neighbors(s)) {
        if (!sh.inside(n) || tag.get(sh.index(n), 0) != nTag) continue;
        tag.set(sh.index(n), nTag + 2 * stages + 2);
        cross.push_back(n);
      }
    }
    if (!crosses) return false;
    if (k + 1 == stages) return true;

    // restore N tags so the next stage can border them, then flood the part below
    for (Site s : nList) tag.set(sh.index(s), nTag);
    below.clear();
    auto take = [&](Site s) {
      if (!available(s, k) || tag.get(sh.index(s), 0) >= zTag) return;
      level.set(sh.index(s), k + 1);
      below.push_back(s);
    };
    for (int b = -1; b >= -2 * sh.R - 2; --b)
      for (int tx : {0, -1}) {
        if (((tx - b) % 2 + 2) % 2 != 0) continue;
        take({(tx - b) / 2, b});
      }
    for (std::size_t qi = 0; qi < below.size(); ++qi)
      for (Site n : site_neighbors(below[qi])) take(n);
    if (below.empty()) return false;
    prevN = nList;
  }
  return true;
}

double angle_of(Site s) {
  const auto z = embed(s);
  double t = std::atan2(z.imag(), z.real());
  if (t < 0) t += 2 * std::numbers::pi;
  return t;
}

bool full_plane_sequence(const Shell& sh, const std::vector<Color>& colors) {
  struct Arm {
    double angle;
    Site site;
    Color color;
  };
  std::vector<Arm> arms;
  for (Color col : {Color::open, Color::closed}) {
    const long needed = std::count(colors.begin(), colors.end(), col);
    if (needed == 0) continue;
    std::vector<ArmPath> paths;
    const int found = disjoint_crossings(sh, col, 1 << 30, &paths);
    if (found < needed) return false;
    for (const auto& p : paths) {
      Site end = p.sites.front();
      for (Site s : p.sites)
        if (sh.radius(s) == sh.r) end = s;
      arms.push_back({angle_of(end), end, col});
    }
  }
  std::sort(arms.begin(), arms.end(), [](const Arm& x, const Arm& y) {
    if (x.angle != y.angle) return x.angle < y.angle;
    return x.site < y.site;
  });
  const std::size_t m = arms.size();
  for (std::size_t start = 0; start < m; ++start) {
    std::size_t matched = 0;
    for (std::size_t j = 0; j < m && matched < colors.size(); ++j)
      if (arms[(start + j) % m].color == colors[matched]) ++matched;
    if (matched == colors.size()) return true;
  }
  return false;
}

}  // namespace

std::string to_string(Color col) { return col == Color::open ? "open" : "closed"; }

Color parse_color(const std::string& text) {
  if (text == "open" || text == "o" || text == "1") return Color::open;
  if (text == "closed" || text == "c" || text == "0") return Color::closed;
  throw PreconditionError("unknown colour '" + text + "'");
}

bool region_covers(const Region& have, const Region& want) {
  const bool round = want.kind == RegionKind::disk || want.kind == RegionKind::annulus ||
                     want.kind == RegionKind::halfPlaneAnnulus;
  if (round && have.metric == want.metric) {
    if (have.kind == RegionKind::disk) return want.outer <= have.outer;
    if (have.kind == want.kind && want.kind != RegionKind::disk)
      return have.inner <= want.inner && want.outer <= have.outer;
    if (have.kind == RegionKind::annulus && want.kind == RegionKind::halfPlaneAnnulus)
      return have.inner < want.inner && want.outer <= have.outer;
  }
  if (have.kind == want.kind) {
    if (want.kind == RegionKind::rhombus || want.kind == RegionKind::strip) return want.outer <= have.outer;
    if (want.kind == RegionKind::rectangle) return want.width <= have.width && want.height <= have.height;
  }
  for (Site s : region_sites(want))
    if (!have.contains(s)) return false;
  return true;
}

int one_arm_reach(const Configuration& c, int Rmax) {
  require(Rmax >= 0, "radius must be nonnegative");
  require_cover(c, Region::disk(Rmax, c.region().metric));
  const Site origin{0, 0};
  if (!c.is_open(origin)) return -1;
  const Shell sh(c, 0, Rmax, false);
  auto& mark = tl_mark;
  auto& queue = tl_queue;
  mark.begin(sh.box.size());
  queue.assign(1, origin);
  mark.set(sh.index(origin), 1);
  int best = 0;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const Site s = queue[qi];
    best = std::max(best, sh.radius(s));
    if (best == Rmax) break;
    for (Site n : site_neighbors(s)) {
      if (!sh.inside(n) || mark.has(sh.index(n)) || !c.is_open(n)) continue;
      mark.set(sh.index(n), 1);
      queue.push_back(n);
    }
  }
  return best;
}

bool event_one_arm(const Configuration& c, int R) { return one_arm_reach(c, R) == R; }

bool event_color_crossing(const Configuration& c, Color col, int R1, int R2) {
  require(R1 >= 0 && R1 < R2, "annulus needs 0 <= R1 < R2");
  require_cover(c, closed_shell_region(R1, R2, false, c.region().metric));
  const Shell sh(c, R1, R2, false);
  return shell_reaches(sh, col, sh.sphere(R1));
}

bool event_annulus_crossing(const Configuration& c, int R1, int R2) {
  return event_color_crossing(c, Color::open, R1, R2);
}

bool event_circuit(const Configuration& c, int R) {
  require(R >= 1, "circuit radius must be positive");
  return !event_color_crossing(c, Color::closed, R, 2 * R);
}

int count_disjoint_arms(const Configuration& c, Color col, int r, int R, bool halfPlane, int cap) {
  require(r >= 0 && r < R, "arms need 0 <= r < R");
  require(!halfPlane || r >= 1, "half-plane arms need r >= 1");
  require(cap >= 1, "cap must be positive");
  require_cover(c, closed_shell_region(r, R, halfPlane, c.region().metric));
  const Shell sh(c, r, R, halfPlane);
  return disjoint_crossings(sh, col, cap, nullptr);
}

bool event_disjoint_open_arms(const Configuration& c, int k, int r, int R, bool halfPlane) {
  require(k >= 1, "arm count k must be at least 1");
  return count_disjoint_arms(c, Color::open, r, R, halfPlane, k) >= k;
}

bool event_multichromatic_arms(const Configuration& c, const std::vector<Color>& colors, int r, int R,
                               bool halfPlane) {
  require(!colors.empty(), "colour sequence must be nonempty");
  require(r >= 0 && r < R, "arms need 0 <= r < R");
  require(!halfPlane || r >= 1, "half-plane arms need r >= 1");
  require_cover(c, closed_shell_region(r, R, halfPlane, c.region().metric));
  const Shell sh(c, r, R, halfPlane);
  return halfPlane ? half_plane_sequence(sh, colors) : full_plane_sequence(sh, colors);
}

bool event_rhombus_crossing(const Configuration& c, CrossingDirection dir, Color col) {
  require(c.region().kind == RegionKind::rhombus, "rhombus crossing needs a rhombus configuration");
  const int L = c.region().outer;
  const Box box = c.region().bounding_box();
  auto& mark = tl_mark;
  auto& queue = tl_queue;
  mark.begin(box.size());
  queue.clear();
  const bool lr = dir == CrossingDirection::leftRight;
  for (int t = 0; t < L; ++t) {
    const Site s = lr ? Site{0, t} : Site{t, 0};
    if (!has_color(c, s, col)) continue;
    mark.set(box.index(s), 1);
    queue.push_back(s);
  }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const Site s = queue[qi];
    if ((lr ? s.a : s.b) == L - 1) return true;
    for (Site n : site_neighbors(s)) {
      if (!box.contains(n) || mark.has(box.index(n)) || !has_color(c, n, col)) continue;
      mark.set(box.index(n), 1);
      queue.push_back(n);
    }
  }
  return false;
}

bool event_rectangle_crossing(const Configuration& c, CrossingDirection dir, Color col) {
  const Region& rg = c.region();
  require(rg.kind == RegionKind::rectangle, "rectangle crossing needs a rectangle configuration");
  const int rows = rows_below(rg.height);
  const int txMax = int(std::floor(2.0 * rg.width + 1e-9));
  const Box box = rg.bounding_box();
  auto row_end = [&](int b, bool right) {
    int tx = right ? txMax : 0;
    if (((tx - b) % 2 + 2) % 2 != 0) tx += right ? -1 : 1;
    return Site{(tx - b) / 2, b};
  };
  auto& mark = tl_mark;
  auto& queue = tl_queue;
  mark.begin(box.size());
  queue.clear();
  auto push = [&](Site s) {
    if (!rg.contains(s) || mark.has(box.index(s)) || !has_color(c, s, col)) return;
    mark.set(box.index(s), 1);
    queue.push_back(s);
  };
  const bool lr = dir == CrossingDirection::leftRight;
  if (lr) {
    for (int b = 0; b <= rows; ++b) push(row_end(b, false));
  } else {
    for (int tx = 0; tx <= txMax; tx += 2) push({tx / 2, 0});
  }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const Site s = queue[qi];
    if (lr ? twice_x(s) >= row_end(s.b, true).a * 2 + s.b : s.b == rows) return true;
    for (Site n : site_neighbors(s)) push(n);
  }
  return false;
}

int strip_cluster_count(const Configuration& c, int R) {
  require(R >= 1, "strip width must be positive");
  require_cover(c, Region::strip(R));
  const Region strip = Region::strip(R);
  const Box box = c.region().bounding_box();
  const int bMax = rows_below(double(R));
  auto& mark = tl_mark;
  auto& queue = tl_queue;
  mark.begin(box.size());
  int count = 0;
  for (int b = -bMax; b <= bMax; ++b) {
    const int tx = (b % 2 == 0) ? 0 : -1;
    const Site src{(tx - b) / 2, b};
    if (!c.is_open(src) || mark.has(box.index(src))) continue;
    queue.assign(1, src);
    mark.set(box.index(src), 1);
    bool touches = false;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const Site s = queue[qi];
      if (twice_x(s) <= -2 * R + 1) touches = true;
      for (Site n : site_neighbors(s)) {
        if (!strip.contains(n) || mark.has(box.index(n)) || !c.is_open(n)) continue;
        mark.set(box.index(n), 1);
        queue.push_back(n);
      }
    }
    if (touches) ++count;
  }
  return count;
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::oneArm: return "oneArm";
    case EventKind::annulusCrossing: return "annulusCrossing";
    case EventKind::circuit: return "circuit";
    case EventKind::disjointOpenArms: return "disjointOpenArms";
    case EventKind::multichromaticArms: return "multichromaticArms";
    case EventKind::rhombusCrossing: return "rhombusCrossing";
    case EventKind::rectangleCrossing: return "rectangleCrossing";
  }
  return "?";
}

EventKind parse_event_kind(const std::string& text) {
  for (EventKind k : {EventKind::oneArm, EventKind::annulusCrossing, EventKind::circuit, EventKind::disjointOpenArms,
                      EventKind::multichromaticArms, EventKind::rhombusCrossing, EventKind::rectangleCrossing})
    if (to_string(k) == text) return k;
  throw PreconditionError("unknown event kind '" + text + "'");
}

ArmEventSpec ArmEventSpec::one_arm(int R) {
  ArmEventSpec s;
  s.kind = EventKind::oneArm;
  s.inner = 0;
  s.outer = R;
  return s;
}

ArmEventSpec ArmEventSpec::annulus_crossing(int R1, int R2) {
  ArmEventSpec s;
  s.kind = EventKind::annulusCrossing;
  s.inner = R1;
  s.outer = R2;
  return s;
}

ArmEventSpec ArmEventSpec::circuit(int R) {
  ArmEventSpec s;
  s.kind = EventKind::circuit;
  s.inner = R;
  s.outer = R;
  return s;
}

ArmEventSpec ArmEventSpec::disjoint_open_arms(int k, int r, int R, bool halfPlane) {
  ArmEventSpec s;
  s.kind = EventKind::disjointOpenArms;
  s.arms = k;
  s.inner = r;
  s.outer = R;
  s.halfPlane = halfPlane;
  return s;
}

ArmEventSpec ArmEventSpec::multichromatic(std::vector<Color> colors, int r, int R, bool halfPlane) {
  ArmEventSpec s;
  s.kind = EventKind::multichromaticArms;
  s.colors = std::move(colors);
  s.arms = int(s.colors.size());
  s.inner = r;
  s.outer = R;
  s.halfPlane = halfPlane;
  return s;
}

ArmEventSpec ArmEventSpec::rhombus(int L, CrossingDirection dir, Color col) {
  ArmEventSpec s;
  s.kind = EventKind::rhombusCrossing;
  s.outer = L;
  s.direction = dir;
  s.color = col;
  return s;
}

ArmEventSpec ArmEventSpec::rectangle(double W, double H) {
  ArmEventSpec s;
  s.kind = EventKind::rectangleCrossing;
  s.width = W;
  s.height = H;
  return s;
}

void ArmEventSpec::validate() const {
  switch (kind) {
    case EventKind::oneArm:
      require(outer >= 0, "oneArm radius must be nonnegative");
      break;
    case EventKind::annulusCrossing:
      require(inner >= 0 && inner < outer, "annulus radii must satisfy 0 <= R1 < R2");
      break;
    case EventKind::circuit:
      require(outer >= 1, "circuit radius must be positive");
      break;
    case EventKind::disjointOpenArms:
      require(arms >= 1, "arm count k must be at least 1");
      require(inner >= (halfPlane ? 1 : 0) && inner < outer, "arm radii must satisfy r < R");
      break;
    case EventKind::multichromaticArms:
      require(!colors.empty(), "colour sequence must be nonempty");
      require(inner >= (halfPlane ? 1 : 0) && inner < outer, "arm radii must satisfy r < R");
      break;
    case EventKind::rhombusCrossing:
      require(outer >= 1, "rhombus side must be positive");
      break;
    case EventKind::rectangleCrossing:
      require(width > 0 && height > 0, "rectangle sides must be positive");
      break;
  }
}

Region ArmEventSpec::region() const {
  validate();
  switch (kind) {
    case EventKind::oneArm:
    case EventKind::annulusCrossing:
      return Region::disk(outer, metric);
    case EventKind::circuit:
      return Region::disk(2 * outer, metric);
    case EventKind::disjointOpenArms:
    case EventKind::multichromaticArms:
      return halfPlane ? Region::half_plane_annulus(inner, outer, metric) : Region::disk(outer, metric);
    case EventKind::rhombusCrossing:
      return Region::rhombus(outer);
    case EventKind::rectangleCrossing:
      return Region::rectangle(width, height);
  }
  return {};
}

bool ArmEventSpec::evaluate(const Configuration& c) const {
  switch (kind) {
    case EventKind::oneArm: return event_one_arm(c, outer);
    case EventKind::annulusCrossing: return event_annulus_crossing(c, inner, outer);
    case EventKind::circuit: return event_circuit(c, outer);
    case EventKind::disjointOpenArms: return event_disjoint_open_arms(c, arms, inner, outer, halfPlane);
    case EventKind::multichromaticArms: return event_multichromatic_arms(c, colors, inner, outer, halfPlane);
    case EventKind::rhombusCrossing: return event_rhombus_crossing(c, direction, color);
    case EventKind::rectangleCrossing: return event_rectangle_crossing(c, direction, color);
  }
  return false;
}

ArmEventSpec ArmEventSpec::at_scale(int R) const {
  require(kind != EventKind::rectangleCrossing, "rectangle events have no integer scale");
  ArmEventSpec s = *this;
  s.outer = R;
  s.validate();
  return s;
}

bool ArmEventSpec::monotone_in_scale() const {
  return kind == EventKind::oneArm || kind == EventKind::annulusCrossing || kind == EventKind::disjointOpenArms ||
         kind == EventKind::multichromaticArms;
}

McEstimate McEstimate::from_counts(long trials, long hits, std::uint64_t seed) {
  require(trials >= 1, "trials must be at least 1");
  McEstimate e;
  e.trials = trials;
  e.hits = hits;
  e.pHat = double(hits) / double(trials);
  e.stdErr = std::sqrt(e.pHat * (1.0 - e.pHat) / double(trials));
  e.seed = seed;
  return e;
}

McEstimate mc_estimate(const ArmEventSpec& spec, double p, long trials, std::uint64_t seed, int workers) {
  require(trials >= 1, "trials must be at least 1");
  require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
  const Region region = spec.region();
  std::vector<long> hits(std::size_t(std::max(1, workers)), 0);
  run_sharded(trials, workers, [&](long begin, long end, int shard) {
    long h = 0;
    for (long t = begin; t < end; ++t)
      if (spec.evaluate(Configuration::sample(region, p, trial_seed(seed, t)))) ++h;
    hits[shard] = h;
  });
  long total = 0;
  for (long h : hits) total += h;
  return McEstimate::from_counts(trials, total, seed);
}

ScaleSweep mc_sweep(const ArmEventSpec& spec, std::vector<int> scales, double p, long trials, std::uint64_t seed,
                    int workers, bool checkMonotone) {
  require(!scales.empty(), "sweep needs at least one scale");
  require(trials >= 1, "trials must be at least 1");
  require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
  std::sort(scales.begin(), scales.end());
  require(std::adjacent_find(scales.begin(), scales.end()) == scales.end(), "scales must be distinct");
  std::vector<ArmEventSpec> specs;
  for (int R : scales) specs.push_back(spec.at_scale(R));
  const Region region = specs.back().region();
  const std::size_t m = scales.size();
  const bool monotone = spec.monotone_in_scale();
  const int shards = std::max(1, workers);
  std::vector<std::vector<long>> hits(shards, std::vector<long>(m, 0));
  std::vector<long> violations(shards, 0);

  run_sharded(trials, workers, [&](long begin, long end, int shard) {
    auto& h = hits[shard];
    for (long t = begin; t < end; ++t) {
      const auto c = Configuration::sample(region, p, trial_seed(seed, t));
      if (checkMonotone || !monotone) {
        bool failedBelow = false;
        for (std::size_t i = 0; i < m; ++i) {
          const bool ok = specs[i].evaluate(c);
          if (ok) ++h[i];
          if (ok && failedBelow && monotone) ++violations[shard];
          failedBelow = failedBelow || !ok;
        }
      } else if (spec.kind == EventKind::oneArm) {
        const int reach = one_arm_reach(c, scales.back());
        for (std::size_t i = 0; i < m && reach >= scales[i]; ++i) ++h[i];
      } else {
        for (std::size_t i = 0; i < m && specs[i].evaluate(c); ++i) ++h[i];
      }
    }
  });

  ScaleSweep out;
  out.scales = scales;
  for (std::size_t i = 0; i < m; ++i) {
    long total = 0;
    for (const auto& h : hits) total += h[i];
    out.estimates.push_back(McEstimate::from_counts(trials, total, seed));
  }
  for (long v : violations) out.monotoneViolations += v;
  return out;
}

StripCountEstimate mc_strip_count(int R, double p, long trials, std::uint64_t seed, int workers) {
  require(trials >= 2, "strip count needs at least 2 trials");
  const Region region = Region::strip(R);
  const int shards = std::max(1, workers);
  std::vector<double> sum(shards, 0.0), sumSq(shards, 0.0);
  run_sharded(trials, workers, [&](long begin, long end, int shard) {
    for (long t = begin; t < end; ++t) {
      const double x = strip_cluster_count(Configuration::sample(region, p, trial_seed(seed, t)), R);
      sum[shard] += x;
      sumSq[shard] += x * x;
    }
  });
  double s = 0, s2 = 0;
  for (int i = 0; i < shards; ++i) {
    s += sum[i];
    s2 += sumSq[i];
  }
  StripCountEstimate e;
  e.R = R;
  e.trials = trials;
  e.mean = s / double(trials);
  const double var = std::max(0.0, (s2 - double(trials) * e.mean * e.mean) / double(trials - 1));
  e.stdErr = std::sqrt(var / double(trials));
  return e;
}

ExponentFit fit_sweep(const ScaleSweep& sweep, bool weighted) {
  std::vector<std::pair<double, double>> pts;
  std::vector<double> w;
  for (std::size_t i = 0; i < sweep.scales.size(); ++i) {
    const auto& e = sweep.estimates[i];
    pts.emplace_back(double(sweep.scales[i]), e.pHat);
    if (weighted) {
      const double rel = e.pHat > 0 ? e.stdErr / e.pHat : 0.0;
      w.push_back(rel > 0 ? 1.0 / (rel * rel) : 1.0);
    }
  }
  return fit_exponent(pts, w);
}

}  // namespace critlab
