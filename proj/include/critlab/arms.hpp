#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "critlab/fit.hpp"
#include "critlab/lattice.hpp"

namespace critlab {

enum class Color : std::uint8_t { closed = 0, open = 1 };

inline bool has_color(const Configuration& c, Site s, Color col) { return c.is_open(s) == (col == Color::open); }

std::string to_string(Color col);
Color parse_color(const std::string& text);

// True when every site of `want` is a site of `have`.
bool region_covers(const Region& have, const Region& want);

// Detectors. Spheres are taken in c.region().metric. Each throws
// PreconditionError when the configuration does not cover the event's domain.
bool event_one_arm(const Configuration& c, int R);
// Largest radius reached by the origin's open cluster, capped at Rmax; -1 when the origin is closed.
int one_arm_reach(const Configuration& c, int Rmax);
bool event_annulus_crossing(const Configuration& c, int R1, int R2);
bool event_color_crossing(const Configuration& c, Color col, int R1, int R2);
bool event_circuit(const Configuration& c, int R);

// Maximum number of vertex-disjoint crossings of colour col from the sphere
// of radius r to the sphere of radius R, stopping early at `cap`.
int count_disjoint_arms(const Configuration& c, Color col, int r, int R, bool halfPlane, int cap);
bool event_disjoint_open_arms(const Configuration& c, int k, int r, int R, bool halfPlane);

// Half-plane: colors[0] is the arm nearest the upper boundary ray, exact.
// Full plane: per-colour disjoint families ordered by the angle of their inner
// endpoints, matched as a cyclic subsequence (a sufficient test).
bool event_multichromatic_arms(const Configuration& c, const std::vector<Color>& colors, int r, int R, bool halfPlane);

enum class CrossingDirection { leftRight, topBottom };

// On rhombus(L): left/right are a = 0 and a = L-1, bottom/top are b = 0 and b = L-1.
bool event_rhombus_crossing(const Configuration& c, CrossingDirection dir, Color col);
// On rectangle(W,H): horizontal crossing between the leftmost and rightmost site of each row.
bool event_rectangle_crossing(const Configuration& c, CrossingDirection dir, Color col);

// Number of open clusters joining I_R (right column, |y| <= R) to L_R (left column, x near -R).
int strip_cluster_count(const Configuration& c, int R);

enum class EventKind { oneArm, annulusCrossing, circuit, disjointOpenArms, multichromaticArms, rhombusCrossing, rectangleCrossing };

std::string to_string(EventKind k);
EventKind parse_event_kind(const std::string& text);

struct ArmEventSpec {
  EventKind kind = EventKind::oneArm;
  int inner = 1;   // r, R1, or unused
  int outer = 8;   // R, R2, circuit R, rhombus L
  int arms = 1;    // k
  std::vector<Color> colors{Color::open};
  bool halfPlane = false;
  CrossingDirection direction = CrossingDirection::leftRight;
  Color color = Color::open;  // crossing colour for rhombus/rectangle
  double width = 1.0, height = 1.0;
  Metric metric = Metric::graph;

  static ArmEventSpec one_arm(int R);
  static ArmEventSpec annulus_crossing(int R1, int R2);
  static ArmEventSpec circuit(int R);
  static ArmEventSpec disjoint_open_arms(int k, int r, int R, bool halfPlane);
  static ArmEventSpec multichromatic(std::vector<Color> colors, int r, int R, bool halfPlane);
  static ArmEventSpec rhombus(int L, CrossingDirection dir, Color col = Color::open);
  static ArmEventSpec rectangle(double W, double H);

  void validate() const;
  // smallest region on which the event is decided
  Region region() const;
  bool evaluate(const Configuration& c) const;
  // the same event with its scale parameter (outer radius / side) replaced
  ArmEventSpec at_scale(int R) const;
  // the event is decreasing in the scale parameter
  bool monotone_in_scale() const;
};

struct McEstimate {
  long trials = 0;
  long hits = 0;
  double pHat = 0.0;
  double stdErr = 0.0;
  std::uint64_t seed = 0;

  static McEstimate from_counts(long trials, long hits, std::uint64_t seed);
};

// Per-trial configurations are keyed by (seed, trial index), so the result
// does not depend on the number of workers.
McEstimate mc_estimate(const ArmEventSpec& spec, double p, long trials, std::uint64_t seed, int workers = 1);

struct ScaleSweep {
  std::vector<int> scales;
  std::vector<McEstimate> estimates;
  // samples where the event held at a larger scale but failed at a smaller one
  long monotoneViolations = 0;
};

// Every trial draws one configuration over the largest scale and evaluates
// all scales on it. With checkMonotone the events are evaluated independently
// and violations counted; otherwise evaluation stops at the first failure.
ScaleSweep mc_sweep(const ArmEventSpec& spec, std::vector<int> scales, double p, long trials, std::uint64_t seed,
                    int workers = 1, bool checkMonotone = false);

struct StripCountEstimate {
  int R = 0;
  long trials = 0;
  double mean = 0.0;
  double stdErr = 0.0;
};

StripCountEstimate mc_strip_count(int R, double p, long trials, std::uint64_t seed, int workers = 1);

// Weighted fit with weights 1/var(log pHat) from the estimates' standard errors.
ExponentFit fit_sweep(const ScaleSweep& sweep, bool weighted = false);

}  // namespace critlab
