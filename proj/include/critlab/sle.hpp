#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "critlab/fit.hpp"

namespace critlab {

using cplx = std::complex<double>;

struct DrivingPath {
  double kappa = 0.0;
  double dt = 0.0;
  std::vector<double> samples;  // B_0 = 0, B_1, ...; Var(B_{i+1} - B_i) = dt
  std::uint64_t seed = 0;

  std::size_t steps() const { return samples.empty() ? 0 : samples.size() - 1; }
  cplx point(std::size_t i) const;  // exp(i sqrt(kappa) B_i)
};

DrivingPath sample_driving(double kappa, double dt, double horizon, std::uint64_t seed);

// One elementary radial slit map: constant driving point w for a time dt.
struct SlitStep {
  double dt = 0.0;
  cplx w{1.0, 0.0};
};

struct LoewnerState {
  double elapsed = 0.0;
  std::vector<SlitStep> slitParams;
  double derivAtZero = 1.0;     // product of the measured elementary derivatives
  double maxDerivRelErr = 0.0;  // max over steps of |derivAtZero / e^t - 1|
};

// Tips after each elementary step, preceded by the base of that step's slit
// whenever the driving jump moved it off the previous tip.
struct TracePath {
  std::vector<cplx> points;
  std::vector<double> times;
};

// Elementary maps. forward: D minus the slit from w to w*x(dt) onto D;
// inverse: its inverse. Both fix 0 with derivative e^{dt} (forward).
cplx slit_forward(const SlitStep& s, cplx z);
cplx slit_inverse(const SlitStep& s, cplx zeta);
// distance from the circle to the tip of a slit grown for time t with fixed driving point 1
double slit_tip(double t);

struct EvolveOptions {
  // steps whose driving increment exceeds this angle are subdivided
  double maxAngleStep = 0.25;
  // stop once the trace comes within this distance of 0 (0 = run to the end)
  double stopRadius = 0.0;
};

struct Evolution {
  LoewnerState state;
  TracePath trace;
};

Evolution evolve_radial(const DrivingPath& driving, const EvolveOptions& options = {});

// g_t(z) and g_t^{-1}(zeta) for the composed state
cplx apply_forward(const LoewnerState& state, cplx z);
cplx apply_inverse(const LoewnerState& state, cplx zeta);

// RK4 integration of the radial Loewner ODE with piecewise constant driving,
// kept as an independent cross-check of the composed slit maps.
cplx loewner_ode(const LoewnerState& state, cplx z0, int substepsPerStep);

// dist(0, hull) * e^t at the final time, hull distance from the trace points.
double koebe_check(const LoewnerState& state, const TracePath& trace);
// the same ratio after every step
std::vector<double> koebe_ratios(const TracePath& trace);

// Median distance between consecutive trace points.
double trace_resolution(const TracePath& trace);

// Index j of the first trace point that closes a counterclockwise loop around 0
// with some earlier point i: |g_i - g_j| <= tol and the subpath closed by the
// chord winds +1 around 0. Only points with time <= upTo are considered.
std::optional<std::size_t> first_ccw_loop(const TracePath& trace, double upTo, double tol);
bool detect_ccw_loop(const TracePath& trace, double upTo, double tol);

}  // namespace critlab
