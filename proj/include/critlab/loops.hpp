#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "critlab/fit.hpp"

namespace critlab {

enum class Boundary { absorb, reflect };

std::string to_string(Boundary b);
Boundary parse_boundary(const std::string& text);

struct DiffusionPath {
  double theta0 = 0.0;
  Boundary boundaryAt2pi = Boundary::reflect;
  std::optional<double> killTime;  // empty: survived to the horizon
  std::vector<double> times;
  std::vector<double> path;
};

// bessel: the 2/x part of the drift at the nearer end is sampled exactly (squared
// Bessel transition plus the exact probability of touching 0 in between), the
// bounded remainder cot(x/2) - 2/x is added by Euler splitting.
// euler: plain Euler-Maruyama, absorption on sign change, folding at 2pi.
enum class DiffusionScheme { bessel, euler };

std::string to_string(DiffusionScheme s);
DiffusionScheme parse_diffusion_scheme(const std::string& text);

struct DiffusionOptions {
  DiffusionScheme scheme = DiffusionScheme::bessel;
  double maxDriftStep = 0.1;  // euler: |drift| * h <= this
  bool recordPath = true;
};

// dY = cot(Y/2) dt - sqrt(kappa) dB on (0, 2pi), absorbed at 0, reflected or absorbed at 2pi.
DiffusionPath simulate_Y(double kappa, double theta0, double dt, double horizon, Boundary boundaryAt2pi,
                         std::uint64_t seed, const DiffusionOptions& options = {});

struct CoupledY {
  std::vector<double> times, lower, upper;
  std::optional<double> couplingTime;
};

// Two starts driven by the same Brownian increments on a shared adaptive grid.
CoupledY simulate_Y_coupled(double kappa, double theta1, double theta2, double dt, double horizon, std::uint64_t seed);

enum class LoopMethod { diffusion, trace };

std::string to_string(LoopMethod m);
LoopMethod parse_loop_method(const std::string& text);

struct LoopExponentParams {
  long paths = 100000;
  double dt = 0.02;
  int workers = 1;
  std::uint64_t seed = 1;
  DiffusionScheme scheme = DiffusionScheme::bessel;
  // diffusion: survival is fitted on [tFit0, horizon]
  // (the second mode decays about e^{-1.5 t} faster at kappa = 6)
  double horizon = 12.0;
  double tFit0 = 4.0;
  int fitPoints = 13;
  // trace: first-hit radii
  std::vector<double> radii{0.5, 0.35, 0.25, 0.18, 0.12, 0.08};
  double tolFactor = 2.0;  // loop closure tolerance in units of the trace resolution
};

struct LoopExponent {
  double kappa = 0.0;
  LoopMethod method = LoopMethod::diffusion;
  bool noDecay = false;
  double exponent = 0.0;
  double stdErr = 0.0;
  ExponentFit fit;
  long paths = 0;
  // diffusion: hazard-rate estimate on the fit window (primary value), kills counted there
  long events = 0;
  // trace: per-path invariant checks and tolerance stability
  double maxDerivRelErr = 0.0;
  double minKoebe = 1.0;
  double maxKoebe = 0.0;
  long verdictFlipsHalfTol = 0;
};

LoopExponent estimate_loop_free_exponent(double kappa, LoopMethod method, const LoopExponentParams& params);

// Diffusion estimate at dt and dt/2 on paths sharing their randomness.
struct DtHalving {
  LoopExponent coarse, fine;
  double change = 0.0;  // fine - coarse
};

DtHalving diffusion_dt_halving(double kappa, const LoopExponentParams& params);

}  // namespace critlab
