#include "critlab/loops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <tuple>

#include <boost/math/special_functions/bessel.hpp>

#include "critlab/errors.hpp"
#include "critlab/parallel.hpp"
#include "critlab/rng.hpp"
#include "critlab/sle.hpp"

namespace critlab {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr double kPi = std::numbers::pi;

double cot_half(double y) { return 1.0 / std::tan(0.5 * y); }

// cot(x/2) - 2/x, bounded on [0, pi]
double drift_remainder(double x) {
  if (x < 1e-3) return -x / 6.0 - x * x * x / 360.0;
  return cot_half(x) - 2.0 / x;
}

// Distance-to-the-nearer-end form: dX = (2/X + r(X)) dt + sqrt(kappa) dB.
// With Q = X^2/kappa the singular part is a squared Bessel process of
// dimension d = 1 + 4/kappa; its transition over h is h times a noncentral
// chi-square, sampled as (Z + sqrt(Q/h))^2 + chi2_{d-1}.
// z ~ N(0,1), g ~ chi2_{d-1} = Gamma(2/kappa, 2), u ~ U(0,1)
struct Draw {
  double z, g, u;
};

class BesselStepper {
 public:
  explicit BesselStepper(double kappa)
      : kappa_(kappa), dim_(1.0 + 4.0 / kappa), nu_(std::abs(0.5 * dim_ - 1.0)), extra_(2.0 / kappa, 2.0) {}

  Draw draw(PathRng& rng) {
    const double z = rng.normal();
    const double g = extra_(rng.engine());
    return {z, g, rng.uniform()};
  }

  // exact squared Bessel move over h, started from distance x
  double move(double x, double h, const Draw& d) const {
    const double s = std::sqrt(kappa_ * h);
    const double a = x + s * d.z;
    return std::sqrt(a * a + s * s * d.g);
  }

  // probability that the Bessel bridge from x to xn over h touched 0 (dimension < 2):
  // 1 - I_nu(z) / I_{-nu}(z) with z = x xn / (kappa h)
  double touch_probability(double x, double xn, double h) const {
    if (dim_ >= 2.0) return 0.0;
    const double z = x * xn / (kappa_ * h);
    if (z > 25.0) return 0.0;  // below 2 e^{-2z}
    if (z < 1e-300) return 1.0;
    const double k = 2.0 / kPi * std::sin(nu_ * kPi) * boost::math::cyl_bessel_k(nu_, z);
    return k / (boost::math::cyl_bessel_i(nu_, z) + k);
  }

 private:
  double kappa_, dim_, nu_;
  std::gamma_distribution<double> extra_;
};

struct YSim {
  double kappa;
  Boundary mode;
  DiffusionOptions opt;
  BesselStepper bessel{kappa};

  // advances (t, y) by at most h; returns the kill time if the path died in this step
  std::optional<double> step(double& t, double& y, double h, PathRng& rng) {
    return opt.scheme == DiffusionScheme::bessel ? bessel_step(t, y, h, bessel.draw(rng)) : euler_step(t, y, h, rng);
  }

  std::optional<double> bessel_step(double& t, double& y, double h, const Draw& d) const {
    const bool low = y <= kPi;
    double x = low ? y : kTwoPi - y;
    // half remainder drift, exact singular part, half remainder drift
    x = std::max(x + 0.5 * h * drift_remainder(x), 0.0);
    const double xb = bessel.move(x, h, d);
    const bool absorbing = low || mode == Boundary::absorb;
    if (absorbing && d.u < bessel.touch_probability(x, xb, h)) return t + 0.5 * h;
    x = xb + 0.5 * h * drift_remainder(std::min(xb, kPi));
    if (x <= 0.0) {
      if (absorbing) return t + h;
      x = -x;
    }
    y = low ? x : kTwoPi - x;
    y = fold(y);
    t += h;
    return std::nullopt;
  }

  std::optional<double> euler_step(double& t, double& y, double h, PathRng& rng) {
    const double drift = cot_half(y);
    h = std::min(h, opt.maxDriftStep / std::max(std::abs(drift), 1e-12));
    const double yn = y + drift * h - std::sqrt(kappa * h) * rng.normal();
    if (yn <= 0.0) return t + h * y / (y - yn);
    if (mode == Boundary::absorb && yn >= kTwoPi) return t + h * (kTwoPi - y) / (yn - y);
    y = fold(yn);
    t += h;
    return std::nullopt;
  }

  static double fold(double y) { return y > kTwoPi ? 2 * kTwoPi - y : y; }
};

}  // namespace

std::string to_string(Boundary b) { return b == Boundary::absorb ? "absorb" : "reflect"; }

Boundary parse_boundary(const std::string& text) {
  if (text == "absorb") return Boundary::absorb;
  if (text == "reflect") return Boundary::reflect;
  throw PreconditionError("unknown boundary mode '" + text + "'");
}

std::string to_string(DiffusionScheme s) { return s == DiffusionScheme::euler ? "euler" : "bessel"; }

DiffusionScheme parse_diffusion_scheme(const std::string& text) {
  if (text == "bessel") return DiffusionScheme::bessel;
  if (text == "euler") return DiffusionScheme::euler;
  throw PreconditionError("unknown diffusion scheme '" + text + "'");
}

std::string to_string(LoopMethod m) { return m == LoopMethod::trace ? "trace" : "diffusion"; }

LoopMethod parse_loop_method(const std::string& text) {
  if (text == "trace") return LoopMethod::trace;
  if (text == "diffusion") return LoopMethod::diffusion;
  throw PreconditionError("unknown loop method '" + text + "'");
}

DiffusionPath simulate_Y(double kappa, double theta0, double dt, double horizon, Boundary boundaryAt2pi,
                         std::uint64_t seed, const DiffusionOptions& options) {
  require(theta0 > 0.0 && theta0 <= kTwoPi, "theta0 must lie in (0, 2pi]");
  require(dt > 0.0 && horizon > 0.0, "dt and horizon must be positive");
  require(kappa >= 0.0, "kappa must be nonnegative");
  require(options.maxDriftStep > 0.0, "maxDriftStep must be positive");
  DiffusionPath out;
  out.theta0 = theta0;
  out.boundaryAt2pi = boundaryAt2pi;
  if (boundaryAt2pi == Boundary::absorb && theta0 >= kTwoPi) {
    out.killTime = 0.0;
    return out;
  }
  PathRng rng(derive_seed(seed, "diffusion"));
  YSim sim{std::max(kappa, 1e-300), boundaryAt2pi, options};
  double t = 0.0, y = theta0;
  if (options.recordPath) {
    out.times.push_back(t);
    out.path.push_back(y);
  }
  while (t < horizon) {
    const double h = std::min(dt, horizon - t);
    if (kappa == 0.0) {
      // deterministic flow: plain drift-limited Euler, never reaches 0 from (0, 2pi)
      const double drift = y < kTwoPi ? cot_half(y) : 0.0;
      const double hd = std::min(h, drift != 0.0 ? options.maxDriftStep / std::abs(drift) : h);
      y = std::min(y + drift * hd, kTwoPi);
      t += hd;
    } else if (auto kill = sim.step(t, y, h, rng)) {
      out.killTime = *kill;
      if (options.recordPath) {
        out.times.push_back(*kill);
        out.path.push_back(boundaryAt2pi == Boundary::absorb && y > kPi ? kTwoPi : 0.0);
      }
      return out;
    }
    if (options.recordPath) {
      out.times.push_back(t);
      out.path.push_back(y);
    }
  }
  return out;
}

CoupledY simulate_Y_coupled(double kappa, double theta1, double theta2, double dt, double horizon,
                            std::uint64_t seed) {
  require(theta1 > 0.0 && theta1 < theta2 && theta2 < kTwoPi, "coupled starts need 0 < theta1 < theta2 < 2pi");
  require(dt > 0.0 && horizon > 0.0 && kappa >= 0.0, "invalid coupled simulation parameters");
  PathRng rng(derive_seed(seed, "coupled"));
  CoupledY out;
  double t = 0.0, y1 = theta1, y2 = theta2;
  out.times.push_back(t);
  out.lower.push_back(y1);
  out.upper.push_back(y2);
  auto fold = [](double y) { return y > kTwoPi ? 2 * kTwoPi - y : y; };
  while (t < horizon && y1 > 0.0) {
    // explicit Euler on a shared grid: the noise cancels in the difference
    const double d1 = cot_half(y1), d2 = cot_half(y2);
    double h = std::min(dt, horizon - t);
    for (double d : {d1, d2})
      if (d != 0.0) h = std::min(h, 0.1 / std::abs(d));
    const double dB = std::sqrt(h) * rng.normal();
    y1 = y1 + d1 * h - std::sqrt(kappa) * dB;
    y2 = out.couplingTime ? y1 : y2 + d2 * h - std::sqrt(kappa) * dB;
    y1 = fold(y1);
    y2 = out.couplingTime ? y1 : fold(y2);
    t += h;
    if (!out.couplingTime && y2 <= y1) {
      out.couplingTime = t;
      y2 = y1;
    }
    out.times.push_back(t);
    out.lower.push_back(std::max(y1, 0.0));
    out.upper.push_back(std::max(y2, 0.0));
  }
  return out;
}

namespace {

void check_window(const LoopExponentParams& p) {
  require(p.tFit0 >= 0.0 && p.tFit0 < p.horizon, "fit window must lie inside the horizon");
  require(p.fitPoints >= 3, "need at least 3 fit points");
}

// exponential hazard on [tFit0, horizon] plus the log-survival regression
LoopExponent exponent_from_kills(double kappa, std::vector<double> kill, const LoopExponentParams& p) {
  LoopExponent out;
  out.kappa = kappa;
  out.method = LoopMethod::diffusion;
  out.paths = long(kill.size());
  double exposure = 0.0;
  long events = 0;
  for (double k : kill) {
    if (k <= p.tFit0) continue;
    exposure += std::min(k, p.horizon) - p.tFit0;
    if (k <= p.horizon) ++events;
  }
  if (events == 0 || exposure <= 0.0) throw NumericalError("no absorptions inside the fit window");
  out.events = events;
  out.exponent = double(events) / exposure;
  out.stdErr = out.exponent / std::sqrt(double(events));

  std::vector<std::pair<double, double>> pts;
  std::sort(kill.begin(), kill.end());
  for (int i = 0; i < p.fitPoints; ++i) {
    const double t = p.tFit0 + (p.horizon - p.tFit0) * i / (p.fitPoints - 1);
    const auto dead = std::upper_bound(kill.begin(), kill.end(), t) - kill.begin();
    pts.emplace_back(t, double(out.paths - dead) / double(out.paths));
  }
  out.fit = fit_log_linear(pts);
  return out;
}

LoopExponent diffusion_exponent(double kappa, const LoopExponentParams& p) {
  check_window(p);
  std::vector<double> kill(std::size_t(p.paths), std::numeric_limits<double>::infinity());
  DiffusionOptions opt;
  opt.recordPath = false;
  opt.scheme = p.scheme;
  run_sharded(p.paths, p.workers, [&](long begin, long end, int) {
    for (long i = begin; i < end; ++i) {
      const auto path = simulate_Y(kappa, kTwoPi, p.dt, p.horizon, Boundary::reflect, trial_seed(p.seed, i), opt);
      if (path.killTime) kill[std::size_t(i)] = *path.killTime;
    }
  });
  return exponent_from_kills(kappa, std::move(kill), p);
}

// One path at steps dt and dt/2 from shared randomness: the coarse step uses
// z = (z1 + z2)/sqrt2 and g = (g1 + g2) * Beta(a, a), both exact in law.
// Hitting times of 0 decouple quickly, so this only removes part of the noise.
std::pair<double, double> halving_pair(double kappa, const LoopExponentParams& p, std::uint64_t seed) {
  const auto inf = std::numeric_limits<double>::infinity();
  YSim sim{kappa, Boundary::reflect, {}};
  PathRng rng(derive_seed(seed, "diffusion"));
  PathRng split(derive_seed(seed, "split"));
  std::gamma_distribution<double> half(2.0 / kappa, 1.0);
  double tc = 0.0, yc = kTwoPi, tf = 0.0, yf = kTwoPi;
  double killC = inf, killF = inf;
  while ((killC == inf || killF == inf) && tc < p.horizon) {
    const double h = std::min(p.dt, p.horizon - tc);
    const Draw d1 = sim.bessel.draw(rng), d2 = sim.bessel.draw(rng);
    if (killF == inf) {
      for (const Draw& d : {d1, d2})
        if (killF == inf)
          if (auto k = sim.bessel_step(tf, yf, 0.5 * h, d)) killF = *k;
    }
    if (killC == inf) {
      const double b1 = half(split.engine()), b2 = half(split.engine());
      const Draw dc{(d1.z + d2.z) / std::sqrt(2.0), (d1.g + d2.g) * b1 / (b1 + b2), d1.u};
      if (auto k = sim.bessel_step(tc, yc, h, dc)) killC = *k;
    } else {
      tc += h;
    }
  }
  return {killC, killF};
}

struct TraceOutcome {
  std::vector<char> survived, survivedHalf;  // per radius
  double derivErr = 0.0, koebeMin = 1.0, koebeMax = 0.0;
};

TraceOutcome trace_path(double kappa, const LoopExponentParams& p, const std::vector<double>& radii,
                        std::uint64_t seed) {
  const double rMin = radii.back();
  const auto driving = sample_driving(kappa, p.dt, std::log(1.0 / rMin) + 4 * p.dt, seed);
  EvolveOptions eo;
  eo.stopRadius = rMin;
  const auto ev = evolve_radial(driving, eo);
  const auto& pts = ev.trace.points;
  TraceOutcome o;
  o.derivErr = ev.state.maxDerivRelErr;
  for (double k : koebe_ratios(ev.trace)) {
    o.koebeMin = std::min(o.koebeMin, k);
    o.koebeMax = std::max(o.koebeMax, k);
  }
  const double tol = p.tolFactor * trace_resolution(ev.trace);
  const auto inf = std::numeric_limits<double>::infinity();
  const auto loop = first_ccw_loop(ev.trace, inf, tol);
  const auto loopHalf = first_ccw_loop(ev.trace, inf, 0.5 * tol);
  for (double r : radii) {
    std::size_t hit = pts.size() - 1;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (std::abs(pts[i]) <= r) {
        hit = i;
        break;
      }
    o.survived.push_back(!loop || *loop > hit);
    o.survivedHalf.push_back(!loopHalf || *loopHalf > hit);
  }
  return o;
}

LoopExponent trace_exponent(double kappa, const LoopExponentParams& p) {
  require(p.radii.size() >= 3, "need at least 3 radii");
  std::vector<double> radii = p.radii;
  std::sort(radii.begin(), radii.end(), std::greater<>());
  require(radii.back() > 0.0 && radii.front() < 1.0, "radii must lie in (0,1)");
  const std::size_t m = radii.size();
  std::vector<TraceOutcome> outcomes(std::size_t(p.paths));
  run_sharded(p.paths, p.workers, [&](long begin, long end, int) {
    for (long i = begin; i < end; ++i) outcomes[std::size_t(i)] = trace_path(kappa, p, radii, trial_seed(p.seed, i));
  });

  LoopExponent out;
  out.kappa = kappa;
  out.method = LoopMethod::trace;
  out.paths = p.paths;
  std::vector<long> survivors(m, 0);
  for (const auto& o : outcomes) {
    out.maxDerivRelErr = std::max(out.maxDerivRelErr, o.derivErr);
    out.minKoebe = std::min(out.minKoebe, o.koebeMin);
    out.maxKoebe = std::max(out.maxKoebe, o.koebeMax);
    if (o.survived != o.survivedHalf) ++out.verdictFlipsHalfTol;
    for (std::size_t k = 0; k < m; ++k) survivors[k] += o.survived[k];
  }
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < m; ++k) pts.emplace_back(radii[k], double(survivors[k]) / double(p.paths));
  out.fit = fit_exponent(pts);
  out.exponent = out.fit.slope;

  // batch means over contiguous blocks of paths for the standard error
  const long batches = std::min<long>(20, p.paths / 50);
  if (batches >= 2) {
    std::vector<double> slopes;
    for (long b = 0; b < batches; ++b) {
      const long lo = p.paths * b / batches, hi = p.paths * (b + 1) / batches;
      std::vector<std::pair<double, double>> bp;
      for (std::size_t k = 0; k < m; ++k) {
        long s = 0;
        for (long i = lo; i < hi; ++i) s += outcomes[std::size_t(i)].survived[k];
        bp.emplace_back(radii[k], std::max(double(s), 0.5) / double(hi - lo));
      }
      slopes.push_back(fit_exponent(bp).slope);
    }
    double mean = 0, var = 0;
    for (double s : slopes) mean += s;
    mean /= double(slopes.size());
    for (double s : slopes) var += (s - mean) * (s - mean);
    var /= double(slopes.size() - 1);
    out.stdErr = std::sqrt(var / double(slopes.size()));
  } else {
    out.stdErr = out.fit.slopeStdErr;
  }
  return out;
}

}  // namespace

DtHalving diffusion_dt_halving(double kappa, const LoopExponentParams& params) {
  require(kappa > 4.0, "dt halving needs kappa > 4");
  require(params.paths >= 1 && params.dt > 0.0, "need paths >= 1 and dt > 0");
  check_window(params);
  const auto n = std::size_t(params.paths);
  std::vector<double> coarse(n), fine(n);
  run_sharded(params.paths, params.workers, [&](long begin, long end, int) {
    for (long i = begin; i < end; ++i)
      std::tie(coarse[std::size_t(i)], fine[std::size_t(i)]) = halving_pair(kappa, params, trial_seed(params.seed, i));
  });
  DtHalving out;
  out.coarse = exponent_from_kills(kappa, std::move(coarse), params);
  out.fine = exponent_from_kills(kappa, std::move(fine), params);
  out.change = out.fine.exponent - out.coarse.exponent;
  return out;
}

LoopExponent estimate_loop_free_exponent(double kappa, LoopMethod method, const LoopExponentParams& params) {
  require(kappa > 0.0, "kappa must be positive");
  require(params.paths >= 1 && params.dt > 0.0, "need paths >= 1 and dt > 0");
  if (kappa <= 4.0) {
    LoopExponent out;
    out.kappa = kappa;
    out.method = method;
    out.noDecay = true;
    return out;
  }
  return method == LoopMethod::diffusion ? diffusion_exponent(kappa, params) : trace_exponent(kappa, params);
}

}  // namespace critlab
