#include "critlab/sle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

#include "critlab/errors.hpp"
#include "critlab/rng.hpp"

namespace critlab {

namespace {

// Root of U^2 + (2 - s)U + 1 = 0 with |U| >= 1; its reciprocal is the image in the disk.
// On the circle both roots have modulus 1; the maps commute with conjugation, so
// the image 1/U stays on the same side of the real axis as the argument u.
cplx outer_root(cplx s, cplx u) {
  const cplx q = std::sqrt(s * (s - 4.0));
  const cplx u1 = 0.5 * (s - 2.0 + q);
  const cplx u2 = 0.5 * (s - 2.0 - q);
  const double a1 = std::abs(u1), a2 = std::abs(u2);
  if (std::abs(a1 - a2) > 1e-12 * (a1 + a2)) return a1 > a2 ? u1 : u2;
  return (u1.imag() * u.imag() <= 0.0) ? u1 : u2;
}

cplx phi(cplx u) { return (u + 1.0) * (u + 1.0) / u; }

}  // namespace

cplx DrivingPath::point(std::size_t i) const { return std::polar(1.0, std::sqrt(kappa) * samples.at(i)); }

DrivingPath sample_driving(double kappa, double dt, double horizon, std::uint64_t seed) {
  require(kappa >= 0.0, "kappa must be nonnegative");
  require(dt > 0.0 && horizon > 0.0, "dt and horizon must be positive");
  const auto n = std::size_t(std::ceil(horizon / dt - 1e-9));
  DrivingPath d;
  d.kappa = kappa;
  d.dt = dt;
  d.seed = seed;
  d.samples.resize(n + 1, 0.0);
  PathRng rng(derive_seed(seed, "driving"));
  const double sd = std::sqrt(dt);
  for (std::size_t i = 0; i < n; ++i) d.samples[i + 1] = d.samples[i] + sd * rng.normal();
  return d;
}

double slit_tip(double t) {
  const double c = 2.0 * std::exp(t) - 1.0;
  return 1.0 / (c + std::sqrt(c * c - 1.0));
}

cplx slit_forward(const SlitStep& s, cplx z) {
  const cplx u = z / s.w;
  if (u == 0.0) return 0.0;
  return s.w / outer_root(std::exp(-s.dt) * phi(u), u);
}

cplx slit_inverse(const SlitStep& s, cplx zeta) {
  const cplx u = zeta / s.w;
  if (u == 0.0) return 0.0;
  return s.w / outer_root(std::exp(s.dt) * phi(u), u);
}

cplx apply_forward(const LoewnerState& state, cplx z) {
  for (const auto& s : state.slitParams) z = slit_forward(s, z);
  return z;
}

cplx apply_inverse(const LoewnerState& state, cplx zeta) {
  for (auto it = state.slitParams.rbegin(); it != state.slitParams.rend(); ++it) zeta = slit_inverse(*it, zeta);
  return zeta;
}

namespace {

// preimage under the first n elementary maps, clamped to the closed disk
cplx pull_back(const LoewnerState& st, std::size_t n, cplx zeta) {
  for (std::size_t m = n; m-- > 0;) zeta = slit_inverse(st.slitParams[m], zeta);
  const double mod = std::abs(zeta);
  if (!std::isfinite(mod) || mod > 1.0 + 1e-9)
    throw NumericalError("trace left the closed disk at t = " + std::to_string(st.elapsed));
  return mod > 1.0 ? zeta / mod : zeta;
}

}  // namespace

Evolution evolve_radial(const DrivingPath& driving, const EvolveOptions& options) {
  require(driving.dt > 0.0 && driving.samples.size() >= 1, "invalid driving path");
  require(options.maxAngleStep > 0.0, "maxAngleStep must be positive");
  Evolution out;
  auto& st = out.state;
  auto& tr = out.trace;
  tr.points.push_back(1.0);
  tr.times.push_back(0.0);
  const double rk = std::sqrt(driving.kappa);
  constexpr double eps = 1e-12;

  for (std::size_t j = 0; j < driving.steps(); ++j) {
    const double b0 = driving.samples[j], b1 = driving.samples[j + 1];
    const int parts = std::max(1, int(std::ceil(rk * std::abs(b1 - b0) / options.maxAngleStep)));
    for (int k = 0; k < parts; ++k) {
      const double b = b0 + (b1 - b0) * double(k) / parts;
      const SlitStep step{driving.dt / parts, std::polar(1.0, rk * b)};
      // elementary derivative at 0 measured along the real direction of w
      st.derivAtZero *= std::abs(slit_forward(step, eps * step.w)) / eps;
      st.slitParams.push_back(step);
      st.elapsed += step.dt;
      st.maxDerivRelErr = std::max(st.maxDerivRelErr, std::abs(st.derivAtZero / std::exp(st.elapsed) - 1.0));

      // base of the new slit: where the curve resumes on the boundary of the current domain;
      // it differs from the previous tip when the driving point jumped
      const std::size_t n = st.slitParams.size() - 1;
      const cplx base = pull_back(st, n, step.w);
      if (std::abs(base - tr.points.back()) > 1e-14) {
        tr.points.push_back(base);
        tr.times.push_back(st.elapsed - step.dt);
      }
      const cplx g = pull_back(st, n, step.w * slit_tip(step.dt));
      const double mod = std::abs(g);
      tr.points.push_back(g);
      tr.times.push_back(st.elapsed);
      if (options.stopRadius > 0.0 && mod <= options.stopRadius) return out;
    }
  }
  return out;
}

cplx loewner_ode(const LoewnerState& state, cplx z0, int substepsPerStep) {
  require(substepsPerStep >= 1, "substeps must be positive");
  cplx g = z0;
  for (const auto& s : state.slitParams) {
    const double h = s.dt / substepsPerStep;
    auto f = [&](cplx x) { return x * (s.w + x) / (s.w - x); };
    for (int k = 0; k < substepsPerStep; ++k) {
      const cplx k1 = f(g), k2 = f(g + 0.5 * h * k1), k3 = f(g + 0.5 * h * k2), k4 = f(g + h * k3);
      g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return g;
}

std::vector<double> koebe_ratios(const TracePath& trace) {
  require(!trace.points.empty(), "empty trace");
  std::vector<double> out;
  double dmin = std::abs(trace.points.front());
  for (std::size_t i = 0; i < trace.points.size(); ++i) {
    dmin = std::min(dmin, std::abs(trace.points[i]));
    out.push_back(dmin * std::exp(trace.times[i]));
  }
  return out;
}

double koebe_check(const LoewnerState& state, const TracePath& trace) {
  require(!trace.points.empty(), "empty trace");
  double dmin = 1.0;
  for (cplx p : trace.points) dmin = std::min(dmin, std::abs(p));
  return dmin * std::exp(state.elapsed);
}

double trace_resolution(const TracePath& trace) {
  require(trace.points.size() >= 2, "trace needs at least two points");
  std::vector<double> steps;
  for (std::size_t i = 1; i < trace.points.size(); ++i) steps.push_back(std::abs(trace.points[i] - trace.points[i - 1]));
  auto mid = steps.begin() + std::ptrdiff_t(steps.size() / 2);
  std::nth_element(steps.begin(), mid, steps.end());
  return *mid;
}

std::optional<std::size_t> first_ccw_loop(const TracePath& trace, double upTo, double tol) {
  require(tol > 0.0, "tolerance must be positive");
  const auto& g = trace.points;
  if (g.empty()) return std::nullopt;
  std::vector<double> arg(g.size());
  arg[0] = std::arg(g[0]);
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells;
  auto cell_key = [&](long cx, long cy) { return (std::uint64_t(std::uint32_t(cx)) << 32) | std::uint32_t(cy); };
  auto cell_of = [&](cplx z) { return std::pair{long(std::floor(z.real() / tol)), long(std::floor(z.imag() / tol))}; };

  for (std::size_t j = 0; j < g.size() && trace.times[j] <= upTo; ++j) {
    if (j > 0) arg[j] = arg[j - 1] + std::arg(g[j] / g[j - 1]);
    const auto [cx, cy] = cell_of(g[j]);
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = cells.find(cell_key(cx + dx, cy + dy));
        if (it == cells.end()) continue;
        for (std::size_t i : it->second) {
          if (i + 1 >= j || std::abs(g[i] - g[j]) > tol) continue;
          // winding of the subpath from i to j closed by the chord back to g_i
          const double turns = (arg[j] - arg[i] + std::arg(g[i] / g[j])) / (2 * std::numbers::pi);
          if (std::lround(turns) == 1) return j;
        }
      }
    cells[cell_key(cx, cy)].push_back(j);
  }
  return std::nullopt;
}

bool detect_ccw_loop(const TracePath& trace, double upTo, double tol) {
  return first_ccw_loop(trace, upTo, tol).has_value();
}

}  // namespace critlab
