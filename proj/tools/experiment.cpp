#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "critlab/rng.hpp"
#include "critlab/sle.hpp"

#ifndef CRITLAB_VERSION
#define CRITLAB_VERSION "0.0.0"
#endif

namespace critlab::cli {

namespace {

constexpr const char* kKappa8Note =
    "kappa = 8: continuity of the SLE path is not proven for this value; the numerics run unchanged";

Metric parse_metric(const std::string& s) {
  if (s == "graph") return Metric::graph;
  if (s == "euclidean") return Metric::euclidean;
  throw PreconditionError("unknown metric '" + s + "' (graph, euclidean)");
}

CrossingDirection parse_direction(const std::string& s) {
  if (s == "leftRight") return CrossingDirection::leftRight;
  if (s == "topBottom") return CrossingDirection::topBottom;
  throw PreconditionError("unknown crossing direction '" + s + "' (leftRight, topBottom)");
}

void require_increasing(const std::vector<int>& v, const std::string& what) {
  require(!v.empty(), what + " must be nonempty");
  for (std::size_t i = 1; i < v.size(); ++i) require(v[i] > v[i - 1], what + " must be strictly increasing");
}

FitSummary summary(const ExponentFit& f) { return {round12(f.slope), round12(f.intercept), round12(f.slopeStdErr)}; }

PercolationParams read_percolation(KeyValues& kv) {
  PercolationParams P;
  const std::string event = kv.text("percolation.event", "oneArm");
  P.p = kv.real("percolation.p", 0.5);
  P.trials = kv.integer("percolation.trials", 10000);
  P.scales = kv.integers("percolation.scales", {16, 32, 64, 128});
  const int inner = int(kv.integer("percolation.inner", 1));
  const int arms = int(kv.integer("percolation.arms", 2));
  const auto colors = kv.words("percolation.colors", {"open", "closed", "open"});
  const bool halfPlane = kv.flag("percolation.halfPlane", false);
  const auto direction = parse_direction(kv.text("percolation.direction", "leftRight"));
  const auto color = parse_color(kv.text("percolation.color", "open"));
  P.aspect = kv.real("percolation.aspect", 1.0);
  const auto metric = parse_metric(kv.text("percolation.metric", "graph"));
  P.weighted = kv.flag("percolation.weighted", false);
  P.checkMonotone = kv.flag("percolation.checkMonotone", false);

  require(P.p >= 0.0 && P.p <= 1.0, "percolation.p must lie in [0, 1]");
  require(P.trials >= 1, "percolation.trials must be at least 1");
  require_increasing(P.scales, "percolation.scales");
  require(P.aspect > 0.0, "percolation.aspect must be positive");

  P.stripCount = event == "stripCount";
  if (P.stripCount) {
    require(P.scales.front() >= 1, "strip widths must be positive");
    return P;
  }
  auto& s = P.spec;
  s.kind = parse_event_kind(event);
  s.inner = inner;
  s.arms = arms;
  s.colors.clear();
  for (const auto& c : colors) s.colors.push_back(parse_color(c));
  s.halfPlane = halfPlane;
  s.direction = direction;
  s.color = color;
  s.metric = metric;
  if (s.kind == EventKind::oneArm) s.inner = 0;
  if (s.kind == EventKind::rectangleCrossing) {
    for (int H : P.scales) require(H >= 1, "rectangle heights must be positive");
  } else {
    for (int R : P.scales) (void)s.at_scale(R);  // validates every scale
  }
  return P;
}

LoopExponentParams read_loop(KeyValues& kv, const std::string& prefix, long paths, double dt) {
  LoopExponentParams L;
  L.paths = kv.integer(prefix + ".paths", paths);
  L.dt = kv.real(prefix + ".dt", dt);
  require(L.paths >= 1, prefix + ".paths must be at least 1");
  require(L.dt > 0.0, prefix + ".dt must be positive");
  return L;
}

SleParams read_sle(KeyValues& kv) {
  SleParams P;
  P.kappa = kv.real("sle.kappa", 6.0);
  const std::string mode = kv.text("sle.mode", "exponent");
  require(mode == "exponent" || mode == "path", "sle.mode must be exponent or path");
  P.pathMode = mode == "path";
  P.loop = read_loop(kv, "sle", 200, 0.02);
  P.loop.radii = kv.reals("sle.radii", P.loop.radii);
  P.loop.tolFactor = kv.real("sle.tolFactor", P.loop.tolFactor);
  P.horizon = kv.real("sle.horizon", 2.0);
  P.evolve.maxAngleStep = kv.real("sle.maxAngleStep", 0.25);
  require(P.kappa >= 0.0, "sle.kappa must be nonnegative");
  require(P.pathMode || P.kappa > 0.0, "the loop exponent needs sle.kappa > 0");
  require(P.loop.radii.size() >= 3, "sle.radii needs at least 3 radii");
  for (double r : P.loop.radii) require(r > 0.0 && r < 1.0, "sle.radii must lie in (0, 1)");
  std::sort(P.loop.radii.begin(), P.loop.radii.end(), std::greater<>());
  require(std::adjacent_find(P.loop.radii.begin(), P.loop.radii.end()) == P.loop.radii.end(), "sle.radii must be distinct");
  require(P.loop.tolFactor > 0.0, "sle.tolFactor must be positive");
  require(P.horizon > 0.0, "sle.horizon must be positive");
  require(P.evolve.maxAngleStep > 0.0, "sle.maxAngleStep must be positive");
  return P;
}

DiffusionParams read_diffusion(KeyValues& kv) {
  DiffusionParams P;
  P.kappa = kv.real("diffusion.kappa", 6.0);
  P.loop = read_loop(kv, "diffusion", 100000, 0.02);
  P.loop.scheme = parse_diffusion_scheme(kv.text("diffusion.scheme", "bessel"));
  P.loop.horizon = kv.real("diffusion.horizon", P.loop.horizon);
  P.loop.tFit0 = kv.real("diffusion.tFit0", P.loop.tFit0);
  P.loop.fitPoints = int(kv.integer("diffusion.fitPoints", P.loop.fitPoints));
  P.dtHalving = kv.flag("diffusion.dtHalving", false);
  require(P.kappa > 0.0, "diffusion.kappa must be positive");
  require(P.loop.tFit0 >= 0.0 && P.loop.tFit0 < P.loop.horizon, "need 0 <= diffusion.tFit0 < diffusion.horizon");
  require(P.loop.fitPoints >= 3, "diffusion.fitPoints must be at least 3");
  require(!P.dtHalving || P.kappa > 4.0, "diffusion.dtHalving needs diffusion.kappa > 4");
  require(!P.dtHalving || P.loop.scheme == DiffusionScheme::bessel, "diffusion.dtHalving uses the bessel scheme");
  return P;
}

Eigen1dParams read_eigen1d(KeyValues& kv) {
  Eigen1dParams P;
  P.kappa = kv.real("eigen1d.kappa", 6.0);
  P.n = int(kv.integer("eigen1d.n", 4095));
  P.options.method = parse_eigen_method(kv.text("eigen1d.method", "directEigen"));
  P.options.levels = int(kv.integer("eigen1d.levels", 3));
  P.options.timeStep = kv.real("eigen1d.timeStep", P.options.timeStep);
  P.options.tol = kv.real("eigen1d.tol", P.options.tol);
  P.options.maxIter = int(kv.integer("eigen1d.maxIter", P.options.maxIter));
  require(P.kappa > 4.0, "eigen1d.kappa must exceed 4");
  require(P.n >= 16, "eigen1d.n must be at least 16");
  require(P.options.levels >= 2, "eigen1d.levels must be at least 2");
  require(((P.n + 1) >> (P.options.levels - 1)) - 1 >= 16, "eigen1d.n too small for eigen1d.levels");
  require(P.options.timeStep > 0.0 && P.options.tol > 0.0, "eigen1d.timeStep and eigen1d.tol must be positive");
  require(P.options.maxIter >= 1, "eigen1d.maxIter must be positive");
  return P;
}

BackboneParams read_backbone(KeyValues& kv) {
  BackboneParams P;
  const std::string form = kv.text("backbone.form", "alphaGamma");
  require(form == "alphaGamma" || form == "alphaBeta", "backbone.form must be alphaGamma or alphaBeta");
  P.symmetric = form == "alphaBeta";
  P.meshes = kv.integers("backbone.meshes", {128, 256, 512});
  auto& o = P.options;
  o.method = parse_eigen_method(kv.text("backbone.method", to_string(o.method)));
  o.edge = parse_edge_mode(kv.text("backbone.edge", to_string(o.edge)));
  o.grading = kv.real("backbone.grading", o.grading);
  o.timeStep = kv.real("backbone.timeStep", o.timeStep);
  o.tol = kv.real("backbone.tol", o.tol);
  o.maxIter = int(kv.integer("backbone.maxIter", o.maxIter));
  o.assumedOrder = kv.real("backbone.assumedOrder", o.assumedOrder);
  P.cardyLo = kv.real("backbone.cardySliceLo", P.cardyLo);
  P.cardyHi = kv.real("backbone.cardySliceHi", P.cardyHi);
  require_increasing(P.meshes, "backbone.meshes");
  require(P.meshes.size() >= 2, "backbone.meshes needs at least two meshes");
  require(P.meshes.front() >= 8, "backbone meshes must be at least 8");
  require(!P.symmetric || o.edge == EdgeMode::shared, "the alphaBeta form implements the shared edge only");
  require(o.grading >= 1.0, "backbone.grading must be at least 1");
  require(o.timeStep > 0.0 && o.tol > 0.0 && o.maxIter >= 1, "backbone.timeStep, tol, maxIter must be positive");
  require(o.assumedOrder > 0.0, "backbone.assumedOrder must be positive");
  require(P.cardyLo >= 0.0 && P.cardyHi > P.cardyLo, "need 0 <= backbone.cardySliceLo < backbone.cardySliceHi");
  return P;
}

CardyParams read_cardy(KeyValues& kv) {
  CardyParams P;
  const std::string mode = kv.text("cardy.mode", "formula");
  require(mode == "formula" || mode == "rectangle", "cardy.mode must be formula or rectangle");
  P.rectangle = mode == "rectangle";
  if (P.rectangle) {
    P.points = kv.reals("cardy.aspects", {0.5, 1.0, 2.0});
    P.trials = kv.integer("cardy.trials", 0);
    P.height = int(kv.integer("cardy.height", 64));
    P.p = kv.real("cardy.p", 0.5);
    for (double a : P.points) require(a > 0.0, "cardy.aspects must be positive");
    require(P.trials >= 0, "cardy.trials must be nonnegative");
    require(P.height >= 1, "cardy.height must be positive");
    require(P.p >= 0.0 && P.p <= 1.0, "cardy.p must lie in [0, 1]");
  } else {
    P.points = kv.reals("cardy.m", {0.5});
    for (double m : P.points) require(m >= 0.0 && m <= 1.0, "cardy.m must lie in [0, 1]");
  }
  require(!P.points.empty(), "cardy needs at least one point");
  return P;
}

// ---- engines ----

void run(const PercolationParams& P, const ExperimentConfig& cfg, ResultRecord& rec) {
  const std::uint64_t seed = derive_seed(cfg.seed, "percolation");
  if (P.stripCount) {
    rec.series.columns = {"scale", "mean", "stdErr"};
    for (int R : P.scales) {
      const auto e = mc_strip_count(R, P.p, P.trials, mix64(seed, std::uint64_t(R)), cfg.workers);
      rec.series.add({double(R), e.mean, e.stdErr});
    }
    return;
  }
  rec.series.columns = {"scale", "pHat", "stdErr"};
  std::vector<std::pair<double, double>> points;
  std::vector<double> weights;
  if (P.spec.kind == EventKind::rectangleCrossing) {
    for (int H : P.scales) {
      const auto e = mc_estimate(ArmEventSpec::rectangle(P.aspect * H, H), P.p, P.trials, mix64(seed, std::uint64_t(H)),
                                 cfg.workers);
      rec.series.add({double(H), e.pHat, e.stdErr});
      points.emplace_back(H, e.pHat);
    }
  } else {
    auto spec = P.spec;
    const bool coupled = spec.kind != EventKind::rhombusCrossing && spec.kind != EventKind::circuit;
    if (coupled) {
      const auto sweep = mc_sweep(spec, P.scales, P.p, P.trials, seed, cfg.workers, P.checkMonotone);
      for (std::size_t i = 0; i < sweep.scales.size(); ++i) {
        const auto& e = sweep.estimates[i];
        rec.series.add({double(sweep.scales[i]), e.pHat, e.stdErr});
        points.emplace_back(sweep.scales[i], e.pHat);
      }
      if (P.checkMonotone) rec.estimate("monotoneViolations", double(sweep.monotoneViolations));
      bool positive = sweep.estimates.size() >= 3;
      for (const auto& e : sweep.estimates) positive = positive && e.hits > 0;
      if (positive) {
        const auto f = fit_sweep(sweep, P.weighted);
        rec.fit = summary(f);
        rec.estimate("exponent", -f.slope);
      }
      return;
    }
    for (int R : P.scales) {
      const auto e = mc_estimate(spec.at_scale(R), P.p, P.trials, mix64(seed, std::uint64_t(R)), cfg.workers);
      rec.series.add({double(R), e.pHat, e.stdErr});
      points.emplace_back(R, e.pHat);
      weights.push_back(e.stdErr > 0 ? e.pHat * e.pHat / (e.stdErr * e.stdErr) : 0.0);
    }
  }
  const bool positive = points.size() >= 3 && std::all_of(points.begin(), points.end(), [](auto& q) { return q.second > 0; });
  if (positive) {
    const auto f = P.weighted && !weights.empty() ? fit_exponent(points, weights) : fit_exponent(points);
    rec.fit = summary(f);
    rec.estimate("exponent", -f.slope);
  } else if (points.size() >= 3) {
    rec.notes.push_back("no power-law fit: some scale has pHat = 0");
  }
}

void fill_loop(const LoopExponent& e, ResultRecord& rec) {
  rec.estimate("exponent", e.exponent);
  rec.estimate("stdErr", e.stdErr);
  rec.estimate("noDecay", e.noDecay ? 1.0 : 0.0);
  if (e.kappa > 4.0) rec.estimate("closedForm", lambda_closed_form(e.kappa));
  if (!e.fit.points.empty()) rec.fit = summary(e.fit);
}

void run(const SleParams& P, const ExperimentConfig& cfg, ResultRecord& rec) {
  const std::uint64_t seed = derive_seed(cfg.seed, "sle");
  if (P.pathMode) {
    const auto driving = sample_driving(P.kappa, P.loop.dt, P.horizon, seed);
    const auto ev = evolve_radial(driving, P.evolve);
    rec.series.columns = {"time", "re", "im"};
    for (std::size_t i = 0; i < ev.trace.points.size(); ++i)
      rec.series.add({ev.trace.times[i], ev.trace.points[i].real(), ev.trace.points[i].imag()});
    rec.estimate("elapsed", ev.state.elapsed);
    rec.estimate("derivAtZero", ev.state.derivAtZero);
    rec.estimate("maxDerivRelErr", ev.state.maxDerivRelErr);
    rec.estimate("koebe", koebe_check(ev.state, ev.trace));
    const double tol = P.loop.tolFactor * trace_resolution(ev.trace);
    rec.estimate("ccwLoop", detect_ccw_loop(ev.trace, P.horizon, tol) ? 1.0 : 0.0);
    return;
  }
  auto L = P.loop;
  L.seed = seed;
  L.workers = cfg.workers;
  const auto e = estimate_loop_free_exponent(P.kappa, LoopMethod::trace, L);
  fill_loop(e, rec);
  rec.estimate("maxDerivRelErr", e.maxDerivRelErr);
  rec.estimate("minKoebe", e.minKoebe);
  rec.estimate("maxKoebe", e.maxKoebe);
  rec.estimate("verdictFlipsHalfTol", double(e.verdictFlipsHalfTol));
  rec.series.columns = {"radius", "probability", "stdErr"};
  for (const auto& [r, q] : e.fit.points) rec.series.add({r, q, std::sqrt(q * (1 - q) / double(e.paths))});
}

void run(const DiffusionParams& P, const ExperimentConfig& cfg, ResultRecord& rec) {
  auto L = P.loop;
  L.seed = derive_seed(cfg.seed, "diffusion");
  L.workers = cfg.workers;
  LoopExponent e;
  if (P.dtHalving) {
    const auto h = diffusion_dt_halving(P.kappa, L);
    e = h.coarse;
    rec.estimate("exponentHalfDt", h.fine.exponent);
    rec.estimate("stdErrHalfDt", h.fine.stdErr);
    rec.estimate("halvingChange", h.change);
  } else {
    e = estimate_loop_free_exponent(P.kappa, LoopMethod::diffusion, L);
  }
  fill_loop(e, rec);
  rec.estimate("events", double(e.events));
  if (e.noDecay) rec.notes.push_back("kappa <= 4: the process never reaches 0, no decay");
  rec.series.columns = {"time", "survival", "stdErr"};
  for (const auto& [t, s] : e.fit.points) rec.series.add({t, s, std::sqrt(s * (1 - s) / double(e.paths))});
}

void fill_extrapolation(const EigenResult& r, ResultRecord& rec) {
  const auto& x = r.extrapolation;
  rec.estimate("lambda", r.lambda);
  rec.estimate("assumedOrder", x.assumedOrder);
  rec.estimate("observedOrder", x.observedOrder);
  rec.estimate("meshError", x.meshError);
  rec.estimate("finestError", x.finestError);
  rec.estimate("cauchy", x.cauchy ? 1.0 : 0.0);
  rec.estimate("residual", r.residual);
  rec.estimate("iterations", double(r.iterations));
  rec.series.columns = {"h", "lambda", "meshError", "mesh"};
  for (const auto& m : r.meshTrace) rec.series.add({m.h, m.lambda, std::abs(m.lambda - r.lambda), double(m.mesh)});
  if (!x.reason.empty()) rec.notes.push_back("extrapolation: " + x.reason);
}

void run(const Eigen1dParams& P, const ExperimentConfig&, ResultRecord& rec) {
  const auto r = solve_eigen_1d(P.kappa, P.n, P.options);
  fill_extrapolation(r, rec);
  rec.estimate("closedForm", lambda_closed_form(P.kappa));
  double sup = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i)
    sup = std::max(sup, std::abs(r.eigenfunction[i] - analytic_eigenfunction(P.kappa, r.x[i])));
  rec.estimate("eigenfunctionSupError", sup);
  if (r.extrapolation.refused) throw RunFailure("Richardson extrapolation refused: " + r.extrapolation.reason, rec);
}

void run(const BackboneParams& P, const ExperimentConfig&, ResultRecord& rec) {
  const auto r = P.symmetric ? solve_backbone_symmetric(P.meshes, P.options) : solve_backbone_2d(P.meshes, P.options);
  fill_extrapolation(r, rec);
  if (!P.symmetric) rec.estimate("cardyProfileDeviation", cardy_profile_deviation(r, P.cardyLo, P.cardyHi));
  if (r.extrapolation.refused) throw RunFailure("Richardson extrapolation refused: " + r.extrapolation.reason, rec);
}

void run(const CardyParams& P, const ExperimentConfig& cfg, ResultRecord& rec) {
  if (!P.rectangle) {
    rec.series.columns = {"m", "cardy"};
    for (double m : P.points) rec.series.add({m, cardy_formula(m)});
    if (P.points.size() == 1) rec.estimate("value", cardy_formula(P.points.front()));
    return;
  }
  if (P.trials == 0) {
    rec.series.columns = {"aspect", "cardy"};
    for (double a : P.points) rec.series.add({a, cardy_rectangle(a)});
    if (P.points.size() == 1) rec.estimate("value", cardy_rectangle(P.points.front()));
    return;
  }
  const std::uint64_t seed = derive_seed(cfg.seed, "cardy");
  rec.series.columns = {"aspect", "pHat", "stdErr", "cardy", "zScore"};
  double worst = 0.0;
  for (std::size_t i = 0; i < P.points.size(); ++i) {
    const double a = P.points[i];
    const auto e = mc_estimate(ArmEventSpec::rectangle(a * P.height, P.height), P.p, P.trials, mix64(seed, i), cfg.workers);
    const double theory = cardy_rectangle(a);
    const double z = e.stdErr > 0 ? (e.pHat - theory) / e.stdErr : std::numeric_limits<double>::quiet_NaN();
    rec.series.add({a, e.pHat, e.stdErr, theory, z});
    if (std::isfinite(z)) worst = std::max(worst, std::abs(z));
  }
  rec.estimate("maxAbsZ", worst);
}

double kappa_of(const EngineParams& p) {
  if (auto* s = std::get_if<SleParams>(&p)) return s->kappa;
  if (auto* d = std::get_if<DiffusionParams>(&p)) return d->kappa;
  if (auto* e = std::get_if<Eigen1dParams>(&p)) return e->kappa;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string artifact_version() { return CRITLAB_VERSION; }

ExperimentConfig make_config(const std::string& engine, KeyValues kv, std::optional<std::uint64_t> seed,
                             std::optional<int> workers) {
  require(std::find(kEngines.begin(), kEngines.end(), engine) != kEngines.end(), "unknown engine '" + engine + "'");
  if (kv.has("engine")) {
    const std::string named = kv.text("engine", engine);
    if (named != engine) throw ConfigError("config is for engine '" + named + "', not '" + engine + "'");
  }
  if (seed) kv.set("seed", std::to_string(*seed));
  if (workers) kv.set("workers", std::to_string(*workers));
  ExperimentConfig cfg;
  cfg.engine = engine;
  cfg.seed = kv.unsigned64("seed", 1);
  const long w = kv.integer("workers", 1);
  require(w >= 1 && w <= 1024, "workers must lie in [1, 1024]");
  cfg.workers = int(w);
  if (engine == "percolation") cfg.params = read_percolation(kv);
  else if (engine == "sle") cfg.params = read_sle(kv);
  else if (engine == "diffusion") cfg.params = read_diffusion(kv);
  else if (engine == "eigen1d") cfg.params = read_eigen1d(kv);
  else if (engine == "backbone") cfg.params = read_backbone(kv);
  else cfg.params = read_cardy(kv);
  kv.reject_unknown();
  // workers never changes a number, so it stays out of the record
  for (const auto& [k, v] : kv.used())
    if (k != "workers" && k != "seed" && k != "engine") cfg.parameters[k] = v;
  return cfg;
}

ResultRecord run_experiment(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.engine = cfg.engine;
  rec.version = artifact_version();
  rec.seed = cfg.seed;
  rec.parameters = cfg.parameters;
  if (kappa_of(cfg.params) == 8.0) rec.notes.push_back(kKappa8Note);
  const auto start = std::chrono::steady_clock::now();
  std::visit([&](const auto& p) { run(p, cfg, rec); }, cfg.params);
  rec.wallClock = round12(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return rec;
}

}  // namespace critlab::cli
