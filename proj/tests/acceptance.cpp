// Acceptance gate: one PASS/FAIL line per criterion.
//   acceptance --fast   reduced sample sizes (seconds; registered with ctest)
//   acceptance          full sizes (tens of minutes on one core)
//   acceptance --slow   full sizes plus the SLE trace tier
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "critlab/arms.hpp"
#include "critlab/loops.hpp"
#include "critlab/parallel.hpp"
#include "critlab/spectral.hpp"
#include "oracles.hpp"

using namespace critlab;

namespace {

struct Gate {
  bool fast = false;
  bool slow = false;
  int workers = 1;
  std::set<int> only;
  int failed = 0;

  template <class T>
  T pick(T fastValue, T fullValue) const { return fast ? fastValue : fullValue; }

  void run(int id, const std::string& name, const std::function<bool(std::ostringstream&)>& body) {
    if (!only.empty() && !only.contains(id)) return;
    std::ostringstream detail;
    detail.precision(6);
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail << " threw: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !ok;
    std::printf("%s [%2d] %s:%s (%.1fs)\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.str().c_str(), secs);
    std::fflush(stdout);
  }

  void info(int id, const std::string& text) const {
    if (!only.empty() && !only.contains(id)) return;
    std::printf("INFO [%2d] %s\n", id, text.c_str());
    std::fflush(stdout);
  }
};

const double k548 = 5.0 / 48;

ExponentFit sweep_fit(const ArmEventSpec& spec, const std::vector<int>& scales, long trials, std::uint64_t seed,
                      int workers, std::ostringstream& d, long* violations = nullptr) {
  const auto sweep = mc_sweep(spec, scales, 0.5, trials, seed, workers, violations != nullptr);
  if (violations) *violations = sweep.monotoneViolations;
  d << " pHat";
  for (const auto& e : sweep.estimates) d << ' ' << e.pHat;
  return fit_sweep(sweep);
}

}  // namespace

int main(int argc, char** argv) {
  Gate g;
  std::vector<int> only;
  CLI::App app{"acceptance gate"};
  app.add_flag("--fast", g.fast, "reduced sample sizes");
  app.add_flag("--slow", g.slow, "include the SLE trace tier");
  app.add_option("--workers", g.workers, "worker threads")->check(CLI::Range(1, 256));
  app.add_option("--only", only, "criterion ids to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  g.only = {only.begin(), only.end()};
  std::printf("tier: %s\n", g.fast ? "fast" : g.slow ? "full + slow" : "full");

  g.run(1, "closed form", [](auto& d) {
    const Rational six = lambda_closed_form(Rational(6)), four = lambda_closed_form(Rational(4));
    d << " lambda(6) = " << to_string(six) << ", lambda(4) = " << to_string(four);
    return six == Rational(5, 48) && four == Rational(0);
  });

  g.run(2, "1D eigenproblem", [](auto& d) {
    const auto r = solve_eigen_1d(6.0, 4095);
    double sup = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i)
      sup = std::max(sup, std::abs(r.eigenfunction[i] - analytic_eigenfunction(6.0, r.x[i])));
    bool ok = !r.extrapolation.refused && std::abs(r.lambda - k548) <= 1e-4 && sup <= 1e-3;
    d << " kappa=6 |lambda-5/48| = " << std::abs(r.lambda - k548) << " (tol 1e-4), sup|H - sin(t/4)^(1/3)| = " << sup
      << " (tol 1e-3); sweep max err";
    double worst = 0.0;
    for (double k : {4.5, 5.0, 6.0, 7.0, 9.0, 12.0}) {
      const auto s = solve_eigen_1d(k, 2047);
      const double err = std::abs(s.lambda - lambda_closed_form(k));
      ok = ok && !s.extrapolation.refused && err <= 1e-3;
      worst = std::isnan(err) ? err : std::max(worst, err);
    }
    d << ' ' << worst << " (tol 1e-3)";
    return ok;
  });

  LoopExponent sixDiffusion;
  g.run(3, "diffusion oracle", [&](auto& d) {
    LoopExponentParams p;
    p.paths = g.pick(20000L, 1000000L);
    p.dt = 0.02;
    p.workers = g.workers;
    p.seed = 303;
    sixDiffusion = estimate_loop_free_exponent(6.0, LoopMethod::diffusion, p);
    p.seed = 312;
    const auto twelve = estimate_loop_free_exponent(12.0, LoopMethod::diffusion, p);
    d << " paths " << p.paths << ", dt " << p.dt << "; kappa=6 " << sixDiffusion.exponent << " +- "
      << sixDiffusion.stdErr << " (5/48, tol 0.01); kappa=12 " << twelve.exponent << " +- " << twelve.stdErr
      << " (1/3, tol 0.02)";
    return std::abs(sixDiffusion.exponent - k548) <= 0.01 && std::abs(twelve.exponent - 1.0 / 3) <= 0.02;
  });
  if (g.only.empty() || g.only.contains(3)) {
    LoopExponentParams h;
    h.paths = g.pick(5000L, 100000L);
    h.dt = 0.02;
    h.workers = g.workers;
    h.seed = 306;
    const auto halving = diffusion_dt_halving(6.0, h);
    std::ostringstream s;
    s.precision(6);
    s << "dt halving, kappa=6, " << h.paths << " shared paths: " << halving.coarse.exponent << " -> "
      << halving.fine.exponent << ", change " << halving.change << " vs stdErr " << halving.fine.stdErr << " ("
      << (std::abs(halving.change) < halving.fine.stdErr ? "within" : "exceeds") << ")";
    g.info(3, s.str());
  }

  if (g.slow && !g.fast) {
    g.run(4, "SLE trace (slow tier)", [&](auto& d) {
      LoopExponentParams p;
      p.paths = 100000;
      p.dt = 0.02;
      p.workers = g.workers;
      p.seed = 404;
      const auto e = estimate_loop_free_exponent(6.0, LoopMethod::trace, p);
      d << " paths " << p.paths << ", radii 0.5..0.08: exponent " << e.exponent << " +- " << e.stdErr
        << " (5/48, tol 0.05); max |g'(0)e^-t - 1| " << e.maxDerivRelErr << "; Koebe in [" << e.minKoebe << ", "
        << e.maxKoebe << "]; verdict flips at half tolerance " << e.verdictFlipsHalfTol;
      if (sixDiffusion.paths > 0) {
        const double z = (e.exponent - sixDiffusion.exponent) / std::hypot(e.stdErr, sixDiffusion.stdErr);
        d << "; vs diffusion " << z << " combined sigma";
      }
      return std::abs(e.exponent - k548) <= 0.05 && e.maxDerivRelErr <= 1e-6 && e.minKoebe >= 0.2 &&
             e.maxKoebe <= 1.05;
    });
    LoopExponentParams p;
    p.paths = 4000;
    p.dt = 0.01;
    p.workers = g.workers;
    p.seed = 405;
    p.radii = {0.08, 0.05, 0.03, 0.02, 0.0125, 0.008};
    const auto e = estimate_loop_free_exponent(6.0, LoopMethod::trace, p);
    std::ostringstream s;
    s << "SLE trace at radii 0.08..0.008, dt 0.01, " << p.paths << " paths: exponent " << e.exponent << " +- "
      << e.stdErr << ", verdict flips at half tolerance " << e.verdictFlipsHalfTol;
    g.info(4, s.str());
  } else {
    g.info(4, "SLE trace tier skipped (run with --slow)");
  }

  g.run(5, "discrete one-arm", [&](auto& d) {
    const std::vector<int> scales = g.pick(std::vector<int>{16, 32, 64, 128, 256}, std::vector<int>{16, 32, 64, 128, 256, 512});
    const long trials = g.pick(4000L, 100000L);
    long violations = 0;
    const auto f = sweep_fit(ArmEventSpec::one_arm(16), scales, trials, 505, g.workers, d, &violations);
    d << "; trials " << trials << ", exponent " << -f.slope << " (band [0.075, 0.135]), monotone violations "
      << violations;
    return -f.slope >= 0.075 && -f.slope <= 0.135 && violations == 0;
  });

  g.run(6, "half-plane two-arm", [&](auto& d) {
    const long trials = g.pick(4000L, 40000L);
    const auto f = sweep_fit(ArmEventSpec::disjoint_open_arms(2, 4, 16, true), {16, 32, 64, 128, 256}, trials, 606,
                             g.workers, d);
    d << "; r=4, trials " << trials << ", exponent " << -f.slope << " (1, tol 0.10)";
    return std::abs(-f.slope - 1.0) <= 0.10;
  });

  g.run(7, "three-arm half-plane and five-arm plane", [&](auto& d) {
    using enum Color;
    const long t3 = g.pick(20000L, 200000L), t5 = g.pick(10000L, 100000L);
    const auto three =
        sweep_fit(ArmEventSpec::multichromatic({open, closed, open}, 2, 8, true), {8, 16, 32, 64}, t3, 707, g.workers, d);
    d << "; three-arm r=2 exponent " << -three.slope << " (2, tol 0.2);";
    // scales start at 8r: the full-plane test is a sufficient one and undercounts near the inner circle
    const auto five = sweep_fit(ArmEventSpec::multichromatic({open, closed, open, open, closed}, 4, 32, false),
                                {32, 64, 128}, t5, 708, g.workers, d);
    d << "; five-arm r=4 exponent " << -five.slope << " (2, tol 0.3); trials " << t3 << "/" << t5;
    return std::abs(-three.slope - 2.0) <= 0.2 && std::abs(-five.slope - 2.0) <= 0.3;
  });

  g.run(8, "exact rhombus duality", [&](auto& d) {
    const int L = g.pick(32, 64);
    const long samples = 10000;
    const Region rh = Region::rhombus(L);
    long violations = 0;
    for (long s = 0; s < samples; ++s) {
      const auto c = Configuration::sample(rh, 0.5, trial_seed(808, s));
      violations += event_rhombus_crossing(c, CrossingDirection::leftRight, Color::open) ==
                    event_rhombus_crossing(c, CrossingDirection::topBottom, Color::closed);
    }
    d << " L=" << L << ", " << samples << " samples, violations " << violations;
    return violations == 0;
  });

  g.run(9, "Cardy validation", [&](auto& d) {
    const double half = cardy_formula(0.5);
    const int H = g.pick(32, 128);
    const long trials = g.pick(4000L, 20000L);
    bool ok = std::abs(half - 0.5) <= 1e-9;
    d << " cardy(1/2) - 1/2 = " << half - 0.5 << "; H=" << H << ", trials " << trials;
    std::uint64_t seed = 909;
    for (double aspect : {2.0, 0.5}) {
      const auto e = mc_estimate(ArmEventSpec::rectangle(aspect * H, H), 0.5, trials, seed++, g.workers);
      const double theory = cardy_rectangle(aspect);
      const double z = (e.pHat - theory) / e.stdErr;
      d << "; aspect " << aspect << ": " << e.pHat << " +- " << e.stdErr << " vs " << theory << " (z " << z << ")";
      ok = ok && std::abs(z) <= 3.0;
    }
    return ok;
  });

  g.run(10, "backbone eigenvalue", [&](auto& d) {
    const std::vector<int> meshes = g.pick(std::vector<int>{128, 256, 512}, std::vector<int>{512, 1024, 2048});
    const auto a = solve_backbone_2d(meshes);
    const auto b = solve_backbone_symmetric(meshes);
    const auto& xa = a.extrapolation;
    const auto& xb = b.extrapolation;
    const double gap = std::abs(a.lambda - b.lambda), allowed = xa.meshError + xb.meshError;
    const auto firstOrder = richardson(a.meshTrace, 1.0);
    d << " meshes " << meshes.front() << ".." << meshes.back() << "; (a,g) " << a.lambda << " +- " << xa.meshError
      << " order " << xa.observedOrder << "; (a,b) " << b.lambda << " +- " << xb.meshError << " order "
      << xb.observedOrder << "; gap " << gap << " <= " << allowed << "; first-order assumption "
      << (firstOrder.refused ? "refused" : "accepted");
    const bool inBand = a.lambda >= 0.34 && a.lambda <= 0.37 && b.lambda >= 0.34 && b.lambda <= 0.37;
    return !xa.refused && !xb.refused && xa.cauchy && xb.cauchy && inBand && gap <= allowed;
  });

  g.run(11, "oracle equivalences", [&](auto& d) {
    using namespace critlab::oracle;
    long hits = 0;
    const Region d1 = Region::disk(1);
    for (std::uint64_t m = 0; m < 128; ++m) hits += event_one_arm(Configuration::from_states(d1, mask_states(m, 7)), 1);
    d << " disk(1) one-arm " << hits << "/128";

    long mengerMismatch = 0, mengerStates = 0;
    for (auto [r, R] : std::vector<std::pair<int, int>>{{1, 2}, {2, 3}}) {
      const Region region = Region::half_plane_annulus(r, R);
      const BrutePaths brute(region, r, R);
      const std::size_t n = brute.sites.size();
      if (n > 18) return false;
      for (std::uint32_t m = 0; m < (1u << n); ++m, ++mengerStates) {
        const auto c = Configuration::from_states(region, mask_states(m, n));
        for (int k = 1; k <= 3; ++k)
          mengerMismatch += event_disjoint_open_arms(c, k, r, R, true) != (brute.max_disjoint(m, k) >= k);
      }
    }
    d << "; Menger vs path search " << mengerMismatch << " mismatches over " << mengerStates << " states";

    const Region half = Region::half_plane_annulus(1, 3);
    const BrutePaths brute(half, 1, 3);
    const std::size_t n = brute.sites.size();
    const std::uint32_t stride = g.pick(7u, 1u);
    long colourMismatch = 0, colourStates = 0;
    for (const char* code : {"oc", "co", "ooc", "oco", "coc"}) {
      const auto colors = colors_of(code);
      for (std::uint32_t m = 0; m < (1u << n); m += stride, ++colourStates) {
        const auto c = Configuration::from_states(half, mask_states(m, n));
        colourMismatch += event_multichromatic_arms(c, colors, 1, 3, true) != brute.half_sequence(m, colors);
      }
    }
    d << "; half-annulus(1,3) colour sequences " << colourMismatch << " mismatches over " << colourStates << " cases";
    return hits == 63 && mengerMismatch == 0 && colourMismatch == 0;
  });

  std::printf("%s: %d criterion line(s) failed\n", g.failed ? "FAILED" : "ALL PASSED", g.failed);
  return g.failed ? 1 : 0;
}
