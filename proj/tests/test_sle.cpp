#include <cmath>
#include <numbers>

#include "critlab/errors.hpp"
#include "critlab/parallel.hpp"
#include "critlab/sle.hpp"
#include "doctest.h"

using namespace critlab;

namespace {

constexpr double kPi = std::numbers::pi;

TracePath circle(double radius, double turns, int n, double phase = 0.0) {
  TracePath tp;
  for (int i = 0; i <= n; ++i) {
    const double a = phase + turns * 2 * kPi * i / n;
    tp.points.push_back(std::polar(radius, a));
    tp.times.push_back(double(i) / n);
  }
  return tp;
}

}  // namespace

TEST_CASE("driving path basics") {
  const auto flat = sample_driving(0.0, 0.01, 1.0, 3);
  CHECK(flat.steps() == 100);
  for (std::size_t i = 0; i <= flat.steps(); ++i) CHECK(std::abs(flat.point(i) - cplx(1.0)) < 1e-15);
  CHECK(sample_driving(6, 0.01, 1.0, 9).samples == sample_driving(6, 0.01, 1.0, 9).samples);
  CHECK(sample_driving(6, 0.01, 1.0, 9).samples != sample_driving(6, 0.01, 1.0, 10).samples);
  CHECK(sample_driving(6, 0.3, 1.0, 1).steps() == 4);
  CHECK_THROWS_AS(sample_driving(6, 0.0, 1.0, 1), PreconditionError);
  CHECK_THROWS_AS(sample_driving(-1, 0.1, 1.0, 1), PreconditionError);
}

TEST_CASE("Var(B_T) over 1e5 seeds") {
  const long n = 100000;
  const double T = 1.0;
  double s = 0, s2 = 0;
  for (long i = 0; i < n; ++i) {
    const double b = sample_driving(1.0, 0.1, T, trial_seed(77, i)).samples.back();
    s += b;
    s2 += b * b;
  }
  const double var = (s2 - s * s / n) / (n - 1);
  // sample variance of n normals has standard error T*sqrt(2/(n-1))
  CHECK(std::abs(var - T) < 3 * T * std::sqrt(2.0 / (n - 1)));
}

TEST_CASE("elementary slit maps") {
  const SlitStep s{0.3, std::polar(1.0, 0.7)};
  for (cplx z : {cplx(0.2, 0.1), cplx(-0.5, 0.3), cplx(0.0, -0.9), cplx(0.6, 0.6)}) {
    const cplx f = slit_forward(s, z);
    CHECK(std::abs(f) < 1.0);
    CHECK(std::abs(slit_inverse(s, f) - z) < 1e-12);
  }
  CHECK(slit_forward(s, 0.0) == cplx(0.0));
  const double eps = 1e-7;
  CHECK(std::abs(std::abs(slit_forward(s, eps * s.w)) / eps - std::exp(0.3)) < 1e-6);
  // boundary points stay on the circle and on their side of the slit axis
  for (double a : {0.3, 1.0, 2.5, -0.4, -2.0}) {
    const cplx z = std::polar(1.0, 0.7 + a);
    const cplx f = slit_forward(s, z);
    CHECK(std::abs(std::abs(f) - 1.0) < 1e-12);
    CHECK(std::sin(std::arg(f / s.w)) * std::sin(a) > 0);
    const cplx back = slit_inverse(s, std::polar(1.0, 0.7 + a));
    CHECK(std::sin(std::arg(back / s.w)) * std::sin(a) >= 0);
  }
  CHECK(slit_tip(0.0) == doctest::Approx(1.0));
  CHECK(slit_tip(0.5) < 1.0);
  CHECK(slit_tip(1.0) < slit_tip(0.5));
  // the tip of the slit is the preimage of the driving point
  CHECK(std::abs(slit_forward(SlitStep{0.5, 1.0}, slit_tip(0.5) * 1.0000001) - 1.0) < 1e-3);
}

TEST_CASE("kappa = 0 grows the radial segment") {
  const auto ev = evolve_radial(sample_driving(0.0, 0.05, 2.0, 1));
  const auto& pts = ev.trace.points;
  REQUIRE(pts.size() == 41);
  CHECK(pts.front() == cplx(1.0));
  for (std::size_t i = 1; i < pts.size(); ++i) {
    CHECK(std::abs(pts[i].imag()) < 1e-12);
    CHECK(pts[i].real() > 0.0);
    CHECK(pts[i].real() < pts[i - 1].real());
  }
  // composition of constant-driving steps is the single slit of the total time
  CHECK(pts.back().real() == doctest::Approx(slit_tip(2.0)).epsilon(1e-10));
  const auto ratios = koebe_ratios(ev.trace);
  for (double r : ratios) {
    CHECK(r >= 0.25 - 1e-12);
    CHECK(r <= 1.0 + 1e-12);
  }
  CHECK(koebe_check(ev.state, ev.trace) == doctest::Approx(ratios.back()));
  // small times: the hull is near the boundary, ratio near 1
  double last = 0.0;
  for (double t : {1e-2, 1e-4, 1e-6}) {
    const auto early = evolve_radial(sample_driving(0.0, t, t, 1));
    const double k = koebe_check(early.state, early.trace);
    CHECK(k > last);
    last = k;
  }
  CHECK(last > 0.99);
}

TEST_CASE("composed slit maps agree with the Loewner ODE") {
  const auto ev = evolve_radial(sample_driving(6.0, 0.01, 0.5, 4));
  for (cplx z : {cplx(0.1, 0.0), cplx(0.0, 0.2), cplx(-0.3, -0.1)}) {
    const cplx exact = apply_forward(ev.state, z);
    CHECK(std::abs(loewner_ode(ev.state, z, 40) - exact) < 1e-8);
    CHECK(std::abs(apply_inverse(ev.state, exact) - z) < 1e-10);
  }
  CHECK(apply_forward(ev.state, 0.0) == cplx(0.0));
}

TEST_CASE("conformal radius and Koebe bounds on kappa = 6 paths") {
  EvolveOptions eo;
  for (long i = 0; i < 20; ++i) {
    const auto ev = evolve_radial(sample_driving(6.0, 0.01, 2.0, trial_seed(5, i)), eo);
    CHECK(ev.state.maxDerivRelErr < 1e-6);
    CHECK(ev.state.derivAtZero == doctest::Approx(std::exp(ev.state.elapsed)).epsilon(1e-6));
    CHECK(ev.trace.points.front() == cplx(1.0));
    for (cplx p : ev.trace.points) CHECK(std::abs(p) <= 1.0);
    for (double r : koebe_ratios(ev.trace)) {
      CHECK(r >= 0.2);
      CHECK(r <= 1.05);
    }
  }
}

TEST_CASE("stop radius ends the evolution at the first hit") {
  EvolveOptions eo;
  eo.stopRadius = 0.3;
  const auto ev = evolve_radial(sample_driving(6.0, 0.01, 5.0, 8), eo);
  CHECK(std::abs(ev.trace.points.back()) <= 0.3);
  for (std::size_t i = 0; i + 1 < ev.trace.points.size(); ++i) CHECK(std::abs(ev.trace.points[i]) > 0.3);
  CHECK(ev.state.elapsed <= -std::log(0.3) + 0.02);
}

TEST_CASE("ccw loop detection") {
  const auto ccw = circle(0.5, 1.0, 200);
  const double tol = 2 * trace_resolution(ccw);
  CHECK(detect_ccw_loop(ccw, 1.0, tol));
  CHECK_FALSE(detect_ccw_loop(ccw, 0.9, tol));
  CHECK_FALSE(detect_ccw_loop(circle(0.5, -1.0, 200), 1.0, tol));
  // a loop that does not surround 0
  TracePath off = circle(0.2, 1.0, 200);
  for (auto& p : off.points) p += 0.5;
  CHECK_FALSE(detect_ccw_loop(off, 1.0, tol));
  const auto seg = evolve_radial(sample_driving(0.0, 0.01, 3.0, 1)).trace;
  CHECK_FALSE(detect_ccw_loop(seg, 10.0, 2 * trace_resolution(seg)));
  CHECK_THROWS_AS(detect_ccw_loop(ccw, 1.0, 0.0), PreconditionError);
  CHECK(*first_ccw_loop(ccw, 1.0, tol) >= 198);
}
