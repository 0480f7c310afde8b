#include <algorithm>
#include <cmath>
#include <numbers>

#include "critlab/errors.hpp"
#include "critlab/spectral.hpp"
#include "doctest.h"

using namespace critlab;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double sup_distance_to_H(const EigenResult& r, double kappa) {
  double sup = 0.0;
  for (std::size_t k = 0; k < r.x.size(); ++k)
    sup = std::max(sup, std::abs(r.eigenfunction[k] - analytic_eigenfunction(kappa, std::min(r.x[k], kTwoPi))));
  return sup;
}

}  // namespace

TEST_CASE("closed-form exponent is exact on rationals") {
  CHECK(lambda_closed_form(Rational(6)) == Rational(5, 48));
  CHECK(lambda_closed_form(Rational(4)) == Rational(0));
  CHECK(lambda_closed_form(Rational(8)) == Rational(3, 16));
  CHECK(lambda_closed_form(Rational(12)) == Rational(1, 3));
  CHECK(lambda_closed_form(Rational(9, 2)) == Rational(17, 576));
  CHECK(lambda_closed_form(Rational(2)) == Rational(-3, 16));
  CHECK(Rational(10, -4) == Rational(-5, 2));
  CHECK(to_string(Rational(5, 48)) == "5/48");
  CHECK(lambda_closed_form(6.0) == doctest::Approx(5.0 / 48).epsilon(1e-15));
  CHECK_THROWS_AS(lambda_closed_form(Rational(0)), PreconditionError);
  CHECK_THROWS_AS(lambda_closed_form(Rational(-3, 2)), PreconditionError);
  CHECK_THROWS_AS(lambda_closed_form(-1.0), PreconditionError);
  CHECK_THROWS_AS(Rational(1, 0), PreconditionError);
}

TEST_CASE("analytic eigenfunction") {
  CHECK(analytic_eigenfunction(6, 0.0) == 0.0);
  for (double k : {4.5, 6.0, 12.0}) CHECK(analytic_eigenfunction(k, kTwoPi) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(analytic_eigenfunction(6, std::numbers::pi) == doctest::Approx(std::pow(2.0, -1.0 / 6)).epsilon(1e-14));
  CHECK_THROWS_AS(analytic_eigenfunction(4.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(analytic_eigenfunction(6.0, 7.0), PreconditionError);
}

TEST_CASE("Richardson extrapolation and its refusals") {
  auto trace = [](double p) {
    std::vector<MeshLambda> t;
    for (int m : {64, 128, 256}) t.push_back({m, 1.0 / m, 0.25 + std::pow(1.0 / m, p)});
    return t;
  };
  const auto e = richardson(trace(2.0), 2.0);
  CHECK(e.value == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(e.observedOrder == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(e.cauchy);
  CHECK(richardson(trace(1.3), 1.0).observedOrder == doctest::Approx(1.3).epsilon(1e-6));
  const auto wrongOrder = richardson(trace(2.0), 1.0);
  CHECK(wrongOrder.refused);
  CHECK(std::isnan(wrongOrder.value));
  CHECK(wrongOrder.observedOrder == doctest::Approx(2.0).epsilon(1e-6));
  const auto wobble = richardson({{64, 1.0 / 64, 0.3}, {128, 1.0 / 128, 0.31}, {256, 1.0 / 256, 0.29}}, 1.0);
  CHECK(wobble.refused);
  CHECK_FALSE(wobble.cauchy);
  CHECK_FALSE(e.refused);
  CHECK_THROWS_AS(richardson({{64, 1.0 / 64, 0.3}}, 1.0), PreconditionError);
  // two meshes: no observed order, plain extrapolation
  const auto two = richardson({{64, 1.0 / 64, 0.3}, {128, 1.0 / 128, 0.28}}, 1.0);
  CHECK(std::isnan(two.observedOrder));
  CHECK(two.value == doctest::Approx(0.26));
  CHECK(two.finestError == doctest::Approx(0.02));
  const auto flat = richardson({{64, 1.0 / 64, 0.3 + 1e-9}, {128, 1.0 / 128, 0.3 + 1e-13}, {256, 1.0 / 256, 0.3}}, 2.0, 0.5, 1e-10);
  CHECK_FALSE(flat.refused);
  CHECK(flat.value == 0.3);
}

TEST_CASE("1D eigenproblem at kappa = 6") {
  const auto r = solve_eigen_1d(6.0, 4096);
  CHECK(std::abs(r.lambda - 5.0 / 48) < 1e-4);
  CHECK(r.meshTrace.size() == 3);
  CHECK(r.meshTrace.back().mesh == 4096);
  CHECK(r.extrapolation.observedOrder == doctest::Approx(2.0).epsilon(0.1));
  CHECK(r.eigenfunction.back() == 1.0);
  CHECK(sup_distance_to_H(r, 6.0) < 1e-3);
  CHECK(std::all_of(r.eigenfunction.begin(), r.eigenfunction.end(), [](double v) { return v >= 0.0; }));
  CHECK(r.residual < 1e-6);
  const auto decay = solve_eigen_1d(6.0, 4096, {.method = EigenMethod::timeDecay});
  CHECK(std::abs(decay.lambda - r.lambda) < 1e-3);
  CHECK(std::abs(decay.meshTrace.back().lambda - r.meshTrace.back().lambda) < 1e-9);
}

TEST_CASE("1D eigenvalue sweep against the closed form") {
  for (double kappa : {4.5, 5.0, 6.0, 7.0, 9.0, 12.0}) {
    CAPTURE(kappa);
    const auto r = solve_eigen_1d(kappa, 2048);
    CHECK(std::abs(r.lambda - lambda_closed_form(kappa)) < 1e-3);
    CHECK(sup_distance_to_H(r, kappa) < 1e-3);
  }
  CHECK_THROWS_AS(solve_eigen_1d(4.0, 256), PreconditionError);
  CHECK_THROWS_AS(solve_eigen_1d(6.0, 8), PreconditionError);
}

TEST_CASE("1D residual of the analytic eigenfunction is second order") {
  for (double kappa : {5.0, 6.0, 12.0}) {
    CAPTURE(kappa);
    double prev = eigen1d_residual(kappa, 1023, 0.05);
    for (int n : {2047, 4095}) {
      const double r = eigen1d_residual(kappa, n, 0.05);
      CHECK(std::log2(prev / r) >= 1.8);
      prev = r;
    }
  }
}

TEST_CASE("parabolic evolution") {
  const int n = 1024;
  const double h = kTwoPi / (n + 1);
  std::vector<double> H(n + 2), bump(n + 2, 0.0), zero(n + 2, 0.0);
  for (int i = 0; i <= n + 1; ++i) {
    const double th = std::min(i * h, kTwoPi);
    H[i] = analytic_eigenfunction(6, th);
    bump[i] = std::exp(-std::pow((th - kTwoPi) / 0.2, 2));
  }

  SUBCASE("the eigenfunction keeps its shape") {
    const auto p = evolve_parabolic_1d(6, H, 5.0, n, 0.005);
    CHECK(std::abs(p.decayRate - 5.0 / 48) < 1e-3);
    double sup = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) sup = std::max(sup, std::abs(p.values[i] / p.values.back() - H[i]));
    CHECK(sup < 1e-3);
    CHECK(p.ratioMin > 0.99);
    CHECK(p.ratioMax < 1.01);
  }
  SUBCASE("a bump at 2pi decays at the same rate and is sandwiched") {
    const auto p = evolve_parabolic_1d(6, bump, 40.0, n, 0.01, 5.0);
    CHECK(std::abs(p.decayRate - 5.0 / 48) < 1e-3);
    CHECK(p.ratioMin > 0.0);
    CHECK(p.ratioMax / p.ratioMin < 3.0);
    for (std::size_t k = 1; k < p.norms.size(); ++k) CHECK(p.norms[k] <= p.norms[k - 1]);
  }
  SUBCASE("zero stays zero") {
    const auto p = evolve_parabolic_1d(6, zero, 1.0, n, 0.1);
    CHECK(std::all_of(p.values.begin(), p.values.end(), [](double v) { return v == 0.0; }));
    CHECK(std::isnan(p.decayRate));
  }
  SUBCASE("preconditions") {
    auto neg = H;
    neg[5] = -1.0;
    CHECK_THROWS_AS(evolve_parabolic_1d(6, neg, 1.0, n, 0.1), PreconditionError);
    auto lifted = H;
    lifted[0] = 0.5;
    CHECK_THROWS_AS(evolve_parabolic_1d(6, lifted, 1.0, n, 0.1), PreconditionError);
    CHECK_THROWS_AS(evolve_parabolic_1d(6, H, 1.0, n + 1, 0.1), PreconditionError);
  }
}

TEST_CASE("backbone operator in (alpha, gamma)") {
  const auto r = solve_backbone_2d({128, 256, 512});
  CHECK(r.extrapolation.cauchy);
  CHECK_FALSE(r.extrapolation.refused);
  CHECK(r.meshTrace.size() == 3);
  CHECK(r.lambda > 0.34);
  CHECK(r.lambda < 0.38);
  CHECK(r.eigenfunction.front() == 1.0);  // edge value
  CHECK(std::all_of(r.eigenfunction.begin(), r.eigenfunction.end(), [](double v) { return v >= 0.0; }));

  // both extraction methods solve the same discrete problem
  const auto direct = solve_backbone_2d({128, 256}, {.method = EigenMethod::directEigen});
  CHECK(std::abs(direct.meshTrace[1].lambda - r.meshTrace[1].lambda) < 1e-8);

  // the gamma = 0 Dirichlet edge: the first row shrinks under refinement
  auto first_row_max = [](const EigenResult& e) {
    // away from the alpha = 0 corner, where the Cardy profile takes over
    double lo = 1e300, m = 0.0;
    for (double y : e.y) lo = std::min(lo, y);
    for (std::size_t k = 0; k < e.y.size(); ++k)
      if (e.y[k] == lo && e.x[k] > 0.01) m = std::max(m, e.eigenfunction[k]);
    return m;
  };
  CHECK(first_row_max(r) < 0.6 * first_row_max(direct));
  CHECK(first_row_max(r) < 0.01);

  // near the corner the profile in a/(a+g) is Cardy's
  CHECK(cardy_profile_deviation(r, 0.01, 0.1) < 0.05);

  for (auto mode : {EdgeMode::corner, EdgeMode::reflect}) {
    const auto alt = solve_backbone_2d({64, 128}, {.edge = mode});
    CHECK(alt.lambda > 0.0);
  }
  CHECK_THROWS_AS(solve_backbone_2d({128}), PreconditionError);
  CHECK(parse_edge_mode("corner") == EdgeMode::corner);
  CHECK_THROWS_AS(parse_edge_mode("floating"), PreconditionError);
}

TEST_CASE("backbone operator in (alpha, beta)") {
  const auto r = solve_backbone_symmetric({64, 128, 256});
  CHECK(r.extrapolation.cauchy);
  CHECK_FALSE(r.extrapolation.refused);
  CHECK(r.lambda > 0.34);
  CHECK(r.lambda < 0.38);
  CHECK(std::all_of(r.eigenfunction.begin(), r.eigenfunction.end(), [](double v) { return v >= -1e-12; }));
  // normalisation on the alpha = 0 edge and smallness next to the hypotenuse
  CHECK(r.eigenfunction.front() == 1.0);
  // next to the hypotenuse (gamma = h) the eigenfunction shrinks under refinement
  auto near_hypotenuse = [](const EigenResult& e, int N) {
    double m = 0.0;
    for (std::size_t k = 1; k < e.x.size(); ++k)
      if (e.x[k] > 0.5 && e.x[k] + e.y[k] > kTwoPi * (1 - 1.5 / N)) m = std::max(m, e.eigenfunction[k]);
    return m;
  };
  const auto decay = solve_backbone_symmetric({64, 128}, {.method = EigenMethod::timeDecay});
  const auto direct = solve_backbone_symmetric({64, 128}, {.method = EigenMethod::directEigen});
  CHECK(std::abs(decay.meshTrace[1].lambda - direct.meshTrace[1].lambda) < 1e-8);
  CHECK(near_hypotenuse(r, 256) < 0.85 * near_hypotenuse(direct, 128));
}

TEST_CASE("Cardy formula") {
  CHECK(cardy_formula(0.0) == 0.0);
  CHECK(cardy_formula(1.0) == 1.0);
  CHECK(std::abs(cardy_formula(0.5) - 0.5) < 1e-12);
  // adaptive quadrature of the Euler integral, 30 digits
  CHECK(cardy_formula(0.25) == doctest::Approx(0.37354879133291717).epsilon(1e-10));
  CHECK(cardy_formula(0.1) == doctest::Approx(0.26733700684941588).epsilon(1e-10));
  for (int k = 0; k <= 100; ++k) {
    const double m = k / 100.0;
    CHECK(std::abs(cardy_formula(m) + cardy_formula(1 - m) - 1.0) < 1e-9);
    if (k) CHECK(cardy_formula(m) > cardy_formula(m - 0.01));
  }
  CHECK_THROWS_AS(cardy_formula(-0.1), PreconditionError);
  CHECK_THROWS_AS(cardy_formula(1.5), PreconditionError);

  CHECK(std::abs(cardy_rectangle(1.0) - 0.5) < 1e-9);
  CHECK(cardy_rectangle(2.0) == doctest::Approx(0.175646893800012).epsilon(1e-9));
  CHECK(cardy_rectangle(0.5) == doctest::Approx(0.824353106197281).epsilon(1e-9));
  CHECK(cardy_rectangle(1.5) == doctest::Approx(0.296494998200277).epsilon(1e-9));
  CHECK_THROWS_AS(cardy_rectangle(0.0), PreconditionError);
}
