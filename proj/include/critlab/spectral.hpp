#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace critlab {

// p/q in lowest terms, q > 0
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d = 1);
  double value() const { return double(num) / double(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

std::string to_string(const Rational& r);

// (kappa^2 - 16) / (32 kappa)
Rational lambda_closed_form(const Rational& kappa);
double lambda_closed_form(double kappa);

// sin(theta/4)^q with q = (kappa - 4)/kappa
double analytic_eigenfunction(double kappa, double theta);

enum class EigenMethod { directEigen, timeDecay };

std::string to_string(EigenMethod m);
EigenMethod parse_eigen_method(const std::string& text);

struct MeshLambda {
  int mesh = 0;
  double h = 0.0;  // representative mesh width
  double lambda = 0.0;
};

// Richardson extrapolation from the two finest meshes with an assumed order.
// The observed order needs three meshes. Extrapolation is refused, never thrown,
// when the sequence is not Cauchy or the observed order deviates from the
// assumed one by more than maxOrderDeviation; value is then NaN. When the
// finest mesh difference is below noiseFloor the finest value is returned as is.
struct Extrapolation {
  double value = std::numeric_limits<double>::quiet_NaN();
  double assumedOrder = 0.0;
  double observedOrder = std::numeric_limits<double>::quiet_NaN();
  double meshError = std::numeric_limits<double>::quiet_NaN();  // |value - finest|
  // geometric tail of the finest difference at the observed order (assumed with two meshes)
  double finestError = 0.0;
  bool cauchy = false;  // successive differences shrink
  bool refused = false;
  std::string reason;
};

Extrapolation richardson(const std::vector<MeshLambda>& trace, double assumedOrder, double maxOrderDeviation = 0.5,
                         double noiseFloor = 0.0);

struct EigenResult {
  double lambda = 0.0;  // extrapolated; NaN when refused
  EigenMethod method = EigenMethod::directEigen;
  std::vector<MeshLambda> meshTrace;  // coarse to fine
  Extrapolation extrapolation;
  // finest mesh: 1D has x = theta only; the (alpha, gamma) form has y = gamma,
  // the symmetric form y = beta; the first 2D entry is the alpha = 0 edge
  std::vector<double> x, y, eigenfunction;
  double residual = 0.0;  // relative eigen-residual on the finest mesh
  int iterations = 0;
};

// ---- 1D: (kappa/2) u'' + cot(theta/2) u' on (0, 2pi), u(0) = 0, u'(2pi) = 0 ----

struct Eigen1dOptions {
  EigenMethod method = EigenMethod::directEigen;
  int levels = 3;          // meshes n, about n/2, about n/4
  double timeStep = 0.5;   // timeDecay
  double tol = 1e-13;
  int maxIter = 100000;
};

// nodes theta_i = 2 pi i / (n + 1), i = 1..n+1; the last node is 2 pi itself
EigenResult solve_eigen_1d(double kappa, int n, const Eigen1dOptions& options = {});

// max over nodes with theta in [margin, 2pi - margin] of |L_h H - (-lambda) H|
double eigen1d_residual(double kappa, int n, double margin);

struct Parabolic1d {
  std::vector<double> theta;  // i = 0..n+1
  std::vector<double> values;
  std::vector<double> times, norms;
  double decayRate = 0.0;
  // min and max over nodes and t >= transient of u / (H e^{-lambda t})
  double ratioMin = 0.0, ratioMax = 0.0;
};

// Implicit Euler on the same operator. initial has n + 2 entries (theta = 0 .. 2pi).
Parabolic1d evolve_parabolic_1d(double kappa, const std::vector<double>& initial, double tEnd, int n, double dtStep,
                                double transient = 1.0);

// ---- backbone: 3 G_aa + cot(a/2) G_a + (cot((a+g)/2) - cot(a/2)) G_g on a + g < 2pi ----

// How G(0, g) = G(0, 2pi) is realised.
//   shared:   one unknown for the whole edge, closed by the operator at the corner
//   corner:   the edge takes the value of the interior node next to the corner
//   reflect:  G(0, g) = G(h, g), no edge unknown
enum class EdgeMode { shared, corner, reflect };

std::string to_string(EdgeMode m);
EdgeMode parse_edge_mode(const std::string& text);

struct BackboneOptions {
  EigenMethod method = EigenMethod::timeDecay;
  EdgeMode edge = EdgeMode::shared;
  double grading = 3.0;     // x = 2pi u^p / (u^p + (1-u)^p)
  double timeStep = 2.0;    // timeDecay
  double tol = 1e-12;
  int maxIter = 5000;
  // observed orders sit near 1/2 on both forms (see README)
  double assumedOrder = 0.5;
};

// (alpha, gamma) form with one graded grid for both variables
EigenResult solve_backbone_2d(const std::vector<int>& meshSizes, const BackboneOptions& options = {});

// (alpha, beta) form, beta = 2pi - alpha - gamma, uniform mesh 2pi/N
EigenResult solve_backbone_symmetric(const std::vector<int>& meshSizes, const BackboneOptions& options = {});

// largest |G/c - (1 - cardy(a/(a+g)))| over nodes of the (alpha, gamma) solution with a + g in [sLo, sHi]
double cardy_profile_deviation(const EigenResult& backbone2d, double sLo, double sHi);

// ---- Cardy ----

double cardy_formula(double m);

// horizontal crossing of a W x H rectangle in the scaling limit
double cardy_rectangle(double aspect /* W/H */);

}  // namespace critlab
