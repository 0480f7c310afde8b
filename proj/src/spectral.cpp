#include "critlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <boost/math/special_functions/beta.hpp>

#include "critlab/errors.hpp"
#include "critlab/fit.hpp"

namespace critlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double cot(double x) { return 1.0 / std::tan(x); }

// int_0^x sin(u/2)^pp du and int_x^pi sin(u/2)^pp du for x in [0, pi]; the second
// goes through cos^2(x/2) so that cells next to pi keep their relative precision
double sine_power_head(double x, double pp) { return boost::math::beta(0.5 + pp / 2, 0.5, std::pow(std::sin(x / 2), 2)); }
double sine_power_tail(double x, double pp) { return boost::math::beta(0.5, 0.5 + pp / 2, std::pow(std::cos(x / 2), 2)); }

// int_a^b sin(u/2)^pp du on [0, 2pi], exact for the integrable endpoint singularities
double cell_integral(double a, double b, double pp) {
  if (a >= kPi) return cell_integral(kTwoPi - b, kTwoPi - a, pp);
  if (b > kPi) return cell_integral(a, kPi, pp) + cell_integral(kPi, b, pp);
  constexpr double mid = kPi / 2;
  if (b <= mid) return sine_power_head(b, pp) - sine_power_head(a, pp);
  if (a >= mid) return sine_power_tail(a, pp) - sine_power_tail(b, pp);
  return sine_power_head(mid, pp) - sine_power_head(a, pp) + sine_power_tail(mid, pp) - sine_power_tail(b, pp);
}

// tridiagonal solve; lower[0] and upper[n-1] are ignored
std::vector<double> thomas(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper,
                           std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
  return x;
}

// ---------------------------------------------------------------- 1D

// Self-adjoint form (kappa/2) w^{-1} (w u')' with w = sin(theta/2)^{4/kappa}.
// Conductances are exact for piecewise-linear flux, masses are exact dual-cell weights.
struct Operator1d {
  int n = 0;
  double h = 0.0;
  std::vector<double> cond;  // face i | i+1, i = 0..n
  std::vector<double> mass;  // node i = 1..n+1 stored at i-1

  Operator1d(double kappa, int nInterior) : n(nInterior), h(kTwoPi / (nInterior + 1)) {
    const double pw = 4.0 / kappa;
    cond.resize(n + 1);
    for (int i = 0; i <= n; ++i) cond[i] = 0.5 * kappa / cell_integral(i * h, (i + 1) * h, -pw);
    mass.resize(n + 1);
    for (int i = 1; i <= n; ++i) mass[i - 1] = cell_integral((i - 0.5) * h, (i + 0.5) * h, pw);
    mass[n] = cell_integral(kTwoPi - 0.5 * h, kTwoPi, pw);
  }

  std::size_t size() const { return std::size_t(n) + 1; }

  // (K u)_i for unknowns u_1..u_{n+1}, u_0 = 0
  std::vector<double> apply(const std::vector<double>& u) const {
    std::vector<double> out(size());
    for (std::size_t k = 0; k < size(); ++k) {
      const int i = int(k) + 1;
      const double left = k > 0 ? u[k - 1] : 0.0;
      double v = cond[i - 1] * (u[k] - left);
      if (i <= n) v += cond[i] * (u[k] - u[k + 1]);
      out[k] = v;
    }
    return out;
  }

  // (K + s M) x = rhs
  std::vector<double> solve(double s, const std::vector<double>& rhs) const {
    std::vector<double> lo(size()), di(size()), up(size());
    for (std::size_t k = 0; k < size(); ++k) {
      const int i = int(k) + 1;
      di[k] = cond[i - 1] + s * mass[k];
      lo[k] = -cond[i - 1];
      if (i <= n) {
        di[k] += cond[i];
        up[k] = -cond[i];
      }
    }
    return thomas(lo, di, up, rhs);
  }

  double mdot(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) s += mass[k] * a[k] * b[k];
    return s;
  }

  double rayleigh(const std::vector<double>& u) const {
    const auto ku = apply(u);
    return std::inner_product(u.begin(), u.end(), ku.begin(), 0.0) / mdot(u, u);
  }

  double residual(const std::vector<double>& u, double lambda) const {
    const auto ku = apply(u);
    double r = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
      r = std::max(r, std::abs(ku[k] - lambda * mass[k] * u[k]));
      scale = std::max(scale, std::abs(mass[k] * u[k]));
    }
    return r / scale;
  }
};

struct Eigenpair1d {
  double lambda = 0.0;
  std::vector<double> u;
  double residual = 0.0;
  int iterations = 0;
};

Eigenpair1d leading_pair_1d(const Operator1d& op, const Eigen1dOptions& o) {
  std::vector<double> u(op.size(), 1.0);
  double lambda = 0.0;
  for (int it = 1; it <= o.maxIter; ++it) {
    std::vector<double> next;
    double estimate = 0.0;
    if (o.method == EigenMethod::directEigen) {
      std::vector<double> rhs(op.size());
      for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = op.mass[k] * u[k];
      next = op.solve(0.0, rhs);
    } else {
      // M (u' - u) / dt = -K u'
      std::vector<double> rhs(op.size());
      for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = op.mass[k] * u[k] / o.timeStep;
      next = op.solve(1.0 / o.timeStep, rhs);
    }
    const double nu = std::sqrt(op.mdot(u, u)), nn = std::sqrt(op.mdot(next, next));
    if (o.method == EigenMethod::directEigen) {
      estimate = op.rayleigh(next);
    } else {
      const double a = nn / nu;
      estimate = (1.0 / a - 1.0) / o.timeStep;
    }
    for (auto& v : next) v /= nn;
    u = std::move(next);
    const bool done = std::abs(estimate - lambda) <= o.tol * std::abs(estimate);
    lambda = estimate;
    if (done) {
      for (auto& v : u) v /= u.back();
      return {lambda, u, op.residual(u, lambda), it};
    }
  }
  throw NumericalError("1D eigen iteration did not converge, residual " + std::to_string(op.residual(u, lambda)));
}

// ---------------------------------------------------------------- backbone, (alpha, gamma)

double cardy_tail(double a, double g) {  // 1 - cardy(a/(a+g)), the small-corner profile
  if (g <= 0.0) return 0.0;
  return 1.0 - boost::math::ibeta(1.0 / 3, 1.0 / 3, a / (a + g));
}

class Backbone2d {
 public:
  Backbone2d(int N, EdgeMode edge, double grading) : N_(N), edge_(edge) {
    x_.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
      const double u = double(i) / N;
      const double a = std::pow(u, grading), b = std::pow(1 - u, grading);
      x_[i] = kTwoPi * a / (a + b);
    }
    x_[0] = 0.0;
    x_[N] = kTwoPi;
    // 3 d_a^2 + cot(a/2) d_a = 3 w^{-1} d_a (w d_a), w = sin(a/2)^{2/3}
    cond_.resize(N);
    for (int i = 0; i < N; ++i) cond_[i] = 1.0 / cell_integral(x_[i], x_[i + 1], -2.0 / 3);
    mass_.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
      const double lo = i > 0 ? 0.5 * (x_[i - 1] + x_[i]) : 0.0;
      const double hi = i < N ? 0.5 * (x_[i] + x_[i + 1]) : kTwoPi;
      mass_[i] = cell_integral(lo, hi, 2.0 / 3);
    }
    offset_.assign(N + 1, 0);
    std::size_t next = 1;  // slot 0: the alpha = 0 edge
    for (int j = 1; j <= N - 1; ++j) {
      offset_[j] = next;
      next += std::size_t(N - j);
    }
    size_ = next;
    // upwind transport in gamma: rate = 1 / (travel time of the characteristic across the cell)
    rate_.resize(size_);
    for (int j = 1; j <= N - 1; ++j)
      for (int i = 1; i <= N - j; ++i) rate_[at(i, j)] = transport_rate(i, j);
  }

  std::size_t size() const { return size_; }
  std::size_t at(int i, int j) const { return offset_[j] + std::size_t(i - 1); }
  const std::vector<double>& grid() const { return x_; }
  int mesh() const { return N_; }

  // (A - sigma) G = rhs, where A is minus the discrete generator
  std::vector<double> solve(double sigma, const std::vector<double>& rhs) {
    auto g0 = march(sigma, &rhs, 0.0);
    if (edge_ == EdgeMode::reflect) {
      g0[0] = 0.0;
      return g0;
    }
    if (!unit_ || unitSigma_ != sigma) {
      unit_ = march(sigma, nullptr, 1.0);
      unitSigma_ = sigma;
    }
    const auto& g1 = *unit_;
    const std::size_t top = at(1, N_ - 1);
    double c;
    if (edge_ == EdgeMode::shared) {
      // corner closure: (A0 - sigma) c - A0 G(1, N-1) = rhs_c
      const double a0 = 3 * cond_[0] / mass_[0];
      c = (rhs[0] + a0 * g0[top]) / (a0 - sigma - a0 * g1[top]);
    } else {
      c = g0[top] / (1.0 - g1[top]);
    }
    for (std::size_t k = 1; k < size_; ++k) g0[k] += c * g1[k];
    g0[0] = c;
    return g0;
  }

  // edge value used for normalisation
  double edge_value(const std::vector<double>& g) const {
    return edge_ == EdgeMode::reflect ? g[at(1, N_ - 1)] : g[0];
  }

 private:
  double transport_rate(int i, int j) const {
    const double a = x_[i], g1 = x_[j], g0 = x_[j - 1];
    if (j >= 2) {
      const double tau =
          2 * std::pow(std::sin(a / 2), 2) * std::log(std::sin(g1 / 2) / std::sin(g0 / 2)) + 0.5 * std::sin(a) * (g1 - g0);
      return 1.0 / tau;
    }
    // first row: the travel time to gamma = 0 is infinite; use the rate that is
    // exact for the corner profile 1 - cardy(a/(a+g))
    const double m = a / (a + g1);
    const double dpsi = boost::math::ibeta_derivative(1.0 / 3, 1.0 / 3, m) * a / ((a + g1) * (a + g1));
    const double speed = std::abs(cot((a + g1) / 2) - cot(a / 2));
    return speed * dpsi / (cardy_tail(a, g1) - cardy_tail(a, g0));
  }

  // rows in increasing gamma; row j only sees row j-1 through the upwind term and the ghost
  std::vector<double> march(double sigma, const std::vector<double>* rhs, double edge) const {
    std::vector<double> g(size_, 0.0);
    std::vector<double> lo, di, up, d;
    for (int j = 1; j <= N_ - 1; ++j) {
      const int n = N_ - j;
      lo.assign(n, 0.0);
      di.assign(n, 0.0);
      up.assign(n, 0.0);
      d.assign(n, 0.0);
      for (int i = 1; i <= n; ++i) {
        const std::size_t k = at(i, j);
        const double ap = 3 * cond_[i] / mass_[i], am = 3 * cond_[i - 1] / mass_[i], t = rate_[k];
        const double below = j >= 2 ? g[at(i, j - 1)] : 0.0;
        double diag = ap + am + t - sigma, rhsv = t * below + (rhs ? (*rhs)[k] : 0.0);
        double l = -am, u = -ap;
        if (i == 1) {
          if (edge_ == EdgeMode::reflect) diag -= am;
          else rhsv += am * edge;
          l = 0.0;
        }
        if (i == n) {
          // Neumann in gamma on the hypotenuse: ghost (i+1, j) equals (i+1, j-1)
          rhsv += ap * (j >= 2 ? g[at(i + 1, j - 1)] : 0.0);
          u = 0.0;
        }
        lo[i - 1] = l;
        di[i - 1] = diag;
        up[i - 1] = u;
        d[i - 1] = rhsv;
      }
      const auto row = thomas(lo, di, up, d);
      std::copy(row.begin(), row.end(), g.begin() + std::ptrdiff_t(offset_[j]));
    }
    return g;
  }

  int N_;
  EdgeMode edge_;
  std::vector<double> x_, cond_, mass_, rate_;
  std::vector<std::size_t> offset_;
  std::size_t size_ = 0;
  std::optional<std::vector<double>> unit_;
  double unitSigma_ = 0.0;
};

double interior_sum(const std::vector<double>& v) { return std::accumulate(v.begin() + 1, v.end(), 0.0); }

// ---------------------------------------------------------------- backbone, (alpha, beta)

// smooth cutoff of the corner correction in s = alpha + gamma
struct Cutoff {
  double s0 = kPi / 2, s1 = kPi;
  // derivative order d = 0, 1, 2
  double operator()(double s, int d) const {
    if (s <= s0) return d == 0 ? 1.0 : 0.0;
    if (s >= s1) return 0.0;
    const double w = s1 - s0, u = (s - s0) / w;
    if (d == 0) return 1 - u * u * u * (10 - 15 * u + 6 * u * u);
    if (d == 1) return -30 * u * u * (1 - u) * (1 - u) / w;
    return -60 * u * (1 - u) * (1 - 2 * u) / (w * w);
  }
};

// Phi = (1 - cardy(a/(a+g))) * cutoff(a+g) and the backbone operator applied to it
std::pair<double, double> corner_term(double a, double g, const Cutoff& chi) {
  const double s = a + g;
  if (g <= 0.0 || s >= chi.s1) return {0.0, 0.0};
  static const double b13 = boost::math::beta(1.0 / 3, 1.0 / 3);
  const double m = a / s;
  const double f = boost::math::ibeta(1.0 / 3, 1.0 / 3, m);
  const double f1 = std::pow(m * (1 - m), -2.0 / 3) / b13;
  const double f2 = f1 * (-2.0 / 3) * (1 - 2 * m) / (m * (1 - m));
  const double ma = g / (s * s), mg = -a / (s * s), maa = -2 * g / (s * s * s);
  const double psi = 1 - f, pa = -f1 * ma, paa = -f2 * ma * ma - f1 * maa, pg = -f1 * mg;
  const double c0 = chi(s, 0), c1 = chi(s, 1), c2 = chi(s, 2);
  const double fa = pa * c0 + psi * c1, faa = paa * c0 + 2 * pa * c1 + psi * c2, fg = pg * c0 + psi * c1;
  return {psi * c0, 3 * faa + fa * cot(a / 2) + (cot(s / 2) - cot(a / 2)) * fg};
}

struct SymmetricSystem {
  int N = 0;
  double h = 0.0;
  std::vector<int> id;  // (i, k) -> unknown, -1 outside
  std::vector<double> phi;
  Eigen::SparseMatrix<double> A, M;

  int at(int i, int k) const { return id[std::size_t(i) * (N + 1) + k]; }
};

SymmetricSystem build_symmetric(int N) {
  SymmetricSystem s;
  s.N = N;
  s.h = kTwoPi / N;
  const double h = s.h;
  s.id.assign(std::size_t(N + 1) * (N + 1), -1);
  int n = 1;  // 0: edge value
  for (int i = 1; i <= N; ++i)
    for (int k = 0; i + k <= N - 1; ++k) s.id[std::size_t(i) * (N + 1) + k] = n++;
  s.phi.assign(n, 0.0);
  const Cutoff chi;
  std::vector<Eigen::Triplet<double>> ta, tm;
  auto couple = [&](int row, int i, int k, double rate) {
    ta.emplace_back(row, row, rate);
    if (k < 0) k = -k;  // Neumann at beta = 0
    if (i == 0) {
      // alpha = 0 edge: the shared value, minus what the corner term already carries
      ta.emplace_back(row, 0, -rate * (1.0 - chi(kTwoPi - k * h, 0)));
      return;
    }
    if (i + k >= N) return;  // Dirichlet on the hypotenuse
    ta.emplace_back(row, s.at(i, k), -rate);
  };
  auto sg = [](double x) { return std::abs(x) < 1e-8 ? 1 - x / 2 : x / std::expm1(x); };
  const double diff = 3 / (h * h);
  for (int i = 1; i <= N; ++i)
    for (int k = 0; i + k <= N - 1; ++k) {
      const int r = s.at(i, k);
      const double al = i * h, be = k * h;
      // 3 (d_a - d_b)^2 along the anti-diagonal with Scharfetter-Gummel weights
      auto drift = [](double a, double b) { return 0.5 * (cot(a / 2) - cot(b / 2)); };
      couple(r, i + 1, k - 1, diff * sg(-drift(al + h / 2, be - h / 2) * h / 3));
      couple(r, i - 1, k + 1, diff * sg(drift(al - h / 2, be + h / 2) * h / 3));
      // the remaining drift points along (1, 1); upwind toward the hypotenuse with a
      // factor that is exact for the gamma^{1/3} profile there
      const int m = N - (i + k);
      const double fit = (1.0 / 3) * std::pow(m, -2.0 / 3) / (std::cbrt(double(m)) - std::cbrt(double(m - 1)));
      const double v = 0.5 * (cot(al / 2) + (k == 0 ? cot(h / 4) : cot(be / 2)));
      couple(r, i + 1, k, v * fit / h);
      couple(r, i, k + 1, v * fit / h);
      const auto [p, lp] = corner_term(al, kTwoPi - (i + k) * h, chi);
      s.phi[r] = p;
      ta.emplace_back(r, 0, -lp);
    }
  const double cond0 = 1 / sine_power_head(h, -2.0 / 3), mass0 = sine_power_head(h / 2, 2.0 / 3);
  couple(0, 1, 0, 3 * cond0 / mass0);
  for (int r = 0; r < n; ++r) {
    tm.emplace_back(r, r, 1.0);
    if (r > 0 && s.phi[r] != 0.0) tm.emplace_back(r, 0, s.phi[r]);
  }
  s.A.resize(n, n);
  s.M.resize(n, n);
  s.A.setFromTriplets(ta.begin(), ta.end());
  s.M.setFromTriplets(tm.begin(), tm.end());
  return s;
}

std::vector<int> sorted_meshes(std::vector<int> meshes, int minimum) {
  std::sort(meshes.begin(), meshes.end());
  meshes.erase(std::unique(meshes.begin(), meshes.end()), meshes.end());
  require(meshes.size() >= 2, "at least two distinct mesh sizes are needed");
  require(meshes.front() >= minimum, "mesh size below " + std::to_string(minimum));
  return meshes;
}

}  // namespace

// ---------------------------------------------------------------- closed forms

Rational::Rational(long long n, long long d) {
  require(d != 0, "zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const long long g = std::gcd(n, d);
  num = g ? n / g : 0;
  den = g ? d / g : 1;
}

std::string to_string(const Rational& r) {
  return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
}

Rational lambda_closed_form(const Rational& kappa) {
  require(kappa.num > 0, "kappa must be positive");
  // (p^2/q^2 - 16) / (32 p/q) = (p^2 - 16 q^2) / (32 p q)
  const __int128 p = kappa.num, q = kappa.den;
  __int128 a = p * p - 16 * q * q, b = 32 * p * q;
  __int128 x = a < 0 ? -a : a, y = b;
  while (y) {
    const __int128 t = x % y;
    x = y;
    y = t;
  }
  a /= x;
  b /= x;
  constexpr auto lim = __int128(std::numeric_limits<long long>::max());
  if (a > lim || -a > lim || b > lim) throw PreconditionError("rational kappa too large for exact arithmetic");
  return Rational(static_cast<long long>(a), static_cast<long long>(b));
}

double lambda_closed_form(double kappa) {
  require(kappa > 0.0 && std::isfinite(kappa), "kappa must be positive");
  return (kappa * kappa - 16.0) / (32.0 * kappa);
}

double analytic_eigenfunction(double kappa, double theta) {
  require(kappa > 4.0, "the eigenfunction sin(theta/4)^q needs q = (kappa-4)/kappa > 0");
  require(theta >= 0.0 && theta <= kTwoPi, "theta outside [0, 2pi]");
  return std::pow(std::sin(theta / 4), (kappa - 4.0) / kappa);
}

std::string to_string(EigenMethod m) { return m == EigenMethod::directEigen ? "directEigen" : "timeDecay"; }

EigenMethod parse_eigen_method(const std::string& text) {
  if (text == "directEigen") return EigenMethod::directEigen;
  if (text == "timeDecay") return EigenMethod::timeDecay;
  throw PreconditionError("unknown eigen method '" + text + "'");
}

std::string to_string(EdgeMode m) {
  switch (m) {
    case EdgeMode::shared: return "shared";
    case EdgeMode::corner: return "corner";
    case EdgeMode::reflect: return "reflect";
  }
  return "?";
}

EdgeMode parse_edge_mode(const std::string& text) {
  if (text == "shared") return EdgeMode::shared;
  if (text == "corner") return EdgeMode::corner;
  if (text == "reflect") return EdgeMode::reflect;
  throw PreconditionError("unknown edge mode '" + text + "'");
}

// ---------------------------------------------------------------- extrapolation

Extrapolation richardson(const std::vector<MeshLambda>& trace, double assumedOrder, double maxOrderDeviation,
                         double noiseFloor) {
  require(trace.size() >= 2, "extrapolation needs two meshes");
  require(assumedOrder > 0.0, "assumed order must be positive");
  require(noiseFloor >= 0.0, "noise floor must be nonnegative");
  Extrapolation e;
  e.assumedOrder = assumedOrder;
  const auto& f = trace.back();
  const auto& c = trace[trace.size() - 2];
  std::string history;
  for (const auto& m : trace) history += " " + std::to_string(m.mesh) + ":" + std::to_string(m.lambda);
  auto refuse = [&](const std::string& why) {
    e.refused = true;
    e.reason = why + ";" + history;
    return e;
  };

  e.cauchy = true;
  for (std::size_t k = 2; k < trace.size(); ++k)
    if (std::abs(trace[k].lambda - trace[k - 1].lambda) >= std::abs(trace[k - 1].lambda - trace[k - 2].lambda))
      e.cauchy = false;
  const double diff = std::abs(f.lambda - c.lambda);
  e.finestError = diff / (std::pow(c.h / f.h, assumedOrder) - 1.0);
  if (diff <= noiseFloor) {
    // converged to solver precision: nothing to extrapolate, no order to observe
    e.cauchy = true;
    e.value = f.lambda;
    e.meshError = e.finestError = diff;
    e.reason = "finest mesh difference below the noise floor";
    return e;
  }
  if (!e.cauchy) return refuse("mesh sequence is not Cauchy under refinement");

  if (trace.size() >= 3) {
    const auto& a = trace[trace.size() - 3];
    const double d1 = a.lambda - c.lambda, d2 = c.lambda - f.lambda;
    if (d1 * d2 <= 0.0) return refuse("mesh differences change sign");
    // (h1^p - h2^p) / (h2^p - h3^p) = d1 / d2, solved for p
    auto g = [&](double p) {
      return (std::pow(a.h, p) - std::pow(c.h, p)) / (std::pow(c.h, p) - std::pow(f.h, p)) - d1 / d2;
    };
    double lo = 0.01, hi = 12.0;
    if (g(lo) * g(hi) > 0.0) return refuse("observed order outside (0.01, 12)");
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(lo) * g(mid) <= 0.0 ? hi : lo) = mid;
    }
    e.observedOrder = 0.5 * (lo + hi);
    e.finestError = diff / (std::pow(c.h / f.h, e.observedOrder) - 1.0);
    if (std::abs(e.observedOrder - assumedOrder) > maxOrderDeviation)
      return refuse("observed order " + std::to_string(e.observedOrder) + " deviates from assumed " +
                    std::to_string(assumedOrder));
  }
  const double r = std::pow(c.h / f.h, assumedOrder);
  e.value = f.lambda + (f.lambda - c.lambda) / (r - 1.0);
  e.meshError = std::abs(e.value - f.lambda);
  return e;
}

// ---------------------------------------------------------------- 1D

EigenResult solve_eigen_1d(double kappa, int n, const Eigen1dOptions& options) {
  require(kappa > 4.0, "the 1D problem needs kappa > 4 (0 is not reached otherwise)");
  require(n >= 16, "n must be at least 16");
  require(options.levels >= 2, "at least two refinement levels");
  require(options.timeStep > 0.0 && options.tol > 0.0, "timeStep and tol must be positive");
  std::vector<int> meshes{n};
  for (int l = 1; l < options.levels; ++l) meshes.insert(meshes.begin(), (meshes.front() + 1) / 2 - 1);
  require(meshes.front() >= 16, "n too small for the requested levels");

  EigenResult out;
  out.method = options.method;
  for (int m : meshes) {
    const Operator1d op(kappa, m);
    const auto pair = leading_pair_1d(op, options);
    out.meshTrace.push_back({m, op.h, pair.lambda});
    if (m == n) {
      out.residual = pair.residual;
      out.iterations = pair.iterations;
      out.x.resize(op.size());
      for (std::size_t k = 0; k < op.size(); ++k) out.x[k] = (double(k) + 1) * op.h;
      out.eigenfunction = pair.u;
    }
  }
  // differences below 1e-9 relative are solver noise
  out.extrapolation = richardson(out.meshTrace, 2.0, 0.5, 1e-9 * std::abs(out.meshTrace.back().lambda));
  out.lambda = out.extrapolation.value;
  return out;
}

double eigen1d_residual(double kappa, int n, double margin) {
  require(kappa > 4.0 && n >= 16, "kappa > 4 and n >= 16 required");
  const Operator1d op(kappa, n);
  std::vector<double> H(op.size());
  for (std::size_t k = 0; k < H.size(); ++k) H[k] = analytic_eigenfunction(kappa, std::min(kTwoPi, (double(k) + 1) * op.h));
  const auto kh = op.apply(H);
  const double lambda = lambda_closed_form(kappa);
  double r = 0.0;
  for (std::size_t k = 0; k < H.size(); ++k) {
    const double theta = (double(k) + 1) * op.h;
    if (theta < margin || theta > kTwoPi - margin) continue;
    r = std::max(r, std::abs(kh[k] / op.mass[k] - lambda * H[k]));
  }
  return r;
}

Parabolic1d evolve_parabolic_1d(double kappa, const std::vector<double>& initial, double tEnd, int n, double dtStep,
                                double transient) {
  require(kappa > 4.0 && n >= 16, "kappa > 4 and n >= 16 required");
  require(initial.size() == std::size_t(n) + 2, "initial must hold n + 2 node values");
  require(initial.front() == 0.0, "initial must vanish at theta = 0");
  require(std::all_of(initial.begin(), initial.end(), [](double v) { return v >= 0.0 && std::isfinite(v); }),
          "initial must be nonnegative");
  require(tEnd > 0.0 && dtStep > 0.0 && dtStep <= tEnd, "need 0 < dtStep <= tEnd");
  const Operator1d op(kappa, n);
  const double lambda = lambda_closed_form(kappa);
  std::vector<double> u(initial.begin() + 1, initial.end());
  const auto steps = long(std::llround(tEnd / dtStep));
  const double dt = tEnd / double(steps);

  Parabolic1d out;
  out.theta.resize(op.size() + 1);
  for (std::size_t k = 0; k < out.theta.size(); ++k) out.theta[k] = double(k) * op.h;
  out.theta.back() = kTwoPi;
  auto norm = [&] { return std::sqrt(op.mdot(u, u)); };
  out.times.push_back(0.0);
  out.norms.push_back(norm());
  out.ratioMin = std::numeric_limits<double>::infinity();
  out.ratioMax = 0.0;
  std::vector<double> H(op.size());
  for (std::size_t k = 0; k < H.size(); ++k) H[k] = analytic_eigenfunction(kappa, out.theta[k + 1]);

  for (long s = 1; s <= steps; ++s) {
    std::vector<double> rhs(op.size());
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = op.mass[k] * u[k] / dt;
    u = op.solve(1.0 / dt, rhs);
    const double t = double(s) * dt, nu = norm();
    if (!std::isfinite(nu) || nu > out.norms.back() * (1 + 1e-12))
      throw NumericalError("solution norm grew at t = " + std::to_string(t));
    out.times.push_back(t);
    out.norms.push_back(nu);
    if (t >= transient && nu > 0.0)
      for (std::size_t k = 0; k < u.size(); ++k) {
        const double ratio = u[k] / (H[k] * std::exp(-lambda * t));
        out.ratioMin = std::min(out.ratioMin, ratio);
        out.ratioMax = std::max(out.ratioMax, ratio);
      }
  }
  out.values.assign(1, 0.0);
  out.values.insert(out.values.end(), u.begin(), u.end());
  if (out.ratioMax == 0.0) out.ratioMin = 0.0;

  // log-derivative of the norm over the final fifth of the run
  if (out.norms.back() == 0.0) {
    out.decayRate = kNaN;
    return out;
  }
  std::vector<std::pair<double, double>> window;
  const double t0 = 0.8 * tEnd;
  for (std::size_t k = 0; k < out.times.size(); ++k)
    if (out.times[k] >= t0) window.emplace_back(out.times[k], out.norms[k]);
  if (window.size() < 2) window.assign({{out.times[out.times.size() - 2], out.norms[out.norms.size() - 2]},
                                        {out.times.back(), out.norms.back()}});
  out.decayRate = -fit_log_linear(window).slope;
  return out;
}

// ---------------------------------------------------------------- backbone

namespace {

struct Leading {
  double lambda = 0.0;
  std::vector<double> v;
  double residual = 0.0;
  int iterations = 0;
};

// power iteration on (A - sigma)^{-1}; Solve(sigma, rhs), Sum(v) > 0 for the Perron vector
template <class Solve, class Sum>
Leading leading_mode(Solve&& solve, Sum&& sum, std::size_t size, const BackboneOptions& o) {
  const bool decay = o.method == EigenMethod::timeDecay;
  const double sigma = decay ? -1.0 / o.timeStep : 0.0;
  std::vector<double> v(size, 1.0);
  double lambda = 0.0;
  for (int it = 1; it <= o.maxIter; ++it) {
    auto rhs = v;
    if (decay)
      for (auto& r : rhs) r /= o.timeStep;
    auto w = solve(sigma, rhs);
    const double sv = sum(v);
    const double ratio = sum(w) / sv;  // 1/(lambda - sigma), scaled by 1/dt for decay
    const double est = decay ? (1.0 / ratio - 1.0) / o.timeStep : 1.0 / ratio;
    const double s = sum(w);
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericalError("backbone iteration lost positivity");
    double res = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      w[k] /= s;
      res = std::max(res, std::abs(w[k] - v[k] / sv));
      scale = std::max(scale, std::abs(w[k]));
    }
    v = std::move(w);
    const bool done = std::abs(est - lambda) <= o.tol * std::abs(est);
    lambda = est;
    if (done) return {lambda, v, res / scale, it};
    if (it == o.maxIter)
      throw NumericalError("backbone iteration did not converge, residual " + std::to_string(res / scale));
  }
  return {};
}

}  // namespace

EigenResult solve_backbone_2d(const std::vector<int>& meshSizes, const BackboneOptions& options) {
  const auto meshes = sorted_meshes(meshSizes, 8);
  require(options.grading >= 1.0, "grading must be at least 1");
  require(options.timeStep > 0.0 && options.tol > 0.0, "timeStep and tol must be positive");
  EigenResult out;
  out.method = options.method;
  for (int N : meshes) {
    Backbone2d op(N, options.edge, options.grading);
    auto solve = [&](double sigma, const std::vector<double>& rhs) { return op.solve(sigma, rhs); };
    auto lead = leading_mode(solve, interior_sum, op.size(), options);
    out.meshTrace.push_back({N, kTwoPi / N, lead.lambda});
    if (N != meshes.back()) continue;
    out.residual = lead.residual;
    out.iterations = lead.iterations;
    const double c = op.edge_value(lead.v);
    const auto& x = op.grid();
    out.x.assign(1, 0.0);
    out.y.assign(1, kTwoPi);
    out.eigenfunction.assign(1, 1.0);
    for (int j = 1; j <= N - 1; ++j)
      for (int i = 1; i <= N - j; ++i) {
        out.x.push_back(x[i]);
        out.y.push_back(x[j]);
        out.eigenfunction.push_back(lead.v[op.at(i, j)] / c);
      }
  }
  out.extrapolation = richardson(out.meshTrace, options.assumedOrder);
  out.lambda = out.extrapolation.value;
  return out;
}

EigenResult solve_backbone_symmetric(const std::vector<int>& meshSizes, const BackboneOptions& options) {
  const auto meshes = sorted_meshes(meshSizes, 8);
  require(options.edge == EdgeMode::shared, "the symmetric form implements the shared edge only");
  require(options.timeStep > 0.0 && options.tol > 0.0, "timeStep and tol must be positive");
  EigenResult out;
  out.method = options.method;
  for (int N : meshes) {
    const auto sys = build_symmetric(N);
    const auto n = std::size_t(sys.A.rows());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    double factored = std::numeric_limits<double>::quiet_NaN();
    // (A - sigma M) w = M v
    auto solve = [&](double sigma, const std::vector<double>& rhs) {
      if (!(factored == sigma)) {
        Eigen::SparseMatrix<double> shifted = sys.A - sigma * sys.M;
        lu.compute(shifted);
        if (lu.info() != Eigen::Success) throw NumericalError("sparse factorisation failed at N = " + std::to_string(N));
        factored = sigma;
      }
      const Eigen::VectorXd b = sys.M * Eigen::Map<const Eigen::VectorXd>(rhs.data(), Eigen::Index(rhs.size()));
      const Eigen::VectorXd w = lu.solve(b);
      return std::vector<double>(w.data(), w.data() + w.size());
    };
    // the edge value is the natural positive functional here
    auto edge = [](const std::vector<double>& v) { return v[0]; };
    auto lead = leading_mode(solve, edge, n, options);
    out.meshTrace.push_back({N, sys.h, lead.lambda});
    if (N != meshes.back()) continue;
    out.residual = lead.residual;
    out.iterations = lead.iterations;
    const double c = lead.v[0];
    out.x.assign(1, 0.0);
    out.y.assign(1, 0.0);
    out.eigenfunction.assign(1, 1.0);
    for (int i = 1; i <= N; ++i)
      for (int k = 0; i + k <= N - 1; ++k) {
        const int r = sys.at(i, k);
        out.x.push_back(i * sys.h);
        out.y.push_back(k * sys.h);
        out.eigenfunction.push_back(lead.v[r] / c + sys.phi[r]);
      }
  }
  out.extrapolation = richardson(out.meshTrace, options.assumedOrder);
  out.lambda = out.extrapolation.value;
  return out;
}

double cardy_profile_deviation(const EigenResult& r, double sLo, double sHi) {
  require(sLo >= 0.0 && sHi > sLo, "need 0 <= sLo < sHi");
  double worst = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < r.eigenfunction.size(); ++k) {
    const double a = r.x[k], g = r.y[k], s = a + g;
    if (a <= 0.0 || g <= 0.0 || s < sLo || s > sHi) continue;
    any = true;
    worst = std::max(worst, std::abs(r.eigenfunction[k] - cardy_tail(a, g)));
  }
  require(any, "no nodes in the requested slice");
  return worst;
}

// ---------------------------------------------------------------- Cardy

double cardy_formula(double m) {
  require(m >= 0.0 && m <= 1.0, "m outside [0, 1]");
  // Gamma(2/3)/(Gamma(1/3)Gamma(4/3)) m^{1/3} 2F1(1/3, 2/3; 4/3; m) = I_m(1/3, 1/3)
  return boost::math::ibeta(1.0 / 3, 1.0 / 3, m);
}

double cardy_rectangle(double aspect) {
  require(aspect > 0.0 && std::isfinite(aspect), "aspect ratio must be positive");
  // crossings the long way and the short way are complementary
  if (aspect < 1.0) return 1.0 - cardy_rectangle(1.0 / aspect);
  // the cross-ratio of the rectangle's corners is k(Q)^2 = (theta2/theta3)^4 at nome Q = e^{-pi W/H}
  const double Q = std::exp(-std::numbers::pi * aspect);
  double t2 = 0.0, t3 = 1.0;
  for (int n = 0; n < 12; ++n) {
    t2 += std::pow(Q, n * (n + 1));
    if (n > 0) t3 += 2 * std::pow(Q, n * n);
  }
  t2 *= 2 * std::pow(Q, 0.25);
  return cardy_formula(std::min(1.0, std::pow(t2 / t3, 4)));
}

}  // namespace critlab
