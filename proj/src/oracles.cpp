#include "plap/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "plap/errors.hpp"

namespace plap {

namespace odeint = boost::numeric::odeint;

double ShootingResult::at(double xq) const {
  if (x.empty()) throw NumericalError("empty shooting profile");
  if (xq <= x.front()) return u.front();
  if (xq >= x.back()) return u.back();
  const auto it = std::upper_bound(x.begin(), x.end(), xq);
  const auto k = static_cast<std::size_t>(it - x.begin());
  const double t = (xq - x[k - 1]) / (x[k] - x[k - 1]);
  return (1.0 - t) * u[k - 1] + t * u[k];
}

double ShootingResult::sup() const {
  double s = 0.0;
  for (double v : u) s = std::max(s, std::abs(v));
  return s;
}

namespace {

using State = std::array<double, 2>;  // (u, w = |u'|^{p-2} u')
constexpr int kSamples = 4097;
constexpr int kMaxBisections = 200;

double signed_pow(double t, double e) { return std::copysign(std::pow(std::abs(t), e), t); }

struct Rhs {
  double p, q, lambda;
  void operator()(const State& y, State& dy, double) const {
    dy[0] = signed_pow(y[1], 1.0 / (p - 1.0));
    dy[1] = y[0] > 0.0 ? -lambda * std::pow(y[0], q - 1.0) : (y[0] < 0.0 ? lambda * std::pow(-y[0], q - 1.0) : 0.0);
  }
};

using Dense = odeint::dense_output_runge_kutta<odeint::controlled_runge_kutta<odeint::runge_kutta_dopri5<State>>>;

Dense make_stepper(double tol) { return odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<State>()); }

// First zero of u in (0, xmax], or +inf.
double first_zero(const Rhs& rhs, double slope, double xmax, double tol) {
  Dense st = make_stepper(tol);
  st.initialize(State{0.0, signed_pow(slope, rhs.p - 1.0)}, 0.0, 1e-4);
  while (st.current_time() < xmax) {
    st.do_step(rhs);
    if (st.current_state()[0] <= 0.0 && st.current_time() > 0.0) {
      double lo = st.previous_time(), hi = st.current_time();
      State y;
      for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
        const double mid = 0.5 * (lo + hi);
        st.calc_state(mid, y);
        (y[0] > 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return std::numeric_limits<double>::infinity();
}

void sample(const Rhs& rhs, double slope, double tol, ShootingResult& out) {
  Dense st = make_stepper(tol);
  st.initialize(State{0.0, signed_pow(slope, rhs.p - 1.0)}, 0.0, 1e-4);
  out.x.resize(kSamples);
  out.u.resize(kSamples);
  State y;
  for (int i = 0; i < kSamples; ++i) {
    const double xi = static_cast<double>(i) / (kSamples - 1);
    while (st.current_time() < xi) st.do_step(rhs);
    st.calc_state(xi, y);
    out.x[i] = xi;
    out.u[i] = y[0];
  }
  out.u.front() = 0.0;
}

void check_positive(const ShootingResult& r) {
  for (std::size_t i = 1; i + 1 < r.u.size(); ++i) {
    if (!(r.u[i] > 0.0)) throw NumericalError("shooting profile is not positive on (0,1)");
  }
}

}  // namespace

ShootingResult shoot_1d_eigen(double p, double tol) {
  if (!(p > 1.0)) throw InvalidParams("p must be > 1");
  if (!(tol > 0.0)) throw InvalidParams("tol must be positive");
  const double ode_tol = tol / 10.0;
  auto zero_at = [&](double lambda) { return first_zero(Rhs{p, p, lambda}, 1.0, 2.0, ode_tol); };

  // The first zero moves toward 0 as lambda grows.
  double lo = 1.0, hi = 1e4;
  if (!(zero_at(lo) > 1.0) || !(zero_at(hi) < 1.0)) throw NumericalError("eigenvalue bracket [1, 1e4] fails");
  ShootingResult out;
  double z = 0.0, mid = 0.0;
  for (out.bisections = 0; out.bisections < kMaxBisections; ++out.bisections) {
    mid = 0.5 * (lo + hi);
    z = zero_at(mid);
    if (std::abs(z - 1.0) <= tol) break;
    (z > 1.0 ? lo : hi) = mid;
  }
  out.parameter = mid;
  out.mismatch = std::abs(z - 1.0);
  if (out.mismatch > tol) throw NumericalError("eigenvalue bisection did not reach tol");
  sample(Rhs{p, p, mid}, 1.0, ode_tol, out);
  const double s = out.sup();
  for (auto& v : out.u) v /= s;
  out.u.back() = 0.0;
  check_positive(out);
  return out;
}

ShootingResult shoot_1d_lane_emden(double p, double q, double lambda, double tol) {
  if (!(p > 1.0)) throw InvalidParams("p must be > 1");
  if (!(q >= 1.0) || q == p) throw InvalidParams("q must be >= 1 and differ from p");
  if (!(lambda > 0.0)) throw InvalidParams("lambda must be > 0");
  if (!(tol > 0.0)) throw InvalidParams("tol must be positive");
  const double ode_tol = tol / 10.0;
  const Rhs rhs{p, q, lambda};
  auto zero_at = [&](double slope) { return first_zero(rhs, slope, 2.0, ode_tol); };

  double lo = std::log(1e-6), hi = std::log(1e3);
  const bool lo_short = zero_at(std::exp(lo)) < 1.0;
  const bool hi_short = zero_at(std::exp(hi)) < 1.0;
  if (lo_short == hi_short) throw NumericalError("no sign change of u(1) in the slope bracket [1e-6, 1e3]");
  ShootingResult out;
  double z = 0.0, mid = 0.0;
  for (out.bisections = 0; out.bisections < kMaxBisections; ++out.bisections) {
    mid = 0.5 * (lo + hi);
    z = zero_at(std::exp(mid));
    if (std::abs(z - 1.0) <= tol) break;
    ((z < 1.0) == lo_short ? lo : hi) = mid;
  }
  out.parameter = std::exp(mid);
  out.mismatch = std::abs(z - 1.0);
  if (out.mismatch > tol) throw NumericalError("slope bisection did not reach tol");
  sample(rhs, out.parameter, ode_tol, out);
  out.u.back() = 0.0;
  check_positive(out);
  return out;
}

double ClosedP2::e(double x) { return std::sin(std::numbers::pi * x); }
double ClosedP2::torsion(double x) { return 0.5 * x * (1.0 - x); }

ClosedP2 closed_p2_1d() {
  using std::numbers::pi;
  ClosedP2 c{};
  c.lambda = pi * pi;
  c.ep_l2 = 1.0 / std::numbers::sqrt2;
  c.ep_l1 = 2.0 / pi;
  c.theta = 2.0 * std::exp(-0.5);
  c.torsion_sup = 0.125;
  c.derivative = pi * pi * std::log(std::numbers::sqrt2 * std::exp(-0.5));
  return c;
}

}  // namespace plap
