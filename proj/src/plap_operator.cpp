#include "plap/plap_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "plap/errors.hpp"

namespace plap {

double critical_exponent(double p, int N) {
  if (p < N) return N * p / (N - p);
  return std::numeric_limits<double>::infinity();
}

double ExponentParams::critical_exponent() const { return plap::critical_exponent(p, N); }

void ExponentParams::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidParams("p must be > 1");
  if (!(q >= 1.0)) throw InvalidParams("q must be >= 1");
  if (!(q < critical_exponent()))
    throw InvalidParams("q must be below the critical exponent p* = " +
                        std::to_string(critical_exponent()));
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParams("lambda must be > 0");
  if (N < 1 || N > 3) throw InvalidParams("N must be in {1,2,3}");
  if (!(eps_reg >= 0.0 && eps_reg <= 1e-6)) throw InvalidParams("eps_reg must lie in [0, 1e-6]");
}

namespace {

void check_params(const GridFunction& u, const ExponentParams& params) {
  params.validate();
  if (params.N != u.mesh().dimension())
    throw InvalidParams("params.N does not match the mesh dimension");
}

}  // namespace

double signed_power(double t, double q) {
  if (t == 0.0) return 0.0;
  if (q == 2.0) return t;
  if (q == 1.0) return t > 0.0 ? 1.0 : -1.0;
  return std::copysign(std::pow(std::abs(t), q - 1.0), t);
}

EnergyReport energy(const GridFunction& u, const ExponentParams& params) {
  check_params(u, params);
  EnergyReport r;
  r.gradient_term = gradient_power_integral(u, params.p) / params.p;
  r.source_term = params.lambda * power_integral(u, params.q) / params.q;
  r.energy = r.gradient_term - r.source_term;
  return r;
}

void flux_load(const GridFunction& u, double p, double eps_reg, std::vector<double>& out) {
  const auto& m = u.mesh();
  out.assign(m.size(), 0.0);
  const int nv = m.vertices_per_cell();
  const double eps2 = eps_reg * eps_reg;
  for (const auto& c : m.cells()) {
    const auto g = m.gradient(c, u.values());
    const double g2 = g[0] * g[0] + g[1] * g[1];
    double a;
    if (p == 2.0) {
      a = 1.0;
    } else {
      const double s = g2 + eps2;
      if (s == 0.0) continue;
      a = std::pow(s, 0.5 * (p - 2.0));
    }
    const double scale = c.weight * a;
    for (int j = 0; j < nv; ++j) {
      out[c.node[j]] += scale * (g[0] * c.grad_coeff[j][0] + g[1] * c.grad_coeff[j][1]);
    }
  }
}

void flux_rounding(const GridFunction& u, double p, double eps_reg, std::vector<double>& out) {
  const auto& m = u.mesh();
  out.assign(m.size(), 0.0);
  const int nv = m.vertices_per_cell();
  const double eps2 = eps_reg * eps_reg;
  constexpr double ulp = std::numeric_limits<double>::epsilon();
  for (const auto& c : m.cells()) {
    const auto g = m.gradient(c, u.values());
    const double s = g[0] * g[0] + g[1] * g[1] + eps2;
    // Largest slope of the (regularized) flux and its value.
    double slope = 1.0, a = 1.0;
    if (p != 2.0) {
      if (s == 0.0) continue;
      a = std::pow(s, 0.5 * (p - 2.0));
      slope = a * std::max(1.0, p - 1.0);
    }
    // Gradient perturbation from one ulp in each nodal value.
    double dg = 0.0;
    for (int j = 0; j < nv; ++j) {
      dg += std::abs(u[c.node[j]]) * std::hypot(c.grad_coeff[j][0], c.grad_coeff[j][1]);
    }
    dg *= ulp;
    const double gnorm = std::sqrt(g[0] * g[0] + g[1] * g[1]);
    for (int j = 0; j < nv; ++j) {
      const double gj = std::hypot(c.grad_coeff[j][0], c.grad_coeff[j][1]);
      out[c.node[j]] += c.weight * gj * (slope * dg + ulp * a * gnorm);
    }
  }
}

GridFunction weak_residual(const GridFunction& u, const ExponentParams& params) {
  check_params(u, params);
  std::vector<double> r;
  flux_load(u, params.p, params.eps_reg, r);
  const auto& m = u.mesh();
  const auto w = m.weights();
  for (auto i : m.interior_nodes()) r[i] -= params.lambda * w[i] * signed_power(u[i], params.q);
  for (auto i : m.boundary_nodes()) r[i] = 0.0;
  return GridFunction(u.mesh_ptr(), std::move(r));
}

double relative_residual(const GridFunction& u, const ExponentParams& params) {
  const auto r = weak_residual(u, params);
  std::vector<double> floor;
  flux_rounding(u, params.p, params.eps_reg, floor);
  const auto& m = u.mesh();
  const auto w = m.weights();
  double rmax = 0.0, load = 0.0;
  for (auto i : m.interior_nodes()) {
    rmax = std::max(rmax, std::abs(r[i]) - floor[i]);
    load = std::max(load, params.lambda * w[i] * std::abs(signed_power(u[i], params.q)));
  }
  return load > 0.0 ? rmax / load : rmax;
}

double rayleigh(const GridFunction& u, double p, double q) {
  if (!(p > 1.0) || !(q >= 1.0)) throw InvalidParams("rayleigh requires p > 1 and q >= 1");
  // Evaluated on u / sup|u|: R is 0-homogeneous, and the division makes
  // R(2^k u) == R(u) bit for bit.
  const double top = sup_norm(u).value;
  if (!(top > 0.0)) throw NumericalError("rayleigh quotient of the zero function");
  GridFunction v = u;
  for (auto& x : v.values()) x /= top;
  const double denom = power_integral(v, q);
  return gradient_power_integral(v, p) / std::pow(denom, p / q);
}

double nehari_gap(const GridFunction& u, const ExponentParams& params) {
  return gradient_power_integral(u, params.p) - params.lambda * power_integral(u, params.q);
}

}  // namespace plap
