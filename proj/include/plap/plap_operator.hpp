#pragma once

#include <limits>
#include <vector>

#include "plap/domain_mesh.hpp"

namespace plap {

/// Exponents and coefficient of -Delta_p u = lambda |u|^{q-2} u in R^N.
struct ExponentParams {
  double p = 2.0;
  double q = 1.0;
  double lambda = 1.0;
  int N = 1;
  double eps_reg = 1e-10;

  /// Sobolev critical exponent Np/(N-p), or +inf when p >= N.
  double critical_exponent() const;
  void validate() const;
};

double critical_exponent(double p, int N);

struct EnergyReport {
  double energy = 0.0;         // gradient_term - source_term
  double gradient_term = 0.0;  // (1/p) int |grad u|^p
  double source_term = 0.0;    // (lambda/q) int |u|^q
};

/// |t|^{q-2} t, extended by 0 at t = 0 (sign(t) for q = 1).
double signed_power(double t, double q);

/// J(u) = (1/p) int |grad u|^p - (lambda/q) int |u|^q.
EnergyReport energy(const GridFunction& u, const ExponentParams& params);

/// r_i = int |grad u|^{p-2} grad u . grad phi_i - lambda int |u|^{q-2} u phi_i
/// at interior nodes, zero at boundary nodes. This is the gradient of
/// `energy` with respect to interior nodal values.
GridFunction weak_residual(const GridFunction& u, const ExponentParams& params);

/// int |grad u|^p / (int |u|^q)^{p/q}.
double rayleigh(const GridFunction& u, double p, double q);

/// int |grad u|^p - lambda int |u|^q.
double nehari_gap(const GridFunction& u, const ExponentParams& params);

/// Discrete -Delta_p u tested against every basis function:
/// out_i = sum over cells of w_c (|g|^2 + eps^2)^{(p-2)/2} g . grad phi_i.
/// Boundary entries are left as assembled (callers mask them).
void flux_load(const GridFunction& u, double p, double eps_reg, std::vector<double>& out);

/// Rounding level of flux_load at each node: the flux change caused by one
/// ulp in the nodal values plus the summation error. Where grad u vanishes
/// and p < 2 this is of order eps_reg^{p-2} ulp(u) / h and can exceed any
/// useful tolerance.
void flux_rounding(const GridFunction& u, double p, double eps_reg, std::vector<double>& out);

/// Max interior |weak_residual| in excess of its rounding level
/// (flux_rounding), relative to the max interior source load
/// lambda w_i |u_i|^{q-1}. Returns the absolute value when the load vanishes.
double relative_residual(const GridFunction& u, const ExponentParams& params);

}  // namespace plap
