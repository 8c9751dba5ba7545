#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "plap/domain_mesh.hpp"
#include "plap/solvers.hpp"

namespace plap {

/// theta_p = exp(int e^p |ln e| / ||e||_p^p) for e >= 0 with sup e = 1.
struct ThetaResult {
  double theta_p = 1.0;
  double integral = 0.0;    // int e^p |ln e| dx
  double normalizer = 0.0;  // ||e||_p^p
};

/// Renormalizes e_p to sup 1 first when needed.
ThetaResult theta(const GridFunction& e_p, double p);

/// lambda_p ln(theta_p ||e_p||_p): slope of q -> lambda_q at q = p.
double lambda_derivative_closed(double lambda_p, double theta_p, double ep_lp_norm);

/// lambda ||u||_q^q / ||u||_p^p.
double capital_lambda(const GridFunction& u, double lambda, double p, double q);

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SweepRow {
  double q = kNaN;
  double lambda = kNaN;
  double sup_norm = kNaN;
  double l1_norm = kNaN;
  double lq_norm = kNaN;
  double lp_norm = kNaN;
  double mu = kNaN;
  double capital_lambda = kNaN;
  double lambda_q = kNaN;  // min of R_q on the mesh, equal to R_q(u_q)
  double residual = kNaN;
  int iterations = 0;
  bool converged = false;
  bool positive = false;
  std::string error;      // non-empty when the solve threw
  GridFunction solution;  // empty when the solve threw
};

struct SweepResult {
  DomainSpec spec;
  double p = 2.0;
  double lambda = 1.0;
  double s = std::numeric_limits<double>::infinity();
  std::vector<SweepRow> rows;  // ascending q, never q = p

  bool all_converged() const;
};

/// p * {0.9, 0.95, 0.975, 1.025, 1.05, 1.1} restricted to [1, p*).
std::vector<double> default_q_grid(double p, int N);

/// Solves the Lane-Emden problem for every q of the grid (at most `threads`
/// at a time; 0 means hardware concurrency) and records norms, mu with norm
/// index s, capital lambda and lambda_q. A failed solve is recorded in its
/// row and the sweep continues.
SweepResult q_sweep(const MeshPtr& mesh, double p, double lambda, std::vector<double> q_grid, double s,
                    const SolverConfig& cfg = {}, int threads = 0);

inline constexpr const char* kSweepCsvHeader =
    "q,lambda,sup_norm,l1_norm,lq_norm,lp_norm,mu,capital_lambda,lambda_q,residual,iterations,converged";

void write_sweep_csv(std::ostream& os, const SweepResult& sweep);
void write_sweep_csv(const std::string& path, const SweepResult& sweep);
/// Reads rows back (metadata fields are left at their defaults). Throws
/// SchemaError when the header or a row does not match.
SweepResult read_sweep_csv(std::istream& is);
SweepResult read_sweep_csv(const std::string& path);

/// Central difference (lambda_{p+d} - lambda_{p-d}) / (2d) at the smallest
/// symmetric pair d.
double fit_derivative(const SweepResult& sweep, double p);

/// Least-squares slope of ln|capital_lambda / mu - 1| against ln|q - p|.
double fit_rate(const SweepResult& sweep, double p);

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  double slack = 0.0;  // rhs - lhs
};

/// satisfied iff slack >= -1e-8 max(1, |rhs|).
BoundCheck make_check(std::string name, double lhs, double rhs);

struct BoundContext {
  GridFunction e_p;    // first eigenfunction, sup 1
  GridFunction phi_p;  // torsion function
  double lambda_p = 0.0;
};

/// |Omega|^{-1} int e_p^p for q < p, 1 for q > p.
double sup_lower_constant(const GridFunction& e_p, double p, double q);

/// Emits, in order:
///   sup_lower_bound        A <= ||u||_inf            (resonant lambda only)
///   sublinear_sup_bound    ||u||^{p-q} <= lambda ||phi||^{p-1}  (q < p)
///   torsion_eigen_bound    ||phi||^{1-p} <= lambda_p
///   capital_lambda_bound   lambda_p <= capital lambda
/// Resonance means |lambda - lambda_p| <= 1e-12 lambda_p.
std::vector<BoundCheck> check_bounds(const GridFunction& u, double lambda, double p, double q,
                                     const BoundContext& ctx);

/// ||u||_inf <= (lambda^{N/p} K_{N,p} ||u||_1)^{p/(p + N(p-q))}. Throws
/// RangeError unless 1 <= q < p(N+1)/N.
BoundCheck check_linfty(const GridFunction& u, double lambda, double p, double q, int N);

struct Constants {
  double C = 0.0;      // N omega_N^{p/N} (p/(p-1))^{p-1}
  double K = 0.0;      // C^{-N/p} ((p+N(p-1))/p)^{(p+N(p-1))/p}
  double omega = 0.0;  // volume of the unit ball
};

Constants constants(int N, double p);

/// Torsion function of the ball of radius R in R^N at radius r.
double ball_torsion_closed(double R, int N, double p, double r);

/// int |grad u|^p - int |grad v|^{p-2} grad v . grad(u^p / v^{p-1}), with v
/// floored at 1e-12 in the quotient. Nonnegative for smooth u >= 0, v > 0.
double picone_gap(const GridFunction& u, const GridFunction& v, double p);

/// max over [0,1] of |t^p - t^q| = (1/p)(p/q)^{q/(q-p)} |q-p|.
double uq_bound_value(double p, double q);
/// Its first-order form |q-p| / (p e).
double uq_bound_limit(double p, double q);

}  // namespace plap
