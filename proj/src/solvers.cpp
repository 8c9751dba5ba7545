#include "plap/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plap/errors.hpp"

namespace plap {

namespace {

SolverConfig inner_config(const SolverConfig& cfg) {
  SolverConfig inner = cfg;
  inner.observer = nullptr;
  // Inner solves must be tighter than the outer fixed-point test.
  inner.tol = 0.1 * cfg.tol;
  inner.max_iter = std::max(cfg.max_iter, 200);
  return inner;
}

GridFunction constant_field(const MeshPtr& mesh, double value) {
  GridFunction f(mesh);
  for (auto& v : f.values()) v = value;
  return f;
}

double sup_difference(const GridFunction& a, const GridFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

bool interior_positive(const GridFunction& u) {
  const auto nodes = u.mesh().interior_nodes();
  return std::all_of(nodes.begin(), nodes.end(), [&](std::size_t i) { return u[i] > 0.0; });
}

void clip_negative(GridFunction& u) {
  for (auto& v : u.values()) v = std::max(v, 0.0);
}

ExponentParams make_params(const MeshPtr& mesh, double p, double q, double lambda, double eps_reg) {
  ExponentParams params;
  params.p = p;
  params.q = q;
  params.lambda = lambda;
  params.N = mesh->dimension();
  params.eps_reg = eps_reg;
  return params;
}

// Once the fixed point has settled, stop when five consecutive residuals fail
// to set a new minimum. Slow linear contraction keeps setting minima; rounding
// noise does not.
struct ResidualFloor {
  double best = std::numeric_limits<double>::infinity();
  int flat = 0;
  bool reached(double r) {
    if (r < best * (1.0 - 1e-4)) {
      best = r;
      flat = 0;
      return false;
    }
    return ++flat >= 5;
  }
};

}  // namespace

std::pair<GridFunction, SolveReport> solve_plaplace(const MeshPtr& mesh, double p,
                                                    const GridFunction& f, const SolverConfig& cfg) {
  PLaplaceSolver solver(mesh, p, cfg);
  return solver.solve(f);
}

std::pair<GridFunction, SolveReport> torsion(const MeshPtr& mesh, double p, const SolverConfig& cfg) {
  return solve_plaplace(mesh, p, constant_field(mesh, 1.0), cfg);
}

std::pair<GridFunction, SolveReport> solve_sublinear(const MeshPtr& mesh, const ExponentParams& params,
                                                     const SolverConfig& cfg) {
  params.validate();
  cfg.validate();
  if (params.N != mesh->dimension()) throw InvalidParams("params.N does not match the mesh dimension");
  if (!(params.q < params.p)) throw InvalidParams("solve_sublinear requires 1 <= q < p");
  const double p = params.p, q = params.q;

  PLaplaceSolver solver(mesh, p, inner_config(cfg));
  auto [phi, phi_report] = solver.solve(constant_field(mesh, 1.0));
  const double phi_max = sup_norm(phi).value;

  // Iterate on the gauge-equivalent problem with lambda near lambda_p, where
  // the solution is of unit size, and map back by u = c u~ at the end. This
  // keeps gradients far above eps_reg when lambda^{1/(p-q)} is extreme.
  const double lambda = rayleigh(phi, p, p);
  const double gauge = std::pow(params.lambda / lambda, 1.0 / (p - q));
  ExponentParams normalized = params;
  normalized.lambda = lambda;

  // Super-solution: sup of u_0 equals the a-priori bound m with
  // m^{p-q} = lambda ||phi||^{p-1}.
  const double m = std::pow(lambda * std::pow(phi_max, p - 1.0), 1.0 / (p - q));
  GridFunction u = phi * std::pow(lambda * std::pow(m, q - 1.0), 1.0 / (p - 1.0));

  SolveReport rep;
  GridFunction f(mesh);
  int it = 0;
  bool fixed = false;
  ResidualFloor floor;
  double res = relative_residual(u, normalized);
  if (cfg.observer) cfg.observer(0, u * gauge);
  while (it < cfg.max_iter) {
    ++it;
    for (std::size_t i = 0; i < u.size(); ++i) f[i] = lambda * signed_power(std::max(u[i], 0.0), q);
    auto [next, inner] = solver.solve(f, &u);
    const double change = sup_difference(next, u);
    const double scale = sup_norm(u).value;
    u = std::move(next);
    if (cfg.observer) cfg.observer(it, u * gauge);
    fixed = change <= cfg.tol * scale;
    if (fixed) {
      res = relative_residual(u, normalized);
      if (res <= cfg.tol || floor.reached(res)) break;
    }
  }
  if (!fixed) res = relative_residual(u, normalized);
  u *= gauge;
  rep.positive = interior_positive(u);

  rep.iterations = it;
  rep.residual = res;
  rep.energy = energy(u, params).energy;
  rep.converged = fixed && res <= cfg.tol;
  return {std::move(u), std::move(rep)};
}

RayleighMinimum min_rayleigh(const MeshPtr& mesh, double p, double q, const SolverConfig& cfg) {
  cfg.validate();
  if (!(p > 1.0)) throw InvalidParams("p must be > 1");
  if (!(q >= 1.0) || !(q < critical_exponent(p, mesh->dimension())))
    throw InvalidParams("q must lie in [1, p*)");

  PLaplaceSolver solver(mesh, p, inner_config(cfg));
  auto [t, t_report] = solver.solve(constant_field(mesh, 1.0));
  GridFunction u = t * (1.0 / lp_norm(t, q));
  double R = rayleigh(u, p, q);

  SolveReport rep;
  rep.energy_history.push_back(R);
  if (cfg.observer) cfg.observer(0, u);
  GridFunction f(mesh);
  int it = 0;
  bool converged = false;
  ResidualFloor floor;
  while (it < cfg.max_iter) {
    ++it;
    // Inverse-power step: solve -Delta_p t = u^{q-1}, then renormalize.
    for (std::size_t i = 0; i < u.size(); ++i) f[i] = signed_power(std::max(u[i], 0.0), q);
    auto [next_t, inner] = solver.solve(f, &t);
    t = std::move(next_t);
    GridFunction cand = t;
    clip_negative(cand);
    cand *= 1.0 / lp_norm(cand, q);
    double Rc = rayleigh(cand, p, q);

    // Backtrack toward the current iterate if the quotient went up by more
    // than its own rounding (R is summed over every cell).
    if (Rc > R * (1.0 + 1e-12)) {
      const GridFunction full = cand;
      double alpha = 1.0;
      while (Rc > R && alpha > 1e-8) {
        alpha *= cfg.shrink;
        cand = u;
        for (std::size_t i = 0; i < u.size(); ++i) cand[i] += alpha * (full[i] - u[i]);
        clip_negative(cand);
        cand *= 1.0 / lp_norm(cand, q);
        Rc = rayleigh(cand, p, q);
      }
    }
    const double change = sup_difference(cand, u);
    u = std::move(cand);
    R = Rc;
    rep.energy_history.push_back(R);
    if (cfg.observer) cfg.observer(it, u);
    converged = change <= cfg.tol * sup_norm(u).value;
    if (converged) {
      const double res = relative_residual(u, make_params(mesh, p, q, R, cfg.eps_reg));
      if (res <= cfg.tol || floor.reached(res)) break;
    }
  }

  RayleighMinimum out;
  out.lambda_q = R;
  const auto params = make_params(mesh, p, q, R, cfg.eps_reg);
  rep.iterations = it;
  rep.residual = relative_residual(u, params);
  rep.energy = R;
  rep.converged = converged && rep.residual <= cfg.tol;
  rep.positive = interior_positive(u);
  out.w = std::move(u);
  out.report = std::move(rep);
  return out;
}

std::pair<GridFunction, SolveReport> solve_superlinear(const MeshPtr& mesh, const ExponentParams& params,
                                                       const SolverConfig& cfg) {
  params.validate();
  if (params.N != mesh->dimension()) throw InvalidParams("params.N does not match the mesh dimension");
  if (!(params.q > params.p)) throw InvalidParams("solve_superlinear requires p < q < p*");
  auto rm = min_rayleigh(mesh, params.p, params.q, cfg);
  const double c = std::pow(rm.lambda_q / params.lambda, 1.0 / (params.q - params.p));
  GridFunction u = rm.w * c;
  // The residual is reported for the normalized pair (w_q, lambda_q); it is
  // invariant under the gauge map up to the eps_reg regularization.
  SolveReport rep = std::move(rm.report);
  rep.energy = energy(u, params).energy;
  rep.converged = rep.converged && rep.residual <= cfg.tol;
  rep.positive = interior_positive(u);
  return {std::move(u), std::move(rep)};
}

std::pair<GridFunction, SolveReport> solve_lane_emden(const MeshPtr& mesh, const ExponentParams& params,
                                                      const SolverConfig& cfg) {
  if (params.q == params.p)
    throw InvalidParams("q = p is the eigenvalue problem; use first_eigenpair");
  if (params.q < params.p) return solve_sublinear(mesh, params, cfg);
  return solve_superlinear(mesh, params, cfg);
}

Eigenpair first_eigenpair(const MeshPtr& mesh, double p, const SolverConfig& cfg) {
  auto rm = min_rayleigh(mesh, p, p, cfg);
  Eigenpair ep;
  ep.e_p = rm.w * (1.0 / sup_norm(rm.w).value);
  ep.lambda_p = rayleigh(ep.e_p, p, p);
  ep.report = std::move(rm.report);
  return ep;
}

EigenEstimate eigen_extract(const GridFunction& u, double lambda, double p, double q, double s) {
  if (std::isnan(s) || s < 1.0) throw InvalidParams("norm index s must lie in [1, inf]");
  const double norm = lp_norm(u, s);
  if (!(norm > 0.0)) throw NumericalError("eigen_extract of the zero function");
  EigenEstimate est;
  est.mu = lambda * std::pow(norm, q - p);
  est.U = u * (1.0 / norm);
  est.s = s;
  est.lambda = lambda;
  est.q = q;
  return est;
}

}  // namespace plap
