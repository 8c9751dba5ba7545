#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "plap/errors.hpp"
#include "plap/solvers.hpp"

namespace plap {

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw InvalidParams("solver tol must be positive");
  if (max_iter < 1) throw InvalidParams("solver max_iter must be >= 1");
  if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidParams("line-search shrink must lie in (0,1)");
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < 0.5))
    throw InvalidParams("sufficient-decrease constant must lie in (0,0.5)");
  if (!(eps_reg >= 0.0 && eps_reg <= 1e-6)) throw InvalidParams("eps_reg must lie in [0, 1e-6]");
}

using SpMat = Eigen::SparseMatrix<double>;
// Relative Newton correction, as a fraction of tol, below which further steps
// cannot move u.
constexpr double kCorrectionTol = 1e-2;
using Vec = Eigen::VectorXd;

struct PLaplaceSolver::Impl {
  std::vector<std::ptrdiff_t> dof;
  std::vector<std::size_t> nodes;
  Eigen::SimplicialLDLT<SpMat> hessian;
  bool hessian_analyzed = false;
  Eigen::SimplicialLDLT<SpMat> laplace;
  bool laplace_ready = false;

  explicit Impl(const Mesh& m) {
    dof.assign(m.size(), -1);
    for (auto i : m.interior_nodes()) {
      dof[i] = static_cast<std::ptrdiff_t>(nodes.size());
      nodes.push_back(i);
    }
  }

  // Cell weights a I + b g g^T; the Laplacian is a = 1, b = 0. For p < 2 the
  // lagged-diffusivity matrix (b = 0) is used: its quadratic model majorizes
  // the energy, while the full Hessian overshoots where grad u is small.
  SpMat assemble(const Mesh& m, std::span<const double> u, double p, double eps, bool laplacian) const {
    std::vector<Eigen::Triplet<double>> trip;
    const int nv = m.vertices_per_cell();
    trip.reserve(m.cells().size() * static_cast<std::size_t>(nv * nv));

    double floor2 = eps * eps;
    if (!laplacian && p > 2.0) {
      double gmax2 = 0.0;
      for (const auto& c : m.cells()) {
        const auto g = m.gradient(c, u);
        gmax2 = std::max(gmax2, g[0] * g[0] + g[1] * g[1]);
      }
      floor2 = std::max(floor2, 1e-16 * gmax2);
      if (floor2 == 0.0) laplacian = true;
    }

    for (const auto& c : m.cells()) {
      double a = 1.0, b = 0.0;
      std::array<double, 2> g{0.0, 0.0};
      if (!laplacian) {
        g = m.gradient(c, u);
        const double s = g[0] * g[0] + g[1] * g[1] + floor2;
        a = std::pow(s, 0.5 * (p - 2.0));
        b = p > 2.0 ? (p - 2.0) * a / s : 0.0;
      }
      for (int j = 0; j < nv; ++j) {
        const auto dj = dof[c.node[j]];
        if (dj < 0) continue;
        const auto& Gj = c.grad_coeff[j];
        const double gj = g[0] * Gj[0] + g[1] * Gj[1];
        for (int l = 0; l < nv; ++l) {
          const auto dl = dof[c.node[l]];
          if (dl < 0) continue;
          const auto& Gl = c.grad_coeff[l];
          const double gl = g[0] * Gl[0] + g[1] * Gl[1];
          const double v = c.weight * (a * (Gj[0] * Gl[0] + Gj[1] * Gl[1]) + b * gj * gl);
          trip.emplace_back(static_cast<int>(dj), static_cast<int>(dl), v);
        }
      }
    }
    SpMat K(static_cast<Eigen::Index>(nodes.size()), static_cast<Eigen::Index>(nodes.size()));
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
  }

  void ensure_laplace(const Mesh& m) {
    if (laplace_ready) return;
    const std::vector<double> zero(m.size(), 0.0);
    laplace.compute(assemble(m, zero, 2.0, 0.0, true));
    if (laplace.info() != Eigen::Success) throw NumericalError("Laplacian factorization failed");
    laplace_ready = true;
  }
};

PLaplaceSolver::PLaplaceSolver(MeshPtr mesh, double p, SolverConfig cfg)
    : mesh_(std::move(mesh)), p_(p), cfg_(std::move(cfg)) {
  if (!mesh_) throw InvalidSpec("solver requires a mesh");
  if (!(p_ > 1.0) || !std::isfinite(p_)) throw InvalidParams("p must be > 1");
  cfg_.validate();
  impl_ = std::make_unique<Impl>(*mesh_);
}

PLaplaceSolver::~PLaplaceSolver() = default;
PLaplaceSolver::PLaplaceSolver(PLaplaceSolver&&) noexcept = default;
PLaplaceSolver& PLaplaceSolver::operator=(PLaplaceSolver&&) noexcept = default;

namespace {

double load_energy(std::span<const double> w, std::span<const double> f, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * f[i] * u[i];
  return s;
}

GridFunction sine_bump(const MeshPtr& mesh) {
  const auto& spec = mesh->spec();
  using std::numbers::pi;
  switch (spec.kind) {
    case DomainKind::interval:
      return GridFunction::interpolate(mesh, [&](double x, double) {
        return std::sin(pi * (x - spec.a) / (spec.b - spec.a));
      });
    case DomainKind::rectangle:
      return GridFunction::interpolate(mesh, [&](double x, double y) {
        return std::sin(pi * x / spec.lx) * std::sin(pi * y / spec.ly);
      });
    case DomainKind::radial_ball:
      return GridFunction::interpolate(mesh, [&](double r, double) {
        return std::cos(0.5 * pi * r / spec.radius);
      });
  }
  return GridFunction(mesh);
}

}  // namespace

std::pair<GridFunction, SolveReport> PLaplaceSolver::solve(const GridFunction& f,
                                                           const GridFunction* initial) {
  const Mesh& m = *mesh_;
  if (f.size() != m.size()) throw InvalidSpec("right-hand side does not match the mesh");
  const auto w = m.weights();
  const auto fv = f.values();
  const std::size_t ndof = impl_->nodes.size();

  Vec load(static_cast<Eigen::Index>(ndof));
  double load_max = 0.0;
  for (std::size_t k = 0; k < ndof; ++k) {
    const auto i = impl_->nodes[k];
    if (fv[i] < 0.0 || !std::isfinite(fv[i])) throw InvalidParams("right-hand side must be finite and >= 0");
    load[static_cast<Eigen::Index>(k)] = w[i] * fv[i];
    load_max = std::max(load_max, load[static_cast<Eigen::Index>(k)]);
  }
  if (load_max == 0.0) throw InvalidParams("right-hand side vanishes at every interior node");

  const double p = p_;
  auto energy_of = [&](const GridFunction& u, double* scale) {
    const double grad = gradient_power_integral(u, p) / p;
    const double src = load_energy(w, fv, u.values());
    if (scale) *scale = std::abs(grad) + std::abs(src);
    return grad - src;
  };

  std::vector<double> flux, floor;
  Vec grad(static_cast<Eigen::Index>(ndof));
  auto residual_of = [&](const GridFunction& u) {
    flux_load(u, p, cfg_.eps_reg, flux);
    flux_rounding(u, p, cfg_.eps_reg, floor);
    double rmax = 0.0;
    for (std::size_t k = 0; k < ndof; ++k) {
      const auto i = impl_->nodes[k];
      const double r = flux[i] - load[static_cast<Eigen::Index>(k)];
      grad[static_cast<Eigen::Index>(k)] = r;
      rmax = std::max(rmax, std::abs(r) - floor[i]);
    }
    return std::max(rmax, 0.0) / load_max;
  };

  // Initial iterate.
  GridFunction u(mesh_);
  if (initial != nullptr) {
    if (initial->size() != m.size()) throw InvalidSpec("initial guess does not match the mesh");
    u = *initial;
    u.apply_dirichlet();
  } else {
    if (cfg_.initial_guess == InitialGuess::torsion) {
      impl_->ensure_laplace(m);
      Vec x = impl_->laplace.solve(load);
      for (std::size_t k = 0; k < ndof; ++k) u[impl_->nodes[k]] = x[static_cast<Eigen::Index>(k)];
    } else {
      u = sine_bump(mesh_);
    }
    // Best multiple along the ray.
    const double G = gradient_power_integral(u, p);
    const double F = load_energy(w, fv, u.values());
    if (G > 0.0 && F > 0.0) u *= std::pow(F / G, 1.0 / (p - 1.0));
  }

  SolveReport rep;
  double scale = 0.0;
  double E = energy_of(u, &scale);
  double res = residual_of(u);
  rep.energy_history.push_back(E);

  const bool linear = (p == 2.0);
  // Energy differences below this (relative to the summed magnitudes) are
  // summation noise; the error of a length-n sum grows like sqrt(n).
  const double roundoff =
      64.0 * std::numeric_limits<double>::epsilon() * std::sqrt(static_cast<double>(m.cells().size()));
  double correction = std::numeric_limits<double>::infinity();
  int it = 0;
  int stalled = 0;
  // Always take one step: outer fixed-point loops pass nearly converged
  // warm starts and would otherwise freeze at the inner tolerance.
  while ((it == 0 || res > cfg_.tol) && it < cfg_.max_iter && stalled < 5) {
    Vec d;
    if (linear) {
      impl_->ensure_laplace(m);
      d = -impl_->laplace.solve(grad);
    } else {
      SpMat H = impl_->assemble(m, u.values(), p, cfg_.eps_reg, false);
      if (!impl_->hessian_analyzed) {
        impl_->hessian.analyzePattern(H);
        impl_->hessian_analyzed = true;
      }
      impl_->hessian.factorize(H);
      if (impl_->hessian.info() == Eigen::Success) d = -impl_->hessian.solve(grad);
    }
    double slope = d.size() > 0 ? grad.dot(d) : 0.0;
    if (!(slope < 0.0) || !d.allFinite()) {
      impl_->ensure_laplace(m);
      d = -impl_->laplace.solve(grad);
      slope = grad.dot(d);
    }
    const double correction_prev = correction;
    correction = d.lpNorm<Eigen::Infinity>() / std::max(sup_norm(u).value, 1e-300);
    ++it;
    if (correction <= kCorrectionTol * cfg_.tol) {
      // Take the tiny step anyway: the residual still sees it through cond(K).
      GridFunction trial = u;
      for (std::size_t k = 0; k < ndof; ++k) trial[impl_->nodes[k]] += d[static_cast<Eigen::Index>(k)];
      const Vec grad_old = grad;
      const double res_trial = residual_of(trial);
      if (res_trial <= res) {
        u = std::move(trial);
        res = res_trial;
        E = energy_of(u, &scale);
        rep.energy_history.push_back(E);
      } else {
        grad = grad_old;
      }
      break;
    }

    const Vec grad_old = grad;
    double alpha = 1.0;
    bool accepted = false;
    GridFunction trial(mesh_);
    while (alpha > 1e-12) {
      trial = u;
      for (std::size_t k = 0; k < ndof; ++k) trial[impl_->nodes[k]] += alpha * d[static_cast<Eigen::Index>(k)];
      double trial_scale = 0.0;
      const double Et = energy_of(trial, &trial_scale);
      if (std::abs(Et - E) <= roundoff * std::max(scale, trial_scale)) {
        // Energy change below rounding. The lagged-diffusivity step still
        // decreases the energy in exact arithmetic; Newton steps must at
        // least shrink the residual.
        accepted = (p < 2.0 && alpha == 1.0) || residual_of(trial) < 0.5 * res;
        grad = grad_old;
      } else {
        accepted = Et <= E + cfg_.sufficient_decrease * alpha * slope;
      }
      if (accepted) {
        u = trial;
        E = Et;
        scale = trial_scale;
        break;
      }
      alpha *= cfg_.shrink;
    }
    if (!accepted) {
      grad = grad_old;
      break;
    }
    const double res_prev = res;
    res = residual_of(u);
    rep.energy_history.push_back(E);
    // Rounding floor: neither the residual nor the correction contracts.
    stalled = (res > 0.9 * res_prev && correction > 0.9 * correction_prev) ? stalled + 1 : 0;
  }

  rep.iterations = it;
  rep.residual = res;
  rep.correction = correction;
  rep.energy = E;
  rep.converged = res <= cfg_.tol;
  rep.positive = std::all_of(impl_->nodes.begin(), impl_->nodes.end(), [&](std::size_t i) { return u[i] > 0.0; });
  return {std::move(u), std::move(rep)};
}

}  // namespace plap
