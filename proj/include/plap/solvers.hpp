#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "plap/domain_mesh.hpp"
#include "plap/plap_operator.hpp"

namespace plap {

enum class InitialGuess {
  torsion,    // scaled p = 2 torsion-type solve
  sine_bump,  // product of half-period sines (cosine bump on the ball)
};

struct SolverConfig {
  double tol = 1e-9;
  int max_iter = 10000;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  InitialGuess initial_guess = InitialGuess::torsion;
  double eps_reg = 1e-10;
  /// Called once per outer iteration with the current iterate.
  std::function<void(int, const GridFunction&)> observer;

  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  /// Max-norm weak residual relative to the max load.
  double residual = std::numeric_limits<double>::infinity();
  /// Last Newton correction relative to sup |u| (inner solves only).
  double correction = std::numeric_limits<double>::infinity();
  double energy = 0.0;
  bool converged = false;
  bool positive = false;
  /// Energy after every accepted descent step (descent-based solves only).
  std::vector<double> energy_history;
};

/// Minimizes (1/p) int |grad u|^p - int f u over Dirichlet-conforming fields
/// by damped Newton (regularized Hessian as preconditioner) with Armijo
/// backtracking. Holds the symbolic factorization so repeated solves on the
/// same mesh only refactorize numerically; at p = 2 the factorization is
/// reused as is.
class PLaplaceSolver {
 public:
  PLaplaceSolver(MeshPtr mesh, double p, SolverConfig cfg = {});
  ~PLaplaceSolver();
  PLaplaceSolver(PLaplaceSolver&&) noexcept;
  PLaplaceSolver& operator=(PLaplaceSolver&&) noexcept;

  std::pair<GridFunction, SolveReport> solve(const GridFunction& f,
                                             const GridFunction* initial = nullptr);

  double p() const { return p_; }
  const MeshPtr& mesh() const { return mesh_; }

 private:
  struct Impl;
  MeshPtr mesh_;
  double p_;
  SolverConfig cfg_;
  std::unique_ptr<Impl> impl_;
};

std::pair<GridFunction, SolveReport> solve_plaplace(const MeshPtr& mesh, double p,
                                                    const GridFunction& f,
                                                    const SolverConfig& cfg = {});

/// p-torsion function: -Delta_p u = 1, u = 0 on the boundary.
std::pair<GridFunction, SolveReport> torsion(const MeshPtr& mesh, double p,
                                             const SolverConfig& cfg = {});

/// Positive solution for 1 <= q < p by monotone iteration
/// u_{k+1} = (-Delta_p)^{-1}(lambda u_k^{q-1}) from a torsion super-solution.
std::pair<GridFunction, SolveReport> solve_sublinear(const MeshPtr& mesh,
                                                     const ExponentParams& params,
                                                     const SolverConfig& cfg = {});

struct RayleighMinimum {
  double lambda_q = 0.0;
  GridFunction w;  // nonnegative, ||w||_q = 1
  SolveReport report;
};

/// Minimizes int |grad u|^p / (int |u|^q)^{p/q} over nonnegative fields.
RayleighMinimum min_rayleigh(const MeshPtr& mesh, double p, double q, const SolverConfig& cfg = {});

/// Ground-state branch for p < q < p*: u = (lambda_q / lambda)^{1/(q-p)} w_q.
std::pair<GridFunction, SolveReport> solve_superlinear(const MeshPtr& mesh,
                                                       const ExponentParams& params,
                                                       const SolverConfig& cfg = {});

/// Dispatches on q < p or q > p; q == p is rejected.
std::pair<GridFunction, SolveReport> solve_lane_emden(const MeshPtr& mesh,
                                                      const ExponentParams& params,
                                                      const SolverConfig& cfg = {});

struct Eigenpair {
  double lambda_p = 0.0;
  GridFunction e_p;  // positive, sup norm 1
  SolveReport report;
};

Eigenpair first_eigenpair(const MeshPtr& mesh, double p, const SolverConfig& cfg = {});

struct EigenEstimate {
  double mu = 0.0;
  GridFunction U;  // u / ||u||_s
  double s = 2.0;
  double lambda = 0.0;
  double q = 0.0;
};

/// mu = lambda ||u||_s^{q-p}, U = u / ||u||_s. s may be +inf.
EigenEstimate eigen_extract(const GridFunction& u, double lambda, double p, double q, double s);

}  // namespace plap
