#pragma once

#include <vector>

namespace plap {

/// Shooting solution on (0, 1), sampled on a uniform grid.
struct ShootingResult {
  double parameter = 0.0;  // lambda (eigen mode) or initial slope (Lane-Emden mode)
  std::vector<double> x;
  std::vector<double> u;
  int bisections = 0;
  double mismatch = 0.0;  // |first zero - 1|

  /// Linear interpolation of the samples.
  double at(double xq) const;
  double sup() const;
};

/// First Dirichlet eigenpair of -(|u'|^{p-2}u')' = lambda |u|^{p-2}u on (0,1)
/// by bisection on lambda in [1, 1e4]. The profile is scaled to sup 1.
ShootingResult shoot_1d_eigen(double p, double tol = 1e-10);

/// Positive solution of -(|u'|^{p-2}u')' = lambda u^{q-1} on (0,1) by
/// bisection on the initial slope in [1e-6, 1e3] (log scale).
ShootingResult shoot_1d_lane_emden(double p, double q, double lambda, double tol = 1e-10);

/// Closed forms for p = 2 on (0,1).
struct ClosedP2 {
  double lambda;       // pi^2
  double ep_l2;        // ||sin(pi x)||_2
  double ep_l1;        // ||sin(pi x)||_1
  double theta;        // 2 e^{-1/2}
  double torsion_sup;  // 1/8
  double derivative;   // pi^2 ln(sqrt(2) e^{-1/2})
  static double e(double x);
  static double torsion(double x);
};

ClosedP2 closed_p2_1d();

}  // namespace plap
