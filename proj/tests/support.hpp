#pragma once

#include <cmath>
#include <numbers>

#include "plap/domain_mesh.hpp"
#include "plap/plap_operator.hpp"

namespace plap::test {

inline constexpr double kPi = std::numbers::pi;

inline MeshPtr unit_interval(int n) { return build_mesh(DomainSpec::interval(0.0, 1.0, n)); }
inline MeshPtr unit_square(int n) { return build_mesh(DomainSpec::rectangle(1.0, 1.0, n)); }

inline GridFunction sine(const MeshPtr& m) {
  const bool planar = m->coordinate_dim() == 2;
  return GridFunction::interpolate(m, [planar](double x, double y) {
    return planar ? std::sin(kPi * x) * std::sin(kPi * y) : std::sin(kPi * x);
  });
}

inline ExponentParams exponents(double p, double q, double lambda, int N = 1, double eps_reg = 1e-10) {
  ExponentParams e;
  e.p = p;
  e.q = q;
  e.lambda = lambda;
  e.N = N;
  e.eps_reg = eps_reg;
  return e;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace plap::test
