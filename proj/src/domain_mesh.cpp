#include "plap/domain_mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>

#include "plap/errors.hpp"

namespace plap {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::interval: return "interval";
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::radial_ball: return "radial_ball";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "interval") return DomainKind::interval;
  if (name == "rectangle") return DomainKind::rectangle;
  if (name == "radial_ball" || name == "ball") return DomainKind::radial_ball;
  throw InvalidSpec("unknown domain kind '" + name + "'");
}

double unit_ball_volume(int N) {
  switch (N) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: throw InvalidSpec("unsupported dimension N=" + std::to_string(N));
  }
}

DomainSpec DomainSpec::interval(double a, double b, int n) {
  DomainSpec s;
  s.kind = DomainKind::interval;
  s.a = a;
  s.b = b;
  s.dimension = 1;
  s.resolution = n;
  return s;
}

DomainSpec DomainSpec::rectangle(double lx, double ly, int n) {
  DomainSpec s;
  s.kind = DomainKind::rectangle;
  s.lx = lx;
  s.ly = ly;
  s.dimension = 2;
  s.resolution = n;
  return s;
}

DomainSpec DomainSpec::ball(double radius, int N, int n) {
  DomainSpec s;
  s.kind = DomainKind::radial_ball;
  s.radius = radius;
  s.dimension = N;
  s.resolution = n;
  return s;
}

void DomainSpec::validate() const {
  if (resolution < 8) throw InvalidSpec("resolution must be at least 8 nodes per axis");
  switch (kind) {
    case DomainKind::interval:
      if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
        throw InvalidSpec("interval requires a < b");
      if (dimension != 1) throw InvalidSpec("interval requires N = 1");
      break;
    case DomainKind::rectangle:
      if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
        throw InvalidSpec("rectangle extents must be positive");
      if (dimension != 2) throw InvalidSpec("rectangle requires N = 2");
      break;
    case DomainKind::radial_ball:
      if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidSpec("ball radius must be positive");
      if (dimension < 1 || dimension > 3) throw InvalidSpec("ball requires N in {1,2,3}");
      break;
  }
}

double DomainSpec::measure() const {
  switch (kind) {
    case DomainKind::interval: return b - a;
    case DomainKind::rectangle: return lx * ly;
    case DomainKind::radial_ball: return unit_ball_volume(dimension) * std::pow(radius, dimension);
  }
  return 0.0;
}

Mesh::Mesh(const DomainSpec& spec) : spec_(spec) {
  spec_.validate();
  switch (spec_.kind) {
    case DomainKind::interval: build_interval(); break;
    case DomainKind::rectangle: build_rectangle(); break;
    case DomainKind::radial_ball: build_radial(); break;
  }
  finalize_boundary();
}

void Mesh::build_interval() {
  coord_dim_ = 1;
  const auto n = static_cast<std::size_t>(spec_.resolution);
  const double h = (spec_.b - spec_.a) / static_cast<double>(n - 1);
  x_.resize(n);
  weights_.assign(n, h);
  on_boundary_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) x_[i] = spec_.a + h * static_cast<double>(i);
  x_[n - 1] = spec_.b;
  weights_.front() = weights_.back() = 0.5 * h;
  on_boundary_.front() = on_boundary_.back() = 1;
  cells_.reserve(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    Cell c;
    c.node = {i, i + 1, 0};
    c.grad_coeff[0] = {-1.0 / h, 0.0};
    c.grad_coeff[1] = {1.0 / h, 0.0};
    c.weight = h;
    cells_.push_back(c);
  }
}

void Mesh::build_rectangle() {
  coord_dim_ = 2;
  const auto n = static_cast<std::size_t>(spec_.resolution);
  const double hx = spec_.lx / static_cast<double>(n - 1);
  const double hy = spec_.ly / static_cast<double>(n - 1);
  x_.resize(n * n);
  y_.resize(n * n);
  weights_.assign(n * n, 0.0);
  on_boundary_.assign(n * n, 0);
  auto id = [n](std::size_t ix, std::size_t iy) { return ix * n + iy; };
  for (std::size_t ix = 0; ix < n; ++ix) {
    for (std::size_t iy = 0; iy < n; ++iy) {
      const auto k = id(ix, iy);
      x_[k] = ix + 1 == n ? spec_.lx : hx * static_cast<double>(ix);
      y_[k] = iy + 1 == n ? spec_.ly : hy * static_cast<double>(iy);
      on_boundary_[k] = (ix == 0 || iy == 0 || ix + 1 == n || iy + 1 == n) ? 1 : 0;
    }
  }

  auto add_triangle = [&](std::size_t v0, std::size_t v1, std::size_t v2) {
    const double x0 = x_[v0], y0 = y_[v0];
    const double x1 = x_[v1], y1 = y_[v1];
    const double x2 = x_[v2], y2 = y_[v2];
    const double det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
    Cell c;
    c.node = {v0, v1, v2};
    c.grad_coeff[0] = {(y1 - y2) / det, (x2 - x1) / det};
    c.grad_coeff[1] = {(y2 - y0) / det, (x0 - x2) / det};
    c.grad_coeff[2] = {(y0 - y1) / det, (x1 - x0) / det};
    c.weight = 0.5 * std::abs(det);
    for (auto v : c.node) weights_[v] += c.weight / 3.0;
    cells_.push_back(c);
  };

  // Every grid square is split along its (ix,iy)-(ix+1,iy+1) diagonal.
  cells_.reserve(2 * (n - 1) * (n - 1));
  for (std::size_t ix = 0; ix + 1 < n; ++ix) {
    for (std::size_t iy = 0; iy + 1 < n; ++iy) {
      add_triangle(id(ix, iy), id(ix + 1, iy), id(ix + 1, iy + 1));
      add_triangle(id(ix, iy), id(ix + 1, iy + 1), id(ix, iy + 1));
    }
  }
}

namespace {

// int_alpha^beta r^m (r - alpha) dr
double ramp_up_moment(double alpha, double beta, int m) {
  const double m1 = m + 1.0, m2 = m + 2.0;
  return (std::pow(beta, m2) - std::pow(alpha, m2)) / m2 -
         alpha * (std::pow(beta, m1) - std::pow(alpha, m1)) / m1;
}

// int_beta^gamma r^m (gamma - r) dr
double ramp_down_moment(double beta, double gamma, int m) {
  const double m1 = m + 1.0, m2 = m + 2.0;
  return gamma * (std::pow(gamma, m1) - std::pow(beta, m1)) / m1 -
         (std::pow(gamma, m2) - std::pow(beta, m2)) / m2;
}

}  // namespace

void Mesh::build_radial() {
  coord_dim_ = 1;
  const auto n = static_cast<std::size_t>(spec_.resolution);
  const int N = spec_.dimension;
  const double R = spec_.radius;
  const double h = R / static_cast<double>(n - 1);
  const double sphere = N * unit_ball_volume(N);  // surface area of the unit sphere
  x_.resize(n);
  weights_.assign(n, 0.0);
  on_boundary_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) x_[i] = h * static_cast<double>(i);
  x_[n - 1] = R;
  on_boundary_[n - 1] = 1;

  // Exact integrals of hat functions against r^{N-1}.
  for (std::size_t i = 0; i < n; ++i) {
    double w = 0.0;
    if (i > 0) w += ramp_up_moment(x_[i - 1], x_[i], N - 1) / (x_[i] - x_[i - 1]);
    if (i + 1 < n) w += ramp_down_moment(x_[i], x_[i + 1], N - 1) / (x_[i + 1] - x_[i]);
    weights_[i] = sphere * w;
  }
  cells_.reserve(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double len = x_[i + 1] - x_[i];
    Cell c;
    c.node = {i, i + 1, 0};
    c.grad_coeff[0] = {-1.0 / len, 0.0};
    c.grad_coeff[1] = {1.0 / len, 0.0};
    c.weight = sphere * (std::pow(x_[i + 1], N) - std::pow(x_[i], N)) / N;
    cells_.push_back(c);
  }
}

void Mesh::finalize_boundary() {
  for (std::size_t i = 0; i < on_boundary_.size(); ++i) {
    (on_boundary_[i] ? boundary_ : interior_).push_back(i);
  }
}

std::array<double, 2> Mesh::gradient(const Cell& c, std::span<const double> u) const {
  std::array<double, 2> g{0.0, 0.0};
  const int nv = vertices_per_cell();
  for (int j = 0; j < nv; ++j) {
    const double uj = u[c.node[j]];
    g[0] += c.grad_coeff[j][0] * uj;
    g[1] += c.grad_coeff[j][1] * uj;
  }
  return g;
}

MeshPtr build_mesh(const DomainSpec& spec) { return std::make_shared<const Mesh>(spec); }

GridFunction::GridFunction(MeshPtr mesh) : mesh_(std::move(mesh)) {
  if (!mesh_) throw InvalidSpec("grid function requires a mesh");
  values_.assign(mesh_->size(), 0.0);
}

GridFunction::GridFunction(MeshPtr mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw InvalidSpec("grid function requires a mesh");
  if (values_.size() != mesh_->size())
    throw InvalidSpec("value count does not match mesh node count");
}

GridFunction GridFunction::interpolate(MeshPtr mesh,
                                       const std::function<double(double, double)>& f,
                                       bool dirichlet) {
  GridFunction u(std::move(mesh));
  const auto& m = u.mesh();
  const auto xs = m.x();
  const auto ys = m.y();
  for (std::size_t i = 0; i < m.size(); ++i) {
    u.values_[i] = f(xs[i], ys.empty() ? 0.0 : ys[i]);
  }
  if (dirichlet) u.apply_dirichlet();
  return u;
}

GridFunction& GridFunction::operator*=(double c) {
  for (auto& v : values_) v *= c;
  return *this;
}

GridFunction GridFunction::operator*(double c) const {
  GridFunction r = *this;
  r *= c;
  return r;
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  if (other.size() != size()) throw InvalidSpec("grid function size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  if (other.size() != size()) throw InvalidSpec("grid function size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  GridFunction r = a;
  r += b;
  return r;
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  GridFunction r = a;
  r -= b;
  return r;
}

bool GridFunction::is_dirichlet_conforming() const {
  return std::all_of(mesh_->boundary_nodes().begin(), mesh_->boundary_nodes().end(),
                     [&](std::size_t i) { return values_[i] == 0.0; });
}

void GridFunction::apply_dirichlet() {
  for (auto i : mesh_->boundary_nodes()) values_[i] = 0.0;
}

double power_integral(const GridFunction& u, double s) {
  const auto w = u.mesh().weights();
  const auto v = u.values();
  double sum = 0.0;
  if (s == 1.0) {
    for (std::size_t i = 0; i < v.size(); ++i) sum += w[i] * std::abs(v[i]);
  } else if (s == 2.0) {
    for (std::size_t i = 0; i < v.size(); ++i) sum += w[i] * v[i] * v[i];
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] != 0.0) sum += w[i] * std::pow(std::abs(v[i]), s);
    }
  }
  return sum;
}

double gradient_power_integral(const GridFunction& u, double p) {
  const auto& m = u.mesh();
  double sum = 0.0;
  for (const auto& c : m.cells()) {
    const auto g = m.gradient(c, u.values());
    const double g2 = g[0] * g[0] + g[1] * g[1];
    if (g2 > 0.0) sum += c.weight * (p == 2.0 ? g2 : std::pow(g2, 0.5 * p));
  }
  return sum;
}

double lp_norm(const GridFunction& u, double s) {
  if (std::isnan(s) || s < 1.0) throw std::invalid_argument("lp_norm requires s >= 1");
  if (std::isinf(s)) return sup_norm(u).value;
  return std::pow(power_integral(u, s), 1.0 / s);
}

SupNorm sup_norm(const GridFunction& u) {
  SupNorm r;
  const auto v = u.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > r.value) {
      r.value = a;
      r.index = i;
    }
  }
  return r;
}

double grad_lp_norm(const GridFunction& u, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("grad_lp_norm requires p > 1");
  return std::pow(gradient_power_integral(u, p), 1.0 / p);
}

double c1_norm(const GridFunction& u) {
  const auto& m = u.mesh();
  double gmax = 0.0;
  for (const auto& c : m.cells()) {
    const auto g = m.gradient(c, u.values());
    gmax = std::max(gmax, std::hypot(g[0], g[1]));
  }
  return sup_norm(u).value + gmax;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const GridFunction& u) {
  const auto& m = u.mesh();
  const bool two_d = m.coordinate_dim() == 2;
  os << (two_d ? "x,y,value\n" : "x,value\n");
  const auto xs = m.x();
  const auto ys = m.y();
  for (std::size_t i = 0; i < m.size(); ++i) {
    os << format_double(xs[i]) << ',';
    if (two_d) os << format_double(ys[i]) << ',';
    os << format_double(u[i]) << '\n';
  }
}

void write_csv(const std::string& path, const GridFunction& u) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(os, u);
}

}  // namespace plap
