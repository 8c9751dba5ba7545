#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace plap {

enum class DomainKind { interval, rectangle, radial_ball };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Volume of the unit ball in R^N, N in {1, 2, 3}.
double unit_ball_volume(int N);

/// Model domain and its resolution.
///
/// interval: (a, b), N = 1.
/// rectangle: (0, lx) x (0, ly), N = 2.
/// radial_ball: ball of radius R in R^N (N in {1,2,3}) reduced to the radial
/// coordinate r in [0, R]; only radially symmetric fields are represented.
struct DomainSpec {
  DomainKind kind = DomainKind::interval;
  double a = 0.0;
  double b = 1.0;
  double lx = 1.0;
  double ly = 1.0;
  double radius = 1.0;
  int dimension = 1;
  int resolution = 9;  // nodes per axis

  static DomainSpec interval(double a, double b, int n);
  static DomainSpec rectangle(double lx, double ly, int n);
  static DomainSpec ball(double radius, int N, int n);

  void validate() const;
  double measure() const;
};

/// Simplex cell with constant gradient: grad u = sum_j grad_coeff[j] * u[node[j]].
/// Segment cells use two vertices and only the x component.
struct Cell {
  std::array<std::size_t, 3> node{};
  std::array<std::array<double, 2>, 3> grad_coeff{};
  double weight = 0.0;  // measure, including the radial r^{N-1} factor
};

class Mesh {
 public:
  explicit Mesh(const DomainSpec& spec);

  const DomainSpec& spec() const { return spec_; }
  std::size_t size() const { return x_.size(); }
  int dimension() const { return spec_.dimension; }
  /// Number of stored coordinates (1 for interval/radial, 2 for rectangle).
  int coordinate_dim() const { return coord_dim_; }
  int vertices_per_cell() const { return coord_dim_ == 1 ? 2 : 3; }
  double measure() const { return spec_.measure(); }

  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const Cell> cells() const { return cells_; }
  std::span<const std::size_t> interior_nodes() const { return interior_; }
  std::span<const std::size_t> boundary_nodes() const { return boundary_; }
  bool is_boundary(std::size_t i) const { return on_boundary_[i] != 0; }

  /// Cell gradient of nodal values.
  std::array<double, 2> gradient(const Cell& c, std::span<const double> u) const;

 private:
  void build_interval();
  void build_rectangle();
  void build_radial();
  void finalize_boundary();

  DomainSpec spec_;
  int coord_dim_ = 1;
  std::vector<double> x_, y_, weights_;
  std::vector<Cell> cells_;
  std::vector<char> on_boundary_;
  std::vector<std::size_t> interior_, boundary_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

MeshPtr build_mesh(const DomainSpec& spec);

/// Nodal scalar field on a mesh.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(MeshPtr mesh);
  GridFunction(MeshPtr mesh, std::vector<double> values);

  /// Samples f at every node. Boundary nodes are set to zero when
  /// `dirichlet` is true.
  static GridFunction interpolate(MeshPtr mesh, const std::function<double(double, double)>& f,
                                  bool dirichlet = true);

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  GridFunction& operator*=(double c);
  GridFunction operator*(double c) const;
  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);

  /// Exactly zero on every boundary node.
  bool is_dirichlet_conforming() const;
  void apply_dirichlet();

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a, const GridFunction& b);

struct SupNorm {
  double value = 0.0;
  std::size_t index = 0;
};

/// (int |u|^s)^{1/s} by nodal quadrature; s = +inf gives the sup norm.
double lp_norm(const GridFunction& u, double s);
/// Max of |u| over nodes; smallest attaining index.
SupNorm sup_norm(const GridFunction& u);
/// (int |grad u|^p)^{1/p} with cell-wise constant gradients.
double grad_lp_norm(const GridFunction& u, double p);
/// sup |u| + max over cells |grad u|.
double c1_norm(const GridFunction& u);

/// int |u|^s dx (no root).
double power_integral(const GridFunction& u, double s);
/// int |grad u|^p dx (no root).
double gradient_power_integral(const GridFunction& u, double p);

/// CSV with header `x[,y],value`, one row per node in lexicographic
/// coordinate order.
void write_csv(std::ostream& os, const GridFunction& u);
void write_csv(const std::string& path, const GridFunction& u);

/// Shortest round-trippable decimal form used for all text artifacts.
std::string format_double(double v);

}  // namespace plap
