#include "plap/asymptotics.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "plap/errors.hpp"
#include "plap/plap_operator.hpp"

namespace plap {

ThetaResult theta(const GridFunction& e_p, double p) {
  if (!(p > 1.0)) throw InvalidParams("p must be > 1");
  const double sup = sup_norm(e_p).value;
  if (!(sup > 0.0)) throw NumericalError("theta of the zero function");
  const double scale = std::abs(sup - 1.0) > 1e-8 ? 1.0 / sup : 1.0;
  const auto w = e_p.mesh().weights();
  ThetaResult r;
  for (std::size_t i = 0; i < e_p.size(); ++i) {
    const double t = e_p[i] * scale;
    if (t < -1e-12) throw InvalidParams("theta requires a nonnegative eigenfunction");
    if (t <= 1e-300) continue;
    const double tp = std::pow(t, p);
    r.integral += w[i] * tp * std::abs(std::log(t));
    r.normalizer += w[i] * tp;
  }
  r.theta_p = std::exp(r.integral / r.normalizer);
  return r;
}

double lambda_derivative_closed(double lambda_p, double theta_p, double ep_lp_norm) {
  if (!(lambda_p > 0.0) || !(theta_p > 0.0) || !(ep_lp_norm > 0.0))
    throw InvalidParams("lambda_p, theta_p and ||e_p||_p must be positive");
  return lambda_p * std::log(theta_p * ep_lp_norm);
}

double capital_lambda(const GridFunction& u, double lambda, double p, double q) {
  const double num = power_integral(u, q);
  const double den = power_integral(u, p);
  if (!(den > 0.0)) throw NumericalError("capital lambda of the zero function");
  return lambda * num / den;
}

bool SweepResult::all_converged() const {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.converged; });
}

std::vector<double> default_q_grid(double p, int N) {
  const double pstar = critical_exponent(p, N);
  std::vector<double> grid;
  for (double f : {0.9, 0.95, 0.975, 1.025, 1.05, 1.1}) {
    const double q = p * f;
    if (q >= 1.0 && q < pstar) grid.push_back(q);
  }
  return grid;
}

namespace {

SweepRow sweep_row(const MeshPtr& mesh, double p, double lambda, double q, double s, const SolverConfig& cfg) {
  SweepRow row;
  row.q = q;
  row.lambda = lambda;
  try {
    ExponentParams params;
    params.p = p;
    params.q = q;
    params.lambda = lambda;
    params.N = mesh->dimension();
    params.eps_reg = cfg.eps_reg;
    auto [u, rep] = solve_lane_emden(mesh, params, cfg);
    row.sup_norm = sup_norm(u).value;
    row.l1_norm = lp_norm(u, 1.0);
    row.lq_norm = lp_norm(u, q);
    row.lp_norm = lp_norm(u, p);
    row.mu = eigen_extract(u, lambda, p, q, s).mu;
    row.capital_lambda = capital_lambda(u, lambda, p, q);
    // u_q is a multiple of the R_q minimizer on both sides of p.
    row.lambda_q = rayleigh(u, p, q);
    row.residual = rep.residual;
    row.iterations = rep.iterations;
    row.converged = rep.converged;
    row.positive = rep.positive;
    row.solution = std::move(u);
  } catch (const std::exception& e) {
    row.error = e.what();
    row.converged = false;
  }
  return row;
}

}  // namespace

SweepResult q_sweep(const MeshPtr& mesh, double p, double lambda, std::vector<double> q_grid, double s,
                    const SolverConfig& cfg, int threads) {
  if (!mesh) throw InvalidSpec("sweep requires a mesh");
  if (!(p > 1.0)) throw InvalidParams("p must be > 1");
  if (!(lambda > 0.0)) throw InvalidParams("lambda must be > 0");
  if (std::isnan(s) || s < 1.0) throw InvalidParams("norm index s must lie in [1, inf]");
  const double pstar = critical_exponent(p, mesh->dimension());
  for (double q : q_grid) {
    if (q == p) throw InvalidParams("q_grid must exclude p");
    if (!(q >= 1.0 && q < pstar)) throw InvalidParams("q_grid values must lie in [1, p*)");
  }
  std::sort(q_grid.begin(), q_grid.end());
  q_grid.erase(std::unique(q_grid.begin(), q_grid.end()), q_grid.end());

  SweepResult out;
  out.spec = mesh->spec();
  out.p = p;
  out.lambda = lambda;
  out.s = s;
  out.rows.resize(q_grid.size());

  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::max<std::size_t>(q_grid.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < q_grid.size();) {
      out.rows[i] = sweep_row(mesh, p, lambda, q_grid[i], s, cfg);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
  os << kSweepCsvHeader << '\n';
  for (const auto& r : sweep.rows) {
    for (double v : {r.q, r.lambda, r.sup_norm, r.l1_norm, r.lq_norm, r.lp_norm, r.mu, r.capital_lambda,
                     r.lambda_q, r.residual}) {
      os << format_double(v) << ',';
    }
    os << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

void write_sweep_csv(const std::string& path, const SweepResult& sweep) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_sweep_csv(os, sweep);
  if (!os) throw std::runtime_error("write failed: " + path);
}

namespace {

double parse_field(const std::string& field, int line) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw SchemaError("line " + std::to_string(line) + ": not a number: '" + field + "'");
  return v;
}

}  // namespace

SweepResult read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw SchemaError("empty sweep CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepCsvHeader) throw SchemaError("sweep CSV header mismatch: '" + line + "'");
  SweepResult out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 12)
      throw SchemaError("line " + std::to_string(lineno) + ": expected 12 fields, got " +
                        std::to_string(fields.size()));
    SweepRow r;
    double* cols[] = {&r.q,      &r.lambda, &r.sup_norm,       &r.l1_norm,  &r.lq_norm,
                      &r.lp_norm, &r.mu,     &r.capital_lambda, &r.lambda_q, &r.residual};
    for (std::size_t k = 0; k < 10; ++k) *cols[k] = parse_field(fields[k], lineno);
    r.iterations = static_cast<int>(parse_field(fields[10], lineno));
    const double conv = parse_field(fields[11], lineno);
    if (conv != 0.0 && conv != 1.0) throw SchemaError("line " + std::to_string(lineno) + ": converged must be 0 or 1");
    r.converged = conv == 1.0;
    out.rows.push_back(std::move(r));
  }
  return out;
}

SweepResult read_sweep_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SchemaError("cannot read " + path);
  return read_sweep_csv(is);
}

double fit_derivative(const SweepResult& sweep, double p) {
  double best_delta = std::numeric_limits<double>::infinity();
  double slope = 0.0;
  for (const auto& lo : sweep.rows) {
    if (!(lo.q < p) || !std::isfinite(lo.lambda_q)) continue;
    const double delta = p - lo.q;
    for (const auto& hi : sweep.rows) {
      if (!(hi.q > p) || !std::isfinite(hi.lambda_q)) continue;
      if (std::abs((hi.q - p) - delta) > 1e-9 * p) continue;
      if (delta < best_delta) {
        best_delta = delta;
        slope = (hi.lambda_q - lo.lambda_q) / (hi.q - lo.q);
      }
    }
  }
  if (!std::isfinite(best_delta)) throw NumericalError("sweep has no symmetric q pair around p");
  return slope;
}

double fit_rate(const SweepResult& sweep, double p) {
  std::vector<double> x, y;
  int below = 0, above = 0;
  for (const auto& r : sweep.rows) {
    if (!std::isfinite(r.capital_lambda) || !std::isfinite(r.mu) || r.q == p) continue;
    const double gap = std::abs(r.capital_lambda / r.mu - 1.0);
    if (!(gap > 0.0)) continue;
    x.push_back(std::log(std::abs(r.q - p)));
    y.push_back(std::log(gap));
    (r.q < p ? below : above)++;
  }
  if (below < 3 && above < 3) throw NumericalError("fit_rate needs 3 rows with nonzero gap on one side of p");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw NumericalError("fit_rate: all rows at the same |q - p|");
  return sxy / sxx;
}

BoundCheck make_check(std::string name, double lhs, double rhs) {
  BoundCheck c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack = rhs - lhs;
  c.satisfied = c.slack >= -1e-8 * std::max(1.0, std::abs(rhs));
  return c;
}

double sup_lower_constant(const GridFunction& e_p, double p, double q) {
  if (q > p) return 1.0;
  return power_integral(e_p, p) / e_p.mesh().measure();
}

std::vector<BoundCheck> check_bounds(const GridFunction& u, double lambda, double p, double q,
                                     const BoundContext& ctx) {
  if (ctx.e_p.size() == 0 || ctx.phi_p.size() == 0 || !(ctx.lambda_p > 0.0))
    throw InvalidParams("bound context needs e_p, phi_p and lambda_p");
  if (ctx.e_p.size() != u.size() || ctx.phi_p.size() != u.size())
    throw InvalidParams("bound context does not match the solution mesh");
  if (q == p) throw InvalidParams("bounds are stated for q != p");

  const double sup = sup_norm(u).value;
  const double phi = sup_norm(ctx.phi_p).value;
  std::vector<BoundCheck> out;
  if (std::abs(lambda - ctx.lambda_p) <= 1e-12 * ctx.lambda_p) {
    out.push_back(make_check("sup_lower_bound", sup_lower_constant(ctx.e_p, p, q), sup));
  }
  if (q < p) {
    out.push_back(make_check("sublinear_sup_bound", std::pow(sup, p - q), lambda * std::pow(phi, p - 1.0)));
  }
  out.push_back(make_check("torsion_eigen_bound", std::pow(phi, 1.0 - p), ctx.lambda_p));
  out.push_back(make_check("capital_lambda_bound", ctx.lambda_p, capital_lambda(u, lambda, p, q)));
  return out;
}

BoundCheck check_linfty(const GridFunction& u, double lambda, double p, double q, int N) {
  if (!(q >= 1.0) || !(q < p * (N + 1.0) / N))
    throw RangeError("sup-norm estimate requires 1 <= q < p(N+1)/N");
  const auto k = constants(N, p);
  const double base = std::pow(lambda, N / p) * k.K * lp_norm(u, 1.0);
  const double rhs = std::pow(base, p / (p + N * (p - q)));
  return make_check("linfty_estimate", sup_norm(u).value, rhs);
}

Constants constants(int N, double p) {
  if (N < 1 || N > 3) throw InvalidParams("constants: N must be 1, 2 or 3");
  if (!(p > 1.0)) throw InvalidParams("constants: p must be > 1");
  Constants c;
  c.omega = unit_ball_volume(N);
  c.C = N * std::pow(c.omega, p / N) * std::pow(p / (p - 1.0), p - 1.0);
  const double e = (p + N * (p - 1.0)) / p;
  c.K = std::pow(c.C, -N / p) * std::pow(e, e);
  return c;
}

double ball_torsion_closed(double R, int N, double p, double r) {
  if (!(R > 0.0) || N < 1 || N > 3 || !(p > 1.0)) throw InvalidParams("ball torsion needs R > 0, N in 1..3, p > 1");
  if (!(r >= 0.0) || r > R) throw RangeError("ball torsion: r must lie in [0, R]");
  const double e = p / (p - 1.0);
  return (p - 1.0) / p * std::pow(N, -1.0 / (p - 1.0)) * (std::pow(R, e) - std::pow(r, e));
}

double picone_gap(const GridFunction& u, const GridFunction& v, double p) {
  if (!(p > 1.0)) throw InvalidParams("p must be > 1");
  if (u.size() != v.size() || &u.mesh() != &v.mesh()) throw InvalidParams("u and v must share a mesh");
  const auto& m = u.mesh();
  for (auto i : m.interior_nodes()) {
    if (!(v[i] > 0.0)) throw InvalidParams("picone_gap: v must be positive at interior nodes");
    if (u[i] < 0.0) throw InvalidParams("picone_gap: u must be nonnegative");
  }
  std::vector<double> z(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    z[i] = std::pow(std::abs(u[i]), p) / std::pow(std::max(v[i], 1e-12), p - 1.0);
  }
  double lhs = 0.0, rhs = 0.0;
  for (const auto& c : m.cells()) {
    const auto gu = m.gradient(c, u.values());
    const auto gv = m.gradient(c, v.values());
    const auto gz = m.gradient(c, z);
    const double nu = std::hypot(gu[0], gu[1]);
    const double nv = std::hypot(gv[0], gv[1]);
    lhs += c.weight * std::pow(nu, p);
    if (nv > 0.0) rhs += c.weight * std::pow(nv, p - 2.0) * (gv[0] * gz[0] + gv[1] * gz[1]);
  }
  return lhs - rhs;
}

double uq_bound_value(double p, double q) {
  if (!(p > 0.0) || !(q > 0.0)) throw InvalidParams("p and q must be positive");
  if (q == p) throw InvalidParams("uq_bound_value requires q != p");
  return std::pow(p / q, q / (q - p)) * std::abs(q - p) / p;
}

double uq_bound_limit(double p, double q) {
  if (!(p > 0.0)) throw InvalidParams("p must be positive");
  return std::abs(q - p) / (p * std::numbers::e);
}

}  // namespace plap
