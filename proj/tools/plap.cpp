// Command-line front end: solve | eigen | sweep | verify | plot.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plap/asymptotics.hpp"
#include "plap/config.hpp"
#include "plap/errors.hpp"
#include "plap/run.hpp"
#include "plap/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace plap;

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<double> p;
  std::vector<double> q;
  std::string lambda;
  std::optional<int> n;
  std::string s;
  std::string domain;
};

void add_problem_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "experiment file (TOML)")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--p", o.p, "exponent p > 1");
  cmd->add_option("--q", o.q, "exponent q (comma-separated list for sweep)")->delimiter(',');
  cmd->add_option("--lambda", o.lambda, "coefficient lambda > 0, or 'resonant'");
  cmd->add_option("--n", o.n, "nodes per axis");
  cmd->add_option("--s", o.s, "norm index for mu: number >= 1 or 'inf'");
  cmd->add_option("--domain", o.domain, "interval | rectangle | radial_ball");
}

double parse_number(const std::string& text, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(std::string(what) + ": not a number: '" + text + "'");
  return v;
}

// Effective config plus the bytes its hash is computed from.
std::pair<ExperimentConfig, std::string> resolve(const Overrides& o, const std::vector<std::string>& argv) {
  std::string text;
  ExperimentConfig cfg;
  if (!o.config.empty()) {
    text = read_file(o.config);
    cfg = parse_config(text, o.config);
  }
  if (!o.domain.empty()) {
    try {
      const auto kind = domain_kind_from_string(o.domain);
      const int n = cfg.domain.resolution;
      if (kind == DomainKind::interval) cfg.domain = DomainSpec::interval(0.0, 1.0, n);
      if (kind == DomainKind::rectangle) cfg.domain = DomainSpec::rectangle(1.0, 1.0, o.n ? *o.n : 128);
      if (kind == DomainKind::radial_ball) cfg.domain = DomainSpec::ball(1.0, cfg.domain.dimension, n);
    } catch (const InvalidSpec& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.n) cfg.domain.resolution = *o.n;
  if (o.p) cfg.p = *o.p;
  if (!o.q.empty()) cfg.q_grid = o.q;
  if (!o.lambda.empty()) {
    if (o.lambda == "resonant") {
      cfg.lambda.reset();
    } else {
      cfg.lambda = parse_number(o.lambda, "--lambda");
    }
  }
  if (!o.s.empty()) cfg.s = o.s == "inf" ? std::numeric_limits<double>::infinity() : parse_number(o.s, "--s");
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.validate();
  text += "\n# command line:";
  for (const auto& a : argv) text += " " + a;
  return {cfg, text};
}

int thread_cap(int configured) {
  const char* env = std::getenv("PLAP_THREADS");
  if (env == nullptr || *env == '\0') return configured;
  int v = 0;
  const std::string s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 1)
    throw ConfigError("PLAP_THREADS must be a positive integer");
  return configured > 0 ? std::min(configured, v) : v;
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

void print_report(const SolveReport& r) {
  std::cout << "iterations " << r.iterations << '\n'
            << "residual " << format_double(r.residual) << '\n'
            << "converged " << (r.converged ? "true" : "false") << '\n';
}

int cmd_solve(const Overrides& o, const std::vector<std::string>& argv) {
  auto [cfg, text] = resolve(o, argv);
  if (cfg.q_grid.size() != 1) throw ConfigError("solve needs exactly one q (--q)");
  const double q = cfg.q_grid.front();
  const auto mesh = build_mesh(cfg.domain);
  double lambda = 0.0;
  if (cfg.resonant()) {
    lambda = first_eigenpair(mesh, cfg.p, cfg.solver).lambda_p;
  } else {
    lambda = *cfg.lambda;
  }
  ExponentParams params;
  params.p = cfg.p;
  params.q = q;
  params.lambda = lambda;
  params.N = mesh->dimension();
  params.eps_reg = cfg.solver.eps_reg;
  const auto [u, rep] = solve_lane_emden(mesh, params, cfg.solver);
  const auto dir = ensure_dir(cfg.output_dir);
  write_csv((dir / "solution.csv").string(), u);
  std::cout << "p " << format_double(cfg.p) << '\n'
            << "q " << format_double(q) << '\n'
            << "lambda " << format_double(lambda) << '\n'
            << "sup_norm " << format_double(sup_norm(u).value) << '\n'
            << "energy " << format_double(rep.energy) << '\n';
  print_report(rep);
  std::cout << "wrote " << (dir / "solution.csv").string() << '\n';
  return rep.converged && rep.positive ? 0 : 1;
}

int cmd_eigen(const Overrides& o, const std::vector<std::string>& argv) {
  auto [cfg, text] = resolve(o, argv);
  const auto mesh = build_mesh(cfg.domain);
  const auto eig = first_eigenpair(mesh, cfg.p, cfg.solver);
  const auto th = theta(eig.e_p, cfg.p);
  const double norm = lp_norm(eig.e_p, cfg.p);
  const auto dir = ensure_dir(cfg.output_dir);
  write_csv((dir / "eigenfunction.csv").string(), eig.e_p);
  std::cout << "lambda_p " << format_double(eig.lambda_p) << '\n'
            << "theta " << format_double(th.theta_p) << '\n'
            << "ep_lp_norm " << format_double(norm) << '\n'
            << "derivative_closed " << format_double(lambda_derivative_closed(eig.lambda_p, th.theta_p, norm))
            << '\n';
  print_report(eig.report);
  std::cout << "wrote " << (dir / "eigenfunction.csv").string() << '\n';
  return eig.report.converged ? 0 : 1;
}

int cmd_sweep(const Overrides& o, const std::vector<std::string>& argv) {
  auto [cfg, text] = resolve(o, argv);
  const auto mesh = build_mesh(cfg.domain);
  double lambda = 0.0;
  if (cfg.resonant()) {
    lambda = first_eigenpair(mesh, cfg.p, cfg.solver).lambda_p;
  } else {
    lambda = *cfg.lambda;
  }
  const auto grid = cfg.q_grid.empty() ? default_q_grid(cfg.p, mesh->dimension()) : cfg.q_grid;
  const auto sweep = q_sweep(mesh, cfg.p, lambda, grid, cfg.s, cfg.solver, thread_cap(cfg.threads));
  const auto dir = ensure_dir(cfg.output_dir);
  write_sweep_csv((dir / "sweep.csv").string(), sweep);
  write_sweep_csv(std::cout, sweep);
  for (const auto& r : sweep.rows) {
    if (!r.error.empty()) std::cerr << "q=" << format_double(r.q) << ": " << r.error << '\n';
  }
  std::cout << "wrote " << (dir / "sweep.csv").string() << '\n';
  return sweep.all_converged() ? 0 : 1;
}

int cmd_verify(const Overrides& o, const std::vector<std::string>& argv) {
  auto [cfg, text] = resolve(o, argv);
  const auto man = run(cfg, text, thread_cap(cfg.threads));
  for (const auto& c : man.checks) {
    std::cout << (c.check.satisfied ? "pass " : "FAIL ") << c.group << ' ' << c.check.name;
    if (std::isfinite(c.q)) std::cout << " q=" << format_double(c.q);
    std::cout << " lhs=" << format_double(c.check.lhs) << " rhs=" << format_double(c.check.rhs) << '\n';
  }
  for (const auto& [group, reason] : man.skipped) std::cout << "skip " << group << ": " << reason << '\n';
  std::cout << "solves " << (man.solves_converged ? "converged" : "NOT converged") << '\n'
            << "wrote " << (fs::path(cfg.output_dir) / "report.json").string() << '\n'
            << (man.exit_code() == 0 ? "PASS" : "FAIL") << '\n';
  return man.exit_code();
}

int cmd_plot(const std::string& csv, const std::string& kind_name, std::string out, std::optional<double> ref,
             std::optional<double> p) {
  const auto kind = plot_kind_from_string(kind_name);
  const auto sweep = read_sweep_csv(csv);
  PlotOptions opts;
  opts.reference = ref;
  opts.p = p;
  if (out.empty()) out = (fs::path(csv).parent_path() / (kind_name + ".svg")).string();
  write_plot(out, sweep, kind, opts);
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-Laplacian Lane-Emden solver and q -> p eigenpair extraction"};
  app.require_subcommand(1);
  const std::vector<std::string> args(argv + 1, argv + argc);

  Overrides solve_o, eigen_o, sweep_o, verify_o;
  auto* solve = app.add_subcommand("solve", "solve -Delta_p u = lambda u^{q-1} for one q");
  add_problem_flags(solve, solve_o);
  auto* eigen = app.add_subcommand("eigen", "first eigenpair, theta_p and the slope of lambda_q at q = p");
  add_problem_flags(eigen, eigen_o);
  auto* sweep = app.add_subcommand("sweep", "q sweep table (sweep.csv)");
  add_problem_flags(sweep, sweep_o);
  auto* verify = app.add_subcommand("verify", "full run with checks; writes report.json, CSVs and plots");
  add_problem_flags(verify, verify_o);

  std::string plot_csv, plot_kind, plot_out;
  std::optional<double> plot_ref, plot_p;
  auto* plot = app.add_subcommand("plot", "SVG plot of a sweep CSV");
  plot->add_option("csv", plot_csv, "sweep CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--kind", plot_kind, "supnorm_vs_q | lambda_vs_q | rate")->required();
  plot->add_option("--out", plot_out, "output SVG (default: <kind>.svg next to the CSV)");
  plot->add_option("--ref", plot_ref, "horizontal reference value");
  plot->add_option("--p", plot_p, "exponent p (needed for rate)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return cmd_solve(solve_o, args);
    if (*eigen) return cmd_eigen(eigen_o, args);
    if (*sweep) return cmd_sweep(sweep_o, args);
    if (*verify) return cmd_verify(verify_o, args);
    if (*plot) return cmd_plot(plot_csv, plot_kind, plot_out, plot_ref, plot_p);
  } catch (const ConfigError& e) {
    std::cerr << "config-error: " << e.what() << '\n';
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "schema-error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
