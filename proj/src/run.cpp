#include "plap/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "plap/errors.hpp"
#include "plap/svg_plot.hpp"

namespace plap {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json norm_index(double s) { return std::isinf(s) ? Json("inf") : Json(s); }

Json domain_json(const DomainSpec& d) {
  Json j;
  j["kind"] = to_string(d.kind);
  switch (d.kind) {
    case DomainKind::interval:
      j["a"] = d.a;
      j["b"] = d.b;
      break;
    case DomainKind::rectangle:
      j["lx"] = d.lx;
      j["ly"] = d.ly;
      break;
    case DomainKind::radial_ball:
      j["radius"] = d.radius;
      break;
  }
  j["dimension"] = d.dimension;
  j["n"] = d.resolution;
  return j;
}

Json solve_json(const SolveReport& r) {
  return Json{{"iterations", r.iterations},
              {"residual", number_or_null(r.residual)},
              {"converged", r.converged},
              {"positive", r.positive}};
}

// Distance to theta along each side must not grow as q approaches p. Returns
// the largest growth found on one side (<= 0 when monotone).
double largest_growth(std::vector<std::pair<double, double>> gap_by_dist) {
  std::sort(gap_by_dist.begin(), gap_by_dist.end(), [](auto a, auto b) { return a.first > b.first; });
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < gap_by_dist.size(); ++k) {
    worst = std::max(worst, gap_by_dist[k].second - gap_by_dist[k - 1].second);
  }
  return worst;
}

}  // namespace

RunManifest run(const ExperimentConfig& cfg, const std::string& config_text, int threads) {
  cfg.validate();
  RunManifest man;
  man.config_hash = "fnv1a64:" + fnv1a_hex(config_text);

  const fs::path out(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(out / "solutions", ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out.string() + ": " + ec.message());

  auto add_check = [&](const std::string& group, BoundCheck c, double q = kNaN) {
    if (!c.satisfied) man.checks_passed = false;
    man.checks.push_back({group, std::move(c), q});
  };

  Stopwatch clock;
  const auto mesh = build_mesh(cfg.domain);
  const double p = cfg.p;
  const int N = mesh->dimension();
  man.timing.emplace_back("mesh", clock.lap());

  const auto eig = first_eigenpair(mesh, p, cfg.solver);
  if (!eig.report.converged) man.solves_converged = false;
  man.timing.emplace_back("eigen", clock.lap());

  const auto [phi, phi_report] = torsion(mesh, p, cfg.solver);
  if (!phi_report.converged) man.solves_converged = false;
  man.timing.emplace_back("torsion", clock.lap());

  const auto th = theta(eig.e_p, p);
  const double ep_norm = lp_norm(eig.e_p, p);
  const double derivative_closed = lambda_derivative_closed(eig.lambda_p, th.theta_p, ep_norm);

  const double lambda = cfg.resonant() ? eig.lambda_p : *cfg.lambda;
  const auto q_grid = cfg.q_grid.empty() ? default_q_grid(p, N) : cfg.q_grid;
  const auto sweep = q_sweep(mesh, p, lambda, q_grid, cfg.s, cfg.solver, threads > 0 ? threads : cfg.threads);
  if (!sweep.all_converged()) man.solves_converged = false;
  man.timing.emplace_back("sweep", clock.lap());

  double derivative_fd = kNaN, rate = kNaN;
  try {
    derivative_fd = fit_derivative(sweep, p);
  } catch (const NumericalError& e) {
    if (cfg.check_enabled("derivative")) man.skipped.emplace_back("derivative", e.what());
  }
  try {
    rate = fit_rate(sweep, p);
  } catch (const NumericalError& e) {
    if (cfg.check_enabled("rate")) man.skipped.emplace_back("rate", e.what());
  }

  // Sup norms mapped to the resonant problem by the gauge u -> c u,
  // lambda -> lambda c^{p-q}.
  std::vector<std::pair<double, double>> below, above;
  double theta_estimate = kNaN, closest = std::numeric_limits<double>::infinity();
  for (const auto& r : sweep.rows) {
    if (!r.converged) continue;
    const double sup = r.sup_norm * std::pow(eig.lambda_p / lambda, 1.0 / (p - r.q));
    const double dist = std::abs(r.q - p);
    (r.q < p ? below : above).emplace_back(dist, std::abs(sup - th.theta_p));
    if (dist < closest) {
      closest = dist;
      theta_estimate = sup;
    }
  }

  BoundContext ctx{eig.e_p, phi, eig.lambda_p};
  for (const auto& r : sweep.rows) {
    if (!r.converged) continue;
    if (cfg.check_enabled("bounds")) {
      for (auto& c : check_bounds(r.solution, lambda, p, r.q, ctx)) add_check("bounds", std::move(c), r.q);
    }
    if (cfg.check_enabled("linfty") && r.q < p * (N + 1.0) / N) {
      add_check("linfty", check_linfty(r.solution, lambda, p, r.q, N), r.q);
    }
  }
  if (cfg.check_enabled("theta")) {
    bool any = false;
    for (const auto* side : {&below, &above}) {
      if (side->size() < 2) continue;
      any = true;
      add_check("theta", make_check(side == &below ? "theta_trend_below" : "theta_trend_above",
                                    largest_growth(*side), 0.0));
    }
    if (!any) man.skipped.emplace_back("theta", "fewer than two converged rows on each side of p");
  }
  if (cfg.check_enabled("derivative") && std::isfinite(derivative_fd)) {
    add_check("derivative", make_check("derivative_match", std::abs(derivative_fd - derivative_closed),
                                       0.05 * std::abs(derivative_closed)));
  }
  if (cfg.check_enabled("rate") && std::isfinite(rate)) {
    add_check("rate", make_check("rate_slope", 0.8, rate));
  }
  man.timing.emplace_back("checks", clock.lap());

  // Artifacts.
  auto record = [&](const fs::path& rel) { man.files.push_back(rel.generic_string()); };
  write_sweep_csv((out / "sweep.csv").string(), sweep);
  record("sweep.csv");
  write_csv((out / "eigenfunction.csv").string(), eig.e_p);
  record("eigenfunction.csv");
  write_csv((out / "torsion.csv").string(), phi);
  record("torsion.csv");
  for (const auto& r : sweep.rows) {
    if (r.solution.size() == 0) continue;
    const fs::path rel = fs::path("solutions") / ("u_q" + format_double(r.q) + ".csv");
    write_csv((out / rel).string(), r.solution);
    record(rel);
  }
  PlotOptions sup_opts;
  if (cfg.resonant()) sup_opts.reference = th.theta_p;
  write_plot((out / "supnorm_vs_q.svg").string(), sweep, PlotKind::supnorm_vs_q, sup_opts);
  record("supnorm_vs_q.svg");
  PlotOptions lam_opts;
  lam_opts.reference = eig.lambda_p;
  write_plot((out / "lambda_vs_q.svg").string(), sweep, PlotKind::lambda_vs_q, lam_opts);
  record("lambda_vs_q.svg");
  if (std::isfinite(rate)) {
    PlotOptions rate_opts;
    rate_opts.p = p;
    write_plot((out / "rate.svg").string(), sweep, PlotKind::rate, rate_opts);
    record("rate.svg");
  }
  record("report.json");
  man.timing.emplace_back("write", clock.lap());

  Json report;
  report["tool"] = "plap";
  report["version"] = man.version;
  report["config_hash"] = man.config_hash;
  report["domain"] = domain_json(cfg.domain);
  report["p"] = p;
  report["lambda"] = lambda;
  report["lambda_mode"] = cfg.resonant() ? "resonant" : "value";
  report["s"] = norm_index(cfg.s);
  report["eigen"] = {{"lambda_p", eig.lambda_p},
                     {"theta", th.theta_p},
                     {"ep_lp_norm", ep_norm},
                     {"derivative_closed", derivative_closed},
                     {"derivative_fd", number_or_null(derivative_fd)},
                     {"solve", solve_json(eig.report)}};
  report["torsion"] = {{"sup_norm", sup_norm(phi).value}, {"solve", solve_json(phi_report)}};
  report["theta_estimate"] = number_or_null(theta_estimate);
  report["rate_slope"] = number_or_null(rate);

  Json checks = Json::array();
  for (const auto& c : man.checks) {
    checks.push_back({{"group", c.group},
                      {"name", c.check.name},
                      {"q", number_or_null(c.q)},
                      {"lhs", c.check.lhs},
                      {"rhs", c.check.rhs},
                      {"slack", c.check.slack},
                      {"status", c.check.satisfied ? "pass" : "fail"}});
  }
  report["checks"] = std::move(checks);
  Json skipped = Json::array();
  for (const auto& [group, reason] : man.skipped) skipped.push_back({{"group", group}, {"reason", reason}});
  report["skipped"] = std::move(skipped);

  Json rows = Json::array();
  for (const auto& r : sweep.rows) {
    Json row{{"q", r.q},
             {"sup_norm", number_or_null(r.sup_norm)},
             {"mu", number_or_null(r.mu)},
             {"capital_lambda", number_or_null(r.capital_lambda)},
             {"lambda_q", number_or_null(r.lambda_q)},
             {"residual", number_or_null(r.residual)},
             {"iterations", r.iterations},
             {"converged", r.converged}};
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  report["sweep"] = {{"rows", sweep.rows.size()}, {"all_converged", sweep.all_converged()}, {"table", std::move(rows)}};
  report["files"] = man.files;
  report["checks_passed"] = man.checks_passed;
  report["solves_converged"] = man.solves_converged;
  report["pass"] = man.exit_code() == 0;
  Json timing;
  for (const auto& [stage, secs] : man.timing) timing[stage] = secs;
  report["timing"] = std::move(timing);

  std::ofstream os(out / "report.json", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + (out / "report.json").string());
  os << report.dump(2) << '\n';
  if (!os) throw std::runtime_error("write failed: report.json");
  return man;
}

RunManifest run_file(const std::string& config_path, const std::optional<std::string>& out_dir, int threads) {
  const auto text = read_file(config_path);
  auto cfg = parse_config(text, config_path);
  if (out_dir) cfg.output_dir = *out_dir;
  return run(cfg, text, threads);
}

}  // namespace plap
