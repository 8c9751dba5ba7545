#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "plap/asymptotics.hpp"
#include "plap/config.hpp"
#include "plap/errors.hpp"
#include "plap/run.hpp"
#include "plap/svg_plot.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace plap;
using namespace plap::test;

namespace {

const fs::path kScratch = fs::temp_directory_path() / "plap_cli_tests";

std::string slurp(const fs::path& p) { return read_file(p.string()); }

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PLAP_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json without_timing(const fs::path& report) {
  auto j = nlohmann::json::parse(slurp(report));
  j.erase("timing");
  return j;
}

SweepResult tiny_sweep() {
  SweepResult s;
  s.p = 2.0;
  for (double q : {1.8, 1.9, 1.95, 2.05, 2.1, 2.2}) {
    SweepRow r;
    r.q = q;
    r.lambda = kPi * kPi;
    r.sup_norm = 1.213061 + 0.05 * (2 - q);
    r.mu = kPi * kPi * (1 + 0.1 * (q - 2));
    r.capital_lambda = kPi * kPi * (1 + 0.02 * std::abs(q - 2));
    r.lambda_q = kPi * kPi - 1.5 * (q - 2);
    r.converged = true;
    s.rows.push_back(r);
  }
  return s;
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  const auto cfg = parse_config("");
  CHECK(cfg.domain.kind == DomainKind::interval);
  CHECK(cfg.domain.resolution == 1024);
  CHECK(cfg.p == 2.0);
  CHECK(cfg.resonant());
  CHECK(std::isinf(cfg.s));
  CHECK(cfg.checks.size() == kCheckNames.size());

  const auto sq = parse_config(R"(
[domain]
kind = "rectangle"
lx = 2.0
[problem]
p = 3
lambda = 4.5
q_grid = [2.5, 3.5]
s = 2
[solver]
tol = 1e-8
threads = 2
[output]
dir = "x"
checks = ["bounds"]
)");
  CHECK(sq.domain.kind == DomainKind::rectangle);
  CHECK(sq.domain.dimension == 2);
  CHECK(sq.domain.resolution == 128);
  CHECK(sq.domain.lx == 2.0);
  CHECK(sq.p == 3.0);
  REQUIRE(sq.lambda.has_value());
  CHECK(*sq.lambda == 4.5);
  CHECK(sq.q_grid == std::vector<double>{2.5, 3.5});
  CHECK(sq.s == 2.0);
  CHECK(sq.solver.tol == 1e-8);
  CHECK(sq.threads == 2);
  CHECK(sq.output_dir == "x");
  CHECK(sq.check_enabled("bounds"));
  CHECK_FALSE(sq.check_enabled("rate"));
}

TEST_CASE("config errors") {
  CHECK_THROWS_WITH_AS(parse_config("[problem]\np = 2\nq_grid = [1.9, 2.0]\n"), "q_grid must exclude p",
                       ConfigError);
  CHECK_THROWS_AS(parse_config("[problem]\nfoo = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[extra]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[problem]\nlambda = \"big\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[problem]\nlambda = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[problem]\ns = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[problem]\np = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[domain]\nn = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[domain]\nkind = \"torus\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[output]\nchecks = [\"nope\"]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("p = = 2"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/plap.toml"), ConfigError);
}

TEST_CASE("config hash is stable") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("empty sweep has no data rows") {
  SweepResult empty;
  CHECK_THROWS_WITH_AS(plot_svg(empty, PlotKind::supnorm_vs_q), "no data rows", SchemaError);
  std::istringstream header_only(std::string(kSweepCsvHeader) + "\n");
  const auto s = read_sweep_csv(header_only);
  CHECK_THROWS_WITH_AS(plot_svg(s, PlotKind::lambda_vs_q), "no data rows", SchemaError);
}

TEST_CASE("svg output") {
  const auto s = tiny_sweep();
  PlotOptions opts;
  opts.reference = 1.213061;
  const auto a = plot_svg(s, PlotKind::supnorm_vs_q, opts);
  CHECK(a == plot_svg(s, PlotKind::supnorm_vs_q, opts));
  CHECK(a.find("width=\"800\" height=\"600\"") != std::string::npos);
  CHECK(a.find("class=\"reference\" data-value=\"1.213061\"") != std::string::npos);
  CHECK(a.rfind("</svg>\n") == a.size() - 7);
  PlotOptions lam;
  lam.reference = kPi * kPi;
  CHECK(plot_svg(s, PlotKind::lambda_vs_q, lam).find("class=\"reference\"") != std::string::npos);
  CHECK_THROWS(plot_svg(s, PlotKind::rate));
  PlotOptions rate;
  rate.p = 2.0;
  CHECK(plot_svg(s, PlotKind::rate, rate).find("class=\"guide\"") != std::string::npos);
  CHECK(plot_kind_from_string("rate") == PlotKind::rate);
  CHECK_THROWS(plot_kind_from_string("histogram"));
}

TEST_CASE("run writes every listed file and a consistent manifest") {
  auto cfg = parse_config("[domain]\nn = 256\n[problem]\nq_grid = [1.8, 1.9, 1.95, 2.05, 2.1, 2.2]\n");
  cfg.output_dir = (kScratch / "run").string();
  fs::remove_all(cfg.output_dir);
  const auto man = run(cfg, "text");
  CHECK(man.exit_code() == 0);
  for (const auto& f : man.files) CHECK_MESSAGE(fs::exists(fs::path(cfg.output_dir) / f), f);
  bool all = true;
  for (const auto& c : man.checks) all = all && c.check.satisfied;
  CHECK(all == man.checks_passed);
  const auto j = nlohmann::json::parse(slurp(fs::path(cfg.output_dir) / "report.json"));
  CHECK(j["config_hash"] == "fnv1a64:" + fnv1a_hex("text"));
  CHECK(j["checks"].size() == man.checks.size());
  CHECK(j["pass"] == true);
  CHECK(std::abs(j["theta_estimate"].get<double>() - 1.213061) < 0.05);
  for (const auto& name : {"sweep.csv", "eigenfunction.csv", "torsion.csv", "supnorm_vs_q.svg", "lambda_vs_q.svg",
                           "rate.svg", "report.json"}) {
    CHECK_MESSAGE(fs::exists(fs::path(cfg.output_dir) / name), name);
  }
}

TEST_CASE("an unconverged solve sets the exit code") {
  // One outer iteration cannot settle the monotone iteration.
  auto cfg = parse_config("[domain]\nn = 256\n[problem]\nq_grid = [1.5]\n[solver]\nmax_iter = 1\n");
  cfg.output_dir = (kScratch / "fail").string();
  const auto man = run(cfg, "");
  CHECK_FALSE(man.solves_converged);
  CHECK(man.exit_code() == 1);
}

TEST_CASE("cli determinism and exit codes") {
  fs::create_directories(kScratch);
  const auto a = kScratch / "det_a", b = kScratch / "det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const std::string args = "verify --n 256 --p 2 --q 1.8,1.9,1.95,2.05,2.1,2.2 --out ";
  REQUIRE(cli(args + a.string(), kScratch / "a.log") == 0);
  REQUIRE(cli("verify --n 256 --p 2 --q 1.8,1.9,1.95,2.05,2.1,2.2 --out " + b.string(), kScratch / "b.log") == 0);
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a);
    const auto ext = rel.extension();
    if (ext == ".csv" || ext == ".svg") CHECK_MESSAGE(slurp(entry.path()) == slurp(b / rel), rel.string());
  }
  auto ja = without_timing(a / "report.json"), jb = without_timing(b / "report.json");
  CHECK(ja["config_hash"] != jb["config_hash"]);
  ja.erase("config_hash");
  jb.erase("config_hash");
  CHECK(ja == jb);

  CHECK(cli("sweep --p 2 --q 1.9,2 --out " + (kScratch / "bad").string(), kScratch / "bad.log") == 2);
  CHECK(slurp(kScratch / "bad.log").find("config-error: q_grid must exclude p") != std::string::npos);
  CHECK(cli("solve --p 2 --q 1.5 --lambda 3 --n 128 --out " + (kScratch / "solve").string(),
            kScratch / "solve.log") == 0);
  CHECK(fs::exists(kScratch / "solve" / "solution.csv"));
  CHECK(cli("solve --p 2 --q 1.5,1.6 --lambda 3 --out " + (kScratch / "solve").string(), kScratch / "s2.log") == 2);
  CHECK(cli("eigen --p 3 --n 256 --out " + (kScratch / "eig").string(), kScratch / "eig.log") == 0);
  CHECK(slurp(kScratch / "eig.log").find("lambda_p ") != std::string::npos);
  CHECK(cli("frobnicate", kScratch / "f.log") != 0);

  const auto csv = (a / "sweep.csv").string();
  const auto svg1 = kScratch / "p1.svg", svg2 = kScratch / "p2.svg";
  REQUIRE(cli("plot " + csv + " --kind supnorm_vs_q --ref 1.213061 --out " + svg1.string(), kScratch / "p.log") == 0);
  REQUIRE(cli("plot " + csv + " --kind supnorm_vs_q --ref 1.213061 --out " + svg2.string(), kScratch / "p.log") == 0);
  CHECK(slurp(svg1) == slurp(svg2));
  CHECK(slurp(svg1).find("data-value=\"1.213061\"") != std::string::npos);

  std::ofstream(kScratch / "empty.csv") << kSweepCsvHeader << '\n';
  CHECK(cli("plot " + (kScratch / "empty.csv").string() + " --kind rate --p 2", kScratch / "e.log") == 2);
  CHECK(slurp(kScratch / "e.log").find("no data rows") != std::string::npos);
  std::ofstream(kScratch / "junk.csv") << "a,b\n1,2\n";
  CHECK(cli("plot " + (kScratch / "junk.csv").string() + " --kind rate --p 2", kScratch / "j.log") == 2);
  CHECK(slurp(kScratch / "j.log").find("schema-error") != std::string::npos);
}

TEST_CASE("thread cap from the environment") {
  const auto out = kScratch / "threads";
  CHECK(cli("sweep --p 2 --q 1.9 --n 128 --out " + out.string(), kScratch / "t0.log") == 0);
  const std::string bad = "PLAP_THREADS=0 " + std::string(PLAP_CLI) + " sweep --p 2 --q 1.9 --out " + out.string() +
                          " > " + (kScratch / "t1.log").string() + " 2>&1";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 2);
  const std::string one = "PLAP_THREADS=1 " + std::string(PLAP_CLI) + " sweep --p 2 --q 1.8,1.9 --n 128 --out " +
                          (kScratch / "t1").string() + " > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(one.c_str())) == 0);
  const std::string four = "PLAP_THREADS=4 " + std::string(PLAP_CLI) + " sweep --p 2 --q 1.8,1.9 --n 128 --out " +
                           (kScratch / "t4").string() + " > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(four.c_str())) == 0);
  CHECK(slurp(kScratch / "t1" / "sweep.csv") == slurp(kScratch / "t4" / "sweep.csv"));
}
