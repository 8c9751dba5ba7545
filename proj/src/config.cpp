#include "plap/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "third_party/toml.hpp"

#include "plap/errors.hpp"
#include "plap/plap_operator.hpp"

namespace plap {

bool ExperimentConfig::check_enabled(const std::string& name) const {
  return std::find(checks.begin(), checks.end(), name) != checks.end();
}

void ExperimentConfig::validate() const {
  try {
    domain.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("[domain]: ") + e.what());
  }
  if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("[problem] p must be > 1");
  if (lambda && (!(*lambda > 0.0) || !std::isfinite(*lambda))) throw ConfigError("[problem] lambda must be > 0");
  if (std::isnan(s) || s < 1.0) throw ConfigError("[problem] s must lie in [1, inf]");
  const double pstar = critical_exponent(p, domain.dimension);
  for (double q : q_grid) {
    if (q == p) throw ConfigError("q_grid must exclude p");
    if (!(q >= 1.0) || !(q < pstar)) throw ConfigError("q_grid values must lie in [1, p*)");
  }
  try {
    solver.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("[solver]: ") + e.what());
  }
  if (threads < 0) throw ConfigError("[solver] threads must be >= 0");
  for (const auto& c : checks) {
    if (std::find(kCheckNames.begin(), kCheckNames.end(), c) == kCheckNames.end())
      throw ConfigError("[output] unknown check '" + c + "'");
  }
  if (output_dir.empty()) throw ConfigError("[output] dir must not be empty");
}

namespace {

void reject_unknown(const toml::table& t, const std::string& section, std::initializer_list<std::string_view> keys) {
  for (const auto& [k, v] : t) {
    if (std::find(keys.begin(), keys.end(), k.str()) == keys.end())
      throw ConfigError("unknown key [" + section + "]." + std::string(k.str()));
  }
}

double number(const toml::node& n, const std::string& where) {
  if (auto v = n.value<double>()) return *v;
  throw ConfigError(where + " must be a number");
}

int integer(const toml::node& n, const std::string& where) {
  if (!n.is_integer()) throw ConfigError(where + " must be an integer");
  return static_cast<int>(*n.value<std::int64_t>());
}

std::string text(const toml::node& n, const std::string& where) {
  if (auto v = n.value<std::string>()) return *v;
  throw ConfigError(where + " must be a string");
}

const toml::table* section(const toml::table& root, const char* name) {
  const auto* node = root.get(name);
  if (!node) return nullptr;
  if (!node->is_table()) throw ConfigError(std::string("[") + name + "] must be a table");
  return node->as_table();
}

}  // namespace

ExperimentConfig parse_config(const std::string& content, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(content, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }
  reject_unknown(root, "", {"domain", "problem", "solver", "output"});

  ExperimentConfig cfg;
  if (const auto* d = section(root, "domain")) {
    reject_unknown(*d, "domain", {"kind", "a", "b", "lx", "ly", "radius", "dimension", "n"});
    auto& spec = cfg.domain;
    if (const auto* k = d->get("kind")) {
      try {
        spec.kind = domain_kind_from_string(text(*k, "[domain] kind"));
      } catch (const InvalidSpec& e) {
        throw ConfigError(std::string("[domain] ") + e.what());
      }
    }
    spec.dimension = spec.kind == DomainKind::rectangle ? 2 : 1;
    if (const auto* v = d->get("a")) spec.a = number(*v, "[domain] a");
    if (const auto* v = d->get("b")) spec.b = number(*v, "[domain] b");
    if (const auto* v = d->get("lx")) spec.lx = number(*v, "[domain] lx");
    if (const auto* v = d->get("ly")) spec.ly = number(*v, "[domain] ly");
    if (const auto* v = d->get("radius")) spec.radius = number(*v, "[domain] radius");
    if (const auto* v = d->get("dimension")) spec.dimension = integer(*v, "[domain] dimension");
    if (const auto* v = d->get("n")) {
      spec.resolution = integer(*v, "[domain] n");
    } else if (spec.kind == DomainKind::rectangle) {
      spec.resolution = 128;
    }
  }
  if (const auto* pr = section(root, "problem")) {
    reject_unknown(*pr, "problem", {"p", "lambda", "q_grid", "s"});
    if (const auto* v = pr->get("p")) cfg.p = number(*v, "[problem] p");
    if (const auto* v = pr->get("lambda")) {
      if (v->is_string()) {
        if (text(*v, "[problem] lambda") != "resonant")
          throw ConfigError("[problem] lambda must be a number or \"resonant\"");
        cfg.lambda.reset();
      } else {
        cfg.lambda = number(*v, "[problem] lambda");
      }
    }
    if (const auto* v = pr->get("q_grid")) {
      const auto* arr = v->as_array();
      if (!arr) throw ConfigError("[problem] q_grid must be an array");
      for (const auto& q : *arr) cfg.q_grid.push_back(number(q, "[problem] q_grid entry"));
    }
    if (const auto* v = pr->get("s")) {
      if (v->is_string()) {
        const auto t = text(*v, "[problem] s");
        if (t != "inf") throw ConfigError("[problem] s must be a number or \"inf\"");
        cfg.s = std::numeric_limits<double>::infinity();
      } else {
        cfg.s = number(*v, "[problem] s");
      }
    }
  }
  if (const auto* so = section(root, "solver")) {
    reject_unknown(*so, "solver", {"tol", "max_iter", "eps_reg", "threads"});
    if (const auto* v = so->get("tol")) cfg.solver.tol = number(*v, "[solver] tol");
    if (const auto* v = so->get("max_iter")) cfg.solver.max_iter = integer(*v, "[solver] max_iter");
    if (const auto* v = so->get("eps_reg")) cfg.solver.eps_reg = number(*v, "[solver] eps_reg");
    if (const auto* v = so->get("threads")) cfg.threads = integer(*v, "[solver] threads");
  }
  if (const auto* o = section(root, "output")) {
    reject_unknown(*o, "output", {"dir", "checks"});
    if (const auto* v = o->get("dir")) cfg.output_dir = text(*v, "[output] dir");
    if (const auto* v = o->get("checks")) {
      const auto* arr = v->as_array();
      if (!arr) throw ConfigError("[output] checks must be an array");
      cfg.checks.clear();
      for (const auto& c : *arr) cfg.checks.push_back(text(c, "[output] checks entry"));
    }
  }
  cfg.validate();
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config file " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path), path); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace plap
