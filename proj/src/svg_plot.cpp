#include "plap/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "plap/errors.hpp"

namespace plap {

PlotKind plot_kind_from_string(const std::string& name) {
  if (name == "supnorm_vs_q") return PlotKind::supnorm_vs_q;
  if (name == "lambda_vs_q") return PlotKind::lambda_vs_q;
  if (name == "rate") return PlotKind::rate;
  throw std::invalid_argument("unknown plot kind '" + name + "' (supnorm_vs_q, lambda_vs_q, rate)");
}

std::string to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::supnorm_vs_q: return "supnorm_vs_q";
    case PlotKind::lambda_vs_q: return "lambda_vs_q";
    case PlotKind::rate: return "rate";
  }
  return "?";
}

namespace {

constexpr double kWidth = 800, kHeight = 600;
constexpr double kLeft = 90, kRight = 30, kTop = 50, kBottom = 70;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c"};

struct Series {
  std::string label;
  std::vector<double> x, y;
};

std::string num(double v, const char* fmt = "%.2f") {
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string tick_label(double v) {
  if (std::abs(v) < 1e-300) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    double span = hi - lo;
    if (!(span > 0.0)) span = std::max(std::abs(hi) * 0.1, 1e-9);
    lo -= 0.05 * span;
    hi += 0.05 * span;
  }
};

std::vector<double> ticks(const Range& r) {
  const double raw = (r.hi - r.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-9 * step; t += step) {
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return out;
}

}  // namespace

std::string plot_svg(const SweepResult& sweep, PlotKind kind, const PlotOptions& opts) {
  if (sweep.rows.empty()) throw SchemaError("no data rows");

  std::vector<Series> series;
  std::string xlabel = "q", ylabel, title;
  switch (kind) {
    case PlotKind::supnorm_vs_q: {
      Series s{"sup norm of u_q", {}, {}};
      for (const auto& r : sweep.rows) {
        s.x.push_back(r.q);
        s.y.push_back(r.sup_norm);
      }
      series.push_back(std::move(s));
      ylabel = "sup norm";
      title = "sup norm of u_q against q";
      break;
    }
    case PlotKind::lambda_vs_q: {
      Series mu{"mu", {}, {}}, cap{"capital lambda", {}, {}}, lq{"lambda_q", {}, {}};
      for (const auto& r : sweep.rows) {
        mu.x.push_back(r.q);
        mu.y.push_back(r.mu);
        cap.x.push_back(r.q);
        cap.y.push_back(r.capital_lambda);
        lq.x.push_back(r.q);
        lq.y.push_back(r.lambda_q);
      }
      series = {std::move(mu), std::move(cap), std::move(lq)};
      ylabel = "eigenvalue estimate";
      title = "eigenvalue estimates against q";
      break;
    }
    case PlotKind::rate: {
      if (!opts.p) throw std::invalid_argument("rate plot needs p");
      Series s{"|capital lambda / mu - 1|", {}, {}};
      for (const auto& r : sweep.rows) {
        const double gap = std::abs(r.capital_lambda / r.mu - 1.0);
        if (!(gap > 0.0) || r.q == *opts.p) continue;
        s.x.push_back(std::log10(std::abs(r.q - *opts.p)));
        s.y.push_back(std::log10(gap));
      }
      if (s.x.empty()) throw SchemaError("no data rows");
      series.push_back(std::move(s));
      xlabel = "log10 |q - p|";
      ylabel = "log10 |capital lambda / mu - 1|";
      title = "gap between capital lambda and mu";
      break;
    }
  }

  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  const bool has_ref = opts.reference && kind != PlotKind::rate && std::isfinite(*opts.reference);
  if (has_ref) yr.add(*opts.reference);
  if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo)) throw SchemaError("no data rows");
  xr.pad();
  yr.pad();

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto X = [&](double v) { return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto Y = [&](double v) { return kTop + (yr.hi - v) / (yr.hi - yr.lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\""
     << " font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  os << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
     << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : ticks(xr)) {
    const auto x = num(X(t));
    os << "<line x1=\"" << x << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << x << "\" y2=\"" << num(kTop + ph + 5)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << num(kTop + ph + 20) << "\" text-anchor=\"middle\">" << tick_label(t)
       << "</text>\n";
  }
  for (double t : ticks(yr)) {
    const auto y = num(Y(t));
    os << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << y << "\" x2=\"" << num(kLeft) << "\" y2=\"" << y
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << y << "\" text-anchor=\"end\" dominant-baseline=\"middle\">"
       << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 20) << "\" text-anchor=\"middle\">"
     << xlabel << "</text>\n";
  os << "<text x=\"20\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << num(kTop + ph / 2) << ")\">" << ylabel << "</text>\n";

  if (has_ref) {
    const auto y = num(Y(*opts.reference));
    os << "<line class=\"reference\" data-value=\"" << format_double(*opts.reference) << "\" x1=\"" << num(kLeft)
       << "\" y1=\"" << y << "\" x2=\"" << num(kLeft + pw) << "\" y2=\"" << y
       << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
    os << "<text x=\"" << num(kLeft + pw - 4) << "\" y=\"" << num(Y(*opts.reference) - 6)
       << "\" text-anchor=\"end\" fill=\"gray\">reference " << tick_label(*opts.reference) << "</text>\n";
  }
  if (kind == PlotKind::rate) {
    // Slope-one guide through the mean point.
    const auto& s = series.front();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      mx += s.x[i];
      my += s.y[i];
    }
    mx /= static_cast<double>(s.x.size());
    my /= static_cast<double>(s.x.size());
    const double x0 = xr.lo, x1 = xr.hi;
    os << "<line class=\"guide\" x1=\"" << num(X(x0)) << "\" y1=\"" << num(Y(my + x0 - mx)) << "\" x2=\""
       << num(X(x1)) << "\" y2=\"" << num(Y(my + x1 - mx)) << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
    os << "<text x=\"" << num(kLeft + 8) << "\" y=\"" << num(kTop + 16) << "\" fill=\"gray\">dashed: slope 1</text>\n";
  }

  os << "<clipPath id=\"plot\"><rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\"/></clipPath>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % 3];
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) idx.push_back(i);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.x[a] < s.x[b]; });
    os << "<g clip-path=\"url(#plot)\">\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < idx.size(); ++j) {
      os << (j ? " " : "") << num(X(s.x[idx[j]])) << ',' << num(Y(s.y[idx[j]]));
    }
    os << "\"/>\n";
    for (auto i : idx) {
      os << "<circle cx=\"" << num(X(s.x[i])) << "\" cy=\"" << num(Y(s.y[i])) << "\" r=\"3.5\" fill=\"" << color
         << "\"/>\n";
    }
    os << "</g>\n";
    const double ly = kTop + 18 + 18 * static_cast<double>(k);
    os << "<line x1=\"" << num(kLeft + pw - 170) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(kLeft + pw - 145)
       << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(kLeft + pw - 140) << "\" y=\"" << num(ly + 4) << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_plot(const std::string& path, const SweepResult& sweep, PlotKind kind, const PlotOptions& opts) {
  const auto svg = plot_svg(sweep, kind, opts);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << svg;
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace plap
