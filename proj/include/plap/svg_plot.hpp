#pragma once

#include <optional>
#include <string>

#include "plap/asymptotics.hpp"

namespace plap {

enum class PlotKind { supnorm_vs_q, lambda_vs_q, rate };

PlotKind plot_kind_from_string(const std::string& name);
std::string to_string(PlotKind kind);

struct PlotOptions {
  /// Horizontal reference: theta_p for supnorm_vs_q, lambda_p for lambda_vs_q.
  std::optional<double> reference;
  /// Required for `rate` (the abscissa is |q - p|).
  std::optional<double> p;
};

/// 800x600 SVG document. Output depends only on the inputs.
/// Throws SchemaError("no data rows") for an empty sweep.
std::string plot_svg(const SweepResult& sweep, PlotKind kind, const PlotOptions& opts = {});

void write_plot(const std::string& path, const SweepResult& sweep, PlotKind kind, const PlotOptions& opts = {});

}  // namespace plap
