#pragma once

// Internal static SVG rendering for the analysis emitters. Deterministic:
// fixed canvas, fixed tick policy, fixed number formatting.

#include <string>
#include <vector>

namespace gepa {

std::string svg_line_plot(const std::vector<double>& xs, const std::vector<double>& ys,
                          const std::string& x_label, const std::string& y_label);

std::string svg_scatter_path_plot(const std::vector<double>& xs, const std::vector<double>& ys,
                                  const std::vector<std::string>& point_labels,
                                  const std::string& x_label, const std::string& y_label);

}  // namespace gepa
