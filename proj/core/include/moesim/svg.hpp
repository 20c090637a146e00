#pragma once

#include <string>

#include <Eigen/Dense>

namespace moesim {

// Writes a heatmap of `m` as an SVG grid. Cell fill interpolates the
// diverging palette  #2166ac (-1) -> #f7f7f7 (0) -> #b2182b (+1)  linearly
// over [-1, 1] (values outside are clamped). Rows are labeled i, columns j,
// and each cell carries its value as a <title> tooltip.
void emit_heatmap(const Eigen::MatrixXd& m, const std::string& out_path);

}  // namespace moesim
