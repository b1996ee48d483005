#pragma once

#include <string>
#include <vector>

#include "gsmap/image.hpp"

namespace gsmap {

// Renders xs vs ys as a line chart with axes and numeric tick labels and
// writes it as a PNG. Points are drawn in x order as given.
void plot_curve(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& png_path, int width = 640, int height = 400);

} // namespace gsmap
