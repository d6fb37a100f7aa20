/*
   Copyright 2026 The atomchip Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace atomchip {

/// Scalar map on a regular nx x ny grid; values[j * nx + i] sits at column i, row j.
struct Heatmap {
    int nx = 0;
    int ny = 0;
    std::vector<double> values;
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
    std::string title;
    std::string x_label;
    std::string y_label;
    std::string value_label;
    /// Colour by log10 of the value.
    bool log_scale = false;
};

void write_heatmap_svg(std::ostream& out, const Heatmap& map);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = true;
};

struct PlotAxes {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
};

void write_line_plot_svg(std::ostream& out, const std::vector<PlotSeries>& series, const PlotAxes& axes);

}  // namespace atomchip
