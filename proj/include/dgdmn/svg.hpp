#pragma once

#include <string>
#include <vector>

namespace dgdmn {

struct SvgSeries {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
};

// Minimal self-contained SVG line chart (axes, ticks, legend); no external
// tooling involved.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<SvgSeries>& series);

} // namespace dgdmn
