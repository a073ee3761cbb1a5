#ifndef FLOWSPEC_SVG_HPP
#define FLOWSPEC_SVG_HPP

#include <string>
#include <vector>

#include "flowspec/linalg.hpp"

namespace flowspec::svg {

/// Scatter of the first two columns of `coords` (n x q). With a third
/// column, point shade encodes it (dark = low, light = high).
std::string scatter(const MatrixXd &coords, const std::string &title);

struct Series {
    std::string label;
    VectorXd values;
};

/// Overlay line chart, x = 1-based index.
std::string line_chart(const std::vector<Series> &series, const std::string &title,
                       const std::string &y_label);

} // namespace flowspec::svg

#endif // FLOWSPEC_SVG_HPP
