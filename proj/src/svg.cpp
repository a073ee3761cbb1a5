#include "flowspec/svg.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace flowspec::svg {

namespace {

constexpr double width = 640.0;
constexpr double height = 480.0;
constexpr double margin = 56.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

struct Range {
    double lo;
    double hi;

    double map(double v, double out_lo, double out_hi) const {
        const double span = hi - lo;
        const double f = span > 0.0 ? (v - lo) / span : 0.5;
        return out_lo + f * (out_hi - out_lo);
    }
};

Range range_of(const double *first, const double *last) {
    if (first == last) {
        return {0.0, 1.0};
    }
    auto [lo, hi] = std::minmax_element(first, last);
    Range r{*lo, *hi};
    if (r.hi == r.lo) {
        r.lo -= 0.5;
        r.hi += 0.5;
    }
    return r;
}

std::string header(const std::string &title) {
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
                      "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
                      num(height) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
           "\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">" +
           escape(title) + "</text>\n";
    out += "<rect x=\"" + num(margin) + "\" y=\"" + num(margin) + "\" width=\"" +
           num(width - 2 * margin) + "\" height=\"" + num(height - 2 * margin) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    return out;
}

std::string axis_labels(const Range &x, const Range &y, const std::string &x_label,
                        const std::string &y_label) {
    std::string out;
    const std::string font = "font-family=\"sans-serif\" font-size=\"11\"";
    out += "<text x=\"" + num(margin) + "\" y=\"" + num(height - margin + 16) + "\" " + font +
           ">" + num(x.lo) + "</text>\n";
    out += "<text x=\"" + num(width - margin) + "\" y=\"" + num(height - margin + 16) +
           "\" text-anchor=\"end\" " + font + ">" + num(x.hi) + "</text>\n";
    out += "<text x=\"" + num(margin - 4) + "\" y=\"" + num(height - margin) +
           "\" text-anchor=\"end\" " + font + ">" + num(y.lo) + "</text>\n";
    out += "<text x=\"" + num(margin - 4) + "\" y=\"" + num(margin + 10) +
           "\" text-anchor=\"end\" " + font + ">" + num(y.hi) + "</text>\n";
    out += "<text x=\"" + num(width / 2) + "\" y=\"" + num(height - 12) +
           "\" text-anchor=\"middle\" " + font + ">" + escape(x_label) + "</text>\n";
    out += "<text x=\"16\" y=\"" + num(height / 2) + "\" text-anchor=\"middle\" " + font +
           " transform=\"rotate(-90 16 " + num(height / 2) + ")\">" + escape(y_label) +
           "</text>\n";
    return out;
}

} // namespace

std::string scatter(const MatrixXd &coords, const std::string &title) {
    std::string out = header(title);
    const Index n = coords.rows();
    if (n == 0 || coords.cols() == 0) {
        return out + "</svg>\n";
    }
    const VectorXd xs = coords.col(0);
    const VectorXd ys = coords.cols() > 1 ? VectorXd(coords.col(1)) : VectorXd::Zero(n);
    const Range xr = range_of(xs.data(), xs.data() + n);
    const Range yr = range_of(ys.data(), ys.data() + n);
    out += axis_labels(xr, yr, "c1", coords.cols() > 1 ? "c2" : "");

    Range shade{0.0, 1.0};
    VectorXd zs;
    if (coords.cols() > 2) {
        zs = coords.col(2);
        shade = range_of(zs.data(), zs.data() + n);
    }
    for (Index i = 0; i < n; ++i) {
        const double px = xr.map(xs(i), margin, width - margin);
        const double py = yr.map(ys(i), height - margin, margin);
        int level = 64;
        if (zs.size() == n) {
            level = static_cast<int>(shade.map(zs(i), 0.0, 200.0));
        }
        char color[8];
        std::snprintf(color, sizeof color, "#%02x%02x%02x", level, level, 255);
        out += "<circle cx=\"" + num(px) + "\" cy=\"" + num(py) + "\" r=\"2.5\" fill=\"" +
               color + "\"/>\n";
    }
    return out + "</svg>\n";
}

std::string line_chart(const std::vector<Series> &series, const std::string &title,
                       const std::string &y_label) {
    std::string out = header(title);
    std::vector<double> all;
    Index longest = 0;
    for (const auto &s : series) {
        all.insert(all.end(), s.values.data(), s.values.data() + s.values.size());
        longest = std::max(longest, s.values.size());
    }
    Range yr = range_of(all.data(), all.data() + all.size());
    yr.lo = std::min(yr.lo, 0.0);
    const Range xr{1.0, static_cast<double>(std::max<Index>(longest, 2))};
    out += axis_labels(xr, yr, "index", y_label);

    constexpr std::array<const char *, 4> palette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto &s = series[k];
        const char *color = palette[k % palette.size()];
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"";
        for (Index i = 0; i < s.values.size(); ++i) {
            if (i > 0) {
                out += " ";
            }
            out += num(xr.map(static_cast<double>(i + 1), margin, width - margin)) + "," +
                   num(yr.map(s.values(i), height - margin, margin));
        }
        out += "\"/>\n";
        const double ly = margin + 16.0 + 16.0 * static_cast<double>(k);
        out += "<line x1=\"" + num(width - margin - 120) + "\" y1=\"" + num(ly) + "\" x2=\"" +
               num(width - margin - 100) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + num(width - margin - 94) + "\" y=\"" + num(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(s.label) + "</text>\n";
    }
    return out + "</svg>\n";
}

} // namespace flowspec::svg
