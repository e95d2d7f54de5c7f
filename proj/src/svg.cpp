#include "sitepath/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace sitepath {

namespace {

constexpr int kPx = 24;
constexpr int kTitle = 20;

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Row 0 is at the bottom of the picture.
int px_x(const WeightedGridMap&, int x) { return x * kPx; }
int px_y(const WeightedGridMap& m, int y) { return kTitle + (m.height() - 1 - y) * kPx; }

void open_svg(std::ostringstream& out, const WeightedGridMap& m, const std::string& title) {
    const int w = m.width() * kPx, h = m.height() * kPx + kTitle;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
        << ' ' << h << "\">\n"
        << "<title>" << escape(title) << "</title>\n"
        << "<text x=\"4\" y=\"15\" font-family=\"sans-serif\" font-size=\"13\">" << escape(title) << "</text>\n";
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            const Cell c{x, y};
            const char* fill = m.is_obstacle(c) ? "#333333" : m.is_unknown(c) ? "#999999" : "#ffffff";
            out << "<rect x=\"" << px_x(m, x) << "\" y=\"" << px_y(m, y) << "\" width=\"" << kPx << "\" height=\""
                << kPx << "\" fill=\"" << fill << "\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n";
        }
}

double centre_x(const WeightedGridMap& m, int x) { return px_x(m, x) + kPx / 2.0; }
double centre_y(const WeightedGridMap& m, int y) { return px_y(m, y) + kPx / 2.0; }

}  // namespace

std::string vertex_heatmap_svg(const WeightedGridMap& map, const std::map<Cell, double, RowMajorLess>& counts,
                               const std::string& title) {
    std::ostringstream out;
    open_svg(out, map, title);
    double peak = 0.0;
    for (const auto& [c, n] : counts) peak = std::max(peak, n);
    for (const auto& [c, n] : counts) {
        if (!map.in_bounds(c) || n <= 0.0) continue;
        out << "<rect x=\"" << px_x(map, c.x) << "\" y=\"" << px_y(map, c.y) << "\" width=\"" << kPx
            << "\" height=\"" << kPx << "\" fill=\"#d62728\" fill-opacity=\"" << num(n / peak) << "\"><title>("
            << c.x << "," << c.y << ") " << num(n) << "</title></rect>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string edge_heatmap_svg(const WeightedGridMap& map, const std::map<EdgeKey, double>& counts,
                             const std::string& title) {
    std::ostringstream out;
    open_svg(out, map, title);
    double peak = 0.0;
    for (const auto& [e, n] : counts) peak = std::max(peak, n);
    for (const auto& [e, n] : counts) {
        if (!map.in_bounds(e.first) || !map.in_bounds(e.second) || n <= 0.0) continue;
        out << "<line x1=\"" << centre_x(map, e.first.x) << "\" y1=\"" << centre_y(map, e.first.y) << "\" x2=\""
            << centre_x(map, e.second.x) << "\" y2=\"" << centre_y(map, e.second.y)
            << "\" stroke=\"#1f77b4\" stroke-width=\"6\" stroke-linecap=\"round\" stroke-opacity=\"" << num(n / peak)
            << "\"><title>(" << e.first.x << "," << e.first.y << ")-(" << e.second.x << "," << e.second.y << ") "
            << num(n) << "</title></line>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string paths_svg(const WeightedGridMap& map, const Schedule& schedule, const std::string& title) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    std::ostringstream out;
    open_svg(out, map, title);
    std::size_t k = 0;
    for (const auto& [id, path] : schedule) {
        const char* colour = palette[k++ % std::size(palette)];
        out << "<g><title>" << escape(id) << "</title>\n<polyline fill=\"none\" stroke=\"" << colour
            << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < path.cells.size(); ++i) {
            if (i) out << ' ';
            out << centre_x(map, path.cells[i].x) << ',' << centre_y(map, path.cells[i].y);
        }
        out << "\"/>\n";
        const Cell s = path.cells.front(), g = path.cells.back();
        out << "<circle cx=\"" << centre_x(map, s.x) << "\" cy=\"" << centre_y(map, s.y) << "\" r=\"4\" fill=\""
            << colour << "\"/>\n";
        out << "<rect x=\"" << centre_x(map, g.x) - 4 << "\" y=\"" << centre_y(map, g.y) - 4
            << "\" width=\"8\" height=\"8\" fill=\"" << colour << "\"/>\n</g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace sitepath
