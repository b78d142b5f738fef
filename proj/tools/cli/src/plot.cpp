#include "strider_cli/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace strider::cli {

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

CsvTable parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    CsvTable table;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (table.header.empty()) {
            table.header = split_row(line);
            if (table.header.size() < 2) throw PlotError("CSV header needs at least two columns");
            continue;
        }
        const auto cells = split_row(line);
        if (cells.size() != table.header.size()) {
            throw PlotError("line " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                            " cells, got " + std::to_string(cells.size()));
        }
        std::vector<std::optional<double>> row;
        for (const auto& cell : cells) {
            if (cell.empty()) {
                row.emplace_back();
                continue;
            }
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
                throw PlotError("line " + std::to_string(line_no) + ": non-numeric cell '" + cell + "'");
            }
            row.emplace_back(v);
        }
        if (!row.front()) throw PlotError("line " + std::to_string(line_no) + ": missing x value");
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw PlotError("CSV is empty");
    if (table.rows.empty()) throw PlotError("CSV has a header but no data rows");
    return table;
}

std::string render_svg(const CsvTable& table, const PlotOptions& options) {
    std::vector<std::size_t> series;
    if (options.columns.empty()) {
        for (std::size_t c = 1; c < table.header.size(); ++c) series.push_back(c);
    } else {
        for (const auto& name : options.columns) {
            const auto it = std::find(table.header.begin() + 1, table.header.end(), name);
            if (it == table.header.end()) throw PlotError("no column named '" + name + "'");
            series.push_back(static_cast<std::size_t>(it - table.header.begin()));
        }
    }
    std::erase_if(series, [&](std::size_t c) {
        return std::none_of(table.rows.begin(), table.rows.end(), [&](const auto& r) { return r[c].has_value(); });
    });
    if (series.empty()) throw PlotError("no column has any data");

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& r : table.rows) {
        xmin = std::min(xmin, *r[0]);
        xmax = std::max(xmax, *r[0]);
        for (std::size_t c : series) {
            if (!r[c]) continue;
            ymin = std::min(ymin, *r[c]);
            ymax = std::max(ymax, *r[c]);
        }
    }
    if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
    if (ymax == ymin) { ymin -= 0.5; ymax += 0.5; }

    const double left = 70, right = 170, top = 40, bottom = 60;
    const double pw = options.width - left - right;
    const double ph = options.height - top - bottom;
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!options.title.empty()) {
        svg << "<text x=\"" << coord(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
            << escape(options.title) << "</text>\n";
    }
    svg << "<g class=\"axes\" stroke=\"black\">\n"
        << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(top + ph) << "\" x2=\"" << coord(left + pw) << "\" y2=\""
        << coord(top + ph) << "\"/>\n"
        << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(top) << "\" x2=\"" << coord(left) << "\" y2=\""
        << coord(top + ph) << "\"/>\n</g>\n";
    constexpr int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double fx = xmin + (xmax - xmin) * i / ticks;
        const double fy = ymin + (ymax - ymin) * i / ticks;
        svg << "<text x=\"" << coord(sx(fx)) << "\" y=\"" << coord(top + ph + 18) << "\" text-anchor=\"middle\">" << num(fx)
            << "</text>\n";
        svg << "<text x=\"" << coord(left - 8) << "\" y=\"" << coord(sy(fy) + 4) << "\" text-anchor=\"end\">" << num(fy)
            << "</text>\n";
    }
    const std::string ylabel = series.size() == 1 ? table.header[series[0]] : "value";
    svg << "<text class=\"xlabel\" x=\"" << coord(left + pw / 2) << "\" y=\"" << coord(options.height - 15.0)
        << "\" text-anchor=\"middle\">" << escape(table.header[0]) << "</text>\n";
    svg << "<text class=\"ylabel\" x=\"18\" y=\"" << coord(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << coord(top + ph / 2) << ")\">" << escape(ylabel) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const std::size_t c = series[k];
        const char* color = palette[k % std::size(palette)];
        std::ostringstream points;
        std::ostringstream dots;
        for (const auto& r : table.rows) {
            if (!r[c]) continue;
            points << coord(sx(*r[0])) << "," << coord(sy(*r[c])) << " ";
            dots << "<circle class=\"point\" cx=\"" << coord(sx(*r[0])) << "\" cy=\"" << coord(sy(*r[c])) << "\" r=\"3\" fill=\""
                 << color << "\"/>\n";
        }
        std::string pts = points.str();
        pts.pop_back();
        svg << "<g class=\"series\" data-name=\"" << escape(table.header[c]) << "\">\n"
            << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << pts << "\"/>\n"
            << dots.str() << "</g>\n";
    }

    svg << "<g class=\"legend\">\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double y = top + 10 + 20.0 * static_cast<double>(k);
        const double x = left + pw + 20;
        svg << "<line x1=\"" << coord(x) << "\" y1=\"" << coord(y) << "\" x2=\"" << coord(x + 24) << "\" y2=\"" << coord(y)
            << "\" stroke=\"" << palette[k % std::size(palette)] << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << coord(x + 30) << "\" y=\"" << coord(y + 4) << "\">" << escape(table.header[series[k]])
            << "</text>\n";
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

}  // namespace strider::cli
