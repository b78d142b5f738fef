#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace strider::cli {

class PlotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numeric CSV with a header row. Empty cells are missing values.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::optional<double>>> rows;
};

/// Throws PlotError on an empty body, ragged rows or non-numeric cells.
CsvTable parse_csv(const std::string& text);

struct PlotOptions {
    std::string title;
    /// Columns to draw; empty draws every column after the first.
    std::vector<std::string> columns;
    int width = 720;
    int height = 440;
};

/// Line chart of each selected column against the first column: one
/// polyline and one circle per data point per series, axis labels and a
/// legend.
std::string render_svg(const CsvTable& table, const PlotOptions& options = {});

}  // namespace strider::cli
