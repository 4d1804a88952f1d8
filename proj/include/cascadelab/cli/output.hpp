#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cascadelab::cli {

// Shortest decimal that parses back to the same double; "nan", "inf", "-inf" otherwise.
std::string format_number(double v);

// CSV rows with a fixed header. Missing values are written as empty fields.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(const std::vector<std::optional<double>>& values);
    std::size_t rows() const noexcept { return rows_.size(); }
    const std::vector<std::string>& header() const noexcept { return header_; }

    void write(std::ostream& out) const;
    // Throws IoError when the file cannot be written.
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::optional<double>>> rows_;
};

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

// Polyline chart with automatic axis ranges.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

// Grayscale heatmap of values in [0, 1] (darker is larger) over a regular
// grid; cells without a value are drawn hatched. Overlaid series are drawn as
// polylines in data coordinates.
struct Heatmap {
    std::vector<double> x;  // column centers
    std::vector<double> y;  // row centers
    // values[row][col]
    std::vector<std::vector<std::optional<double>>> values;
};
std::string heatmap_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                        const Heatmap& map, const std::vector<Series>& overlays);

void save_text(const std::filesystem::path& path, const std::string& text);

// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace cascadelab::cli
