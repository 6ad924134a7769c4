#pragma once

#include <string>
#include <vector>

namespace subfront::output {

// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

// Rows of already formatted cells, written with '\n' line ends.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(std::vector<std::string> row);
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    bool dashed = false;
};

struct PlotSpec {
    std::string title, x_label, y_label;
    bool log_x = false, log_y = false;
};

// Self-contained SVG line plot. Non-finite points (and non-positive ones on log axes) are skipped.
std::string svg_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace subfront::output
