#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace dtrack {

// Doubles are written with a fixed "%.12g" so identical computations produce
// byte-identical files.
std::string format_double(double v);

// Minimal CSV writer. Throws IoError if the file cannot be opened; numbers go
// through format_double.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(const std::vector<double>& values);
    // First cell is a label, the rest numeric.
    void row(const std::string& label, const std::vector<double>& values);

private:
    std::ofstream out_;
    std::size_t n_cols_ = 0;
    std::string path_;
};

// Long-format plot data: header "series,t,value", one row per point, series
// in the order given. Throws IoError on unwritable paths.
using PlotSeries = std::pair<std::string, std::vector<std::pair<double, double>>>;
void emit_plotdata(const std::string& path, const std::vector<PlotSeries>& series);

} // namespace dtrack
