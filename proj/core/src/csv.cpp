#include "dtrack/csv.hpp"

#include <cstdio>

#include "dtrack/errors.hpp"

namespace dtrack {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), n_cols_(header.size()), path_(path) {
    if (!out_) throw IoError("cannot open " + path + " for writing");
    if (header.empty()) throw ConfigError("CSV header must not be empty");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != n_cols_)
        throw ConfigError("CSV row width " + std::to_string(values.size()) +
                          " does not match header width " + std::to_string(n_cols_));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        out_ << format_double(values[i]);
    }
    out_ << '\n';
    if (!out_) throw IoError("write failed on " + path_);
}

void CsvWriter::row(const std::string& label, const std::vector<double>& values) {
    if (values.size() + 1 != n_cols_)
        throw ConfigError("CSV row width " + std::to_string(values.size() + 1) +
                          " does not match header width " + std::to_string(n_cols_));
    out_ << label;
    for (double v : values) out_ << ',' << format_double(v);
    out_ << '\n';
    if (!out_) throw IoError("write failed on " + path_);
}

void emit_plotdata(const std::string& path, const std::vector<PlotSeries>& series) {
    CsvWriter writer(path, {"series", "t", "value"});
    for (const auto& [name, points] : series)
        for (const auto& [t, value] : points) writer.row(name, {t, value});
}

} // namespace dtrack
