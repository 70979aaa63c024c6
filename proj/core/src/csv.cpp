#include "htbem/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace htbem {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::write_row(const std::vector<double>& values) {
    write_row({}, values);
}

void CsvWriter::write_row(const std::vector<std::string>& text_cells,
                          const std::vector<double>& values) {
    if (text_cells.size() + values.size() != columns_)
        throw std::runtime_error("CsvWriter: row width does not match header");
    std::size_t col = 0;
    for (const auto& c : text_cells) out_ << (col++ ? "," : "") << c;
    for (double v : values) out_ << (col++ ? "," : "") << format_real(v);
    out_ << '\n';
    out_.flush();
}

} // namespace htbem
