#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace htbem {

// CSV emission with reproducible number formatting: every real is printed with
// %.17g so identical runs produce byte-identical artifacts.

std::string format_real(double v);

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void write_row(const std::vector<double>& values);
    // Mixed rows: leading text cells followed by numeric cells.
    void write_row(const std::vector<std::string>& text_cells,
                   const std::vector<double>& values);

  private:
    std::ofstream out_;
    std::size_t columns_ = 0;
};

} // namespace htbem
