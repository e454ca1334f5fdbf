#ifndef RANGESHIFT_CSV_HPP
#define RANGESHIFT_CSV_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rangeshift/common.hpp"

namespace rangeshift {

/// CSV writer: UTF-8, header row, '.' decimal separator, '\n' line endings,
/// values formatted with %.17g. Rows are written in call order.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw Error("csv.write: cannot open " + path);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << fmt_g17(values[i]);
        }
        out_ << '\n';
    }
    void raw_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("csv.read: cannot open " + path);
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        if (first) {
            while (std::getline(ss, cell, ',')) table.header.push_back(cell);
            first = false;
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw Error("csv.read: bad number '" + cell + "' in " + path);
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace rangeshift

#endif
