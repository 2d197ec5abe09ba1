#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gemsim {

/// Deterministic CSV emitter. Doubles print with %.17g, so identical
/// runs produce byte-identical files and values round-trip exactly.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {
        for (size_t i = 0; i < columns_.size(); ++i) {
            if (i) out_ << ",";
            out_ << columns_[i];
        }
        out_ << "\n";
    }

    void add_row(const std::vector<double>& values) {
        if (values.size() != columns_.size())
            throw std::invalid_argument("CsvWriter: row width does not match header");
        char buf[32];
        for (size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ",";
            std::snprintf(buf, sizeof buf, "%.17g", values[i]);
            out_ << buf;
        }
        out_ << "\n";
    }

    std::string str() const { return out_.str(); }

    void write(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("CsvWriter: cannot open " + path);
        f << out_.str();
    }

private:
    std::vector<std::string> columns_;
    std::ostringstream out_;
};

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column_index(const std::string& name) const {
        for (size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }

    std::vector<double> column(const std::string& name) const {
        const int idx = column_index(name);
        if (idx < 0) throw std::invalid_argument("csv: no column named " + name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[idx]);
        return out;
    }
};

inline CsvTable csv_read(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("csv_read: cannot open " + path);
    CsvTable table;
    std::string line;
    bool header = true;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (header) {
            table.columns = cells;
            header = false;
            continue;
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(std::stod(c));
        if (row.size() != table.columns.size())
            throw std::runtime_error("csv_read: ragged row in " + path);
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace gemsim
