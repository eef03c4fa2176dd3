#pragma once

#include <string>
#include <vector>

#include "smtad/preprocess.hpp"

namespace smtad::csv {

// Parsed CSV file; the header row is auto-detected (first row with any cell
// that does not parse as a number).
struct Table {
    bool has_header = false;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t cols() const { return rows.empty() ? header.size() : rows.front().size(); }
};

Table read_table(const std::string& path);

// Builds a RawDataset from a table. `label_col` is a column name (needs a
// header) or a 0-based index given as digits. Rows whose label value is in
// `normal_labels` get y = 0, everything else y = 1.
RawDataset to_raw_dataset(const Table& table, const std::string& label_col,
                          const std::vector<std::string>& normal_labels);

// Column selection by 1-based original indices (feature-selection retrain).
RawDataset select_columns(const RawDataset& data, const std::vector<int>& sites_one_based);

// Shortest-round-trip decimal representation.
std::string format_double(double v);

void write_rows(const std::string& path, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows);

}  // namespace smtad::csv
