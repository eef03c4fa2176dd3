#include "smtad/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>

namespace smtad::csv {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(ch);
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end && !s.empty();
}

}  // namespace

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open " + path);
    Table table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (first) {
            first = false;
            bool numeric = true;
            double unused;
            for (const auto& c : cells)
                if (!parse_double(c, unused)) {
                    numeric = false;
                    break;
                }
            if (!numeric) {
                table.has_header = true;
                table.header = std::move(cells);
                continue;
            }
        }
        if (!table.rows.empty() && cells.size() != table.rows.front().size())
            throw std::runtime_error("csv: ragged row in " + path);
        table.rows.push_back(std::move(cells));
    }
    if (table.has_header && !table.rows.empty() && table.header.size() != table.rows.front().size())
        throw std::runtime_error("csv: header width does not match rows in " + path);
    return table;
}

RawDataset to_raw_dataset(const Table& table, const std::string& label_col,
                          const std::vector<std::string>& normal_labels) {
    if (table.rows.empty()) throw std::runtime_error("csv: no data rows");
    const std::size_t width = table.rows.front().size();

    std::size_t label_idx = width;
    if (!label_col.empty() && std::all_of(label_col.begin(), label_col.end(),
                                          [](char c) { return c >= '0' && c <= '9'; })) {
        label_idx = static_cast<std::size_t>(std::stoul(label_col));
    } else {
        if (!table.has_header)
            throw std::runtime_error("csv: label column named '" + label_col +
                                     "' needs a header row");
        for (std::size_t i = 0; i < table.header.size(); ++i)
            if (table.header[i] == label_col) {
                label_idx = i;
                break;
            }
    }
    if (label_idx >= width)
        throw std::runtime_error("csv: label column '" + label_col + "' not found");

    RawDataset data;
    data.rows = table.rows.size();
    data.cols = width - 1;
    data.values.reserve(data.rows * data.cols);
    data.labels.reserve(data.rows);
    if (table.has_header)
        for (std::size_t i = 0; i < width; ++i)
            if (i != label_idx) data.feature_names.push_back(table.header[i]);

    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < width; ++i) {
            if (i == label_idx) continue;
            double v;
            if (!parse_double(row[i], v))
                throw std::runtime_error("csv: non-numeric feature value '" + row[i] + "'");
            data.values.push_back(v);
        }
        const std::string& y = row[label_idx];
        const bool normal = std::find(normal_labels.begin(), normal_labels.end(), y) !=
                            normal_labels.end();
        data.labels.push_back(normal ? 0 : 1);
    }
    data.validate();
    return data;
}

RawDataset select_columns(const RawDataset& data, const std::vector<int>& sites_one_based) {
    RawDataset out;
    out.rows = data.rows;
    out.cols = sites_one_based.size();
    out.values.reserve(out.rows * out.cols);
    out.labels = data.labels;
    for (int s : sites_one_based)
        if (s < 1 || static_cast<std::size_t>(s) > data.cols)
            throw std::domain_error("select_columns: site index out of range");
    if (!data.feature_names.empty())
        for (int s : sites_one_based) out.feature_names.push_back(data.feature_names[s - 1]);
    for (std::size_t r = 0; r < data.rows; ++r)
        for (int s : sites_one_based) out.values.push_back(data.at(r, static_cast<std::size_t>(s - 1)));
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("csv: double formatting failed");
    return std::string(buf, ptr);
}

void write_rows(const std::string& path, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("csv: cannot write " + path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    if (!out) throw std::runtime_error("csv: write failed for " + path);
}

}  // namespace smtad::csv
