#include "stabkit/table.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "stabkit/errors.hpp"

#include <nlohmann/json.hpp>

namespace stabkit {

namespace {

bool all_distinct(const std::vector<std::string>& labels) {
    std::unordered_set<std::string> seen;
    for (const auto& l : labels)
        if (!seen.insert(l).second) return false;
    return true;
}

std::vector<std::string> auto_labels(char prefix, std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(prefix + std::to_string(i));
    return out;
}

std::string trim(std::string s) {
    auto issp = [](unsigned char c) { return c == ' ' || c == '\t'; };
    while (!s.empty() && issp(s.back())) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && issp(s[i])) ++i;
    return s.substr(i);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line, std::size_t col) {
    double v = 0.0;
    const char* b = cell.data();
    const char* e = b + cell.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw parse_error("malformed number '" + cell + "' at line " +
                              std::to_string(line) + ", column " +
                              std::to_string(col),
                          line, col);
    return v;
}

} // namespace

FormulaTable::FormulaTable(std::vector<std::string> row_labels,
                           std::vector<std::string> col_labels,
                           std::vector<double> values)
    : row_labels_(std::move(row_labels)), col_labels_(std::move(col_labels)),
      values_(std::move(values)) {
    if (row_labels_.empty() || col_labels_.empty())
        throw validation_error("table must have at least one row and column");
    if (values_.size() != row_labels_.size() * col_labels_.size())
        throw validation_error(
            "table has " + std::to_string(values_.size()) + " values, expected " +
            std::to_string(row_labels_.size() * col_labels_.size()));
    if (!all_distinct(row_labels_))
        throw validation_error("duplicate row label");
    if (!all_distinct(col_labels_))
        throw validation_error("duplicate column label");

    boolean_ = true;
    const std::size_t c = col_labels_.size();
    for (std::size_t k = 0; k < values_.size(); ++k) {
        const double v = values_[k];
        if (!(v >= 0.0 && v <= 1.0))
            throw validation_error(
                "value " + std::to_string(v) + " out of [0,1] at row " +
                std::to_string(k / c + 1) + ", col " + std::to_string(k % c + 1));
        if (v != 0.0 && v != 1.0) boolean_ = false;
    }
}

FormulaTable parse_table_csv(const std::string& text,
                             const std::string& source_name) {
    std::vector<std::string> lines;
    {
        std::string cur;
        for (char c : text) {
            if (c == '\n') {
                if (!cur.empty() && cur.back() == '\r') cur.pop_back();
                lines.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty() && cur.back() == '\r') cur.pop_back();
        if (!cur.empty()) lines.push_back(cur);
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty())
        throw parse_error(source_name + ": empty table file", 1, 1);

    std::vector<std::string> col_labels;
    bool has_row_labels = false;
    std::size_t first_data_line = 0;

    if (!lines[0].empty() && lines[0][0] == '#') {
        auto header = split_csv_line(lines[0].substr(1));
        if (!header.empty() && header[0] == "labels") {
            has_row_labels = true;
            header.erase(header.begin());
        }
        col_labels = std::move(header);
        first_data_line = 1;
        if (first_data_line >= lines.size())
            throw parse_error(source_name + ": header but no data rows", 2, 1);
    }

    std::vector<std::string> row_labels;
    std::vector<double> values;
    std::size_t ncols = 0;

    for (std::size_t li = first_data_line; li < lines.size(); ++li) {
        const std::size_t lineno = li + 1;
        if (trim(lines[li]).empty())
            throw parse_error(source_name + ": blank line " +
                                  std::to_string(lineno) + " inside table",
                              lineno, 1);
        auto cells = split_csv_line(lines[li]);
        if (has_row_labels) {
            if (cells.size() < 2)
                throw parse_error(source_name + ": line " +
                                      std::to_string(lineno) +
                                      " has no data cells after the row label",
                                  lineno, 1);
            row_labels.push_back(cells.front());
            cells.erase(cells.begin());
        }
        if (ncols == 0) {
            ncols = cells.size();
        } else if (cells.size() != ncols) {
            throw parse_error(source_name + ": line " + std::to_string(lineno) +
                                  " has " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(ncols),
                              lineno, cells.size());
        }
        const std::size_t data_row = li - first_data_line + 1;
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const double v = parse_cell(cells[ci], lineno, ci + 1);
            if (!(v >= 0.0 && v <= 1.0))
                throw validation_error(
                    source_name + ": value " + cells[ci] + " out of [0,1] at row " +
                    std::to_string(data_row) + ", col " + std::to_string(ci + 1));
            values.push_back(v);
        }
    }

    const std::size_t nrows = has_row_labels
                                  ? row_labels.size()
                                  : lines.size() - first_data_line;
    if (col_labels.empty())
        col_labels = auto_labels('c', ncols);
    else if (col_labels.size() != ncols)
        throw parse_error(source_name + ": header names " +
                              std::to_string(col_labels.size()) +
                              " columns but rows have " + std::to_string(ncols),
                          1, 1);
    if (!has_row_labels) row_labels = auto_labels('r', nrows);

    return FormulaTable(std::move(row_labels), std::move(col_labels),
                        std::move(values));
}

FormulaTable load_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw parse_error("cannot open table file: " + path, 0, 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_table_csv(buf.str(), path);
}

std::string table_to_csv(const FormulaTable& t) {
    std::ostringstream out;
    out << "#labels";
    for (const auto& c : t.col_labels()) out << ',' << c;
    out << '\n';
    char num[64];
    for (std::size_t i = 0; i < t.rows(); ++i) {
        out << t.row_labels()[i];
        for (std::size_t j = 0; j < t.cols(); ++j) {
            auto res = std::to_chars(num, num + sizeof(num), t.at(i, j));
            out << ',' << std::string_view(num, res.ptr - num);
        }
        out << '\n';
    }
    return out.str();
}

FormulaTable transpose(const FormulaTable& t) {
    std::vector<double> v(t.rows() * t.cols());
    for (std::size_t i = 0; i < t.rows(); ++i)
        for (std::size_t j = 0; j < t.cols(); ++j)
            v[j * t.rows() + i] = t.at(i, j);
    return FormulaTable(t.col_labels(), t.row_labels(), std::move(v));
}

FormulaTable from_group(const GroupFunction& g) {
    const std::size_t n = g.order;
    if (n == 0) throw validation_error("group order must be positive");
    if (g.cayley.size() != n * n)
        throw validation_error("cayley table must be order x order");
    if (g.f_values.size() != n)
        throw validation_error("f must have one value per group element");
    for (double v : g.f_values)
        if (!(v >= 0.0 && v <= 1.0))
            throw validation_error("f value " + std::to_string(v) +
                                   " out of [0,1]");

    // Latin square: every row and every column is a permutation of 0..n-1.
    std::vector<char> seen(n);
    for (std::size_t r = 0; r < n; ++r) {
        std::fill(seen.begin(), seen.end(), 0);
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t x = g.cayley[r * n + c];
            if (x >= n || seen[x])
                throw validation_error("cayley row " + std::to_string(r) +
                                       " is not a permutation");
            seen[x] = 1;
        }
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::fill(seen.begin(), seen.end(), 0);
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t x = g.cayley[r * n + c];
            if (x >= n || seen[x])
                throw validation_error("cayley column " + std::to_string(c) +
                                       " is not a permutation");
            seen[x] = 1;
        }
    }

    std::vector<double> v(n * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            v[r * n + c] = g.f_values[g.cayley[r * n + c]];
    return FormulaTable(auto_labels('g', n), auto_labels('h', n), std::move(v));
}

FormulaTable restrict(const FormulaTable& t,
                      const std::vector<std::size_t>& row_subset,
                      const std::vector<std::size_t>& col_subset) {
    if (row_subset.empty()) throw validation_error("empty row subset");
    if (col_subset.empty()) throw validation_error("empty column subset");
    for (std::size_t i : row_subset)
        if (i >= t.rows())
            throw validation_error("row index " + std::to_string(i) +
                                   " out of range");
    for (std::size_t j : col_subset)
        if (j >= t.cols())
            throw validation_error("column index " + std::to_string(j) +
                                   " out of range");

    std::vector<std::string> rl, cl;
    for (std::size_t i : row_subset) rl.push_back(t.row_labels()[i]);
    for (std::size_t j : col_subset) cl.push_back(t.col_labels()[j]);
    std::vector<double> v;
    v.reserve(row_subset.size() * col_subset.size());
    for (std::size_t i : row_subset)
        for (std::size_t j : col_subset) v.push_back(t.at(i, j));
    return FormulaTable(std::move(rl), std::move(cl), std::move(v));
}

GroupFunction load_group(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw parse_error("cannot open group file: " + path, 0, 0);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what(), 0, 0);
    }
    GroupFunction g;
    try {
        g.order = j.at("order").get<std::size_t>();
        for (const auto& row : j.at("cayley"))
            for (const auto& x : row)
                g.cayley.push_back(x.get<std::size_t>());
        for (const auto& x : j.at("f")) g.f_values.push_back(x.get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what(), 0, 0);
    }
    return g;
}

} // namespace stabkit
