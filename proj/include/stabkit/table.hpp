#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace stabkit {

/// Finite matrix of formula values in [0,1] with labelled axes.
///
/// Rows play the role of left-hand parameters (each row is an instance
/// phi(a, .) over the column set), columns the right-hand ones. Immutable
/// after construction; all operations below return fresh tables.
class FormulaTable {
public:
    // Throws validation_error on shape mismatch, out-of-range values or
    // duplicate labels. The boolean flag is always recomputed from data.
    FormulaTable(std::vector<std::string> row_labels,
                 std::vector<std::string> col_labels,
                 std::vector<double> values);

    std::size_t rows() const { return row_labels_.size(); }
    std::size_t cols() const { return col_labels_.size(); }
    bool is_boolean() const { return boolean_; }

    double at(std::size_t i, std::size_t j) const {
        return values_[i * cols() + j];
    }
    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * cols(), cols()};
    }
    const std::vector<double>& values() const { return values_; }

    const std::vector<std::string>& row_labels() const { return row_labels_; }
    const std::vector<std::string>& col_labels() const { return col_labels_; }

private:
    std::vector<std::string> row_labels_;
    std::vector<std::string> col_labels_;
    std::vector<double> values_; // row-major
    bool boolean_ = false;
};

/// Finite group with a [0,1]-valued function on it: the multiplication
/// table (a Latin square of element indices) plus f's values per element.
struct GroupFunction {
    std::size_t order = 0;
    std::vector<std::size_t> cayley; // row-major order x order, product indices
    std::vector<double> f_values;

    std::size_t product(std::size_t g, std::size_t h) const {
        return cayley[g * order + h];
    }
};

// CSV reader per the format in the README: optional '#' header line with
// column labels; row labels when the first header cell is literally
// "labels"; every cell a decimal number in [0,1]. LF or CRLF.
FormulaTable load_table(const std::string& path);
FormulaTable parse_table_csv(const std::string& text,
                             const std::string& source_name = "<string>");

// Canonical CSV writer (header with column labels, then row-labelled lines).
std::string table_to_csv(const FormulaTable& t);

// phi~(y,x) = phi(x,y): swaps axes and labels. Involution.
FormulaTable transpose(const FormulaTable& t);

// Translation table value[g][h] = f(g*h). Every row and column is a
// permutation of f_values. Throws validation_error if cayley is not a
// Latin square or f leaves [0,1].
FormulaTable from_group(const GroupFunction& g);

// Submatrix with the corresponding labels. Index subsets must be non-empty
// and in range; duplicates are rejected.
FormulaTable restrict(const FormulaTable& t,
                      const std::vector<std::size_t>& row_subset,
                      const std::vector<std::size_t>& col_subset);

// Group file format: JSON {"order": n, "cayley": [[..]], "f": [..]}.
GroupFunction load_group(const std::string& path);

} // namespace stabkit
