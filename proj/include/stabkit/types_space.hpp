#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stabkit/table.hpp"

namespace stabkit {

/// A type at finite scale: the value vector b -> phi(p,b) over the column
/// set of an associated table.
struct TypePoint {
    std::vector<double> values;
};

struct RealizedType {
    TypePoint point;            // the representative (first row of the class)
    std::size_t representative; // its row index
    std::vector<std::size_t> members;

    std::size_t multiplicity() const { return members.size(); }
};

struct DensityResult {
    std::size_t size = 0;
    bool exact = true; // false when only the greedy upper bound was computed
};

struct Subsequence {
    std::vector<std::size_t> indices; // strictly increasing positions
    TypePoint limit;                  // coordinatewise mean of the selection
};

// Uniform-convergence distance max_b |p[b] - q[b]|. Throws on mismatched
// column counts.
double sup_dist(const TypePoint& p, const TypePoint& q);

// Greedy dedup in row order: a row joins the first representative within
// tol, else opens a new class. tol = 0 gives exact distinct rows.
std::vector<RealizedType> realized_types(const FormulaTable& t, double tol);

// Minimal eps-net of the row set under sup_dist, centers restricted to
// rows. Exact (branch-and-bound set cover) for tables with at most
// `exact_limit` rows, greedy upper bound above that.
DensityResult density_character(const FormulaTable& t, double eps,
                                std::size_t exact_limit = 20);

// Pigeonhole extraction: per coordinate, keep the largest group of
// surviving rows whose values fit in a window of width tol (best window by
// sliding over the sorted values, which dominates fixed-width bucketing).
// Every coordinate of the result has oscillation <= tol. The subsequence
// can be short - down to a single row - when no two rows are tol-close.
Subsequence extract_convergent_subsequence(
    const std::vector<TypePoint>& rows, double tol);

// FNV-1a over the column labels; stored next to serialized TypePoints to
// guard against joining vectors from different tables.
std::string column_hash(const FormulaTable& t);

} // namespace stabkit
