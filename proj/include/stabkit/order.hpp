#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stabkit/kernel.hpp"
#include "stabkit/table.hpp"

namespace stabkit {

/// Witness of the order property in a finite table.
///
/// For direction HighAbove, value[rows[i]][cols[j]] >= s whenever i < j and
/// <= r whenever i >= j (positions, not index values); LowAbove swaps the
/// two conditions. Thresholds satisfy 0 <= r < s <= 1; the margin is s - r.
/// Index sequences are ordered and duplicate-free but need not be monotone.
struct Ladder {
    enum class Direction { HighAbove, LowAbove };

    std::vector<std::size_t> row_indices;
    std::vector<std::size_t> col_indices;
    double r = 0.0;
    double s = 1.0;
    Direction direction = Direction::HighAbove;

    std::size_t length() const { return row_indices.size(); }
};

/// Window-rule estimate of the two iterated limits of a sampled kernel.
struct DoubleLimitReport {
    std::optional<double> limit_nm; // lim_n lim_m
    std::optional<double> limit_mn; // lim_m lim_n
    std::optional<double> gap;      // |limit_nm - limit_mn| when both exist
    int window = 0;
    double tolerance = 0.0;
    // Length of the converged prefix of inner limits, per orientation.
    std::size_t inner_converged_nm = 0;
    std::size_t inner_converged_mn = 0;
};

// Checks the pattern inequalities exactly. Structural defects (wrong
// lengths, duplicate or out-of-range indices, r >= s) throw
// validation_error; a well-formed ladder that does not match returns false.
bool verify_ladder(const FormulaTable& t, const Ladder& l);

// Exhaustive search (rows outer, columns inner, lexicographic on the pair
// sequence, HighAbove before LowAbove) for a ladder of exactly length n
// with margin >= delta. Thresholds of the returned ladder are r = max over
// its low cells and s = min over its high cells (empty sets give r=0, s=1).
// Deterministic: the first ladder in search order is returned.
std::optional<Ladder> find_ladder(const FormulaTable& t, std::size_t n,
                                  double delta);

// Largest n such that a ladder of length n with margin >= delta exists;
// 0 when not even a single cell supports the margin. Ascending search
// (the length-n predicate is monotone: prefixes of ladders are ladders).
std::size_t ladder_index(const FormulaTable& t, double delta);

// Randomized greedy plus a node-capped run of the exact search, for tables
// too large to exhaust. Sound: any returned ladder passes verify_ladder, so
// its length bounds ladder_index from below. Identical seed and budget give
// identical output. Attempts 0-3 are deterministic (lexicographic and
// sum-sorted greedy), the rest seeded shuffles; directions alternate per
// attempt; the capped exact pass then tries to extend the best length.
std::optional<Ladder> ladder_lower_bound(const FormulaTable& t, double delta,
                                         std::uint64_t seed,
                                         std::size_t budget);

// Iterated double limits of eval(e, xs[n], ys[m]) under the window rule:
// an inner limit is declared converged when its last `window` values lie in
// an interval of width <= tol (value: their mean, exact when they are all
// equal). Inner limits are taken in order and cut at the first failure; the
// same rule applied to the surviving prefix gives the outer limit.
DoubleLimitReport double_limit(const KernelExpr& e, const PointSet& xs,
                               const PointSet& ys, int window, double tol);

// double_limit over two strictly monotone 1-d sampling sequences (the
// caller asserts they interleave); rejects non-monotone input.
DoubleLimitReport ladder_to_gap(const KernelExpr& e, const PointSet& xs,
                                const PointSet& ys, int window, double tol);

} // namespace stabkit
