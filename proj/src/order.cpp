#include "stabkit/order.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "stabkit/errors.hpp"

namespace stabkit {

namespace {

void check_indices(const std::vector<std::size_t>& idx, std::size_t bound,
                   const char* axis) {
    std::vector<char> used(bound, 0);
    for (std::size_t i : idx) {
        if (i >= bound)
            throw validation_error(std::string(axis) + " index " +
                                   std::to_string(i) + " out of range");
        if (used[i])
            throw validation_error(std::string(axis) + " index " +
                                   std::to_string(i) + " repeated");
        used[i] = 1;
    }
}

// ------------------------------------------------------- exhaustive search
//
// Pairs (a_k, b_k) are chosen depth-first, rows outer and columns inner,
// ascending. Adding the pair at position k+1 contributes the cells
// (a_i, b_{k+1}) for i <= k (strictly above the diagonal) and
// (a_{k+1}, b_j) for j <= k+1 (on or below it). Feasibility is tracked via
// s_min (min over cells that must end up >= s) and r_max (max over cells
// that must end up <= r); a prefix can only tighten them, so pruning on
// s_min - r_max < delta is exact.

struct GenericSearch {
    const FormulaTable& t;
    double delta;
    std::size_t n;
    bool high_above;

    std::vector<std::size_t> rows, cols;
    std::vector<char> row_used, col_used;
    std::size_t nodes_left;
    bool aborted = false;

    GenericSearch(const FormulaTable& table, double d, std::size_t len,
                  bool high, std::size_t node_cap = SIZE_MAX)
        : t(table), delta(d), n(len), high_above(high), row_used(table.rows(), 0),
          col_used(table.cols(), 0), nodes_left(node_cap) {}

    bool run(double s_min, double r_max) {
        if (rows.size() == n) return true;
        if (nodes_left == 0) {
            aborted = true;
            return false;
        }
        const std::size_t k = rows.size();
        for (std::size_t a = 0; a < t.rows(); ++a) {
            if (row_used[a]) continue;
            // Cells of the new row over the already chosen columns.
            double s_row = s_min, r_row = r_max;
            for (std::size_t j = 0; j < k; ++j) {
                const double v = t.at(a, cols[j]);
                if (high_above)
                    r_row = std::max(r_row, v);
                else
                    s_row = std::min(s_row, v);
            }
            if (s_row - r_row < delta) continue;
            for (std::size_t b = 0; b < t.cols(); ++b) {
                if (col_used[b]) continue;
                double s2 = s_row, r2 = r_row;
                // New column against the previously chosen rows.
                for (std::size_t i = 0; i < k; ++i) {
                    const double v = t.at(rows[i], b);
                    if (high_above)
                        s2 = std::min(s2, v);
                    else
                        r2 = std::max(r2, v);
                }
                // Diagonal cell of the new pair.
                const double v = t.at(a, b);
                if (high_above)
                    r2 = std::max(r2, v);
                else
                    s2 = std::min(s2, v);
                if (s2 - r2 < delta) continue;
                if (nodes_left == 0) {
                    aborted = true;
                    return false;
                }
                --nodes_left;
                rows.push_back(a);
                cols.push_back(b);
                row_used[a] = 1;
                col_used[b] = 1;
                if (run(s2, r2)) return true;
                row_used[a] = 0;
                col_used[b] = 0;
                rows.pop_back();
                cols.pop_back();
                if (aborted) return false;
            }
        }
        return false;
    }
};

// Bit-parallel specialization for Boolean tables at margin 1 (high cells
// must be exactly 1, low cells exactly 0). Same traversal order as the
// generic search, so both return the same witness.
struct BitSearch {
    std::size_t n;
    std::size_t nrows, ncols;
    std::vector<std::uint64_t> mask_a; // per row: cols usable as a later column
    std::vector<std::uint64_t> mask_b; // per row: cols where the row may sit on/below
    std::uint64_t col_range;

    std::vector<std::size_t> rows, cols;
    std::vector<char> row_used;
    std::uint64_t col_mask = 0;
    std::size_t nodes_left = SIZE_MAX;
    bool aborted = false;

    BitSearch(const FormulaTable& t, bool high_above, std::size_t len)
        : n(len), nrows(t.rows()), ncols(t.cols()), row_used(t.rows(), 0) {
        col_range = (ncols == 64) ? ~0ull : ((1ull << ncols) - 1);
        mask_a.resize(nrows);
        mask_b.resize(nrows);
        for (std::size_t a = 0; a < nrows; ++a) {
            std::uint64_t ones = 0;
            for (std::size_t j = 0; j < ncols; ++j)
                if (t.at(a, j) == 1.0) ones |= 1ull << j;
            mask_a[a] = high_above ? ones : (~ones & col_range);
            mask_b[a] = high_above ? (~ones & col_range) : ones;
        }
    }

    bool run(std::uint64_t and_a) {
        if (rows.size() == n) return true;
        for (std::size_t a = 0; a < nrows; ++a) {
            if (row_used[a]) continue;
            if ((mask_b[a] & col_mask) != col_mask) continue;
            std::uint64_t avail = and_a & ~col_mask & mask_b[a];
            while (avail) {
                const std::uint64_t bit = avail & (~avail + 1);
                avail ^= bit;
                const std::size_t b =
                    static_cast<std::size_t>(std::countr_zero(bit));
                if (nodes_left == 0) {
                    aborted = true;
                    return false;
                }
                --nodes_left;
                rows.push_back(a);
                cols.push_back(b);
                row_used[a] = 1;
                col_mask |= bit;
                if (run(and_a & mask_a[a])) return true;
                col_mask &= ~bit;
                row_used[a] = 0;
                rows.pop_back();
                cols.pop_back();
                if (aborted) return false;
            }
        }
        return false;
    }
};

Ladder finish_ladder(const FormulaTable& t, std::vector<std::size_t> rows,
                     std::vector<std::size_t> cols, bool high_above) {
    // r = max over low cells, s = min over high cells; empty high set gives
    // s = 1, empty low set r = 0 (only possible at length 1).
    double s_min = 1.0, r_max = 0.0;
    const std::size_t n = rows.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = t.at(rows[i], cols[j]);
            const bool high = (i < j) == high_above;
            if (high)
                s_min = std::min(s_min, v);
            else
                r_max = std::max(r_max, v);
        }
    }
    Ladder l;
    l.row_indices = std::move(rows);
    l.col_indices = std::move(cols);
    l.r = r_max;
    l.s = s_min;
    l.direction =
        high_above ? Ladder::Direction::HighAbove : Ladder::Direction::LowAbove;
    return l;
}

enum class SearchOutcome { Found, Refuted, Aborted };

SearchOutcome search_direction(const FormulaTable& t, std::size_t n,
                               double delta, bool high_above,
                               std::size_t node_cap,
                               std::optional<Ladder>& witness) {
    if (t.is_boolean() && delta == 1.0 && t.cols() <= 64) {
        BitSearch bs(t, high_above, n);
        bs.nodes_left = node_cap;
        if (bs.run(bs.col_range)) {
            witness = finish_ladder(t, std::move(bs.rows), std::move(bs.cols),
                                    high_above);
            return SearchOutcome::Found;
        }
        return bs.aborted ? SearchOutcome::Aborted : SearchOutcome::Refuted;
    }
    GenericSearch gs(t, delta, n, high_above, node_cap);
    if (gs.run(1.0, 0.0)) {
        witness = finish_ladder(t, std::move(gs.rows), std::move(gs.cols),
                                high_above);
        return SearchOutcome::Found;
    }
    return gs.aborted ? SearchOutcome::Aborted : SearchOutcome::Refuted;
}

std::optional<Ladder> find_in_direction(const FormulaTable& t, std::size_t n,
                                        double delta, bool high_above) {
    std::optional<Ladder> witness;
    search_direction(t, n, delta, high_above, SIZE_MAX, witness);
    return witness;
}

void check_margin(double delta) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw validation_error("margin must lie in (0,1]");
}

// ------------------------------------------------------------- greedy part

struct GreedyState {
    std::vector<std::size_t> rows, cols;
    std::vector<char> row_used, col_used;
    double s_min = 1.0, r_max = 0.0;
};

// Scan candidate pairs in the given orders and take the first feasible
// extension; repeat until stuck. No backtracking.
GreedyState greedy_build(const FormulaTable& t, double delta, bool high_above,
                         const std::vector<std::size_t>& row_order,
                         const std::vector<std::size_t>& col_order) {
    GreedyState st;
    st.row_used.assign(t.rows(), 0);
    st.col_used.assign(t.cols(), 0);
    const std::size_t max_len = std::min(t.rows(), t.cols());
    while (st.rows.size() < max_len) {
        bool extended = false;
        for (std::size_t a : row_order) {
            if (st.row_used[a]) continue;
            double s_row = st.s_min, r_row = st.r_max;
            for (std::size_t j = 0; j < st.cols.size(); ++j) {
                const double v = t.at(a, st.cols[j]);
                if (high_above)
                    r_row = std::max(r_row, v);
                else
                    s_row = std::min(s_row, v);
            }
            if (s_row - r_row < delta) continue;
            for (std::size_t b : col_order) {
                if (st.col_used[b]) continue;
                double s2 = s_row, r2 = r_row;
                for (std::size_t i = 0; i < st.rows.size(); ++i) {
                    const double v = t.at(st.rows[i], b);
                    if (high_above)
                        s2 = std::min(s2, v);
                    else
                        r2 = std::max(r2, v);
                }
                const double v = t.at(a, b);
                if (high_above)
                    r2 = std::max(r2, v);
                else
                    s2 = std::min(s2, v);
                if (s2 - r2 < delta) continue;
                st.rows.push_back(a);
                st.cols.push_back(b);
                st.row_used[a] = 1;
                st.col_used[b] = 1;
                st.s_min = s2;
                st.r_max = r2;
                extended = true;
                break;
            }
            if (extended) break;
        }
        if (!extended) break;
    }
    return st;
}

std::vector<std::size_t> order_by_sum(const FormulaTable& t, bool rows,
                                      bool descending) {
    const std::size_t n = rows ? t.rows() : t.cols();
    const std::size_t m = rows ? t.cols() : t.rows();
    std::vector<double> sums(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            sums[i] += rows ? t.at(i, j) : t.at(j, i);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return descending ? sums[a] > sums[b] : sums[a] < sums[b];
                     });
    return order;
}

// ------------------------------------------------------------ window rule

std::optional<double> window_limit(const std::vector<double>& seq, int window,
                                   double tol) {
    if (seq.size() < static_cast<std::size_t>(window)) return std::nullopt;
    const std::size_t start = seq.size() - static_cast<std::size_t>(window);
    double lo = seq[start], hi = seq[start];
    bool all_equal = true;
    for (std::size_t i = start + 1; i < seq.size(); ++i) {
        lo = std::min(lo, seq[i]);
        hi = std::max(hi, seq[i]);
        if (seq[i] != seq[start]) all_equal = false;
    }
    if (hi - lo > tol) return std::nullopt;
    if (all_equal) return seq[start];
    double sum = 0.0;
    for (std::size_t i = start; i < seq.size(); ++i) sum += seq[i];
    return sum / window;
}

} // namespace

bool verify_ladder(const FormulaTable& t, const Ladder& l) {
    const std::size_t n = l.row_indices.size();
    if (n == 0) throw validation_error("ladder must have length at least 1");
    if (l.col_indices.size() != n)
        throw validation_error("ladder row and column sequences differ in length");
    check_indices(l.row_indices, t.rows(), "row");
    check_indices(l.col_indices, t.cols(), "column");
    if (!(l.r >= 0.0 && l.s <= 1.0 && l.r < l.s))
        throw validation_error("ladder thresholds must satisfy 0 <= r < s <= 1");

    const bool high_above = l.direction == Ladder::Direction::HighAbove;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = t.at(l.row_indices[i], l.col_indices[j]);
            const bool must_be_high = (i < j) == high_above;
            if (must_be_high ? (v < l.s) : (v > l.r)) return false;
        }
    }
    return true;
}

std::optional<Ladder> find_ladder(const FormulaTable& t, std::size_t n,
                                  double delta) {
    check_margin(delta);
    if (n < 1) throw validation_error("ladder length must be at least 1");
    if (n > std::min(t.rows(), t.cols()))
        throw validation_error("ladder length " + std::to_string(n) +
                               " exceeds table dimensions");
    if (auto l = find_in_direction(t, n, delta, true)) return l;
    return find_in_direction(t, n, delta, false);
}

std::size_t ladder_index(const FormulaTable& t, double delta) {
    check_margin(delta);
    std::size_t best = 0;
    const std::size_t cap = std::min(t.rows(), t.cols());
    for (std::size_t n = 1; n <= cap; ++n) {
        if (!find_ladder(t, n, delta)) break;
        best = n;
    }
    return best;
}

std::optional<Ladder> ladder_lower_bound(const FormulaTable& t, double delta,
                                         std::uint64_t seed,
                                         std::size_t budget) {
    check_margin(delta);
    std::mt19937_64 rng(seed);
    std::optional<Ladder> best;
    const std::size_t max_len = std::min(t.rows(), t.cols());

    std::vector<std::size_t> nat_rows(t.rows()), nat_cols(t.cols());
    std::iota(nat_rows.begin(), nat_rows.end(), 0);
    std::iota(nat_cols.begin(), nat_cols.end(), 0);

    for (std::size_t attempt = 0; attempt < budget; ++attempt) {
        const bool high_above = attempt % 2 == 0;
        std::vector<std::size_t> row_order, col_order;
        if (attempt < 2) {
            row_order = nat_rows;
            col_order = nat_cols;
        } else if (attempt < 4) {
            // In a HighAbove ladder early rows are high on most chosen
            // columns and early columns low on most chosen rows, so sort
            // accordingly; mirrored for LowAbove.
            row_order = order_by_sum(t, true, high_above);
            col_order = order_by_sum(t, false, !high_above);
        } else {
            row_order = nat_rows;
            col_order = nat_cols;
            std::shuffle(row_order.begin(), row_order.end(), rng);
            std::shuffle(col_order.begin(), col_order.end(), rng);
        }
        GreedyState st = greedy_build(t, delta, high_above, row_order, col_order);
        if (!st.rows.empty() &&
            (!best || st.rows.size() > best->length())) {
            best = finish_ladder(t, std::move(st.rows), std::move(st.cols),
                                 high_above);
        }
        if (best && best->length() == max_len) break;
    }

    // Polish: try to beat the greedy result with a node-capped run of the
    // exact search. Longer lengths stop at the first refutation (prefixes
    // of ladders are ladders) or when the cap is hit. Still sound, still
    // deterministic for a fixed budget.
    const std::size_t node_cap = std::max<std::size_t>(budget, 1) * 8192;
    for (std::size_t n = (best ? best->length() : 0) + 1; n <= max_len; ++n) {
        bool found = false;
        for (bool high : {true, false}) {
            std::optional<Ladder> witness;
            if (search_direction(t, n, delta, high, node_cap, witness) ==
                SearchOutcome::Found) {
                best = std::move(witness);
                found = true;
                break;
            }
        }
        if (!found) break;
    }
    return best;
}

DoubleLimitReport double_limit(const KernelExpr& e, const PointSet& xs,
                               const PointSet& ys, int window, double tol) {
    if (window < 2) throw validation_error("window must be at least 2");
    if (!(tol > 0.0)) throw validation_error("tolerance must be positive");
    const std::size_t need = 2 * static_cast<std::size_t>(window);
    if (xs.size() < need || ys.size() < need)
        throw validation_error(
            "sequences must have at least 2*window = " + std::to_string(need) +
            " terms (got " + std::to_string(xs.size()) + " and " +
            std::to_string(ys.size()) + ")");

    const std::size_t N = xs.size(), M = ys.size();
    std::vector<double> grid(N * M);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < M; ++j)
            grid[i * M + j] = eval_kernel(e, xs.points[i], ys.points[j]);

    // Inner limits taken in order, cut at the first window failure; the
    // surviving prefix feeds the outer window.
    auto iterated = [&](bool inner_over_m, std::size_t& prefix_len) {
        const std::size_t outer_count = inner_over_m ? N : M;
        const std::size_t inner_count = inner_over_m ? M : N;
        std::vector<double> inner_values;
        for (std::size_t o = 0; o < outer_count; ++o) {
            std::vector<double> seq(inner_count);
            for (std::size_t i = 0; i < inner_count; ++i)
                seq[i] = inner_over_m ? grid[o * M + i] : grid[i * M + o];
            auto lim = window_limit(seq, window, tol);
            if (!lim) break;
            inner_values.push_back(*lim);
        }
        prefix_len = inner_values.size();
        return window_limit(inner_values, window, tol);
    };

    DoubleLimitReport rep;
    rep.window = window;
    rep.tolerance = tol;
    rep.limit_nm = iterated(true, rep.inner_converged_nm);
    rep.limit_mn = iterated(false, rep.inner_converged_mn);
    if (rep.limit_nm && rep.limit_mn)
        rep.gap = std::fabs(*rep.limit_nm - *rep.limit_mn);
    return rep;
}

DoubleLimitReport ladder_to_gap(const KernelExpr& e, const PointSet& xs,
                                const PointSet& ys, int window, double tol) {
    auto check_monotone = [](const PointSet& ps, const char* name) {
        if (ps.dimension != 1)
            throw validation_error(std::string(name) +
                                   " sequence must be 1-dimensional");
        if (ps.size() < 2) return;
        const bool increasing = ps.points[1][0] > ps.points[0][0];
        for (std::size_t i = 1; i < ps.size(); ++i) {
            const double prev = ps.points[i - 1][0], cur = ps.points[i][0];
            if (increasing ? (cur <= prev) : (cur >= prev))
                throw validation_error(std::string(name) +
                                       " sequence is not strictly monotone");
        }
    };
    check_monotone(xs, "x");
    check_monotone(ys, "y");
    return double_limit(e, xs, ys, window, tol);
}

} // namespace stabkit
