#include "stabkit/types_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "stabkit/errors.hpp"

namespace stabkit {

namespace {

TypePoint row_point(const FormulaTable& t, std::size_t i) {
    auto r = t.row(i);
    return TypePoint{std::vector<double>(r.begin(), r.end())};
}

// Exact minimum set cover by branch and bound: repeatedly branch on the
// uncovered element with the fewest candidate balls, pruning with the
// greedy solution as incumbent.
struct CoverSearch {
    const std::vector<std::uint64_t>& balls; // balls[i] = rows covered by center i
    std::uint64_t all;
    std::size_t best;

    CoverSearch(const std::vector<std::uint64_t>& b, std::uint64_t universe,
                std::size_t incumbent)
        : balls(b), all(universe), best(incumbent) {}

    void run(std::uint64_t covered, std::size_t chosen) {
        if (covered == all) {
            best = std::min(best, chosen);
            return;
        }
        if (chosen + 1 >= best) return;
        std::uint64_t uncovered = all & ~covered;
        // Element with the fewest candidate centers.
        std::size_t pick = 0;
        std::size_t pick_count = balls.size() + 1;
        std::uint64_t rest = uncovered;
        while (rest) {
            const std::size_t e = static_cast<std::size_t>(std::countr_zero(rest));
            rest &= rest - 1;
            std::size_t cnt = 0;
            for (std::size_t i = 0; i < balls.size(); ++i)
                if (balls[i] >> e & 1) ++cnt;
            if (cnt < pick_count) {
                pick_count = cnt;
                pick = e;
            }
        }
        for (std::size_t i = 0; i < balls.size(); ++i)
            if (balls[i] >> pick & 1) run(covered | balls[i], chosen + 1);
    }
};

std::size_t greedy_cover(const std::vector<std::vector<std::size_t>>& balls,
                         std::size_t n) {
    std::vector<char> covered(n, 0);
    std::size_t remaining = n, picks = 0;
    while (remaining > 0) {
        std::size_t best_i = 0, best_gain = 0;
        for (std::size_t i = 0; i < balls.size(); ++i) {
            std::size_t gain = 0;
            for (std::size_t e : balls[i])
                if (!covered[e]) ++gain;
            if (gain > best_gain) {
                best_gain = gain;
                best_i = i;
            }
        }
        for (std::size_t e : balls[best_i]) {
            if (!covered[e]) {
                covered[e] = 1;
                --remaining;
            }
        }
        ++picks;
    }
    return picks;
}

} // namespace

double sup_dist(const TypePoint& p, const TypePoint& q) {
    if (p.values.size() != q.values.size())
        throw validation_error("type points have mismatched column counts " +
                               std::to_string(p.values.size()) + " and " +
                               std::to_string(q.values.size()));
    double d = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i)
        d = std::max(d, std::fabs(p.values[i] - q.values[i]));
    return d;
}

std::vector<RealizedType> realized_types(const FormulaTable& t, double tol) {
    if (tol < 0.0) throw validation_error("dedup tolerance must be >= 0");
    std::vector<RealizedType> out;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        TypePoint p = row_point(t, i);
        bool joined = false;
        for (auto& rt : out) {
            if (sup_dist(rt.point, p) <= tol) {
                rt.members.push_back(i);
                joined = true;
                break;
            }
        }
        if (!joined) out.push_back({std::move(p), i, {i}});
    }
    return out;
}

DensityResult density_character(const FormulaTable& t, double eps,
                                std::size_t exact_limit) {
    if (!(eps > 0.0)) throw validation_error("eps must be positive");
    const std::size_t n = t.rows();

    std::vector<TypePoint> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pts.push_back(row_point(t, i));

    std::vector<std::vector<std::size_t>> balls(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (sup_dist(pts[i], pts[j]) <= eps) balls[i].push_back(j);

    const std::size_t greedy = greedy_cover(balls, n);
    if (n > exact_limit || n > 64) return {greedy, false};

    std::vector<std::uint64_t> ballbits(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t e : balls[i]) ballbits[i] |= 1ull << e;
    const std::uint64_t universe = (n == 64) ? ~0ull : ((1ull << n) - 1);
    CoverSearch cs(ballbits, universe, greedy);
    cs.run(0, 0);
    return {cs.best, true};
}

Subsequence extract_convergent_subsequence(const std::vector<TypePoint>& rows,
                                           double tol) {
    if (!(tol > 0.0)) throw validation_error("tolerance must be positive");
    if (rows.size() < 2)
        throw validation_error("need at least 2 rows");
    const std::size_t c = rows[0].values.size();
    for (const auto& r : rows)
        if (r.values.size() != c)
            throw validation_error("rows have mismatched column counts");

    std::vector<std::size_t> survivors(rows.size());
    std::iota(survivors.begin(), survivors.end(), 0);

    for (std::size_t coord = 0; coord < c; ++coord) {
        // Sort survivors by this coordinate, then slide a window of width
        // tol over the sorted values; the first widest window wins.
        std::vector<std::size_t> order = survivors;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return rows[a].values[coord] < rows[b].values[coord];
                         });
        std::size_t best_lo = 0, best_len = 0;
        std::size_t lo = 0;
        for (std::size_t hi = 0; hi < order.size(); ++hi) {
            while (rows[order[hi]].values[coord] - rows[order[lo]].values[coord] >
                   tol)
                ++lo;
            if (hi - lo + 1 > best_len) {
                best_len = hi - lo + 1;
                best_lo = lo;
            }
        }
        std::vector<std::size_t> kept(order.begin() + best_lo,
                                      order.begin() + best_lo + best_len);
        std::sort(kept.begin(), kept.end());
        survivors = std::move(kept);
    }

    Subsequence out;
    out.indices = survivors;
    out.limit.values.assign(c, 0.0);
    for (std::size_t coord = 0; coord < c; ++coord) {
        bool all_equal = true;
        const double first = rows[survivors[0]].values[coord];
        double sum = 0.0;
        for (std::size_t i : survivors) {
            const double v = rows[i].values[coord];
            if (v != first) all_equal = false;
            sum += v;
        }
        out.limit.values[coord] =
            all_equal ? first : sum / static_cast<double>(survivors.size());
    }
    return out;
}

std::string column_hash(const FormulaTable& t) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](unsigned char c) {
        h ^= c;
        h *= 1099511628211ull;
    };
    for (const auto& label : t.col_labels()) {
        for (char c : label) mix(static_cast<unsigned char>(c));
        mix(0x1f); // unit separator between labels
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 0; i < 16; ++i)
        buf[i] = hex[(h >> (60 - 4 * i)) & 0xf];
    buf[16] = 0;
    return buf;
}

} // namespace stabkit
