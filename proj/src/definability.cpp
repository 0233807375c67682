#include "stabkit/definability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stabkit/errors.hpp"
#include "simplex.hpp"

namespace stabkit {

namespace {

constexpr double kSimplexTol = 1e-9;

bool is_boolean_vector(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return x == 0.0 || x == 1.0; });
}

double convex_error(const FormulaTable& t, const ConvexDefinition& def,
                    const TypePoint& p) {
    double err = 0.0;
    for (std::size_t b = 0; b < t.cols(); ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < def.support.size(); ++i)
            s += def.weights[i] * t.at(def.support[i], b);
        err = std::max(err, std::fabs(s - p.values[b]));
    }
    return err;
}

void check_convex_shape(const FormulaTable& t, const ConvexDefinition& def) {
    if (def.support.empty())
        throw validation_error("convex definition has empty support");
    if (def.weights.size() != def.support.size())
        throw validation_error("weights and support differ in length");
    std::vector<char> seen(t.rows(), 0);
    for (std::size_t i : def.support) {
        if (i >= t.rows())
            throw validation_error("support row " + std::to_string(i) +
                                   " out of range");
        if (seen[i])
            throw validation_error("support row " + std::to_string(i) +
                                   " repeated");
        seen[i] = 1;
    }
    double sum = 0.0;
    for (double w : def.weights) {
        if (w < -kSimplexTol)
            throw validation_error("negative weight in convex definition");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > kSimplexTol)
        throw validation_error("weights sum to " + std::to_string(sum) +
                               ", expected 1");
}

// Minimal agreement count per column for a strict majority among k rows.
std::size_t majority_need(std::size_t k) { return k / 2 + 1; }

// Lexicographically least non-decreasing multiset of exactly k rows whose
// strict majority equals the target at every column, if one exists.
// Agreement votes are tracked per column; a branch dies as soon as some
// column can no longer reach the required count.
struct MajoritySearch {
    const FormulaTable& t;
    const std::vector<double>& target;
    std::size_t k;
    std::vector<std::size_t> chosen;
    std::vector<std::size_t> agree; // per column

    MajoritySearch(const FormulaTable& table, const std::vector<double>& tgt,
                   std::size_t size)
        : t(table), target(tgt), k(size), agree(table.cols(), 0) {}

    bool run(std::size_t start) {
        if (chosen.size() == k) {
            const std::size_t need = majority_need(k);
            for (std::size_t b = 0; b < t.cols(); ++b)
                if (agree[b] < need) return false;
            return true;
        }
        const std::size_t remaining = k - chosen.size();
        const std::size_t need = majority_need(k);
        for (std::size_t b = 0; b < t.cols(); ++b)
            if (agree[b] + remaining < need) return false;
        for (std::size_t i = start; i < t.rows(); ++i) {
            chosen.push_back(i);
            for (std::size_t b = 0; b < t.cols(); ++b)
                if (t.at(i, b) == target[b]) ++agree[b];
            if (run(i)) return true;
            for (std::size_t b = 0; b < t.cols(); ++b)
                if (t.at(i, b) == target[b]) --agree[b];
            chosen.pop_back();
        }
        return false;
    }
};

std::optional<std::vector<std::size_t>> find_exact_k_majority(
    const FormulaTable& t, const std::vector<double>& target, std::size_t k) {
    MajoritySearch ms(t, target, k);
    if (ms.run(0)) return ms.chosen;
    return std::nullopt;
}

void check_majority_inputs(const FormulaTable& t, const TypePoint& target) {
    if (!t.is_boolean())
        throw validation_error("majority definitions require a Boolean table");
    if (!is_boolean_vector(target.values))
        throw validation_error("majority definitions require a {0,1} target");
}

} // namespace

TypePoint resolve_target(const FormulaTable& t, const TargetSpec& target) {
    if (std::holds_alternative<std::size_t>(target.value)) {
        const std::size_t i = std::get<std::size_t>(target.value);
        if (i >= t.rows())
            throw validation_error("target row " + std::to_string(i) +
                                   " out of range");
        auto r = t.row(i);
        return TypePoint{std::vector<double>(r.begin(), r.end())};
    }
    const TypePoint& p = std::get<TypePoint>(target.value);
    if (p.values.size() != t.cols())
        throw validation_error("target has " + std::to_string(p.values.size()) +
                               " entries, table has " + std::to_string(t.cols()) +
                               " columns");
    for (double v : p.values)
        if (!(v >= 0.0 && v <= 1.0))
            throw validation_error("target entry out of [0,1]");
    return p;
}

VerifyResult verify_definition(const FormulaTable& t,
                               const ConvexDefinition& def,
                               const TargetSpec& target, double tol) {
    check_convex_shape(t, def);
    const TypePoint p = resolve_target(t, target);
    const double err = convex_error(t, def, p);
    return {err <= tol, err};
}

VerifyResult verify_definition(const FormulaTable& t,
                               const MajorityDefinition& def,
                               const TargetSpec& target, double /*tol*/) {
    const TypePoint p = resolve_target(t, target);
    check_majority_inputs(t, p);
    if (def.rows.empty() || def.rows.size() != def.k || def.k % 2 == 0)
        throw validation_error("majority definition must hold an odd multiset");
    for (std::size_t i : def.rows)
        if (i >= t.rows())
            throw validation_error("majority row " + std::to_string(i) +
                                   " out of range");
    const std::size_t need = majority_need(def.k);
    for (std::size_t b = 0; b < t.cols(); ++b) {
        std::size_t ones = 0;
        for (std::size_t i : def.rows)
            if (t.at(i, b) == 1.0) ++ones;
        const double vote = ones >= need ? 1.0 : 0.0;
        if (vote != p.values[b]) return {false, 1.0};
    }
    return {true, 0.0};
}

ConvexDefinition lp_define(const FormulaTable& t, const TargetSpec& target,
                           std::vector<std::size_t> candidates) {
    if (candidates.empty()) {
        candidates.resize(t.rows());
        std::iota(candidates.begin(), candidates.end(), 0);
    }
    std::vector<char> seen(t.rows(), 0);
    for (std::size_t i : candidates) {
        if (i >= t.rows())
            throw validation_error("candidate row " + std::to_string(i) +
                                   " out of range");
        if (seen[i])
            throw validation_error("candidate row " + std::to_string(i) +
                                   " repeated");
        seen[i] = 1;
    }
    const TypePoint p = resolve_target(t, target);

    // Variables w_0..w_{k-1}, e; maximize -e subject to
    //   +(sum_i w_i t[a_i][b]) - e <= +p_b
    //   -(sum_i w_i t[a_i][b]) - e <= -p_b      for every column b,
    //   sum w <= 1, -sum w <= -1, all variables >= 0.
    const std::size_t k = candidates.size(), c = t.cols();
    detail::SimplexSolver::Mat A(2 * c + 2,
                                 detail::SimplexSolver::Vec(k + 1, 0.0));
    detail::SimplexSolver::Vec b(2 * c + 2, 0.0), obj(k + 1, 0.0);
    for (std::size_t col = 0; col < c; ++col) {
        for (std::size_t i = 0; i < k; ++i) {
            A[2 * col][i] = t.at(candidates[i], col);
            A[2 * col + 1][i] = -t.at(candidates[i], col);
        }
        A[2 * col][k] = -1.0;
        A[2 * col + 1][k] = -1.0;
        b[2 * col] = p.values[col];
        b[2 * col + 1] = -p.values[col];
    }
    for (std::size_t i = 0; i < k; ++i) {
        A[2 * c][i] = 1.0;
        A[2 * c + 1][i] = -1.0;
    }
    b[2 * c] = 1.0;
    b[2 * c + 1] = -1.0;
    obj[k] = -1.0;

    detail::SimplexSolver::Vec x;
    const double val = detail::SimplexSolver(A, b, obj).solve(x);
    if (!std::isfinite(val))
        throw numeric_error("convex approximation LP did not solve");

    ConvexDefinition def;
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double w = std::max(0.0, x[i]);
        if (w > 0.0) {
            def.support.push_back(candidates[i]);
            def.weights.push_back(w);
            sum += w;
        }
    }
    if (def.support.empty() || sum <= 0.5)
        throw numeric_error("degenerate LP solution");
    for (double& w : def.weights) w /= sum;
    def.sup_error = convex_error(t, def, p);
    return def;
}

ConvexDefinition greedy_define(const FormulaTable& t, const TargetSpec& target,
                               std::size_t rounds) {
    if (rounds < 1) throw validation_error("rounds must be at least 1");
    const TypePoint p = resolve_target(t, target);
    const std::size_t R = t.rows(), c = t.cols();
    const double eta = std::sqrt(std::log(2.0 * static_cast<double>(c)) /
                                 static_cast<double>(rounds));

    // Individual sup errors break exact score ties (a zero-loss row stays
    // selected forever, which keeps perfect targets exact).
    std::vector<double> row_sup(R, 0.0);
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t b = 0; b < c; ++b)
            row_sup[i] = std::max(row_sup[i], std::fabs(t.at(i, b) - p.values[b]));

    std::vector<double> u_pos(c, 1.0 / (2.0 * c)), u_neg(c, 1.0 / (2.0 * c));
    std::vector<std::size_t> counts(R, 0);

    for (std::size_t round = 0; round < rounds; ++round) {
        std::size_t pick = 0;
        double pick_score = 0.0;
        bool have = false;
        for (std::size_t i = 0; i < R; ++i) {
            double score = 0.0;
            for (std::size_t b = 0; b < c; ++b)
                score += (u_pos[b] - u_neg[b]) * (t.at(i, b) - p.values[b]);
            if (!have || score < pick_score ||
                (score == pick_score && row_sup[i] < row_sup[pick])) {
                pick = i;
                pick_score = score;
                have = true;
            }
        }
        counts[pick] += 1;
        double z = 0.0;
        for (std::size_t b = 0; b < c; ++b) {
            const double d = t.at(pick, b) - p.values[b];
            u_pos[b] *= std::exp(eta * d);
            u_neg[b] *= std::exp(-eta * d);
            z += u_pos[b] + u_neg[b];
        }
        for (std::size_t b = 0; b < c; ++b) {
            u_pos[b] /= z;
            u_neg[b] /= z;
        }
    }

    ConvexDefinition def;
    for (std::size_t i = 0; i < R; ++i) {
        if (counts[i] > 0) {
            def.support.push_back(i);
            def.weights.push_back(static_cast<double>(counts[i]) /
                                  static_cast<double>(rounds));
        }
    }
    def.sup_error = convex_error(t, def, p);
    return def;
}

std::optional<MajorityDefinition> majority_define(const FormulaTable& t,
                                                  const TargetSpec& target,
                                                  std::size_t k_max) {
    if (k_max % 2 == 0)
        throw validation_error("k_max must be odd");
    const TypePoint p = resolve_target(t, target);
    check_majority_inputs(t, p);
    for (std::size_t k = 1; k <= k_max; k += 2) {
        if (auto rows = find_exact_k_majority(t, p.values, k)) {
            MajorityDefinition def;
            def.rows = std::move(*rows);
            def.k = k;
            def.exact = true;
            return def;
        }
    }
    return std::nullopt;
}

UniformBoundResult uniform_majority_bound(
    const std::vector<std::pair<FormulaTable, std::vector<TargetSpec>>>&
        instances,
    std::size_t k_max) {
    UniformBoundResult res;
    std::size_t candidate = 1;
    std::vector<std::vector<TypePoint>> resolved(instances.size());
    for (std::size_t ii = 0; ii < instances.size(); ++ii) {
        const auto& [table, targets] = instances[ii];
        res.per_target_k.emplace_back();
        for (std::size_t ti = 0; ti < targets.size(); ++ti) {
            auto def = majority_define(table, targets[ti], k_max);
            if (!def) {
                res.failure = UniformFailure{ii, ti};
                return res;
            }
            res.per_target_k.back().push_back(def->k);
            resolved[ii].push_back(resolve_target(table, targets[ti]));
            candidate = std::max(candidate, def->k);
        }
    }

    // Padding a k'-definition to k rows usually works but is not automatic;
    // each exact-k definition is searched rather than assumed.
    for (std::size_t k = candidate; k <= k_max; k += 2) {
        bool all_ok = true;
        std::optional<UniformFailure> last_fail;
        for (std::size_t ii = 0; ii < instances.size() && all_ok; ++ii) {
            for (std::size_t ti = 0; ti < resolved[ii].size(); ++ti) {
                if (res.per_target_k[ii][ti] == k) continue;
                if (!find_exact_k_majority(instances[ii].first,
                                           resolved[ii][ti].values, k)) {
                    all_ok = false;
                    last_fail = UniformFailure{ii, ti};
                    break;
                }
            }
        }
        if (all_ok) {
            res.k = k;
            return res;
        }
        res.failure = last_fail;
    }
    return res;
}

DefinabilityReport definability_report(const FormulaTable& t, double dedup_tol,
                                       std::size_t rounds, std::size_t k_max) {
    DefinabilityReport rep;
    rep.majority_applicable = t.is_boolean();
    for (const auto& rt : realized_types(t, dedup_tol)) {
        TypeDefinabilityRecord rec;
        rec.representative = rt.representative;
        rec.multiplicity = rt.multiplicity();
        const TargetSpec target = TargetSpec::row(rt.representative);
        rec.lp_error = lp_define(t, target).sup_error;
        rec.greedy_error = greedy_define(t, target, rounds).sup_error;
        if (rep.majority_applicable) {
            auto def = majority_define(t, target, k_max);
            if (def) rec.majority_k = def->k;
        }
        rep.max_lp_error = std::max(rep.max_lp_error, rec.lp_error);
        rep.max_greedy_error = std::max(rep.max_greedy_error, rec.greedy_error);
        if (rec.majority_k)
            rep.max_majority_k = std::max(rep.max_majority_k.value_or(0),
                                          *rec.majority_k);
        rep.per_type.push_back(std::move(rec));
    }
    return rep;
}

} // namespace stabkit
