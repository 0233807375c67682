#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "stabkit/table.hpp"
#include "stabkit/types_space.hpp"

namespace stabkit {

/// A defining predicate as a convex combination of rows: the predicate
/// psi(b) = sum_i weights[i] * t[support[i]][b]. sup_error is the verified
/// max-column deviation from the target (always recomputed, never trusted
/// from input).
struct ConvexDefinition {
    std::vector<std::size_t> support; // distinct row indices
    std::vector<double> weights;      // simplex weights aligned with support
    double sup_error = 0.0;
};

/// A defining predicate as a strict majority vote of an odd multiset of
/// rows: psi(b) = 1 iff more than k/2 selected rows have value 1 at b.
struct MajorityDefinition {
    std::vector<std::size_t> rows; // multiset, non-decreasing
    std::size_t k = 0;             // odd, = rows.size()
    bool exact = false;            // pointwise equal to the target
};

/// The type to define: a row of the table or an explicit vector over its
/// column set.
struct TargetSpec {
    std::variant<std::size_t, TypePoint> value;

    static TargetSpec row(std::size_t i) { return {i}; }
    static TargetSpec point(TypePoint p) { return {std::move(p)}; }
};

struct VerifyResult {
    bool ok = false;
    double error = 0.0;
};

struct TypeDefinabilityRecord {
    std::size_t representative = 0;
    std::size_t multiplicity = 0;
    double lp_error = 0.0;
    double greedy_error = 0.0;
    std::optional<std::size_t> majority_k; // Boolean tables only
};

struct DefinabilityReport {
    std::vector<TypeDefinabilityRecord> per_type;
    double max_lp_error = 0.0;
    double max_greedy_error = 0.0;
    std::optional<std::size_t> max_majority_k;
    bool majority_applicable = false;
};

struct UniformFailure {
    std::size_t instance = 0;
    std::size_t target = 0;
};

struct UniformBoundResult {
    std::optional<std::size_t> k;
    std::vector<std::vector<std::size_t>> per_target_k; // minimal k' per target
    std::optional<UniformFailure> failure;
};

// Resolves a target against a table (bounds- and shape-checked).
TypePoint resolve_target(const FormulaTable& t, const TargetSpec& target);

// Convex: error = max_b |sum_i w_i t[a_i][b] - p[b]|, verdict error <= tol.
// Majority: verdict is exact pointwise equality; error is 0 or 1.
VerifyResult verify_definition(const FormulaTable& t,
                               const ConvexDefinition& def,
                               const TargetSpec& target, double tol);
VerifyResult verify_definition(const FormulaTable& t,
                               const MajorityDefinition& def,
                               const TargetSpec& target, double tol);

// Best convex approximant of the target over the given candidate rows:
// minimizes the sup error exactly by linear programming (deterministic
// least-index pivoting). Empty candidate list means all rows.
ConvexDefinition lp_define(const FormulaTable& t, const TargetSpec& target,
                           std::vector<std::size_t> candidates = {});

// Uniform average of `rounds` row picks chosen by a multiplicative-weights
// game against the 2*cols signed-error constraints. Guarantee:
// sup_error <= lp optimum over all rows + 2*sqrt(ln(2*cols)/rounds).
ConvexDefinition greedy_define(const FormulaTable& t, const TargetSpec& target,
                               std::size_t rounds);

// Minimal odd k <= k_max and a lexicographically least multiset of k rows
// whose strict majority equals the Boolean target at every column.
std::optional<MajorityDefinition> majority_define(const FormulaTable& t,
                                                  const TargetSpec& target,
                                                  std::size_t k_max);

// Smallest single odd k <= k_max whose exactly-k majority definitions cover
// every target of every instance (smaller per-target k' are padded with
// repeated rows; the padded definition is searched, not assumed).
UniformBoundResult uniform_majority_bound(
    const std::vector<std::pair<FormulaTable, std::vector<TargetSpec>>>&
        instances,
    std::size_t k_max);

// Batch driver: every realized type as target, lp over all rows, greedy at
// `rounds`, majority (Boolean tables) up to k_max.
DefinabilityReport definability_report(const FormulaTable& t,
                                       double dedup_tol = 0.0,
                                       std::size_t rounds = 1000,
                                       std::size_t k_max = 5);

} // namespace stabkit
