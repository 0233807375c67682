#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stabkit/table.hpp"

namespace stabkit {

/// Expression AST for a two-argument kernel phi(x,y) over real vectors.
///
/// Grammar (whitespace insensitive):
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := NUMBER | coord | call | '-' factor | '(' expr ')'
///   coord  := ('x'|'y') '[' INT ']'
///   call   := min|max|pow|lt|le '(' expr ',' expr ')'
///           | abs '(' expr ')'
///           | dot|dist2 '(' ('x'|'y') ',' ('x'|'y') ')'
///
/// lt/le are {0,1}-valued comparison indicators. dot is the inner product
/// of the two full vectors, dist2 the squared Euclidean distance.
struct KernelExpr;
using KernelExprPtr = std::unique_ptr<KernelExpr>;

enum class Side { X, Y };
enum class UnaryOp { Neg, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Min, Max, Pow };
enum class BuiltinOp { Dot, Dist2 };
enum class CompareOp { Lt, Le };

struct KernelExpr {
    enum class Kind { Constant, Coord, Unary, Binary, Builtin, Compare };

    Kind kind;
    double constant = 0.0;            // Constant
    Side side = Side::X;              // Coord
    std::size_t index = 0;            // Coord
    UnaryOp unary_op = UnaryOp::Neg;  // Unary
    BinaryOp binary_op = BinaryOp::Add; // Binary
    BuiltinOp builtin_op = BuiltinOp::Dot; // Builtin
    Side builtin_lhs = Side::X, builtin_rhs = Side::Y; // Builtin
    CompareOp compare_op = CompareOp::Lt; // Compare
    KernelExprPtr a, b; // children: Unary uses a; Binary/Compare use a and b

    bool equals(const KernelExpr& other) const;
};

/// Ordered list of real vectors of a fixed dimension. Houses the sampled
/// parameters fed to a kernel; entries are unrestricted reals.
struct PointSet {
    std::size_t dimension = 0;
    std::vector<std::vector<double>> points;

    std::size_t size() const { return points.size(); }
};

// Throws parse_error with a byte offset and the expected-token set.
KernelExprPtr parse_kernel(const std::string& text);

// Canonical form: minimal parentheses, no whitespace, shortest round-trip
// numbers. print(parse(print(e))) == print(e).
std::string print_kernel(const KernelExpr& e);

// Evaluates in binary64, left to right, then clamps the final value to
// [0,1]. Division by exactly zero and NaN results throw numeric_error;
// out-of-range coordinate indices throw validation_error.
double eval_kernel(const KernelExpr& e, std::span<const double> x,
                   std::span<const double> y);

// value[i][j] = eval(e, xs[i], ys[j]); labels x0..,y0.. from the indices.
FormulaTable sample_table(const KernelExpr& e, const PointSet& xs,
                          const PointSet& ys);

// CSV: one point per line, d numeric fields, no header.
PointSet load_points(const std::string& path);
PointSet parse_points_csv(const std::string& text,
                          const std::string& source_name = "<string>");

} // namespace stabkit
