#include <doctest.h>

#include <functional>
#include <random>

#include "oracles.hpp"
#include "stabkit/errors.hpp"
#include "stabkit/kernel.hpp"

using namespace stabkit;

namespace {

double ev(const std::string& text, std::vector<double> x,
          std::vector<double> y) {
    auto e = parse_kernel(text);
    return eval_kernel(*e, x, y);
}

PointSet pts1d(std::vector<double> xs) {
    PointSet ps;
    ps.dimension = 1;
    for (double v : xs) ps.points.push_back({v});
    return ps;
}

} // namespace

TEST_CASE("parse: half-graph indicator") {
    auto e = parse_kernel("lt(x[0], y[0])");
    CHECK(e->kind == KernelExpr::Kind::Compare);
    CHECK(e->compare_op == CompareOp::Lt);
    CHECK(e->a->kind == KernelExpr::Kind::Coord);
    CHECK(e->a->side == Side::X);
    CHECK(e->b->side == Side::Y);
    CHECK(ev("lt(x[0], y[0])", {0.2}, {0.7}) == 1.0);
}

TEST_CASE("parse: arithmetic with dot") {
    auto e = parse_kernel("0.5*(1+dot(x,y))");
    CHECK(e->kind == KernelExpr::Kind::Binary);
    CHECK(e->binary_op == BinaryOp::Mul);
    CHECK(ev("0.5*(1+dot(x,y))", {1, 0}, {-1, 0}) == 0.0);
    CHECK(ev("0.5*(1+dot(x,y))", {1, 0}, {1, 0}) == 1.0);
}

TEST_CASE("parse: error carries offset and expected set") {
    try {
        parse_kernel("lt(x[0]");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.offset() == 7);
        REQUIRE(e.expected().size() == 1);
        CHECK(e.expected()[0] == ",");
        CHECK(std::string(e.what()).find("end of input") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_kernel("lt(x[0],y[0]) trailing"), parse_error);
    CHECK_THROWS_AS(parse_kernel("foo(x[0])"), parse_error);
    CHECK_THROWS_AS(parse_kernel("dot(x[0],y)"), parse_error);
    CHECK_THROWS_AS(parse_kernel(""), parse_error);
}

TEST_CASE("eval: clamping only at the end") {
    CHECK(ev("2*x[0]", {0.9}, {}) == 1.0);
    CHECK(ev("x[0]-y[0]", {0.2}, {0.9}) == 0.0);
    // intermediate values may leave [0,1]: (x-y)+y stays exact
    CHECK(ev("(x[0]-y[0])+y[0]", {0.25}, {0.75}) == 0.25);
}

TEST_CASE("eval: errors") {
    CHECK_THROWS_AS(ev("x[0]/y[0]", {1.0}, {0.0}), numeric_error);
    CHECK_THROWS_AS(ev("x[3]", {0.5}, {0.5}), validation_error);
    CHECK_THROWS_AS(ev("dot(x,y)", {0.5, 0.5}, {0.5}), validation_error);
    CHECK_THROWS_AS(ev("pow(0-x[0],0.5)", {0.5}, {}), numeric_error);
}

TEST_CASE("eval: builtins") {
    CHECK(ev("dot(x,x)", {0.5, 0.5}, {}) == 0.5);
    CHECK(ev("dist2(x,y)", {0.0}, {0.5}) == 0.25);
    CHECK(ev("min(x[0],y[0])", {0.3}, {0.7}) == 0.3);
    CHECK(ev("max(x[0],y[0])", {0.3}, {0.7}) == 0.7);
    CHECK(ev("abs(x[0]-y[0])", {0.3}, {0.7}) ==
          doctest::Approx(0.4).epsilon(1e-12));
    CHECK(ev("pow(x[0],2)", {0.5}, {}) == 0.25);
    CHECK(ev("le(x[0],y[0])", {0.5}, {0.5}) == 1.0);
    CHECK(ev("lt(x[0],y[0])", {0.5}, {0.5}) == 0.0);
}

TEST_CASE("print: canonical fixpoint on a corpus") {
    const std::vector<std::string> corpus = {
        "lt(x[0], y[0])",
        "0.5*(1+dot(x,y))",
        "1 - x[0] * y[0]",
        "x[0]-(y[0]-x[1])",
        "x[0]-y[0]-x[1]",
        "-x[0]",
        "--x[0]",
        "-(x[0]+y[0])",
        "(x[0]+y[0])*0.5",
        "x[0]*-y[0]",
        "min(max(x[0],y[0]), 1-x[1])",
        "pow(abs(x[0]-y[0]), 0.5)",
        "dist2(x,y)/4",
        "dot(y,x)",
        "le(0.25, x[0]/(y[0]+1))",
        "0.1+0.2+0.3",
        "2e-3*x[0]",
    };
    for (const auto& s : corpus) {
        auto e1 = parse_kernel(s);
        const std::string p1 = print_kernel(*e1);
        auto e2 = parse_kernel(p1);
        const std::string p2 = print_kernel(*e2);
        CHECK(p1 == p2);
        CHECK(e1->equals(*e2));
    }
}

TEST_CASE("sample: lt kernel gives strict half-graph") {
    auto e = parse_kernel("lt(x[0],y[0])");
    auto ps = pts1d({0.1, 0.2, 0.3});
    auto t = sample_table(*e, ps, ps);
    auto hg = oracle::half_graph(3);
    CHECK(t.values() == hg.values());
    CHECK(t.is_boolean());
    CHECK(t.row_labels()[0] == "x0");
    CHECK(t.col_labels()[2] == "y2");
}

TEST_CASE("sample: constant and dot kernels") {
    auto c = parse_kernel("0.5");
    auto ps = pts1d({0.0, 1.0});
    const auto ct = sample_table(*c, ps, ps);
    for (double v : ct.values()) CHECK(v == 0.5);

    auto d = parse_kernel("0.5*(1+dot(x,y))");
    PointSet basis;
    basis.dimension = 2;
    basis.points = {{1, 0}, {0, 1}};
    auto t = sample_table(*d, basis, basis);
    CHECK(t.at(0, 0) == 1.0);
    CHECK(t.at(0, 1) == 0.5);
    CHECK(t.at(1, 0) == 0.5);
    CHECK(t.at(1, 1) == 1.0);
}

TEST_CASE("sample: determinism is bit-exact") {
    auto e1 = parse_kernel("0.5*(1+dot(x,y))-0.125*dist2(x,y)");
    auto e2 = parse_kernel("0.5*(1+dot(x,y))-0.125*dist2(x,y)");
    std::mt19937_64 rng(3);
    PointSet ps;
    ps.dimension = 3;
    for (int i = 0; i < 6; ++i) ps.points.push_back(oracle::random_unit_vector(rng, 3));
    auto t1 = sample_table(*e1, ps, ps);
    auto t2 = sample_table(*e2, ps, ps);
    CHECK(t1.values() == t2.values());
}

TEST_CASE("points: csv parsing") {
    auto ps = parse_points_csv("0.5,1\n-0.25,2\n");
    CHECK(ps.dimension == 2);
    CHECK(ps.points[1][0] == -0.25);
    CHECK_THROWS_AS(parse_points_csv("1,2\n3\n"), parse_error);
    CHECK_THROWS_AS(parse_points_csv("a\n"), parse_error);
    CHECK_THROWS_AS(parse_points_csv(""), parse_error);
}

// Random ASTs stay in [0,1] or fail loudly; no NaN escapes.
TEST_CASE("eval: clamp soundness on random expressions") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::function<KernelExprPtr(int)> gen = [&](int depth) -> KernelExprPtr {
        auto leaf = [&]() {
            auto e = std::make_unique<KernelExpr>();
            if (rng() % 2) {
                // parsed ASTs never hold negative constants (negation is a
                // node), so the generator stays nonnegative too
                e->kind = KernelExpr::Kind::Constant;
                e->constant = u(rng) * 2.0;
            } else {
                e->kind = KernelExpr::Kind::Coord;
                e->side = rng() % 2 ? Side::X : Side::Y;
                e->index = rng() % 2;
            }
            return e;
        };
        if (depth == 0 || rng() % 4 == 0) return leaf();
        switch (rng() % 8) {
        case 0: {
            auto e = std::make_unique<KernelExpr>();
            e->kind = KernelExpr::Kind::Unary;
            e->unary_op = rng() % 2 ? UnaryOp::Neg : UnaryOp::Abs;
            e->a = gen(depth - 1);
            return e;
        }
        case 1: {
            auto e = std::make_unique<KernelExpr>();
            e->kind = KernelExpr::Kind::Builtin;
            e->builtin_op = rng() % 2 ? BuiltinOp::Dot : BuiltinOp::Dist2;
            e->builtin_lhs = rng() % 2 ? Side::X : Side::Y;
            e->builtin_rhs = rng() % 2 ? Side::X : Side::Y;
            return e;
        }
        case 2: {
            auto e = std::make_unique<KernelExpr>();
            e->kind = KernelExpr::Kind::Compare;
            e->compare_op = rng() % 2 ? CompareOp::Lt : CompareOp::Le;
            e->a = gen(depth - 1);
            e->b = gen(depth - 1);
            return e;
        }
        default: {
            auto e = std::make_unique<KernelExpr>();
            e->kind = KernelExpr::Kind::Binary;
            static const BinaryOp ops[] = {BinaryOp::Add, BinaryOp::Sub,
                                           BinaryOp::Mul, BinaryOp::Div,
                                           BinaryOp::Min, BinaryOp::Max,
                                           BinaryOp::Pow};
            e->binary_op = ops[rng() % 7];
            e->a = gen(depth - 1);
            e->b = gen(depth - 1);
            return e;
        }
        }
    };

    int evaluated = 0;
    for (int rep = 0; rep < 500; ++rep) {
        auto e = gen(4);
        std::vector<double> x{u(rng), u(rng)}, y{u(rng), u(rng)};
        try {
            const double v = eval_kernel(*e, x, y);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            ++evaluated;
        } catch (const numeric_error&) {
            // division by zero / pow domain failures are declared errors
        }
        // round-trip while we are here: print then reparse structurally
        auto e2 = parse_kernel(print_kernel(*e));
        CHECK(e2->equals(*e));
    }
    CHECK(evaluated > 100);
}
