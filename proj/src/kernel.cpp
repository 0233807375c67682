#include "stabkit/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stabkit/errors.hpp"

namespace stabkit {

bool KernelExpr::equals(const KernelExpr& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
    case Kind::Constant: return constant == o.constant;
    case Kind::Coord: return side == o.side && index == o.index;
    case Kind::Unary: return unary_op == o.unary_op && a->equals(*o.a);
    case Kind::Binary:
        return binary_op == o.binary_op && a->equals(*o.a) && b->equals(*o.b);
    case Kind::Builtin:
        return builtin_op == o.builtin_op && builtin_lhs == o.builtin_lhs &&
               builtin_rhs == o.builtin_rhs;
    case Kind::Compare:
        return compare_op == o.compare_op && a->equals(*o.a) && b->equals(*o.b);
    }
    return false;
}

namespace {

KernelExprPtr make(KernelExpr::Kind k) {
    auto e = std::make_unique<KernelExpr>();
    e->kind = k;
    return e;
}

// ---------------------------------------------------------------- parsing

struct Parser {
    const std::string& src;
    std::size_t pos = 0;

    explicit Parser(const std::string& s) : src(s) {}

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
            ++pos;
    }

    [[noreturn]] void fail(std::vector<std::string> expected) {
        skip_ws();
        std::string what;
        if (pos >= src.size())
            what = "syntax error at end of input";
        else
            what = "syntax error at offset " + std::to_string(pos) + " ('" +
                   std::string(1, src[pos]) + "')";
        what += ": expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) what += " or ";
            what += "`" + expected[i] + "`";
        }
        throw parse_error(what, pos, std::move(expected));
    }

    bool peek_char(char c) {
        skip_ws();
        return pos < src.size() && src[pos] == c;
    }

    bool accept(char c) {
        if (peek_char(c)) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect(char c, const char* name) {
        if (!accept(c)) fail({name});
    }

    KernelExprPtr parse_expr() {
        auto lhs = parse_term();
        for (;;) {
            if (accept('+'))
                lhs = binary(BinaryOp::Add, std::move(lhs), parse_term());
            else if (accept('-'))
                lhs = binary(BinaryOp::Sub, std::move(lhs), parse_term());
            else
                return lhs;
        }
    }

    KernelExprPtr parse_term() {
        auto lhs = parse_factor();
        for (;;) {
            if (accept('*'))
                lhs = binary(BinaryOp::Mul, std::move(lhs), parse_factor());
            else if (accept('/'))
                lhs = binary(BinaryOp::Div, std::move(lhs), parse_factor());
            else
                return lhs;
        }
    }

    KernelExprPtr parse_factor() {
        skip_ws();
        if (pos >= src.size())
            fail({"number", "x", "y", "function", "-", "("});
        const char c = src[pos];
        if (c == '-') {
            ++pos;
            auto e = make(KernelExpr::Kind::Unary);
            e->unary_op = UnaryOp::Neg;
            e->a = parse_factor();
            return e;
        }
        if (c == '(') {
            ++pos;
            auto e = parse_expr();
            expect(')', ")");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)))
            return parse_ident();
        fail({"number", "x", "y", "function", "-", "("});
    }

    KernelExprPtr parse_number() {
        const std::size_t start = pos;
        while (pos < src.size() &&
               std::isdigit(static_cast<unsigned char>(src[pos])))
            ++pos;
        if (pos < src.size() && src[pos] == '.') {
            ++pos;
            while (pos < src.size() &&
                   std::isdigit(static_cast<unsigned char>(src[pos])))
                ++pos;
        }
        if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
            std::size_t mark = pos;
            ++pos;
            if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
            if (pos < src.size() &&
                std::isdigit(static_cast<unsigned char>(src[pos]))) {
                while (pos < src.size() &&
                       std::isdigit(static_cast<unsigned char>(src[pos])))
                    ++pos;
            } else {
                pos = mark; // 'e' was not an exponent
            }
        }
        double v = 0.0;
        auto res = std::from_chars(src.data() + start, src.data() + pos, v);
        if (res.ec != std::errc{} || res.ptr != src.data() + pos) {
            pos = start;
            fail({"number"});
        }
        auto e = make(KernelExpr::Kind::Constant);
        e->constant = v;
        return e;
    }

    std::string read_ident() {
        const std::size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) ||
                src[pos] == '_'))
            ++pos;
        return src.substr(start, pos - start);
    }

    Side parse_vector_name() {
        skip_ws();
        const std::size_t start = pos;
        std::string id = read_ident();
        if (id == "x") return Side::X;
        if (id == "y") return Side::Y;
        pos = start;
        fail({"x", "y"});
    }

    KernelExprPtr parse_ident() {
        const std::size_t start = pos;
        std::string id = read_ident();

        if (id == "x" || id == "y") {
            auto e = make(KernelExpr::Kind::Coord);
            e->side = (id == "x") ? Side::X : Side::Y;
            expect('[', "[");
            skip_ws();
            const std::size_t nstart = pos;
            while (pos < src.size() &&
                   std::isdigit(static_cast<unsigned char>(src[pos])))
                ++pos;
            if (pos == nstart) fail({"coordinate index"});
            std::size_t idx = 0;
            std::from_chars(src.data() + nstart, src.data() + pos, idx);
            e->index = idx;
            expect(']', "]");
            return e;
        }

        if (id == "abs") {
            expect('(', "(");
            auto e = make(KernelExpr::Kind::Unary);
            e->unary_op = UnaryOp::Abs;
            e->a = parse_expr();
            expect(')', ")");
            return e;
        }

        if (id == "dot" || id == "dist2") {
            expect('(', "(");
            auto e = make(KernelExpr::Kind::Builtin);
            e->builtin_op = (id == "dot") ? BuiltinOp::Dot : BuiltinOp::Dist2;
            e->builtin_lhs = parse_vector_name();
            expect(',', ",");
            e->builtin_rhs = parse_vector_name();
            expect(')', ")");
            return e;
        }

        struct Two {
            const char* name;
            bool compare;
            BinaryOp bop;
            CompareOp cop;
        };
        static const Two two_arg[] = {
            {"min", false, BinaryOp::Min, CompareOp::Lt},
            {"max", false, BinaryOp::Max, CompareOp::Lt},
            {"pow", false, BinaryOp::Pow, CompareOp::Lt},
            {"lt", true, BinaryOp::Add, CompareOp::Lt},
            {"le", true, BinaryOp::Add, CompareOp::Le},
        };
        for (const auto& f : two_arg) {
            if (id == f.name) {
                expect('(', "(");
                auto lhs = parse_expr();
                expect(',', ",");
                auto rhs = parse_expr();
                expect(')', ")");
                KernelExprPtr e;
                if (f.compare) {
                    e = make(KernelExpr::Kind::Compare);
                    e->compare_op = f.cop;
                } else {
                    e = make(KernelExpr::Kind::Binary);
                    e->binary_op = f.bop;
                }
                e->a = std::move(lhs);
                e->b = std::move(rhs);
                return e;
            }
        }

        pos = start;
        fail({"min", "max", "abs", "pow", "dot", "dist2", "lt", "le", "x", "y"});
    }

    static KernelExprPtr binary(BinaryOp op, KernelExprPtr a, KernelExprPtr b) {
        auto e = make(KernelExpr::Kind::Binary);
        e->binary_op = op;
        e->a = std::move(a);
        e->b = std::move(b);
        return e;
    }
};

// --------------------------------------------------------------- printing

// Precedence levels: 1 add/sub, 2 mul/div, 3 unary minus, 4 atoms.
int precedence(const KernelExpr& e) {
    switch (e.kind) {
    case KernelExpr::Kind::Binary:
        switch (e.binary_op) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        default: return 4; // min/max/pow print as calls
        }
    case KernelExpr::Kind::Unary:
        return e.unary_op == UnaryOp::Neg ? 3 : 4;
    default: return 4;
    }
}

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void print_rec(const KernelExpr& e, std::string& out) {
    auto child = [&](const KernelExpr& c, bool need_parens) {
        if (need_parens) out += '(';
        print_rec(c, out);
        if (need_parens) out += ')';
    };
    const int prec = precedence(e);
    switch (e.kind) {
    case KernelExpr::Kind::Constant:
        out += format_number(e.constant);
        return;
    case KernelExpr::Kind::Coord:
        out += (e.side == Side::X) ? 'x' : 'y';
        out += '[';
        out += std::to_string(e.index);
        out += ']';
        return;
    case KernelExpr::Kind::Unary:
        if (e.unary_op == UnaryOp::Neg) {
            out += '-';
            child(*e.a, precedence(*e.a) < prec);
        } else {
            out += "abs(";
            print_rec(*e.a, out);
            out += ')';
        }
        return;
    case KernelExpr::Kind::Binary: {
        const char* call = nullptr;
        char infix = 0;
        switch (e.binary_op) {
        case BinaryOp::Add: infix = '+'; break;
        case BinaryOp::Sub: infix = '-'; break;
        case BinaryOp::Mul: infix = '*'; break;
        case BinaryOp::Div: infix = '/'; break;
        case BinaryOp::Min: call = "min"; break;
        case BinaryOp::Max: call = "max"; break;
        case BinaryOp::Pow: call = "pow"; break;
        }
        if (call) {
            out += call;
            out += '(';
            print_rec(*e.a, out);
            out += ',';
            print_rec(*e.b, out);
            out += ')';
        } else {
            // Left-associative grammar: parenthesize a right child of the
            // same precedence so the structure survives re-parsing.
            child(*e.a, precedence(*e.a) < prec);
            out += infix;
            child(*e.b, precedence(*e.b) <= prec);
        }
        return;
    }
    case KernelExpr::Kind::Builtin:
        out += (e.builtin_op == BuiltinOp::Dot) ? "dot(" : "dist2(";
        out += (e.builtin_lhs == Side::X) ? 'x' : 'y';
        out += ',';
        out += (e.builtin_rhs == Side::X) ? 'x' : 'y';
        out += ')';
        return;
    case KernelExpr::Kind::Compare:
        out += (e.compare_op == CompareOp::Lt) ? "lt(" : "le(";
        print_rec(*e.a, out);
        out += ',';
        print_rec(*e.b, out);
        out += ')';
        return;
    }
}

// ------------------------------------------------------------- evaluation

std::span<const double> pick(Side s, std::span<const double> x,
                             std::span<const double> y) {
    return s == Side::X ? x : y;
}

double eval_raw(const KernelExpr& e, std::span<const double> x,
                std::span<const double> y) {
    switch (e.kind) {
    case KernelExpr::Kind::Constant:
        return e.constant;
    case KernelExpr::Kind::Coord: {
        auto v = pick(e.side, x, y);
        if (e.index >= v.size())
            throw validation_error(
                "coordinate " + std::string(e.side == Side::X ? "x[" : "y[") +
                std::to_string(e.index) + "] out of range for dimension " +
                std::to_string(v.size()));
        return v[e.index];
    }
    case KernelExpr::Kind::Unary: {
        const double a = eval_raw(*e.a, x, y);
        return e.unary_op == UnaryOp::Neg ? -a : std::fabs(a);
    }
    case KernelExpr::Kind::Binary: {
        const double a = eval_raw(*e.a, x, y);
        const double b = eval_raw(*e.b, x, y);
        switch (e.binary_op) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div:
            if (b == 0.0) throw numeric_error("division by zero");
            return a / b;
        case BinaryOp::Min: return std::min(a, b);
        case BinaryOp::Max: return std::max(a, b);
        case BinaryOp::Pow: {
            const double r = std::pow(a, b);
            if (std::isnan(r))
                throw numeric_error("pow(" + format_number(a) + ", " +
                                    format_number(b) + ") is undefined");
            return r;
        }
        }
        return 0.0;
    }
    case KernelExpr::Kind::Builtin: {
        auto u = pick(e.builtin_lhs, x, y);
        auto v = pick(e.builtin_rhs, x, y);
        if (u.size() != v.size())
            throw validation_error(
                "vector arguments have mismatched dimensions " +
                std::to_string(u.size()) + " and " + std::to_string(v.size()));
        double acc = 0.0;
        if (e.builtin_op == BuiltinOp::Dot) {
            for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
        } else {
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double d = u[i] - v[i];
                acc += d * d;
            }
        }
        return acc;
    }
    case KernelExpr::Kind::Compare: {
        const double a = eval_raw(*e.a, x, y);
        const double b = eval_raw(*e.b, x, y);
        const bool hit = (e.compare_op == CompareOp::Lt) ? (a < b) : (a <= b);
        return hit ? 1.0 : 0.0;
    }
    }
    return 0.0;
}

} // namespace

KernelExprPtr parse_kernel(const std::string& text) {
    Parser p(text);
    auto e = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail({"end of input", "+", "-", "*", "/"});
    return e;
}

std::string print_kernel(const KernelExpr& e) {
    std::string out;
    print_rec(e, out);
    return out;
}

double eval_kernel(const KernelExpr& e, std::span<const double> x,
                   std::span<const double> y) {
    const double raw = eval_raw(e, x, y);
    if (std::isnan(raw)) throw numeric_error("kernel evaluated to NaN");
    return std::clamp(raw, 0.0, 1.0);
}

FormulaTable sample_table(const KernelExpr& e, const PointSet& xs,
                          const PointSet& ys) {
    if (xs.size() == 0 || ys.size() == 0)
        throw validation_error("point sets must be non-empty");
    std::vector<double> v;
    v.reserve(xs.size() * ys.size());
    for (const auto& p : xs.points)
        for (const auto& q : ys.points)
            v.push_back(eval_kernel(e, p, q));
    std::vector<std::string> rl, cl;
    for (std::size_t i = 0; i < xs.size(); ++i) rl.push_back("x" + std::to_string(i));
    for (std::size_t j = 0; j < ys.size(); ++j) cl.push_back("y" + std::to_string(j));
    return FormulaTable(std::move(rl), std::move(cl), std::move(v));
}

PointSet parse_points_csv(const std::string& text,
                          const std::string& source_name) {
    PointSet ps;
    std::size_t lineno = 0;
    std::string cur;
    auto flush_line = [&]() {
        ++lineno;
        if (!cur.empty() && cur.back() == '\r') cur.pop_back();
        bool blank = true;
        for (char c : cur)
            if (c != ' ' && c != '\t') blank = false;
        if (blank) {
            cur.clear();
            return;
        }
        std::vector<double> point;
        std::size_t field = 1;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= cur.size(); ++i) {
            if (i == cur.size() || cur[i] == ',') {
                std::string cell = cur.substr(start, i - start);
                while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t'))
                    cell.erase(cell.begin());
                while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t'))
                    cell.pop_back();
                double v = 0.0;
                auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
                    throw parse_error(source_name + ": malformed number '" + cell +
                                          "' at line " + std::to_string(lineno) +
                                          ", field " + std::to_string(field),
                                      lineno, field);
                point.push_back(v);
                start = i + 1;
                ++field;
            }
        }
        if (ps.points.empty())
            ps.dimension = point.size();
        else if (point.size() != ps.dimension)
            throw parse_error(source_name + ": line " + std::to_string(lineno) +
                                  " has " + std::to_string(point.size()) +
                                  " fields, expected " +
                                  std::to_string(ps.dimension),
                              lineno, 1);
        ps.points.push_back(std::move(point));
        cur.clear();
    };
    for (char c : text) {
        if (c == '\n')
            flush_line();
        else
            cur += c;
    }
    if (!cur.empty()) flush_line();
    if (ps.points.empty())
        throw parse_error(source_name + ": no points", 1, 1);
    return ps;
}

PointSet load_points(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw parse_error("cannot open points file: " + path, 0, 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_points_csv(buf.str(), path);
}

} // namespace stabkit
