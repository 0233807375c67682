#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace stabkit::detail {

// Dense two-phase simplex: max c'x subject to Ax <= b, x >= 0.
// Pivot choice is lexicographic on (coefficient, variable index), which
// breaks ties deterministically and avoids cycling in practice.
class SimplexSolver {
public:
    using Vec = std::vector<double>;
    using Mat = std::vector<Vec>;

    static constexpr double kEps = 1e-9;
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    SimplexSolver(const Mat& A, const Vec& b, const Vec& c)
        : m_(b.size()), n_(c.size()), basic_(m_), nonbasic_(n_ + 1),
          tab_(m_ + 2, Vec(n_ + 2, 0.0)) {
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < n_; ++j) tab_[i][j] = A[i][j];
        for (std::size_t i = 0; i < m_; ++i) {
            basic_[i] = static_cast<int>(n_ + i);
            tab_[i][n_] = -1.0;
            tab_[i][n_ + 1] = b[i];
        }
        for (std::size_t j = 0; j < n_; ++j) {
            nonbasic_[j] = static_cast<int>(j);
            tab_[m_][j] = -c[j];
        }
        nonbasic_[n_] = -1;
        tab_[m_ + 1][n_] = 1.0;
    }

    // Returns the optimum; -inf if infeasible, +inf if unbounded.
    // The solution vector is filled on success.
    double solve(Vec& x) {
        std::size_t r = 0;
        for (std::size_t i = 1; i < m_; ++i)
            if (tab_[i][n_ + 1] < tab_[r][n_ + 1]) r = i;
        if (tab_[r][n_ + 1] < -kEps) {
            pivot(r, n_);
            if (!optimize(2) || tab_[m_ + 1][n_ + 1] < -kEps) return -kInf;
            for (std::size_t i = 0; i < m_; ++i) {
                if (basic_[i] == -1) {
                    std::size_t s = 0;
                    for (std::size_t j = 1; j <= n_; ++j)
                        if (std::make_pair(tab_[i][j], nonbasic_[j]) <
                            std::make_pair(tab_[i][s], nonbasic_[s]))
                            s = j;
                    pivot(i, s);
                }
            }
        }
        const bool ok = optimize(1);
        x.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basic_[i] >= 0 && basic_[i] < static_cast<int>(n_))
                x[basic_[i]] = tab_[i][n_ + 1];
        return ok ? tab_[m_][n_ + 1] : kInf;
    }

private:
    void pivot(std::size_t r, std::size_t s) {
        const double inv = 1.0 / tab_[r][s];
        for (std::size_t i = 0; i < m_ + 2; ++i) {
            if (i != r && std::fabs(tab_[i][s]) > kEps) {
                const double f = tab_[i][s] * inv;
                for (std::size_t j = 0; j < n_ + 2; ++j)
                    tab_[i][j] -= tab_[r][j] * f;
                tab_[i][s] = tab_[r][s] * f;
            }
        }
        for (std::size_t j = 0; j < n_ + 2; ++j)
            if (j != s) tab_[r][j] *= inv;
        for (std::size_t i = 0; i < m_ + 2; ++i)
            if (i != r) tab_[i][s] *= -inv;
        tab_[r][s] = inv;
        std::swap(basic_[r], nonbasic_[s]);
    }

    bool optimize(int phase) {
        const std::size_t obj = m_ + phase - 1;
        for (;;) {
            std::size_t s = n_ + 1;
            for (std::size_t j = 0; j <= n_; ++j) {
                if (nonbasic_[j] == -phase) continue;
                if (s == n_ + 1 ||
                    std::make_pair(tab_[obj][j], nonbasic_[j]) <
                        std::make_pair(tab_[obj][s], nonbasic_[s]))
                    s = j;
            }
            if (tab_[obj][s] >= -kEps) return true;
            std::size_t r = m_;
            for (std::size_t i = 0; i < m_; ++i) {
                if (tab_[i][s] <= kEps) continue;
                if (r == m_ ||
                    std::make_pair(tab_[i][n_ + 1] / tab_[i][s], basic_[i]) <
                        std::make_pair(tab_[r][n_ + 1] / tab_[r][s], basic_[r]))
                    r = i;
            }
            if (r == m_) return false; // unbounded
            pivot(r, s);
        }
    }

    std::size_t m_, n_;
    std::vector<int> basic_, nonbasic_;
    Mat tab_;
};

} // namespace stabkit::detail
