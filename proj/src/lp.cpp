#include "tropcap/lp.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tropcap/errors.hpp"

namespace tropcap::lp {
namespace {

using Real = long double;

constexpr Real kPivotTol = 1e-12L;
constexpr Real kCostTol = 1e-12L;

/// Equality-form tableau: rows_ x (cols_ + 1), rhs in the last column, basis
/// columns kept as unit vectors.
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * (cols + 1), 0.0L), basis_(rows, 0) {}

    Real& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
    Real at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
    Real& rhs(std::size_t r) { return at(r, cols_); }
    Real rhs(std::size_t r) const { return at(r, cols_); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::vector<std::size_t>& basis() { return basis_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const Real p = at(pr, pc);
        for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) /= p;
        at(pr, pc) = 1.0L;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == pr) continue;
            const Real f = at(r, pc);
            if (f == 0.0L) continue;
            for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
            at(r, pc) = 0.0L;
        }
        basis_[pr] = pc;
    }

    /// Maximizes cost · x over the current basis; `allowed[c]` gates which
    /// columns may enter. Returns the number of pivots.
    std::size_t maximize(const std::vector<Real>& cost, const std::vector<char>& allowed,
                         std::size_t max_pivots) {
        std::size_t pivots = 0;
        std::vector<Real> reduced(cols_);
        for (;;) {
            // reduced_c = cost_c - sum_r cost_{basis r} * a_{r c}
            for (std::size_t c = 0; c < cols_; ++c) reduced[c] = cost[c];
            for (std::size_t r = 0; r < rows_; ++r) {
                const Real cb = cost[basis_[r]];
                if (cb == 0.0L) continue;
                for (std::size_t c = 0; c < cols_; ++c) reduced[c] -= cb * at(r, c);
            }
            std::size_t entering = cols_;
            for (std::size_t c = 0; c < cols_; ++c) {
                if (allowed[c] && reduced[c] > kCostTol) {
                    entering = c;
                    break;
                }
            }
            if (entering == cols_) return pivots;

            std::size_t leaving = rows_;
            Real best_ratio = std::numeric_limits<Real>::infinity();
            for (std::size_t r = 0; r < rows_; ++r) {
                const Real a = at(r, entering);
                if (a <= kPivotTol) continue;
                const Real ratio = rhs(r) / a;
                if (ratio < best_ratio - kPivotTol ||
                    (std::fabs(ratio - best_ratio) <= kPivotTol && basis_[r] < basis_[leaving])) {
                    best_ratio = ratio;
                    leaving = r;
                }
            }
            if (leaving == rows_) {
                throw NumericFailure("simplex: unbounded pivot column " + std::to_string(entering) +
                                         " in a bounded program",
                                     static_cast<long>(entering));
            }
            pivot(leaving, entering);
            last_row_ = leaving;
            if (++pivots > max_pivots) {
                throw NumericFailure("simplex: iteration cap reached", static_cast<long>(last_row_));
            }
        }
    }

    std::size_t last_row() const { return last_row_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Real> data_;
    std::vector<std::size_t> basis_;
    std::size_t last_row_ = 0;
};

}  // namespace

Solution solve(const LinearProgram& p) {
    const auto n = static_cast<std::size_t>(p.objective.size());
    const auto m = static_cast<std::size_t>(p.constraints.rows());
    if (p.constraints.cols() != static_cast<Eigen::Index>(n) && m > 0) {
        throw ContractViolation("lp: constraint matrix column count differs from objective size");
    }
    require_dimension(p.rhs.size(), static_cast<Eigen::Index>(m), "lp rhs");
    require_dimension(p.lower.size(), static_cast<Eigen::Index>(n), "lp lower bounds");
    require_dimension(p.upper.size(), static_cast<Eigen::Index>(n), "lp upper bounds");
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(p.lower(j)) || !std::isfinite(p.upper(j)) || p.upper(j) < p.lower(j)) {
            throw ContractViolation("lp: every variable needs finite bounds lower <= upper");
        }
    }

    // Shift y = v - lower so that 0 <= y <= upper - lower. Rows: user
    // constraints first, then one upper-bound row per variable.
    const std::size_t rows = m + n;
    std::vector<Real> row_rhs(rows);
    for (std::size_t r = 0; r < m; ++r) {
        Real acc = p.rhs(r);
        for (std::size_t j = 0; j < n; ++j) acc -= static_cast<Real>(p.constraints(r, j)) * p.lower(j);
        row_rhs[r] = acc;
    }
    for (std::size_t j = 0; j < n; ++j) row_rhs[m + j] = static_cast<Real>(p.upper(j)) - p.lower(j);

    std::size_t artificial_count = 0;
    for (Real v : row_rhs)
        if (v < 0) ++artificial_count;

    // Columns: y (n), slacks (rows), artificials.
    const std::size_t slack0 = n;
    const std::size_t art0 = n + rows;
    const std::size_t cols = art0 + artificial_count;
    Tableau t(rows, cols);
    std::size_t next_art = art0;
    for (std::size_t r = 0; r < rows; ++r) {
        const Real sign = row_rhs[r] < 0 ? -1.0L : 1.0L;
        if (r < m) {
            for (std::size_t j = 0; j < n; ++j) t.at(r, j) = sign * p.constraints(r, j);
        } else {
            t.at(r, r - m) = sign;
        }
        t.at(r, slack0 + r) = sign;
        t.rhs(r) = sign * row_rhs[r];
        if (sign < 0) {
            t.at(r, next_art) = 1.0L;
            t.basis()[r] = next_art++;
        } else {
            t.basis()[r] = slack0 + r;
        }
    }

    const std::size_t max_pivots = 50 * (rows + cols) + 1000;
    Solution sol;
    std::vector<char> allowed(cols, 1);

    if (artificial_count > 0) {
        std::vector<Real> phase1(cols, 0.0L);
        for (std::size_t c = art0; c < cols; ++c) phase1[c] = -1.0L;
        sol.pivots += t.maximize(phase1, allowed, max_pivots);
        Real infeasibility = 0.0L;
        for (std::size_t r = 0; r < rows; ++r)
            if (t.basis()[r] >= art0) infeasibility += t.rhs(r);
        Real scale = 1.0L;
        for (Real v : row_rhs) scale = std::max(scale, std::fabs(v));
        if (infeasibility > 1e-9L * scale) {
            sol.feasible = false;
            return sol;
        }
        // Drive zero-valued artificials out of the basis where possible.
        for (std::size_t r = 0; r < rows; ++r) {
            if (t.basis()[r] < art0) continue;
            for (std::size_t c = 0; c < art0; ++c) {
                if (std::fabs(t.at(r, c)) > 1e-9L) {
                    t.pivot(r, c);
                    break;
                }
            }
        }
        for (std::size_t c = art0; c < cols; ++c) allowed[c] = 0;
    }

    std::vector<Real> phase2(cols, 0.0L);
    for (std::size_t j = 0; j < n; ++j) phase2[j] = p.objective(j);
    sol.pivots += t.maximize(phase2, allowed, max_pivots);

    std::vector<Real> y(cols, 0.0L);
    for (std::size_t r = 0; r < rows; ++r) y[t.basis()[r]] = t.rhs(r);
    sol.point.resize(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) sol.point(j) = static_cast<double>(y[j] + p.lower(j));

    // Clamp round-off outside the box, then verify the vertex.
    for (std::size_t j = 0; j < n; ++j) sol.point(j) = std::clamp(sol.point(j), p.lower(j), p.upper(j));
    for (std::size_t r = 0; r < m; ++r) {
        const double lhs = p.constraints.row(r).dot(sol.point);
        const double scale = 1.0 + std::abs(p.rhs(r)) + p.constraints.row(r).cwiseAbs().dot(sol.point.cwiseAbs());
        if (lhs - p.rhs(r) > 1e-9 * scale) {
            throw NumericFailure("simplex: returned vertex violates constraint " + std::to_string(r),
                                 static_cast<long>(r));
        }
    }
    sol.feasible = true;
    sol.objective = p.objective.dot(sol.point);
    return sol;
}

}  // namespace tropcap::lp
