#pragma once

#include "bcot/common.hpp"

namespace bcot {

// Transport plan between two discrete marginals.
struct Coupling {
    Mat plan;  // m x n, nonnegative
    std::vector<double> row_marginal;
    std::vector<double> col_marginal;

    int rows() const { return plan.rows; }
    int cols() const { return plan.cols; }

    // Largest constraint violation: negativity, row sums, column sums.
    double feasibility_violation() const {
        double worst = 0.0;
        for (double v : plan.a) worst = std::max(worst, -v);
        auto rs = plan.row_sums();
        auto cs = plan.col_sums();
        worst = std::max(worst, max_abs_diff(rs, row_marginal));
        worst = std::max(worst, max_abs_diff(cs, col_marginal));
        return worst;
    }

    bool feasible(double tol = kFeasTol) const { return feasibility_violation() <= tol; }
};

inline Coupling independent_coupling(const std::vector<double>& row,
                                     const std::vector<double>& col) {
    Coupling c;
    c.row_marginal = row;
    c.col_marginal = col;
    int m = static_cast<int>(row.size()), n = static_cast<int>(col.size());
    c.plan = Mat(m, n);
    double rsum = vec_sum(row), csum = vec_sum(col);
    if (std::abs(rsum - csum) > kFeasTol)
        throw Error("independent_coupling: marginal sums differ");
    double scale = rsum > 0.0 ? 1.0 / rsum : 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) c.plan(i, j) = row[i] * col[j] * scale;
    return c;
}

// Random extreme-ish feasible coupling: greedy fill over a shuffled cell order.
inline Coupling random_vertex_coupling(const std::vector<double>& row,
                                       const std::vector<double>& col, Rng& rng) {
    int m = static_cast<int>(row.size()), n = static_cast<int>(col.size());
    std::vector<int> cells(static_cast<size_t>(m) * n);
    for (size_t k = 0; k < cells.size(); ++k) cells[k] = static_cast<int>(k);
    for (size_t k = cells.size(); k > 1; --k) std::swap(cells[k - 1], cells[rng.uniform_int(static_cast<int>(k))]);
    Coupling c;
    c.row_marginal = row;
    c.col_marginal = col;
    c.plan = Mat(m, n);
    std::vector<double> r = row, q = col;
    for (int cell : cells) {
        int i = cell / n, j = cell % n;
        double t = std::min(r[i], q[j]);
        if (t > 0.0) {
            c.plan(i, j) = t;
            r[i] -= t;
            q[j] -= t;
        }
    }
    // Any residue from float drift goes to the last cell able to take it.
    for (int i = 0; i < m; ++i) {
        if (r[i] <= 0.0) continue;
        for (int j = 0; j < n; ++j) {
            double t = std::min(r[i], q[j]);
            if (t > 0.0) {
                c.plan(i, j) += t;
                r[i] -= t;
                q[j] -= t;
            }
        }
    }
    return c;
}

}  // namespace bcot
