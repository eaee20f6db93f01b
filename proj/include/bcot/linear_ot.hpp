#pragma once

#include <queue>

#include "bcot/coupling.hpp"

namespace bcot {

struct LinearOtResult {
    Coupling coupling;
    double value = 0.0;
    double duality_gap = 0.0;
    std::vector<double> u;  // row potentials
    std::vector<double> v;  // column potentials
};

namespace detail {

// Transportation network simplex on the complete bipartite graph.
// Deterministic: fixed northwest-corner start, block entering-arc search in
// row-major order, first-encountered tie handling, Bland fallback when a long
// run of degenerate pivots suggests stalling.
class TransportSimplex {
public:
    TransportSimplex(const std::vector<double>& supply, const std::vector<double>& demand,
                     const Mat& cost)
        : m_(static_cast<int>(supply.size())),
          n_(static_cast<int>(demand.size())),
          cost_(cost),
          supply_(supply),
          demand_(demand) {
        cscale_ = 1.0;
        for (double c : cost_.a) cscale_ = std::max(cscale_, std::abs(c));
        eps_ = 1e-11 * cscale_;
    }

    void run() {
        northwest_start();
        rebuild_tree();
        long pivots = 0, degenerate_run = 0;
        bool bland = false;
        const long bland_trigger = 100 + 10L * (m_ + n_);
        while (true) {
            int cell = bland ? find_entering_bland() : find_entering_block();
            if (cell < 0) break;
            double theta = pivot(cell / n_, cell % n_);
            ++pivots;
            degenerate_run = theta <= 0.0 ? degenerate_run + 1 : 0;
            if (degenerate_run > bland_trigger) bland = true;
            if (pivots > 200L * (m_ + n_) * (m_ + n_) + 10000)
                throw Error("linear ot: pivot limit exceeded");
        }
    }

    Mat flow_matrix() const {
        Mat f(m_, n_);
        for (const auto& a : arcs_)
            if (a.flow > 0.0) f(a.r, a.c) = a.flow;
        return f;
    }

    std::vector<double> row_potentials() const {
        return std::vector<double>(pot_.begin(), pot_.begin() + m_);
    }
    std::vector<double> col_potentials() const {
        return std::vector<double>(pot_.begin() + m_, pot_.end());
    }

private:
    struct Arc {
        int r, c;
        double flow;
    };

    int m_, n_;
    const Mat& cost_;
    std::vector<double> supply_, demand_;
    double cscale_, eps_;
    std::vector<Arc> arcs_;                      // basic arcs, size m+n-1
    std::vector<std::vector<int>> adj_;          // node -> incident basic arc ids
    std::vector<int> parent_, parent_arc_, depth_;
    std::vector<double> pot_;
    size_t scan_pos_ = 0;

    int col_node(int j) const { return m_ + j; }

    void northwest_start() {
        std::vector<double> r = supply_, q = demand_;
        arcs_.clear();
        int i = 0, j = 0;
        while (true) {
            double t = std::min(r[i], q[j]);
            if (t < 0.0) t = 0.0;
            arcs_.push_back({i, j, t});
            r[i] -= t;
            q[j] -= t;
            if (i == m_ - 1 && j == n_ - 1) break;
            if (j == n_ - 1 || (i < m_ - 1 && r[i] <= q[j]))
                ++i;
            else
                ++j;
        }
    }

    void rebuild_tree() {
        int nodes = m_ + n_;
        adj_.assign(nodes, {});
        for (size_t a = 0; a < arcs_.size(); ++a) {
            adj_[arcs_[a].r].push_back(static_cast<int>(a));
            adj_[col_node(arcs_[a].c)].push_back(static_cast<int>(a));
        }
        parent_.assign(nodes, -1);
        parent_arc_.assign(nodes, -1);
        depth_.assign(nodes, 0);
        pot_.assign(nodes, 0.0);
        std::vector<int> stack = {0};
        std::vector<char> seen(nodes, 0);
        seen[0] = 1;
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            for (int a : adj_[x]) {
                int y = x < m_ ? col_node(arcs_[a].c) : arcs_[a].r;
                if (seen[y]) continue;
                seen[y] = 1;
                parent_[y] = x;
                parent_arc_[y] = a;
                depth_[y] = depth_[x] + 1;
                double c = cost_(arcs_[a].r, arcs_[a].c);
                pot_[y] = c - pot_[x];
                stack.push_back(y);
            }
        }
    }

    double reduced(int i, int j) const { return cost_(i, j) - pot_[i] - pot_[col_node(j)]; }

    int find_entering_block() {
        size_t total = static_cast<size_t>(m_) * n_;
        size_t block = std::max<size_t>(64, static_cast<size_t>(std::sqrt(double(total))));
        size_t scanned = 0;
        while (scanned < total) {
            double best = -eps_;
            int best_cell = -1;
            for (size_t k = 0; k < block && scanned < total; ++k, ++scanned) {
                size_t cell = scan_pos_;
                scan_pos_ = scan_pos_ + 1 == total ? 0 : scan_pos_ + 1;
                int i = static_cast<int>(cell / n_), j = static_cast<int>(cell % n_);
                double rc = reduced(i, j);
                if (rc < best) {
                    best = rc;
                    best_cell = static_cast<int>(cell);
                }
            }
            if (best_cell >= 0) return best_cell;
        }
        return -1;
    }

    int find_entering_bland() {
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < n_; ++j)
                if (reduced(i, j) < -eps_) return i * n_ + j;
        return -1;
    }

    // Pivot on entering cell (ei, ej); returns theta (flow pushed).
    double pivot(int ei, int ej) {
        int a_node = ei, b_node = col_node(ej);
        std::vector<int> path_a, path_b;  // arc ids from each endpoint up to the lca
        {
            int x = a_node, y = b_node;
            while (depth_[x] > depth_[y]) {
                path_a.push_back(parent_arc_[x]);
                x = parent_[x];
            }
            while (depth_[y] > depth_[x]) {
                path_b.push_back(parent_arc_[y]);
                y = parent_[y];
            }
            while (x != y) {
                path_a.push_back(parent_arc_[x]);
                x = parent_[x];
                path_b.push_back(parent_arc_[y]);
                y = parent_[y];
            }
        }
        // Walk order around the cycle: entering arc, then b-side up, then a-side down.
        std::vector<int> walk;
        walk.reserve(path_a.size() + path_b.size());
        for (int a : path_b) walk.push_back(a);
        for (size_t k = path_a.size(); k-- > 0;) walk.push_back(path_a[k]);
        // Signs alternate starting with + on the entering arc (position 0).
        double theta = std::numeric_limits<double>::infinity();
        int leaving = -1;
        for (size_t p = 0; p < walk.size(); ++p) {
            if (p % 2 == 0) {  // position p+1 in the cycle, odd positions are decreases
                double fl = arcs_[walk[p]].flow;
                if (fl < theta) {
                    theta = fl;
                    leaving = walk[p];
                }
            }
        }
        if (leaving < 0) throw Error("linear ot: degenerate cycle");
        for (size_t p = 0; p < walk.size(); ++p)
            arcs_[walk[p]].flow += (p % 2 == 0 ? -theta : theta);
        arcs_[leaving] = {ei, ej, theta};
        rebuild_tree();
        return theta;
    }
};

// Maximum extra mass routable into cell (ti, tj) through unfrozen tight cells,
// applied in place. Augmenting paths run from column tj back to row ti.
inline double lex_augment(Mat& f, const std::vector<char>& tight, const std::vector<char>& frozen,
                          int ti, int tj) {
    int m = f.rows, n = f.cols;
    double total = 0.0;
    while (true) {
        // BFS over alternating col->row (capacity f) / row->col (unbounded) moves.
        std::vector<int> prev_row(n, -2), prev_col(m, -2);  // predecessors, -2 = unseen
        std::queue<std::pair<int, int>> q;                  // (0=row,1=col, index)
        prev_row[tj] = -1;
        q.push({1, tj});
        bool reached = false;
        while (!q.empty() && !reached) {
            auto [kind, idx] = q.front();
            q.pop();
            if (kind == 1) {
                for (int i = 0; i < m && !reached; ++i) {
                    size_t cell = static_cast<size_t>(i) * n + idx;
                    if (!tight[cell] || frozen[cell] || f(i, idx) <= 0.0) continue;
                    if (idx == tj && i == ti) continue;  // no-op self cycle
                    if (prev_col[i] != -2) continue;
                    prev_col[i] = idx;
                    if (i == ti) {
                        reached = true;
                        break;
                    }
                    q.push({0, i});
                }
            } else {
                for (int j = 0; j < n; ++j) {
                    size_t cell = static_cast<size_t>(idx) * n + j;
                    if (!tight[cell] || frozen[cell]) continue;
                    if (prev_row[j] != -2) continue;
                    prev_row[j] = idx;
                    q.push({1, j});
                }
            }
        }
        if (!reached) break;
        // Recover path ti <- ... <- tj and its bottleneck.
        double bottleneck = std::numeric_limits<double>::infinity();
        int i = ti;
        while (true) {
            int j = prev_col[i];
            bottleneck = std::min(bottleneck, f(i, j));
            if (j == tj) break;
            i = prev_row[j];
        }
        if (!(bottleneck > 0.0)) break;
        i = ti;
        while (true) {
            int j = prev_col[i];
            f(i, j) -= bottleneck;
            if (j == tj) break;
            int i2 = prev_row[j];
            f(i2, j) += bottleneck;
            i = i2;
        }
        f(ti, tj) += bottleneck;  // close the cycle at the target cell
        total += bottleneck;
    }
    return total;
}

// Row-major greedy selection of the lexicographically extremal optimal vertex:
// scan cells in (row, column) order, put as much mass as the optimal face
// allows on each cell, freeze it and continue.
inline bool lex_canonicalize(Mat& plan, const Mat& cost, const std::vector<double>& u,
                             const std::vector<double>& v, double value) {
    int m = plan.rows, n = plan.cols;
    double cscale = 1.0;
    for (double c : cost.a) cscale = std::max(cscale, std::abs(c));
    double tau = 1e-9 * cscale;
    std::vector<char> tight(static_cast<size_t>(m) * n, 0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            size_t cell = static_cast<size_t>(i) * n + j;
            tight[cell] = std::abs(cost(i, j) - u[i] - v[j]) <= tau;
            if (!tight[cell] && plan(i, j) > tau) return false;  // fuzzy duals, keep as is
        }
    Mat f = plan;
    std::vector<char> frozen(static_cast<size_t>(m) * n, 0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            size_t cell = static_cast<size_t>(i) * n + j;
            if (tight[cell]) lex_augment(f, tight, frozen, i, j);
            frozen[cell] = 1;
        }
    double check = f.dot(cost);
    if (std::abs(check - value) > std::max(1e-9, 1e-9 * std::abs(value))) return false;
    plan = f;
    return true;
}

}  // namespace detail

// Exact linear optimal transport between discrete marginals.
// Ties among optimal vertices are resolved toward the lexicographically
// extremal plan in (row, column) order when the problem is small enough for
// the refinement pass; the pivot order itself is deterministic regardless.
inline LinearOtResult solve_linear_ot(const std::vector<double>& row,
                                      const std::vector<double>& col, const Mat& cost,
                                      int lex_refine_max_cells = 256) {
    int m = static_cast<int>(row.size()), n = static_cast<int>(col.size());
    if (m == 0 || n == 0) throw Error("solve_linear_ot: empty marginal");
    if (cost.rows != m || cost.cols != n) throw Error("solve_linear_ot: cost shape mismatch");
    for (double x : row)
        if (x < 0.0) throw Error("solve_linear_ot: negative marginal");
    for (double x : col)
        if (x < 0.0) throw Error("solve_linear_ot: negative marginal");
    double rsum = vec_sum(row), csum = vec_sum(col);
    if (std::abs(rsum - csum) > kFeasTol) throw Error("solve_linear_ot: marginal sums differ");

    LinearOtResult res;
    res.coupling.row_marginal = row;
    res.coupling.col_marginal = col;
    if (rsum <= 0.0) {
        res.coupling.plan = Mat(m, n);
        res.u.assign(m, 0.0);
        res.v.assign(n, 0.0);
        return res;
    }
    std::vector<double> q = col;
    double scale = rsum / csum;
    for (double& x : q) x *= scale;

    detail::TransportSimplex simplex(row, q, cost);
    simplex.run();
    res.coupling.plan = simplex.flow_matrix();
    res.u = simplex.row_potentials();
    res.v = simplex.col_potentials();
    for (double& x : res.coupling.plan.a)
        if (x < 0.0 && x > -1e-12) x = 0.0;
    res.value = res.coupling.plan.dot(cost);
    double dual = 0.0;
    for (int i = 0; i < m; ++i) dual += row[i] * res.u[i];
    for (int j = 0; j < n; ++j) dual += q[j] * res.v[j];
    res.duality_gap = std::abs(res.value - dual);
    if (res.duality_gap > 1e-6 * std::max(1.0, std::abs(res.value)))
        throw Error("solve_linear_ot: optimality certificate failed");
    if (static_cast<long>(m) * n <= lex_refine_max_cells)
        detail::lex_canonicalize(res.coupling.plan, cost, res.u, res.v, res.value);
    return res;
}

}  // namespace bcot
