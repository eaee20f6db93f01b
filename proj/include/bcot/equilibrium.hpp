#pragma once

#include "bcot/composite_ot.hpp"
#include "bcot/cost_model.hpp"

namespace bcot {

namespace detail {

inline void check_process_pair(const FiniteProcess& mu, const FiniteProcess& nu) {
    mu.validate();
    nu.validate();
    if (mu.horizon != nu.horizon) throw Error("equilibrium: horizon mismatch");
}

inline std::vector<HistoryKey> layer_histories(const FiniteProcess& mu, const FiniteProcess& nu,
                                               int t, size_t cap) {
    auto xs = enumerate_paths(mu, t);
    auto ys = enumerate_paths(nu, t);
    if (xs.size() * ys.size() > cap)
        throw Error("equilibrium: history space too large for full mode");
    std::vector<HistoryKey> out;
    out.reserve(xs.size() * ys.size());
    for (const auto& [xp, xw] : xs)
        for (const auto& [yp, yw] : ys) out.push_back({xp, yp});
    return out;
}

struct Tail {
    RankPath x, y;  // full paths of length T
    double w;       // conditional weight given the history
};

// Completions of the plan from the given full prefix pair (absolute time =
// prefix length). In markov mode the prefix may be just the current pair, in
// which case abs_time says where it sits.
inline void collect_tails(const KernelPlan& plan, int abs_time, RankPath& x, RankPath& y,
                          double w, std::vector<Tail>& out) {
    if (abs_time == plan.horizon) {
        out.push_back({x, y, w});
        return;
    }
    const Coupling& c = plan.step_at(abs_time, make_history(plan.mode, x, y));
    for (int a = 0; a < c.rows(); ++a)
        for (int b = 0; b < c.cols(); ++b) {
            double p = c.plan(a, b);
            if (p <= 0.0) continue;
            x.push_back(a);
            y.push_back(b);
            collect_tails(plan, abs_time + 1, x, y, w * p, out);
            x.pop_back();
            y.pop_back();
        }
}

// Full-mode helper: completions of a history into full paths.
inline std::vector<Tail> plan_tails(const KernelPlan& plan, const HistoryKey& h) {
    RankPath x = h.x, y = h.y;
    std::vector<Tail> out;
    collect_tails(plan, static_cast<int>(x.size()), x, y, 1.0, out);
    return out;
}

// Paths from time t0 onward given the pair (a, b) at t0 and the preceding
// history (empty in markov mode). Returned paths start at t0, i.e. their
// first entry is (a, b).
inline std::vector<Tail> plan_suffixes(const KernelPlan& plan, const HistoryKey& before, int t0,
                                       int a, int b) {
    RankPath x = before.x, y = before.y;
    x.push_back(a);
    y.push_back(b);
    std::vector<Tail> full;
    collect_tails(plan, t0, x, y, 1.0, full);
    size_t cut = before.x.size();
    for (auto& tail : full) {
        tail.x.erase(tail.x.begin(), tail.x.begin() + cut);
        tail.y.erase(tail.y.begin(), tail.y.begin() + cut);
    }
    return full;
}

inline std::vector<double> kernel_row(const FiniteProcess& p, int state) {
    std::vector<double> row(p.n_states);
    for (int j = 0; j < p.n_states; ++j) row[j] = p.kernel(state, j);
    return row;
}

// Dense grid minimization over the one-parameter coupling family of a 2x2
// problem; the escape hatch for non-convex outer transforms.
template <typename F>
inline std::pair<Coupling, double> grid_min_2x2(const std::vector<double>& row,
                                                const std::vector<double>& col, F&& objective,
                                                int points = 20001) {
    if (row.size() != 2 || col.size() != 2)
        throw Error("equilibrium: non-convex outer transform supported only for 2 states");
    double mass = vec_sum(row);
    double lo = std::max(0.0, row[0] + col[0] - mass), hi = std::min(row[0], col[0]);
    Coupling c;
    c.row_marginal = row;
    c.col_marginal = col;
    c.plan = Mat(2, 2);
    auto fill = [&](double th) {
        c.plan(0, 0) = th;
        c.plan(0, 1) = row[0] - th;
        c.plan(1, 0) = col[0] - th;
        c.plan(1, 1) = mass - row[0] - col[0] + th;
    };
    double best_th = lo, best_val = std::numeric_limits<double>::infinity();
    for (int k = 0; k < points; ++k) {
        double th = lo + (hi - lo) * k / (points - 1);
        fill(th);
        double val = objective(c.plan);
        if (val < best_val) {
            best_val = val;
            best_th = th;
        }
    }
    fill(best_th);
    return {c, best_val};
}

}  // namespace detail

// Equilibrium solver for J = E[path_cost] + outer(E[statistic]): backward
// induction where each one-step problem trades the continuation value against
// the outer transform of the conditional expected statistic.
inline EquilibriumSolution solve_equilibrium_nonlinear(const FiniteProcess& mu,
                                                       const FiniteProcess& nu,
                                                       const NonlinearCost& cost,
                                                       double tol = 1e-8, long max_iter = 10000,
                                                       size_t history_cap = 1000000) {
    detail::check_process_pair(mu, nu);
    if (!cost.path_cost || !cost.statistic || !cost.outer)
        throw Error("solve_equilibrium_nonlinear: cost functions missing");
    if (cost.outer_convex && !cost.outer_prime)
        throw Error("solve_equilibrium_nonlinear: outer_prime required for convex solves");
    int T = mu.horizon;
    EquilibriumSolution sol;
    sol.plan.mode = HistoryMode::full;
    sol.plan.horizon = T;
    sol.plan.steps.resize(T - 1);
    sol.table.mode = HistoryMode::full;
    sol.table.horizon = T;
    sol.table.values.resize(T + 1);
    sol.table.g.resize(T + 1);

    std::vector<std::vector<HistoryKey>> layers(T + 1);
    for (int t = 1; t <= T; ++t) layers[t] = detail::layer_histories(mu, nu, t, history_cap);

    for (const auto& h : layers[T]) {
        double gh = cost.statistic(h.x, h.y);
        sol.table.g[T][h] = gh;
        sol.table.values[T][h] = cost.path_cost(h.x, h.y) + cost.outer(gh);
    }
    for (int t = T - 1; t >= 0; --t) {
        if (t + 1 < T) {
            for (const auto& h2 : layers[t + 1]) {
                double s = 0.0;
                for (const auto& tail : detail::plan_tails(sol.plan, h2))
                    s += tail.w * cost.statistic(tail.x, tail.y);
                sol.table.g[t + 1][h2] = s;
            }
        }
        std::vector<HistoryKey> layer = t == 0 ? std::vector<HistoryKey>{{}} : layers[t];
        for (const auto& h : layer) {
            std::vector<double> row = t == 0 ? mu.initial : detail::kernel_row(mu, h.x.back());
            std::vector<double> col = t == 0 ? nu.initial : detail::kernel_row(nu, h.y.back());
            Mat lin(mu.n_states, nu.n_states), stat(mu.n_states, nu.n_states);
            for (int a = 0; a < mu.n_states; ++a)
                for (int b = 0; b < nu.n_states; ++b) {
                    if (row[a] <= 0.0 || col[b] <= 0.0) continue;
                    HistoryKey h2 = h;
                    h2.x.push_back(a);
                    h2.y.push_back(b);
                    double g2 = sol.table.g[t + 1].at(h2);
                    lin(a, b) = sol.table.values[t + 1].at(h2) - cost.outer(g2);
                    stat(a, b) = g2;
                }
            Coupling gamma;
            double val;
            if (cost.outer_convex) {
                CompositeObjective obj;
                obj.linear = lin;
                obj.has_g = true;
                obj.scalar_g = stat;
                obj.G = cost.outer;
                obj.Gprime = cost.outer_prime;
                CompositeResult res = solve_composite_ot(row, col, obj, tol, max_iter);
                gamma = std::move(res.coupling);
                val = res.value;
            } else {
                auto [c, v] = detail::grid_min_2x2(row, col, [&](const Mat& g) {
                    return lin.dot(g) + cost.outer(stat.dot(g));
                });
                gamma = std::move(c);
                val = v;
            }
            if (t == 0) {
                sol.plan.initial = std::move(gamma);
                sol.table.value = sol.value = val;
            } else {
                sol.plan.steps[t - 1][h] = std::move(gamma);
                sol.table.values[t][h] = val;
            }
        }
    }
    return sol;
}

namespace detail {

inline EquilibriumSolution solve_state_markov(const FiniteProcess& mu, const FiniteProcess& nu,
                                              const StateDependentCost& cost) {
    int T = mu.horizon, nx = mu.n_states, ny = nu.n_states;
    EquilibriumSolution sol;
    sol.plan.mode = HistoryMode::markov;
    sol.plan.horizon = T;
    sol.plan.steps.resize(T - 1);
    sol.table.mode = HistoryMode::markov;
    sol.table.horizon = T;
    sol.table.values.resize(T + 1);
    sol.table.b.resize(T + 1);

    // tail(t)(x, y) = expected sum of stage costs over periods t..T given the
    // period-t pair, under the equilibrium continuation.
    Mat tail(nx, ny);
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) {
            tail(x, y) = cost.stage(T, x, y);
            sol.table.values[T][HistoryKey{{x}, {y}}] = tail(x, y);
        }
    for (int t = T - 1; t >= 1; --t) {
        // anchored expectations at the next layer, then the one-step solves;
        // the V_{t+1} and own-anchor terms of the recursion cancel exactly.
        for (int a = 0; a < nx; ++a)
            for (int b = 0; b < ny; ++b) {
                Mat bm(nx, ny);
                for (int w = 0; w < nx; ++w)
                    for (int v = 0; v < ny; ++v) bm(w, v) = cost.prox(t, w, v, a, b) + tail(a, b);
                sol.table.b[t + 1][HistoryKey{{a}, {b}}] = std::move(bm);
            }
        Mat next_tail(nx, ny);
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) {
                Mat lin(nx, ny);
                for (int a = 0; a < nx; ++a)
                    for (int b = 0; b < ny; ++b) lin(a, b) = cost.prox(t, x, y, a, b) + tail(a, b);
                LinearOtResult res =
                    solve_linear_ot(kernel_row(mu, x), kernel_row(nu, y), lin);
                sol.table.values[t][HistoryKey{{x}, {y}}] = res.value;
                double cont = 0.0;
                for (int a = 0; a < nx; ++a)
                    for (int b = 0; b < ny; ++b) cont += res.coupling.plan(a, b) * tail(a, b);
                next_tail(x, y) = cost.stage(t, x, y) + cont;
                sol.plan.steps[t - 1][HistoryKey{{x}, {y}}] = std::move(res.coupling);
            }
        tail = std::move(next_tail);
    }
    for (int a = 0; a < nx; ++a)
        for (int b = 0; b < ny; ++b) sol.table.b0[HistoryKey{{a}, {b}}] = tail(a, b);
    LinearOtResult res = solve_linear_ot(mu.initial, nu.initial, tail);
    sol.plan.initial = std::move(res.coupling);
    sol.table.value = sol.value = res.value;
    return sol;
}

inline EquilibriumSolution solve_state_full(const FiniteProcess& mu, const FiniteProcess& nu,
                                            const StateDependentCost& cost, size_t history_cap) {
    int T = mu.horizon;
    EquilibriumSolution sol;
    sol.plan.mode = HistoryMode::full;
    sol.plan.horizon = T;
    sol.plan.steps.resize(T - 1);
    sol.table.mode = HistoryMode::full;
    sol.table.horizon = T;
    sol.table.values.resize(T + 1);
    sol.table.b.resize(T + 1);

    std::vector<std::vector<HistoryKey>> layers(T + 1);
    for (int t = 1; t <= T; ++t) layers[t] = layer_histories(mu, nu, t, history_cap);

    for (const auto& h : layers[T])
        sol.table.values[T][h] = cost.eval(T, h.x.back(), h.y.back(), h.x, h.y);

    for (int t = T - 1; t >= 0; --t) {
        std::map<HistoryKey, double> own_b;
        for (const auto& h2 : layers[t + 1]) {
            auto tails = plan_tails(sol.plan, h2);
            Mat bm(mu.n_states, nu.n_states);
            for (int w = 0; w < mu.n_states; ++w)
                for (int v = 0; v < nu.n_states; ++v) {
                    double s = 0.0;
                    for (const auto& tail : tails) s += tail.w * cost.eval(t, w, v, tail.x, tail.y);
                    bm(w, v) = s;
                }
            sol.table.b[t + 1][h2] = std::move(bm);
            double s = 0.0;
            for (const auto& tail : tails)
                s += tail.w * cost.eval(t + 1, h2.x.back(), h2.y.back(), tail.x, tail.y);
            own_b[h2] = s;
            if (t == 0) {
                double s0 = 0.0;
                for (const auto& tail : tails) s0 += tail.w * cost.eval(0, -1, -1, tail.x, tail.y);
                sol.table.b0[h2] = s0;
            }
        }
        std::vector<HistoryKey> layer = t == 0 ? std::vector<HistoryKey>{{}} : layers[t];
        for (const auto& h : layer) {
            std::vector<double> row = t == 0 ? mu.initial : kernel_row(mu, h.x.back());
            std::vector<double> col = t == 0 ? nu.initial : kernel_row(nu, h.y.back());
            Mat lin(mu.n_states, nu.n_states);
            for (int a = 0; a < mu.n_states; ++a)
                for (int b = 0; b < nu.n_states; ++b) {
                    if (row[a] <= 0.0 || col[b] <= 0.0) continue;
                    HistoryKey h2 = h;
                    h2.x.push_back(a);
                    h2.y.push_back(b);
                    double third = t == 0 ? sol.table.b0.at(h2)
                                          : sol.table.b[t + 1].at(h2)(h.x.back(), h.y.back());
                    lin(a, b) = sol.table.values[t + 1].at(h2) - own_b.at(h2) + third;
                }
            LinearOtResult res = solve_linear_ot(row, col, lin);
            if (t == 0) {
                sol.plan.initial = std::move(res.coupling);
                sol.table.value = sol.value = res.value;
            } else {
                sol.plan.steps[t - 1][h] = std::move(res.coupling);
                sol.table.values[t][h] = res.value;
            }
        }
    }
    return sol;
}

}  // namespace detail

// Equilibrium solver for four-argument state-dependent costs. The one-step
// problems are linear, so each is solved exactly. markov mode requires the
// caller-declared prox/stage structure.
inline EquilibriumSolution solve_equilibrium_state(const FiniteProcess& mu,
                                                   const FiniteProcess& nu,
                                                   const StateDependentCost& cost,
                                                   HistoryMode mode = HistoryMode::full,
                                                   size_t history_cap = 1000000) {
    detail::check_process_pair(mu, nu);
    if (mode == HistoryMode::markov) {
        if (!cost.markov || !cost.prox || !cost.stage)
            throw Error("solve_equilibrium_state: markov mode needs the declared structure");
        return detail::solve_state_markov(mu, nu, cost);
    }
    if (!cost.eval) throw Error("solve_equilibrium_state: eval missing");
    return detail::solve_state_full(mu, nu, cost, history_cap);
}

// Equilibrium solver for J = E[path_cost] + f-divergence of the conditional
// plan against the product of conditional marginal laws.
inline EquilibriumSolution solve_equilibrium_fdiv(const FiniteProcess& mu, const FiniteProcess& nu,
                                                  const FdivCost& cost, double tol = 1e-8,
                                                  long max_iter = 10000,
                                                  size_t history_cap = 1000000) {
    detail::check_process_pair(mu, nu);
    if (!cost.path_cost) throw Error("solve_equilibrium_fdiv: path cost missing");
    int T = mu.horizon;
    EquilibriumSolution sol;
    sol.plan.mode = HistoryMode::full;
    sol.plan.horizon = T;
    sol.plan.steps.resize(T - 1);
    sol.table.mode = HistoryMode::full;
    sol.table.horizon = T;
    sol.table.values.resize(T + 1);
    sol.table.div_tail.resize(T + 1);

    std::vector<std::vector<HistoryKey>> layers(T + 1);
    for (int t = 1; t <= T; ++t) layers[t] = detail::layer_histories(mu, nu, t, history_cap);

    for (const auto& h : layers[T]) {
        sol.table.values[T][h] = cost.path_cost(h.x, h.y);
        sol.table.div_tail[T][h] = 0.0;
    }
    for (int t = T - 1; t >= 0; --t) {
        int steps_left = T - (t + 1);
        // conditional future divergence at each next-layer history
        std::map<HistoryKey, std::map<std::pair<RankPath, RankPath>, double>> cond;
        for (const auto& h2 : layers[t + 1]) {
            auto tails = detail::plan_tails(sol.plan, h2);
            auto& m = cond[h2];
            for (const auto& tail : tails) {
                RankPath sx(tail.x.begin() + t + 1, tail.x.end());
                RankPath sy(tail.y.begin() + t + 1, tail.y.end());
                m[{sx, sy}] += tail.w;
            }
            auto xf = enumerate_futures(mu, h2.x.back(), steps_left);
            auto yf = enumerate_futures(nu, h2.y.back(), steps_left);
            double d = 0.0;
            for (const auto& [xs, xw] : xf)
                for (const auto& [ys, yw] : yf) {
                    auto it = m.find({xs, ys});
                    double q = it == m.end() ? 0.0 : it->second;
                    d += xw * yw * f_eval(cost.kind, q / (xw * yw));
                }
            sol.table.div_tail[t + 1][h2] = d;
        }
        std::vector<HistoryKey> layer = t == 0 ? std::vector<HistoryKey>{{}} : layers[t];
        for (const auto& h : layer) {
            std::vector<double> row = t == 0 ? mu.initial : detail::kernel_row(mu, h.x.back());
            std::vector<double> col = t == 0 ? nu.initial : detail::kernel_row(nu, h.y.back());
            CompositeObjective obj;
            obj.linear = Mat(mu.n_states, nu.n_states);
            obj.has_fdiv = true;
            obj.fdiv_kind = cost.kind;
            obj.fdiv.assign(static_cast<size_t>(mu.n_states) * nu.n_states, {});
            for (int a = 0; a < mu.n_states; ++a)
                for (int b = 0; b < nu.n_states; ++b) {
                    if (row[a] <= 0.0 || col[b] <= 0.0) continue;
                    HistoryKey h2 = h;
                    h2.x.push_back(a);
                    h2.y.push_back(b);
                    obj.linear(a, b) =
                        sol.table.values[t + 1].at(h2) - sol.table.div_tail[t + 1].at(h2);
                    auto& terms = obj.fdiv[static_cast<size_t>(a) * nu.n_states + b];
                    const auto& m = cond.at(h2);
                    auto xf = enumerate_futures(mu, a, steps_left);
                    auto yf = enumerate_futures(nu, b, steps_left);
                    double cell = row[a] * col[b];
                    for (const auto& [xs, xw] : xf)
                        for (const auto& [ys, yw] : yf) {
                            auto it = m.find({xs, ys});
                            double q = it == m.end() ? 0.0 : it->second;
                            terms.push_back({q / (cell * xw * yw), cell * xw * yw});
                        }
                }
            CompositeResult res = solve_composite_ot(row, col, obj, tol, max_iter);
            if (t == 0) {
                sol.plan.initial = std::move(res.coupling);
                sol.table.value = sol.value = res.value;
            } else {
                sol.plan.steps[t - 1][h] = std::move(res.coupling);
                sol.table.values[t][h] = res.value;
            }
        }
    }
    return sol;
}

// A profitable one-step deviation found by verify_equilibrium: replacing the
// plan's coupling at (t, history) improves the conditional objective by
// `improvement` while keeping every later kernel fixed.
struct Deviation {
    int t = 0;
    HistoryKey history;
    double improvement = 0.0;
};

namespace detail {

// The one-step problem at a fixed (t, history): an evaluator for arbitrary
// couplings and, when available, an exact best response.
struct OneStep {
    std::function<double(const Mat&)> J;
    bool exact = true;
    std::function<double()> best;
};

inline Mat suffix_cost_matrix(const KernelPlan& plan, const FiniteProcess& mu,
                              const FiniteProcess& nu, const HistoryKey& before, int t,
                              const std::vector<double>& row, const std::vector<double>& col,
                              const std::function<double(const Tail&)>& per_path) {
    Mat w(mu.n_states, nu.n_states);
    for (int a = 0; a < mu.n_states; ++a)
        for (int b = 0; b < nu.n_states; ++b) {
            if (row[a] <= 0.0 || col[b] <= 0.0) continue;
            double s = 0.0;
            for (const auto& tail : plan_suffixes(plan, before, t + 1, a, b))
                s += tail.w * per_path(tail);
            w(a, b) = s;
        }
    return w;
}

inline OneStep one_step_problem(const KernelPlan& plan, const FiniteProcess& mu,
                                const FiniteProcess& nu, const CostModel& model,
                                const HistoryKey& h, int t, const std::vector<double>& row,
                                const std::vector<double>& col, double tol, long max_iter) {
    OneStep out;
    int T = plan.horizon;
    bool markov = plan.mode == HistoryMode::markov;
    HistoryKey before = markov ? HistoryKey{} : h;
    int ax = t == 0 ? -1 : h.x.back();
    int ay = t == 0 ? -1 : h.y.back();

    if (const auto* lc = std::get_if<LinearCost>(&model)) {
        Mat w = suffix_cost_matrix(plan, mu, nu, before, t, row, col, [&](const Tail& tail) {
            double s = 0.0;
            for (size_t i = 0; i < tail.x.size(); ++i)
                s += std::pow(lc->delta, t + 1 + i) * lc->stage_costs[t + i](tail.x[i], tail.y[i]);
            return s;
        });
        out.J = [w](const Mat& g) { return w.dot(g); };
        out.best = [row, col, w]() { return solve_linear_ot(row, col, w).value; };
        return out;
    }
    if (const auto* sc = std::get_if<StateDependentCost>(&model)) {
        Mat w(mu.n_states, nu.n_states);
        if (markov) {
            if (!sc->markov || !sc->stage)
                throw Error("verify_equilibrium: markov plan needs a markov cost structure");
            for (int a = 0; a < mu.n_states; ++a)
                for (int b = 0; b < nu.n_states; ++b) {
                    if (row[a] <= 0.0 || col[b] <= 0.0) continue;
                    double s = t == 0 ? 0.0 : sc->prox(t, ax, ay, a, b);
                    for (const auto& tail : plan_suffixes(plan, before, t + 1, a, b)) {
                        double stages = 0.0;
                        for (size_t i = 0; i < tail.x.size(); ++i)
                            stages += sc->stage(t + 1 + static_cast<int>(i), tail.x[i], tail.y[i]);
                        s += tail.w * stages;
                    }
                    w(a, b) = s;
                }
        } else {
            w = suffix_cost_matrix(plan, mu, nu, before, t, row, col, [&](const Tail& tail) {
                RankPath fx = h.x, fy = h.y;
                fx.insert(fx.end(), tail.x.begin(), tail.x.end());
                fy.insert(fy.end(), tail.y.begin(), tail.y.end());
                return sc->eval(t, ax, ay, fx, fy);
            });
        }
        out.J = [w](const Mat& g) { return w.dot(g); };
        out.best = [row, col, w]() { return solve_linear_ot(row, col, w).value; };
        return out;
    }
    if (const auto* nc = std::get_if<NonlinearCost>(&model)) {
        if (markov) throw Error("verify_equilibrium: markov plans unsupported for this model");
        auto full = [&](const Tail& tail, const std::function<double(const RankPath&, const RankPath&)>& f) {
            RankPath fx = h.x, fy = h.y;
            fx.insert(fx.end(), tail.x.begin(), tail.x.end());
            fy.insert(fy.end(), tail.y.begin(), tail.y.end());
            return f(fx, fy);
        };
        Mat c = suffix_cost_matrix(plan, mu, nu, before, t, row, col,
                                   [&](const Tail& tail) { return full(tail, nc->path_cost); });
        Mat gm = suffix_cost_matrix(plan, mu, nu, before, t, row, col,
                                    [&](const Tail& tail) { return full(tail, nc->statistic); });
        auto outer = nc->outer;
        out.J = [c, gm, outer](const Mat& g) { return c.dot(g) + outer(gm.dot(g)); };
        if (nc->outer_convex) {
            auto op = nc->outer_prime;
            out.best = [row, col, c, gm, outer, op, tol, max_iter]() {
                CompositeObjective obj;
                obj.linear = c;
                obj.has_g = true;
                obj.scalar_g = gm;
                obj.G = outer;
                obj.Gprime = op;
                return solve_composite_ot(row, col, obj, tol, max_iter).value;
            };
        } else if (mu.n_states == 2 && nu.n_states == 2) {
            Mat cc = c, gg = gm;
            out.best = [row, col, cc, gg, outer]() {
                return grid_min_2x2(row, col, [&](const Mat& g) {
                           return cc.dot(g) + outer(gg.dot(g));
                       })
                    .second;
            };
        } else {
            out.exact = false;
        }
        return out;
    }
    const auto& fc = std::get<FdivCost>(model);
    if (markov) throw Error("verify_equilibrium: markov plans unsupported for this model");
    Mat c = suffix_cost_matrix(plan, mu, nu, before, t, row, col, [&](const Tail& tail) {
        RankPath fx = h.x, fy = h.y;
        fx.insert(fx.end(), tail.x.begin(), tail.x.end());
        fy.insert(fy.end(), tail.y.begin(), tail.y.end());
        return fc.path_cost(fx, fy);
    });
    // per-cell divergence terms over the reference futures from each (a, b)
    int steps_left = T - (t + 1);
    CompositeObjective obj;
    obj.linear = c;
    obj.has_fdiv = true;
    obj.fdiv_kind = fc.kind;
    obj.fdiv.assign(static_cast<size_t>(mu.n_states) * nu.n_states, {});
    for (int a = 0; a < mu.n_states; ++a)
        for (int b = 0; b < nu.n_states; ++b) {
            if (row[a] <= 0.0 || col[b] <= 0.0) continue;
            std::map<std::pair<RankPath, RankPath>, double> q;
            for (const auto& tail : plan_suffixes(plan, before, t + 1, a, b)) {
                RankPath sx(tail.x.begin() + 1, tail.x.end());
                RankPath sy(tail.y.begin() + 1, tail.y.end());
                q[{sx, sy}] += tail.w;
            }
            auto xf = enumerate_futures(mu, a, steps_left);
            auto yf = enumerate_futures(nu, b, steps_left);
            double cell = row[a] * col[b];
            auto& terms = obj.fdiv[static_cast<size_t>(a) * nu.n_states + b];
            for (const auto& [xs, xw] : xf)
                for (const auto& [ys, yw] : yf) {
                    auto it = q.find({xs, ys});
                    double mass = it == q.end() ? 0.0 : it->second;
                    terms.push_back({mass / (cell * xw * yw), cell * xw * yw});
                }
        }
    out.J = [obj](const Mat& g) { return obj.eval(g); };
    out.best = [row, col, obj, tol, max_iter]() {
        return solve_composite_ot(row, col, obj, tol, max_iter).value;
    };
    return out;
}

}  // namespace detail

// Checks the subgame-perfection property directly: at every plan history with
// positive probability, re-solves (or probes) the one-step problem holding all
// later kernels fixed and reports any coupling that beats the plan's choice by
// more than tol.
inline std::vector<Deviation> verify_equilibrium(const KernelPlan& plan, const FiniteProcess& mu,
                                                 const FiniteProcess& nu, const CostModel& model,
                                                 double tol = 1e-7, int n_probes = 0,
                                                 std::uint64_t seed = 0) {
    detail::check_process_pair(mu, nu);
    auto violations = check_bicausal(plan, mu, nu);
    if (!violations.empty())
        throw Error("verify_equilibrium: plan is not bi-causal (violation " +
                    std::to_string(violations.front().violation) + " at t=" +
                    std::to_string(violations.front().t) + ")");
    int T = plan.horizon;
    std::vector<Deviation> out;
    std::map<HistoryKey, double> reach;
    reach[HistoryKey{}] = 1.0;
    std::uint64_t counter = 0;
    for (int t = 0; t < T; ++t) {
        std::map<HistoryKey, double> next;
        for (const auto& [h, wh] : reach) {
            if (wh <= 0.0) continue;
            const Coupling& gamma = t == 0 ? plan.initial : plan.step_at(t, h);
            std::vector<double> row =
                t == 0 ? mu.initial : detail::kernel_row(mu, h.x.back());
            std::vector<double> col =
                t == 0 ? nu.initial : detail::kernel_row(nu, h.y.back());
            detail::OneStep prob =
                detail::one_step_problem(plan, mu, nu, model, h, t, row, col, tol * 1e-2, 20000);
            double base = prob.J(gamma.plan);
            double best = base;
            if (prob.exact) best = std::min(best, prob.best());
            if (n_probes > 0) {
                Rng rng(mix_seed(seed, ++counter));
                for (int k = 0; k < n_probes; ++k) {
                    Coupling probe = random_vertex_coupling(row, col, rng);
                    best = std::min(best, prob.J(probe.plan));
                }
            }
            if (base - best > tol) out.push_back({t, h, base - best});
            for (int a = 0; a < gamma.rows(); ++a)
                for (int b = 0; b < gamma.cols(); ++b) {
                    double p = gamma.plan(a, b);
                    if (p <= 0.0 || t + 1 >= T) continue;
                    HistoryKey h2;
                    if (plan.mode == HistoryMode::markov) {
                        h2 = HistoryKey{{a}, {b}};
                    } else {
                        h2 = h;
                        h2.x.push_back(a);
                        h2.y.push_back(b);
                    }
                    next[h2] += wh * p;
                }
        }
        reach = std::move(next);
    }
    return out;
}

// Equilibrium solver for separable discounted stage costs; the problem is
// time-consistent, so this is the classic backward induction expressed in the
// same interface.
inline EquilibriumSolution solve_equilibrium_linear(const FiniteProcess& mu,
                                                    const FiniteProcess& nu,
                                                    const LinearCost& cost) {
    detail::check_process_pair(mu, nu);
    int T = mu.horizon;
    if (static_cast<int>(cost.stage_costs.size()) != T)
        throw Error("solve_equilibrium_linear: need one stage cost per period");
    StateDependentCost sd;
    sd.markov = true;
    const std::vector<Mat>& costs = cost.stage_costs;
    double delta = cost.delta;
    sd.stage = [&costs, delta](int s, int x, int y) {
        return std::pow(delta, s) * costs[s - 1](x, y);
    };
    sd.prox = [](int, int, int, int, int) { return 0.0; };
    sd.eval = [&costs, delta, T](int t, int, int, const RankPath& xp, const RankPath& yp) {
        if (t == T) return std::pow(delta, T) * costs[T - 1](xp[T - 1], yp[T - 1]);
        double s = 0.0;
        for (int per = t + 1; per <= T; ++per)
            s += std::pow(delta, per) * costs[per - 1](xp[per - 1], yp[per - 1]);
        return s;
    };
    return detail::solve_state_markov(mu, nu, sd);
}

}  // namespace bcot
