#pragma once

#include "bcot/kernel_plan.hpp"
#include "bcot/linear_ot.hpp"

namespace bcot {

struct BicausalSolution {
    KernelPlan plan;
    // values[t-1](x, y): optimal cost of periods t..T given the period-t pair,
    // discounted by delta^s at period s. values.back() is the boundary layer.
    std::vector<Mat> values;
    double value = 0.0;
};

// Backward induction for separable stage costs: each one-step problem is a
// linear transport between the conditional kernels, so greedy per-stage
// minimization is optimal.
inline BicausalSolution solve_bicausal_linear(const FiniteProcess& mu, const FiniteProcess& nu,
                                              const std::vector<Mat>& stage_costs,
                                              double delta) {
    mu.validate();
    nu.validate();
    if (mu.horizon != nu.horizon) throw Error("solve_bicausal_linear: horizon mismatch");
    int T = mu.horizon;
    if (static_cast<int>(stage_costs.size()) != T)
        throw Error("solve_bicausal_linear: need one stage cost per period");
    for (const Mat& c : stage_costs)
        if (c.rows != mu.n_states || c.cols != nu.n_states)
            throw Error("solve_bicausal_linear: stage cost shape mismatch");
    if (delta < 0.0 || delta > 1.0) throw Error("solve_bicausal_linear: delta outside [0,1]");

    BicausalSolution sol;
    sol.plan.mode = HistoryMode::markov;
    sol.plan.horizon = T;
    sol.plan.steps.resize(T - 1);
    sol.values.assign(T, Mat(mu.n_states, nu.n_states));

    double disc = std::pow(delta, T);
    for (int x = 0; x < mu.n_states; ++x)
        for (int y = 0; y < nu.n_states; ++y)
            sol.values[T - 1](x, y) = disc * stage_costs[T - 1](x, y);

    for (int t = T - 1; t >= 1; --t) {
        disc = std::pow(delta, t);
        for (int x = 0; x < mu.n_states; ++x)
            for (int y = 0; y < nu.n_states; ++y) {
                std::vector<double> row(mu.n_states), col(nu.n_states);
                for (int j = 0; j < mu.n_states; ++j) row[j] = mu.kernel(x, j);
                for (int j = 0; j < nu.n_states; ++j) col[j] = nu.kernel(y, j);
                LinearOtResult res = solve_linear_ot(row, col, sol.values[t]);
                sol.values[t - 1](x, y) = disc * stage_costs[t - 1](x, y) + res.value;
                sol.plan.steps[t - 1][HistoryKey{{x}, {y}}] = std::move(res.coupling);
            }
    }
    LinearOtResult res = solve_linear_ot(mu.initial, nu.initial, sol.values[0]);
    sol.plan.initial = std::move(res.coupling);
    sol.value = res.value;
    return sol;
}

}  // namespace bcot
