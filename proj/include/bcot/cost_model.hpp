#pragma once

#include <functional>
#include <variant>

#include "bcot/divergences.hpp"
#include "bcot/kernel_plan.hpp"

namespace bcot {

// Separable stage costs, discounted by delta^t at period t (absolute index).
struct LinearCost {
    std::vector<Mat> stage_costs;  // one (x, y) matrix per period 1..T
    double delta = 1.0;
};

// Path cost plus a transform of an expected path statistic:
// J = E[path_cost] + outer(E[statistic]).
struct NonlinearCost {
    std::function<double(const RankPath&, const RankPath&)> path_cost;
    std::function<double(const RankPath&, const RankPath&)> statistic;
    std::function<double(double)> outer;
    std::function<double(double)> outer_prime;
    bool outer_convex = true;
};

// Four-argument cost: the time-t agent carries eval(t, w, v, x_path, y_path)
// with (w, v) its own state indices (-1 at t = 0, where there is no anchor).
// Setting markov declares the structure eval(t, w, v, ., .) =
// prox(t, w, v, x_{t+1}, y_{t+1}) + sum_{s>t} stage(s, x_s, y_s) with boundary
// stage(T, x_T, y_T), which the markov-mode solver exploits.
struct StateDependentCost {
    std::function<double(int, int, int, const RankPath&, const RankPath&)> eval;
    bool markov = false;
    std::function<double(int, int, int, int, int)> prox;
    std::function<double(int, int, int)> stage;
};

// Path cost plus an f-divergence penalty of the conditional plan against the
// product of the conditional marginal laws.
struct FdivCost {
    std::function<double(const RankPath&, const RankPath&)> path_cost;
    DivergenceKind kind = DivergenceKind::KL;
};

using CostModel = std::variant<LinearCost, NonlinearCost, StateDependentCost, FdivCost>;

// Backward-induction record. values[t] maps histories at time t to V_t for
// t = 1..T; the t = 0 value is the scalar `value`. Auxiliary tables:
//   g[t][h]        expected statistic given the history (nonlinear model)
//   b[t][h](w, v)  expected eval(t-1, w, v, .) given the history (state model)
//   b0[h]          expected eval(0, -1, -1, .) given a first-period history
//   div_tail[t][h] expected future divergence given the history (f-div model)
struct ValueTable {
    HistoryMode mode = HistoryMode::full;
    int horizon = 0;
    double value = 0.0;
    std::vector<std::map<HistoryKey, double>> values;
    std::vector<std::map<HistoryKey, double>> g;
    std::vector<std::map<HistoryKey, Mat>> b;
    std::map<HistoryKey, double> b0;
    std::vector<std::map<HistoryKey, double>> div_tail;
};

struct EquilibriumSolution {
    KernelPlan plan;
    ValueTable table;
    double value = 0.0;
};

}  // namespace bcot
