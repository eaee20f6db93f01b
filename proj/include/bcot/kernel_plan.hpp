#pragma once

#include <compare>
#include <map>
#include <queue>

#include "bcot/coupling.hpp"
#include "bcot/divergences.hpp"
#include "bcot/path_measure.hpp"
#include "bcot/process.hpp"

namespace bcot {

enum class HistoryMode { markov, full };

// History of both coordinates up to some time; in markov mode only the
// current pair of states is kept.
struct HistoryKey {
    std::vector<int> x, y;
    auto operator<=>(const HistoryKey&) const = default;
};

inline HistoryKey make_history(HistoryMode mode, const RankPath& x, const RankPath& y) {
    if (mode == HistoryMode::markov) return {{x.back()}, {y.back()}};
    return {x, y};
}

// Transport plan in successive-kernel form: an initial coupling over the
// first-period pair plus, for each t = 1..T-1, a coupling over the next pair
// for every stored history.
struct KernelPlan {
    HistoryMode mode = HistoryMode::full;
    int horizon = 0;
    Coupling initial;
    std::vector<std::map<HistoryKey, Coupling>> steps;  // steps[t-1]: histories at time t

    const Coupling& step_at(int t, const HistoryKey& h) const {
        const auto& layer = steps.at(static_cast<size_t>(t) - 1);
        auto it = layer.find(h);
        if (it == layer.end()) throw Error("kernel plan: missing history");
        return it->second;
    }
};

struct BicausalViolation {
    int t = 0;  // 0 = initial coupling
    HistoryKey history;
    double violation = 0.0;
};

// Checks the two marginal conditions of a bi-causal plan: the initial
// coupling lies in the product of first-period laws, and every stored
// one-step coupling has row marginal mu(.|x-history) and column marginal
// nu(.|y-history).
inline std::vector<BicausalViolation> check_bicausal(const KernelPlan& plan,
                                                     const FiniteProcess& mu,
                                                     const FiniteProcess& nu,
                                                     double tol = kFeasTol) {
    std::vector<BicausalViolation> out;
    if (plan.horizon != mu.horizon || plan.horizon != nu.horizon)
        throw Error("check_bicausal: horizon mismatch");
    auto check_one = [&](const Coupling& c, const std::vector<double>& want_row,
                         const std::vector<double>& want_col, int t, const HistoryKey& h) {
        double worst = 0.0;
        for (double v : c.plan.a) worst = std::max(worst, -v);
        worst = std::max(worst, max_abs_diff(c.plan.row_sums(), want_row));
        worst = std::max(worst, max_abs_diff(c.plan.col_sums(), want_col));
        if (worst > tol) out.push_back({t, h, worst});
    };
    check_one(plan.initial, mu.initial, nu.initial, 0, {});
    for (size_t layer = 0; layer < plan.steps.size(); ++layer) {
        for (const auto& [h, c] : plan.steps[layer]) {
            std::vector<double> row(mu.n_states), col(nu.n_states);
            for (int j = 0; j < mu.n_states; ++j) row[j] = mu.kernel(h.x.back(), j);
            for (int j = 0; j < nu.n_states; ++j) col[j] = nu.kernel(h.y.back(), j);
            check_one(c, row, col, static_cast<int>(layer) + 1, h);
        }
    }
    return out;
}

// Chain-rule expansion of the plan into a measure on path pairs.
inline PathMeasure concatenate(const KernelPlan& plan, const FiniteProcess& mu,
                               const FiniteProcess& nu, size_t support_cap = 1000000) {
    struct Node {
        RankPath x, y;
        double w;
    };
    PathMeasure out;
    out.x_values = mu.state_values;
    out.y_values = nu.state_values;
    std::vector<Node> frontier;
    for (int a = 0; a < plan.initial.rows(); ++a)
        for (int b = 0; b < plan.initial.cols(); ++b)
            if (plan.initial.plan(a, b) > 0.0) frontier.push_back({{a}, {b}, plan.initial.plan(a, b)});
    for (int t = 1; t < plan.horizon; ++t) {
        std::vector<Node> next;
        for (const auto& node : frontier) {
            const Coupling& c = plan.step_at(t, make_history(plan.mode, node.x, node.y));
            for (int a = 0; a < c.rows(); ++a)
                for (int b = 0; b < c.cols(); ++b) {
                    double p = c.plan(a, b);
                    if (p <= 0.0) continue;
                    Node child{node.x, node.y, node.w * p};
                    child.x.push_back(a);
                    child.y.push_back(b);
                    next.push_back(std::move(child));
                }
            if (next.size() > support_cap)
                throw Error("concatenate: support cap exceeded; use top_k_paths");
        }
        frontier = std::move(next);
    }
    for (auto& node : frontier) out.add(std::move(node.x), std::move(node.y), node.w);
    out.finalize();
    out.is_normalized = std::abs(out.total_weight() - 1.0) <= kFeasTol;
    return out;
}

struct TopKResult {
    PathMeasure measure;
    bool exhausted = false;  // fewer than K positive-probability paths exist
};

// K highest-probability path pairs of the plan via best-first search over the
// prefix tree. A prefix weight bounds every completion (extension factors are
// probabilities), so the search can stop once the frontier drops below the
// K-th best complete weight. Ties at the boundary are kept and resolved by
// the concatenated index sequence (x then y, ascending).
inline TopKResult top_k_paths(const KernelPlan& plan, const FiniteProcess& mu,
                              const FiniteProcess& nu, size_t k, bool renormalize = true) {
    if (k == 0) throw Error("top_k_paths: k must be positive");
    struct Node {
        double w;
        RankPath x, y;
    };
    auto cmp = [](const Node& a, const Node& b) {
        if (a.w != b.w) return a.w < b.w;  // max-heap on weight
        return std::tie(a.x, a.y) > std::tie(b.x, b.y);
    };
    std::priority_queue<Node, std::vector<Node>, decltype(cmp)> pq(cmp);
    for (int a = 0; a < plan.initial.rows(); ++a)
        for (int b = 0; b < plan.initial.cols(); ++b)
            if (plan.initial.plan(a, b) > 0.0) pq.push({plan.initial.plan(a, b), {a}, {b}});
    std::vector<PathAtom> complete;
    double boundary = -1.0;
    while (!pq.empty()) {
        Node node = pq.top();
        pq.pop();
        if (complete.size() >= k && node.w < boundary) break;
        if (static_cast<int>(node.x.size()) == plan.horizon) {
            complete.push_back({std::move(node.x), std::move(node.y), node.w});
            if (complete.size() == k) {
                boundary = complete.back().weight;
                for (const auto& c : complete) boundary = std::min(boundary, c.weight);
            }
            continue;
        }
        int t = static_cast<int>(node.x.size());
        const Coupling& c = plan.step_at(t, make_history(plan.mode, node.x, node.y));
        for (int a = 0; a < c.rows(); ++a)
            for (int b = 0; b < c.cols(); ++b) {
                double p = c.plan(a, b);
                if (p <= 0.0) continue;
                double w = node.w * p;
                if (complete.size() >= k && w < boundary) continue;
                Node child{w, node.x, node.y};
                child.x.push_back(a);
                child.y.push_back(b);
                pq.push(std::move(child));
            }
    }
    std::sort(complete.begin(), complete.end(), [](const PathAtom& a, const PathAtom& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return std::tie(a.x, a.y) < std::tie(b.x, b.y);
    });
    TopKResult res;
    res.exhausted = complete.size() < k;
    if (complete.size() > k) complete.resize(k);
    res.measure.atoms = std::move(complete);
    res.measure.x_values = mu.state_values;
    res.measure.y_values = nu.state_values;
    res.measure.finalize();
    if (renormalize) res.measure.renormalize();
    return res;
}

// |total divergence - sum of expected one-step divergences| for a bi-causal
// plan against the product of its marginals. Zero for KL (the chain rule is
// additive there), generally positive otherwise.
inline double chain_rule_gap(const KernelPlan& plan, const FiniteProcess& mu,
                             const FiniteProcess& nu, DivergenceKind kind) {
    PathMeasure joint = concatenate(plan, mu, nu);
    std::map<std::pair<RankPath, RankPath>, double> prob;
    for (const auto& a : joint.atoms) prob[{a.x, a.y}] = a.weight;
    auto xs = enumerate_paths(mu, plan.horizon);
    auto ys = enumerate_paths(nu, plan.horizon);
    std::vector<double> p, r;
    p.reserve(xs.size() * ys.size());
    for (const auto& [xp, xw] : xs)
        for (const auto& [yp, yw] : ys) {
            auto it = prob.find({xp, yp});
            p.push_back(it == prob.end() ? 0.0 : it->second);
            r.push_back(xw * yw);
        }
    double total = f_divergence(kind, p, r);

    auto step_div = [&](const Coupling& c, const std::vector<double>& row,
                        const std::vector<double>& col) {
        Mat ref(c.rows(), c.cols());
        for (int i = 0; i < c.rows(); ++i)
            for (int j = 0; j < c.cols(); ++j) ref(i, j) = row[i] * col[j];
        return f_divergence(kind, c.plan, ref);
    };
    double chain = step_div(plan.initial, mu.initial, nu.initial);
    // forward pass over reachable histories with their probabilities
    std::map<HistoryKey, double> reach;
    for (int a = 0; a < plan.initial.rows(); ++a)
        for (int b = 0; b < plan.initial.cols(); ++b)
            if (plan.initial.plan(a, b) > 0.0) {
                HistoryKey h = make_history(plan.mode, {a}, {b});
                if (plan.mode == HistoryMode::full) h = {{a}, {b}};
                reach[h] += plan.initial.plan(a, b);
            }
    for (int t = 1; t < plan.horizon; ++t) {
        std::map<HistoryKey, double> next;
        for (const auto& [h, w] : reach) {
            const Coupling& c = plan.step_at(t, plan.mode == HistoryMode::markov
                                                    ? HistoryKey{{h.x.back()}, {h.y.back()}}
                                                    : h);
            std::vector<double> row(mu.n_states), col(nu.n_states);
            for (int j = 0; j < mu.n_states; ++j) row[j] = mu.kernel(h.x.back(), j);
            for (int j = 0; j < nu.n_states; ++j) col[j] = nu.kernel(h.y.back(), j);
            chain += w * step_div(c, row, col);
            for (int a = 0; a < c.rows(); ++a)
                for (int b = 0; b < c.cols(); ++b) {
                    if (c.plan(a, b) <= 0.0) continue;
                    HistoryKey h2;
                    if (plan.mode == HistoryMode::markov) {
                        h2 = {{a}, {b}};
                    } else {
                        h2 = h;
                        h2.x.push_back(a);
                        h2.y.push_back(b);
                    }
                    next[h2] += w * c.plan(a, b);
                }
        }
        reach = std::move(next);
    }
    return std::abs(total - chain);
}

// One joint path drawn from the plan's successive kernels.
inline std::pair<RankPath, RankPath> simulate_plan_path(const KernelPlan& plan, Rng& rng) {
    RankPath x, y;
    for (int t = 0; t < plan.horizon; ++t) {
        const Coupling& c = t == 0 ? plan.initial : plan.step_at(t, make_history(plan.mode, x, y));
        int idx = rng.pick_weighted(c.plan.a);
        x.push_back(idx / c.cols());
        y.push_back(idx % c.cols());
    }
    return {x, y};
}

}  // namespace bcot
