#pragma once

#include "bcot/cost_model.hpp"

namespace bcot {

// Inertia matching model: a planner pays discounted rank gaps but is rewarded
// (alpha > 0) for keeping the next-period pair close to the current one.
struct InertiaSpec {
    double alpha = 0.0;
    double tau = 0.0;    // proximity scale; 0 means exact-match indicator
    double delta = 0.9;  // discount factor
    int n_states = 2;    // cluster count; states carry values k / n_states

    void validate() const {
        if (tau < 0.0) throw Error("InertiaSpec: tau must be nonnegative");
        if (delta < 0.0 || delta > 1.0) throw Error("InertiaSpec: delta must lie in [0, 1]");
        if (n_states < 1) throw Error("InertiaSpec: n_states must be positive");
    }
};

// Proximity kernel on state values; tau=0 degenerates to the exact-match
// indicator with the 0/0 := 0 convention.
inline double proximity(double tau, double dx, double dy) {
    if (tau == 0.0) return dx == 0.0 && dy == 0.0 ? 1.0 : 0.0;
    return std::exp(-(std::abs(dx) + std::abs(dy)) / tau);
}

// Discounted rank-gap cost over value paths.
inline double pam_cost(double delta, const std::vector<double>& x_path,
                       const std::vector<double>& y_path) {
    if (x_path.size() != y_path.size()) throw Error("pam_cost: path length mismatch");
    double s = 0.0;
    for (size_t t = 0; t < x_path.size(); ++t)
        s += std::pow(delta, static_cast<double>(t + 1)) * std::abs(x_path[t] - y_path[t]);
    return s;
}

// Time-t conditional cost on value paths: inertia reward for the next step
// plus the discounted gap tail. At t = T both are empty.
inline double inertia_cost(const InertiaSpec& spec, int t, double x_t, double y_t,
                           const std::vector<double>& x_path, const std::vector<double>& y_path) {
    spec.validate();
    if (x_path.size() != y_path.size()) throw Error("inertia_cost: path length mismatch");
    int T = static_cast<int>(x_path.size());
    if (t < 1 || t > T) throw Error("inertia_cost: t out of range");
    double s = 0.0;
    if (t < T) s -= spec.alpha * proximity(spec.tau, x_path[t] - x_t, y_path[t] - y_t);
    for (int per = t + 1; per <= T; ++per)
        s += std::pow(spec.delta, per) * std::abs(x_path[per - 1] - y_path[per - 1]);
    return s;
}

// The inertia model in four-argument form. States are indices into the
// normalized-rank grid k / n_states; the anchor pair enters only through the
// proximity term at the next step, so the markov structure is declared.
inline StateDependentCost build_state_cost(const InertiaSpec& spec, int T) {
    spec.validate();
    if (T < 1) throw Error("build_state_cost: horizon must be positive");
    double alpha = spec.alpha, tau = spec.tau, delta = spec.delta;
    int n = spec.n_states;
    auto value = [n](int k) { return static_cast<double>(k) / n; };

    StateDependentCost cost;
    cost.markov = true;
    cost.stage = [delta, value](int s, int x, int y) {
        return std::pow(delta, s) * std::abs(value(x) - value(y));
    };
    cost.prox = [alpha, tau, value](int t, int w, int v, int a, int b) {
        if (t == 0) return 0.0;
        if (tau == 0.0) return a == w && b == v ? -alpha : 0.0;
        return -alpha * proximity(tau, value(a) - value(w), value(b) - value(v));
    };
    cost.eval = [alpha, tau, delta, value, T](int t, int w, int v, const RankPath& xp,
                                              const RankPath& yp) {
        if (static_cast<int>(xp.size()) != T || static_cast<int>(yp.size()) != T)
            throw Error("state cost: path length mismatch");
        if (t == T)
            return std::pow(delta, T) * std::abs(value(xp[T - 1]) - value(yp[T - 1]));
        double s = 0.0;
        if (t >= 1) {
            if (tau == 0.0)
                s -= xp[t] == w && yp[t] == v ? alpha : 0.0;
            else
                s -= alpha * proximity(tau, value(xp[t]) - value(w), value(yp[t]) - value(v));
        }
        for (int per = t + 1; per <= T; ++per)
            s += std::pow(delta, per) * std::abs(value(xp[per - 1]) - value(yp[per - 1]));
        return s;
    };
    return cost;
}

// Per-period rank-gap stage costs matching build_state_cost at alpha = 0.
inline LinearCost pam_linear_cost(int n_states, int T, double delta) {
    Mat gap(n_states, n_states);
    for (int a = 0; a < n_states; ++a)
        for (int b = 0; b < n_states; ++b)
            gap(a, b) = std::abs(static_cast<double>(a) - b) / n_states;
    LinearCost cost;
    cost.delta = delta;
    cost.stage_costs.assign(T, gap);
    return cost;
}

// Perfectly matched synthetic sample: N paths drawn from mu, each paired with
// itself.
inline PathMeasure synth_perfect_paths(const FiniteProcess& mu, int N, std::uint64_t seed) {
    mu.validate();
    if (N < 1) throw Error("synth_perfect_paths: need at least one path");
    PathMeasure out;
    out.x_values = mu.state_values;
    out.y_values = mu.state_values;
    Rng rng(seed);
    double w = 1.0 / N;
    for (int i = 0; i < N; ++i) {
        RankPath p = simulate_path(mu, rng);
        out.add(p, p, w);
    }
    out.finalize();
    out.renormalize();
    return out;
}

}  // namespace bcot
