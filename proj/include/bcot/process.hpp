#pragma once

#include <algorithm>
#include <cstdint>

#include "bcot/common.hpp"

namespace bcot {

// Path of state indices, one entry per period.
using RankPath = std::vector<int>;

// Time-homogeneous finite-state Markov process on a rank grid.
// state_values holds the normalized ranks (k/n, 0 = best), strictly increasing.
struct FiniteProcess {
    int n_states = 0;
    int horizon = 0;
    std::vector<double> initial;   // length n_states, sums to 1
    Mat kernel;                    // n_states x n_states, row-stochastic
    std::vector<double> state_values;

    static std::vector<double> default_values(int n) {
        std::vector<double> v(n);
        for (int k = 0; k < n; ++k) v[k] = static_cast<double>(k) / n;
        return v;
    }

    void validate() const {
        if (n_states <= 0) throw Error("process: n_states must be positive");
        if (horizon <= 0) throw Error("process: horizon must be positive");
        if (static_cast<int>(initial.size()) != n_states)
            throw Error("process: initial law has wrong length");
        if (kernel.rows != n_states || kernel.cols != n_states)
            throw Error("process: kernel has wrong shape");
        if (static_cast<int>(state_values.size()) != n_states)
            throw Error("process: state_values has wrong length");
        for (int k = 0; k + 1 < n_states; ++k)
            if (!(state_values[k] < state_values[k + 1]))
                throw Error("process: state_values must be strictly increasing");
        for (double p : initial)
            if (p < -kFeasTol) throw Error("process: negative initial probability");
        if (std::abs(vec_sum(initial) - 1.0) > kFeasTol)
            throw Error("process: initial law does not sum to 1");
        for (int i = 0; i < n_states; ++i) {
            double s = 0.0;
            for (int j = 0; j < n_states; ++j) {
                if (kernel(i, j) < -kFeasTol) throw Error("process: negative kernel entry");
                s += kernel(i, j);
            }
            if (std::abs(s - 1.0) > kFeasTol) throw Error("process: kernel row does not sum to 1");
        }
    }
};

// Frequency estimator for kernel and initial law. Rows never observed as a
// source state become self-loops. Horizon defaults to the longest path seen.
inline FiniteProcess estimate_process(const std::vector<RankPath>& paths, int n_states,
                                      int horizon = 0) {
    if (paths.empty()) throw Error("estimate_process: no paths");
    if (n_states <= 0) throw Error("estimate_process: n_states must be positive");
    size_t longest = 0;
    for (const auto& p : paths) {
        if (p.empty()) throw Error("estimate_process: empty path");
        for (int s : p)
            if (s < 0 || s >= n_states) throw Error("estimate_process: state out of range");
        longest = std::max(longest, p.size());
    }
    FiniteProcess proc;
    proc.n_states = n_states;
    proc.horizon = horizon > 0 ? horizon : static_cast<int>(longest);
    proc.state_values = FiniteProcess::default_values(n_states);
    proc.initial.assign(n_states, 0.0);
    Mat counts(n_states, n_states, 0.0);
    for (const auto& p : paths) {
        proc.initial[p[0]] += 1.0;
        for (size_t t = 0; t + 1 < p.size(); ++t) counts(p[t], p[t + 1]) += 1.0;
    }
    for (double& v : proc.initial) v /= static_cast<double>(paths.size());
    proc.kernel = Mat(n_states, n_states, 0.0);
    for (int i = 0; i < n_states; ++i) {
        double row = 0.0;
        for (int j = 0; j < n_states; ++j) row += counts(i, j);
        if (row > 0.0) {
            for (int j = 0; j < n_states; ++j) proc.kernel(i, j) = counts(i, j) / row;
        } else {
            proc.kernel(i, i) = 1.0;
        }
    }
    proc.validate();
    return proc;
}

// Chain-rule probability of one path.
inline double path_probability(const FiniteProcess& proc, const RankPath& path) {
    if (static_cast<int>(path.size()) > proc.horizon || path.empty())
        throw Error("path_probability: path length exceeds horizon or is empty");
    for (int s : path)
        if (s < 0 || s >= proc.n_states) throw Error("path_probability: state out of range");
    double p = proc.initial[path[0]];
    for (size_t t = 0; t + 1 < path.size(); ++t) p *= proc.kernel(path[t], path[t + 1]);
    return p;
}

// All positive-probability paths of the given length, with probabilities.
inline std::vector<std::pair<RankPath, double>> enumerate_paths(const FiniteProcess& proc,
                                                                int length) {
    std::vector<std::pair<RankPath, double>> out;
    for (int s = 0; s < proc.n_states; ++s)
        if (proc.initial[s] > 0.0) out.push_back({{s}, proc.initial[s]});
    for (int t = 1; t < length; ++t) {
        std::vector<std::pair<RankPath, double>> next;
        for (auto& [path, w] : out)
            for (int s = 0; s < proc.n_states; ++s) {
                double p = proc.kernel(path.back(), s);
                if (p <= 0.0) continue;
                RankPath child = path;
                child.push_back(s);
                next.push_back({std::move(child), w * p});
            }
        out = std::move(next);
    }
    return out;
}

// All positive-probability continuations of the given number of steps out of
// a state; the returned paths exclude the starting state.
inline std::vector<std::pair<RankPath, double>> enumerate_futures(const FiniteProcess& proc,
                                                                  int from_state, int steps) {
    std::vector<std::pair<RankPath, double>> out = {{{}, 1.0}};
    int cur = from_state;
    for (int k = 0; k < steps; ++k) {
        std::vector<std::pair<RankPath, double>> next;
        for (auto& [path, w] : out) {
            int last = path.empty() ? cur : path.back();
            for (int s = 0; s < proc.n_states; ++s) {
                double p = proc.kernel(last, s);
                if (p <= 0.0) continue;
                RankPath child = path;
                child.push_back(s);
                next.push_back({std::move(child), w * p});
            }
        }
        out = std::move(next);
    }
    return out;
}

inline RankPath simulate_path(const FiniteProcess& proc, Rng& rng) {
    RankPath path(proc.horizon);
    path[0] = rng.pick_weighted(proc.initial);
    for (int t = 1; t < proc.horizon; ++t) {
        std::vector<double> row(proc.n_states);
        for (int j = 0; j < proc.n_states; ++j) row[j] = proc.kernel(path[t - 1], j);
        path[t] = rng.pick_weighted(row);
    }
    return path;
}

}  // namespace bcot
