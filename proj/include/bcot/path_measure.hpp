#pragma once

#include <algorithm>
#include <tuple>

#include "bcot/linear_ot.hpp"
#include "bcot/process.hpp"

namespace bcot {

struct PathAtom {
    RankPath x, y;
    double weight = 0.0;
};

// Discrete measure on pairs of paths. Atoms are kept sorted by (x, y) with
// duplicates merged; the value grids say what rank each state index carries.
struct PathMeasure {
    std::vector<PathAtom> atoms;
    std::vector<double> x_values, y_values;
    bool is_normalized = false;

    void add(RankPath x, RankPath y, double w) {
        atoms.push_back({std::move(x), std::move(y), w});
    }

    void finalize() {
        std::sort(atoms.begin(), atoms.end(), [](const PathAtom& a, const PathAtom& b) {
            return std::tie(a.x, a.y) < std::tie(b.x, b.y);
        });
        std::vector<PathAtom> merged;
        for (auto& a : atoms) {
            if (!merged.empty() && merged.back().x == a.x && merged.back().y == a.y)
                merged.back().weight += a.weight;
            else
                merged.push_back(std::move(a));
        }
        atoms = std::move(merged);
    }

    double total_weight() const {
        double s = 0.0;
        for (const auto& a : atoms) s += a.weight;
        return s;
    }

    void renormalize() {
        double s = total_weight();
        if (s <= 0.0) throw Error("path measure: cannot normalize zero mass");
        for (auto& a : atoms) a.weight /= s;
        is_normalized = true;
    }

    void validate() const {
        if (atoms.empty()) throw Error("path measure: empty");
        size_t len = atoms.front().x.size();
        for (const auto& a : atoms) {
            if (a.x.size() != len || a.y.size() != len)
                throw Error("path measure: ragged atom lengths");
            if (a.weight < -kFeasTol) throw Error("path measure: negative weight");
        }
        for (size_t i = 0; i + 1 < atoms.size(); ++i)
            if (std::tie(atoms[i].x, atoms[i].y) >= std::tie(atoms[i + 1].x, atoms[i + 1].y))
                throw Error("path measure: atoms not sorted/unique");
        if (is_normalized && std::abs(total_weight() - 1.0) > kFeasTol)
            throw Error("path measure: weights do not sum to 1");
    }
};

// Exact transport distance between two path measures on the same grids.
// Ground cost between atoms sums per-period rank gaps in both coordinates.
inline double path_wasserstein(const PathMeasure& p, const PathMeasure& q,
                               bool allow_unnormalized = false) {
    if (p.atoms.empty() || q.atoms.empty()) throw Error("path_wasserstein: empty measure");
    if (p.x_values != q.x_values || p.y_values != q.y_values)
        throw Error("path_wasserstein: state value grids differ");
    if (p.atoms.front().x.size() != q.atoms.front().x.size())
        throw Error("path_wasserstein: horizons differ");
    if (!allow_unnormalized && (!p.is_normalized || !q.is_normalized))
        throw Error("path_wasserstein: inputs must be normalized");
    if (std::abs(p.total_weight() - q.total_weight()) > kFeasTol)
        throw Error("path_wasserstein: total masses differ");

    int m = static_cast<int>(p.atoms.size()), n = static_cast<int>(q.atoms.size());
    size_t horizon = p.atoms.front().x.size();
    Mat cost(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            const PathAtom& a = p.atoms[i];
            const PathAtom& b = q.atoms[j];
            double d = 0.0;
            for (size_t t = 0; t < horizon; ++t)
                d += std::abs(p.x_values[a.x[t]] - p.x_values[b.x[t]]) +
                     std::abs(p.y_values[a.y[t]] - p.y_values[b.y[t]]);
            cost(i, j) = d;
        }
    std::vector<double> pw(m), qw(n);
    for (int i = 0; i < m; ++i) pw[i] = std::max(p.atoms[i].weight, 0.0);
    for (int j = 0; j < n; ++j) qw[j] = std::max(q.atoms[j].weight, 0.0);
    return solve_linear_ot(pw, qw, cost).value;
}

}  // namespace bcot
