#pragma once

#include <functional>

#include "bcot/divergences.hpp"
#include "bcot/linear_ot.hpp"

namespace bcot {

// One summand of a perspective-type divergence penalty attached to a cell:
// contributes weight * f(gamma_cell * scale) to the objective.
struct FdivTerm {
    double scale;
    double weight;
};

// Objective ⟨linear, γ⟩ + G(⟨scalar_g, γ⟩) + Σ_cells Σ_terms w·f(γ·s).
// Both nonlinear parts are optional.
struct CompositeObjective {
    Mat linear;
    bool has_g = false;
    Mat scalar_g;
    std::function<double(double)> G;
    std::function<double(double)> Gprime;
    bool has_fdiv = false;
    DivergenceKind fdiv_kind = DivergenceKind::KL;
    std::vector<std::vector<FdivTerm>> fdiv;  // row-major per cell

    double eval(const Mat& gamma) const {
        double val = linear.dot(gamma);
        if (has_g) val += G(scalar_g.dot(gamma));
        if (has_fdiv)
            for (size_t cell = 0; cell < gamma.a.size(); ++cell)
                for (const FdivTerm& t : fdiv[cell])
                    val += t.weight * f_eval(fdiv_kind, std::max(gamma.a[cell] * t.scale, 0.0));
        return val;
    }

    Mat gradient(const Mat& gamma) const {
        Mat g = linear;
        if (has_g) {
            double gp = Gprime(scalar_g.dot(gamma));
            for (size_t cell = 0; cell < g.a.size(); ++cell) g.a[cell] += gp * scalar_g.a[cell];
        }
        if (has_fdiv)
            for (size_t cell = 0; cell < g.a.size(); ++cell)
                for (const FdivTerm& t : fdiv[cell])
                    g.a[cell] += t.weight * t.scale *
                                 f_prime(fdiv_kind, gamma.a[cell] * t.scale);
        return g;
    }
};

struct CompositeResult {
    Coupling coupling;
    double value = 0.0;
    double gap = 0.0;
    long iterations = 0;
};

// Frank-Wolfe over the transportation polytope: starts at the independent
// coupling, linear minimization oracle = exact linear OT, exact line search
// by bisection on the directional derivative.
inline CompositeResult solve_composite_ot(const std::vector<double>& row,
                                          const std::vector<double>& col,
                                          const CompositeObjective& obj, double tol = 1e-8,
                                          long max_iter = 10000) {
    if (obj.has_g && (!obj.G || !obj.Gprime))
        throw Error("solve_composite_ot: G and Gprime required with scalar_g");
    Coupling gamma = independent_coupling(row, col);
    if (obj.has_fdiv && obj.fdiv.size() != gamma.plan.a.size())
        throw Error("solve_composite_ot: fdiv term list shape mismatch");
    double value = obj.eval(gamma.plan);
    if (!std::isfinite(value))
        throw Error("solve_composite_ot: objective not finite at independent coupling");

    CompositeResult res;
    double best_gap = std::numeric_limits<double>::infinity();
    for (long k = 1; k <= max_iter; ++k) {
        Mat grad = obj.gradient(gamma.plan);
        LinearOtResult lmo = solve_linear_ot(row, col, grad);
        Mat dir = lmo.coupling.plan;
        double gap = 0.0;
        for (size_t c = 0; c < dir.a.size(); ++c) {
            dir.a[c] -= gamma.plan.a[c];
            gap -= grad.a[c] * dir.a[c];
        }
        best_gap = std::min(best_gap, gap);
        res.iterations = k;
        if (gap <= tol) {
            res.coupling = gamma;
            res.value = obj.eval(gamma.plan);
            res.gap = gap;
            return res;
        }
        // directional derivative at step eta
        auto dphi = [&](double eta) {
            Mat point = gamma.plan;
            for (size_t c = 0; c < point.a.size(); ++c) point.a[c] += eta * dir.a[c];
            Mat g = obj.gradient(point);
            return g.dot(dir);
        };
        double eta = 1.0;
        if (dphi(1.0) > 0.0) {
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                (dphi(mid) <= 0.0 ? lo : hi) = mid;
            }
            eta = 0.5 * (lo + hi);
        }
        for (size_t c = 0; c < gamma.plan.a.size(); ++c) {
            gamma.plan.a[c] += eta * dir.a[c];
            if (gamma.plan.a[c] < 0.0) gamma.plan.a[c] = 0.0;
        }
    }
    throw ConvergenceError("solve_composite_ot: iteration cap reached", best_gap, max_iter);
}

}  // namespace bcot
