#pragma once

#include "bcot/common.hpp"

namespace bcot {

enum class DivergenceKind { KL, SquaredHellinger, LeCam, JensenShannon };

inline const char* divergence_name(DivergenceKind k) {
    switch (k) {
        case DivergenceKind::KL: return "kl";
        case DivergenceKind::SquaredHellinger: return "squared_hellinger";
        case DivergenceKind::LeCam: return "le_cam";
        case DivergenceKind::JensenShannon: return "jensen_shannon";
    }
    return "?";
}

// Generator f of the divergence, extended continuously to x = 0.
inline double f_eval(DivergenceKind k, double x) {
    if (x < 0.0) throw Error("f_eval: negative argument");
    switch (k) {
        case DivergenceKind::KL:
            return x == 0.0 ? 0.0 : x * std::log(x);
        case DivergenceKind::SquaredHellinger: {
            double r = 1.0 - std::sqrt(x);
            return r * r;
        }
        case DivergenceKind::LeCam: {
            double r = x - 1.0;
            return r * r / (2.0 * x + 2.0);
        }
        case DivergenceKind::JensenShannon:
            if (x == 0.0) return std::log(2.0);
            return x * std::log(2.0 * x / (x + 1.0)) + std::log(2.0 / (x + 1.0));
    }
    return 0.0;
}

// Derivative of f, evaluated at max(x, floor) to stay finite near 0.
inline double f_prime(DivergenceKind k, double x, double floor = 1e-12) {
    x = std::max(x, floor);
    switch (k) {
        case DivergenceKind::KL:
            return std::log(x) + 1.0;
        case DivergenceKind::SquaredHellinger:
            return 1.0 - 1.0 / std::sqrt(x);
        case DivergenceKind::LeCam: {
            double xp1 = x + 1.0;
            return (x - 1.0) * (x + 3.0) / (2.0 * xp1 * xp1);
        }
        case DivergenceKind::JensenShannon:
            return std::log(2.0 * x / (x + 1.0));
    }
    return 0.0;
}

// Slope of f at infinity; scales the mass the reference measure misses.
inline double f_slope_at_infinity(DivergenceKind k) {
    switch (k) {
        case DivergenceKind::KL: return std::numeric_limits<double>::infinity();
        case DivergenceKind::SquaredHellinger: return 1.0;
        case DivergenceKind::LeCam: return 0.5;
        case DivergenceKind::JensenShannon: return std::log(2.0);
    }
    return 0.0;
}

// f-divergence of p against reference r over a shared index set, with the
// 0/0 = 0 convention. Mass of p outside the support of r contributes via the
// slope at infinity (+inf for KL).
inline double f_divergence(DivergenceKind k, const std::vector<double>& p,
                           const std::vector<double>& r) {
    if (p.size() != r.size()) throw Error("f_divergence: size mismatch");
    double total = 0.0, escaped = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] < -kFeasTol || r[i] < -kFeasTol) throw Error("f_divergence: negative mass");
        double pi = std::max(p[i], 0.0), ri = std::max(r[i], 0.0);
        if (ri > 0.0)
            total += ri * f_eval(k, pi / ri);
        else
            escaped += pi;
    }
    if (escaped > kFeasTol) {
        double slope = f_slope_at_infinity(k);
        if (std::isinf(slope)) return std::numeric_limits<double>::infinity();
        total += escaped * slope;
    }
    return total;
}

inline double f_divergence(DivergenceKind k, const Mat& p, const Mat& r) {
    if (p.rows != r.rows || p.cols != r.cols) throw Error("f_divergence: shape mismatch");
    return f_divergence(k, p.a, r.a);
}

}  // namespace bcot
