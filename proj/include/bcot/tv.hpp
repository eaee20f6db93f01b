#pragma once

#include <vector>

#include "bcot/common.hpp"

namespace bcot {

// Exact minimizer of 0.5*||u - y||^2 + lambda * sum |u_{i+1} - u_i| by
// Condat's direct sweep: maintain bounds on the current segment's value and
// running antiderivative, emitting the segment whenever a jump is forced.
inline std::vector<double> tv_denoise(const std::vector<double>& y, double lambda) {
    if (lambda < 0.0) throw Error("tv_denoise: lambda must be nonnegative");
    int n = static_cast<int>(y.size());
    if (n <= 1 || lambda == 0.0) return y;
    std::vector<double> x(n);
    int k = 0, k0 = 0, km = 0, kp = 0;
    double vmin = y[0] - lambda, vmax = y[0] + lambda;
    double umin = lambda, umax = -lambda;
    bool fresh_segment = false;  // just restarted at the last sample
    for (;;) {
        if (fresh_segment && k == n - 1) {
            x[k] = vmin + umin;
            break;
        }
        fresh_segment = false;
        if (k == n - 1) {
            if (umin < 0.0) {
                for (int i = k0; i <= km; ++i) x[i] = vmin;
                k = k0 = km = km + 1;
                vmin = y[k];
                umin = lambda;
                umax = y[k] + lambda - vmax;
                fresh_segment = true;
                continue;
            }
            if (umax > 0.0) {
                for (int i = k0; i <= kp; ++i) x[i] = vmax;
                k = k0 = kp = kp + 1;
                vmax = y[k];
                umax = -lambda;
                umin = y[k] - lambda - vmin;
                fresh_segment = true;
                continue;
            }
            double v = vmin + umin / (k - k0 + 1);
            for (int i = k0; i < n; ++i) x[i] = v;
            break;
        }
        if (y[k + 1] + umin < vmin - lambda) {
            for (int i = k0; i <= km; ++i) x[i] = vmin;
            k = k0 = km = kp = km + 1;
            vmin = y[k];
            vmax = y[k] + 2.0 * lambda;
            umin = lambda;
            umax = -lambda;
        } else if (y[k + 1] + umax > vmax + lambda) {
            for (int i = k0; i <= kp; ++i) x[i] = vmax;
            k = k0 = km = kp = kp + 1;
            vmin = y[k] - 2.0 * lambda;
            vmax = y[k];
            umin = lambda;
            umax = -lambda;
        } else {
            ++k;
            umin += y[k] - vmin;
            umax += y[k] - vmax;
            if (umin >= lambda) {
                vmin += (umin - lambda) / (k - k0 + 1);
                umin = lambda;
                km = k;
            }
            if (umax <= -lambda) {
                vmax += (umax + lambda) / (k - k0 + 1);
                umax = -lambda;
                kp = k;
            }
        }
    }
    return x;
}

inline double total_variation(const std::vector<double>& u) {
    double s = 0.0;
    for (size_t i = 1; i < u.size(); ++i) s += std::abs(u[i] - u[i - 1]);
    return s;
}

}  // namespace bcot
