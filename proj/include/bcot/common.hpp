#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcot {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when an iterative solver hits its iteration cap before reaching the
// requested tolerance; carries the best certified gap seen.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double best_gap, long iterations)
        : Error(msg), best_gap(best_gap), iterations(iterations) {}
    double best_gap;
    long iterations;
};

inline constexpr double kFeasTol = 1e-9;

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    std::vector<double> row_sums() const {
        std::vector<double> s(rows, 0.0);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) s[i] += (*this)(i, j);
        return s;
    }
    std::vector<double> col_sums() const {
        std::vector<double> s(cols, 0.0);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) s[j] += (*this)(i, j);
        return s;
    }
    double sum() const {
        double s = 0.0;
        for (double v : a) s += v;
        return s;
    }
    double dot(const Mat& o) const {
        double s = 0.0;
        for (size_t k = 0; k < a.size(); ++k) s += a[k] * o.a[k];
        return s;
    }
};

inline double vec_sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error("max_abs_diff: length mismatch");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// splitmix64, used to derive independent seeds from a base seed and stream ids.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return mix_seed(a ^ mix_seed(b));
}

// Deterministic RNG wrapper. Uniform doubles are produced from raw 64-bit
// draws so results do not depend on library distribution internals.
struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}

    std::uint64_t next_u64() { return eng(); }

    double uniform() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    int uniform_int(int n) {
        int k = static_cast<int>(uniform() * n);
        return k >= n ? n - 1 : k;
    }

    // index drawn from unnormalized nonnegative weights
    int pick_weighted(const std::vector<double>& w) {
        double total = vec_sum(w);
        if (!(total > 0.0)) throw Error("pick_weighted: weights must have positive total");
        double u = uniform() * total;
        double acc = 0.0;
        for (size_t i = 0; i < w.size(); ++i) {
            acc += w[i];
            if (u < acc) return static_cast<int>(i);
        }
        for (size_t i = w.size(); i-- > 0;)
            if (w[i] > 0.0) return static_cast<int>(i);
        return static_cast<int>(w.size()) - 1;
    }
};

}  // namespace bcot
