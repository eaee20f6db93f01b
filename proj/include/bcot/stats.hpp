#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <vector>

#include "bcot/common.hpp"

namespace bcot {

struct RankCorr {
    double spearman = 0.0;
    double spearman_p = 1.0;
    double kendall = 0.0;
    double kendall_p = 1.0;
};

namespace detail {

// 1-based mid-ranks (ties get the average of their rank range).
inline std::vector<double> mid_ranks(const std::vector<double>& v) {
    int n = static_cast<int>(v.size());
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = (i + j) / 2.0 + 1.0;
        for (int k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

inline double student_t_two_sided(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    boost::math::students_t_distribution<double> dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

// Strict inversions of v counted by mergesort.
inline long long count_inversions(std::vector<double>& v) {
    int n = static_cast<int>(v.size());
    std::vector<double> buf(n);
    long long inv = 0;
    for (int width = 1; width < n; width *= 2) {
        for (int lo = 0; lo < n; lo += 2 * width) {
            int mid = std::min(lo + width, n), hi = std::min(lo + 2 * width, n);
            int a = lo, b = mid, k = lo;
            while (a < mid && b < hi) {
                if (v[b] < v[a]) {
                    inv += mid - a;
                    buf[k++] = v[b++];
                } else {
                    buf[k++] = v[a++];
                }
            }
            while (a < mid) buf[k++] = v[a++];
            while (b < hi) buf[k++] = v[b++];
        }
        std::copy(buf.begin(), buf.end(), v.begin());
    }
    return inv;
}

}  // namespace detail

// Wage observations ranked within a pool; an entity's representative rank is
// the lower median of its own observations' mid-ranks.
inline double median_rank(const std::vector<double>& pool, const std::vector<double>& own) {
    if (pool.empty() || own.empty()) throw Error("median_rank: empty input");
    std::vector<double> sorted = pool;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> ranks;
    for (double v : own) {
        auto lo = std::lower_bound(sorted.begin(), sorted.end(), v);
        auto hi = std::upper_bound(sorted.begin(), sorted.end(), v);
        if (lo == hi) throw Error("median_rank: observation missing from pool");
        double below = static_cast<double>(lo - sorted.begin());
        double tied = static_cast<double>(hi - lo);
        ranks.push_back(below + (tied + 1.0) / 2.0);
    }
    std::sort(ranks.begin(), ranks.end());
    return ranks[(ranks.size() - 1) / 2];
}

// Spearman (Pearson on mid-ranks; the classic d^2 formula when tie-free) and
// Kendall tau-b with the usual large-sample p-values.
inline RankCorr rank_correlations(const std::vector<double>& x, const std::vector<double>& y) {
    int n = static_cast<int>(x.size());
    if (y.size() != x.size()) throw Error("rank_correlations: length mismatch");
    if (n < 3) throw Error("rank_correlations: need at least 3 observations");
    bool xconst = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
    bool yconst = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (xconst || yconst) throw Error("rank_correlations: constant input has no defined rank correlation");

    RankCorr out;
    std::vector<double> rx = detail::mid_ranks(x), ry = detail::mid_ranks(y);
    auto has_ties = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return std::adjacent_find(v.begin(), v.end()) != v.end();
    };
    bool ties_x = has_ties(rx), ties_y = has_ties(ry);
    if (!ties_x && !ties_y) {
        long long d2 = 0;
        for (int i = 0; i < n; ++i) {
            long long d = static_cast<long long>(rx[i]) - static_cast<long long>(ry[i]);
            d2 += d * d;
        }
        out.spearman =
            1.0 - 6.0 * static_cast<double>(d2) /
                      (static_cast<double>(n) * (static_cast<double>(n) * n - 1.0));
    } else {
        double mx = 0.0, my = 0.0;
        for (int i = 0; i < n; ++i) {
            mx += rx[i];
            my += ry[i];
        }
        mx /= n;
        my /= n;
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (int i = 0; i < n; ++i) {
            sxy += (rx[i] - mx) * (ry[i] - my);
            sxx += (rx[i] - mx) * (rx[i] - mx);
            syy += (ry[i] - my) * (ry[i] - my);
        }
        out.spearman = sxy / std::sqrt(sxx * syy);
    }
    if (std::abs(out.spearman) >= 1.0) {
        out.spearman_p = 0.0;
    } else {
        double t = out.spearman * std::sqrt((n - 2) / (1.0 - out.spearman * out.spearman));
        out.spearman_p = detail::student_t_two_sided(t, n - 2.0);
    }

    // Kendall: sort by (x, y), count discordant pairs as strict y-inversions.
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });
    long long n0 = static_cast<long long>(n) * (n - 1) / 2;
    long long n1 = 0, n2 = 0, n3 = 0;
    double x1 = 0.0, y1 = 0.0, x0 = 0.0, y0 = 0.0, xtie = 0.0, ytie = 0.0;
    {
        int i = 0;
        while (i < n) {
            int j = i;
            while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
            long long t = j - i + 1;
            n1 += t * (t - 1) / 2;
            xtie += static_cast<double>(t * (t - 1)) / 2.0;
            x0 += static_cast<double>(t) * (t - 1) * (t - 2);
            x1 += static_cast<double>(t) * (t - 1) * (2 * t + 5);
            int a = i;
            while (a <= j) {
                int b = a;
                while (b + 1 <= j && y[idx[b + 1]] == y[idx[a]]) ++b;
                long long u = b - a + 1;
                n3 += u * (u - 1) / 2;
                a = b + 1;
            }
            i = j + 1;
        }
        std::vector<double> ys(n);
        for (int k = 0; k < n; ++k) ys[k] = y[idx[k]];
        std::sort(ys.begin(), ys.end());
        i = 0;
        while (i < n) {
            int j = i;
            while (j + 1 < n && ys[j + 1] == ys[i]) ++j;
            long long t = j - i + 1;
            n2 += t * (t - 1) / 2;
            ytie += static_cast<double>(t * (t - 1)) / 2.0;
            y0 += static_cast<double>(t) * (t - 1) * (t - 2);
            y1 += static_cast<double>(t) * (t - 1) * (2 * t + 5);
            i = j + 1;
        }
    }
    std::vector<double> yseq(n);
    for (int k = 0; k < n; ++k) yseq[k] = y[idx[k]];
    long long dis = detail::count_inversions(yseq);
    long long con_minus_dis = n0 - n1 - n2 + n3 - 2 * dis;
    if (n1 == 0 && n2 == 0) {
        out.kendall = static_cast<double>(con_minus_dis) / static_cast<double>(n0);
    } else {
        double denom = std::sqrt(static_cast<double>(n0 - n1)) *
                       std::sqrt(static_cast<double>(n0 - n2));
        out.kendall = static_cast<double>(con_minus_dis) / denom;
    }
    double m = static_cast<double>(n) * (n - 1);
    double var = (m * (2.0 * n + 5.0) - x1 - y1) / 18.0 + (2.0 * xtie * ytie) / m;
    if (n > 2) var += x0 * y0 / (9.0 * m * (n - 2));
    if (var <= 0.0) {
        out.kendall_p = std::abs(con_minus_dis) > 0 ? 0.0 : 1.0;
    } else {
        double z = static_cast<double>(con_minus_dis) / std::sqrt(var);
        out.kendall_p = std::min(1.0, 2.0 * detail::normal_sf(std::abs(z)));
    }
    return out;
}

}  // namespace bcot
