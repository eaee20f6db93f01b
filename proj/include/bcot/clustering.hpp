#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "bcot/common.hpp"

namespace bcot {

// Contiguous rank split into n groups; sizes differ by at most one with the
// larger groups first. Cluster 0 is the most desirable (largest values when
// higher_better, smallest otherwise); value ties break by id.
inline std::vector<int> even_clusters(const std::vector<double>& values,
                                      const std::vector<std::string>& ids, int n,
                                      bool higher_better = true) {
    int m = static_cast<int>(values.size());
    if (ids.size() != values.size()) throw Error("even_clusters: ids/values length mismatch");
    if (n < 1) throw Error("even_clusters: need at least one cluster");
    if (m < n) throw Error("even_clusters: fewer entities than clusters");
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (values[a] != values[b]) return higher_better ? values[a] > values[b] : values[a] < values[b];
        return ids[a] < ids[b];
    });
    std::vector<int> out(m);
    int q = m / n, r = m % n, pos = 0;
    for (int c = 0; c < n; ++c) {
        int size = q + (c < r ? 1 : 0);
        for (int k = 0; k < size; ++k) out[idx[pos++]] = c;
    }
    return out;
}

struct JenksResult {
    std::vector<int> cluster;         // per input value, 0 = best
    double objective = 0.0;           // within-class sum of squared deviations
    std::vector<double> class_upper;  // ascending class upper bounds (transformed scale)
};

// Exact Fisher-Jenks natural breaks: dynamic program minimizing within-class
// SSD over contiguous classes of the sorted values.
inline JenksResult jenks_clusters(const std::vector<double>& values, int n,
                                  bool log_transform = false, bool higher_better = true) {
    int m = static_cast<int>(values.size());
    if (n < 1) throw Error("jenks_clusters: need at least one class");
    std::vector<double> v(m);
    for (int i = 0; i < m; ++i) {
        if (log_transform && values[i] <= 0.0)
            throw Error("jenks_clusters: log transform needs positive values");
        v[i] = log_transform ? std::log(values[i]) : values[i];
    }
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    int distinct = sorted.empty() ? 0 : 1;
    for (int i = 1; i < m; ++i)
        if (sorted[i] != sorted[i - 1]) ++distinct;
    if (distinct < n) throw Error("jenks_clusters: fewer distinct values than classes");

    std::vector<double> s1(m + 1, 0.0), s2(m + 1, 0.0);
    for (int i = 0; i < m; ++i) {
        s1[i + 1] = s1[i] + sorted[i];
        s2[i + 1] = s2[i] + sorted[i] * sorted[i];
    }
    auto ssd = [&](int i, int j) {  // inclusive range on sorted
        int len = j - i + 1;
        double sum = s1[j + 1] - s1[i];
        return s2[j + 1] - s2[i] - sum * sum / len;
    };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dp(n + 1, std::vector<double>(m, inf));
    std::vector<std::vector<int>> from(n + 1, std::vector<int>(m, 0));
    for (int j = 0; j < m; ++j) dp[1][j] = ssd(0, j);
    for (int k = 2; k <= n; ++k)
        for (int j = k - 1; j < m; ++j)
            for (int i = k - 1; i <= j; ++i) {
                double cand = dp[k - 1][i - 1] + ssd(i, j);
                if (cand < dp[k][j]) {
                    dp[k][j] = cand;
                    from[k][j] = i;
                }
            }
    JenksResult out;
    out.objective = dp[n][m - 1];
    out.class_upper.assign(n, 0.0);
    int j = m - 1;
    for (int k = n; k >= 1; --k) {
        out.class_upper[k - 1] = sorted[j];
        j = from[k][j] - 1;
    }
    out.cluster.assign(m, 0);
    for (int i = 0; i < m; ++i) {
        int c = static_cast<int>(std::lower_bound(out.class_upper.begin(), out.class_upper.end(),
                                                  v[i]) -
                                 out.class_upper.begin());
        if (c >= n) c = n - 1;
        out.cluster[i] = higher_better ? n - 1 - c : c;
    }
    return out;
}

}  // namespace bcot
