#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "bcot/clustering.hpp"
#include "bcot/path_measure.hpp"
#include "bcot/process.hpp"
#include "bcot/stats.hpp"

namespace bcot {

struct PanelRecord {
    std::string entity_id;
    int period = 0;
    double size_value = 0.0;
    double wage_value = 0.0;
    std::string sector;
};

enum class ClusterMethod { even, jenks };

inline ClusterMethod parse_cluster_method(const std::string& s) {
    if (s == "even") return ClusterMethod::even;
    if (s == "jenks") return ClusterMethod::jenks;
    throw Error("unknown cluster method: " + s);
}

// Header-driven CSV reader. Recognizes the executive columns
// (entity_id,period,size_value,wage_value,sector) and the academic aliases
// (university,usnews_rank,median_wage_rank); the sector column is optional.
inline std::vector<PanelRecord> read_panel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open panel file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error("empty panel file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        std::stringstream ss(s);
        while (std::getline(ss, cur, ',')) out.push_back(cur);
        if (!s.empty() && s.back() == ',') out.push_back("");
        return out;
    };
    std::vector<std::string> header = split(line);
    int c_id = -1, c_period = -1, c_size = -1, c_wage = -1, c_sector = -1;
    for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        const std::string& h = header[i];
        if (h == "entity_id" || h == "university") c_id = i;
        else if (h == "period") c_period = i;
        else if (h == "size_value" || h == "usnews_rank") c_size = i;
        else if (h == "wage_value" || h == "median_wage_rank") c_wage = i;
        else if (h == "sector" || h == "title" || h == "job_title") c_sector = i;
    }
    if (c_id < 0 || c_period < 0 || c_size < 0 || c_wage < 0)
        throw Error("panel header missing required columns: " + path);
    std::vector<PanelRecord> out;
    std::set<std::pair<std::string, int>> seen;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f = split(line);
        if (static_cast<int>(f.size()) < std::max({c_id, c_period, c_size, c_wage}) + 1)
            throw Error("short row at line " + std::to_string(lineno) + " in " + path);
        PanelRecord r;
        r.entity_id = f[c_id];
        try {
            r.period = std::stoi(f[c_period]);
            r.size_value = std::stod(f[c_size]);
            r.wage_value = std::stod(f[c_wage]);
        } catch (const std::exception&) {
            throw Error("bad numeric field at line " + std::to_string(lineno) + " in " + path);
        }
        r.sector = c_sector >= 0 && c_sector < static_cast<int>(f.size()) ? f[c_sector] : "all";
        if (r.sector.empty()) r.sector = "all";
        if (!seen.insert({r.entity_id, r.period}).second)
            throw Error("duplicate (entity, period) at line " + std::to_string(lineno) + " in " +
                        path);
        out.push_back(std::move(r));
    }
    if (out.empty()) throw Error("panel has no data rows: " + path);
    return out;
}

inline std::vector<std::string> panel_sectors(const std::vector<PanelRecord>& recs) {
    std::set<std::string> s;
    for (const auto& r : recs) s.insert(r.sector);
    return {s.begin(), s.end()};
}

inline std::vector<PanelRecord> filter_sector(const std::vector<PanelRecord>& recs,
                                              const std::string& sector) {
    std::vector<PanelRecord> out;
    for (const auto& r : recs)
        if (r.sector == sector) out.push_back(r);
    return out;
}

inline std::vector<int> panel_periods(const std::vector<PanelRecord>& recs) {
    std::set<int> s;
    for (const auto& r : recs) s.insert(r.period);
    return {s.begin(), s.end()};
}

// Per-record size and wage cluster indices (0 = best), clustered within each
// period.
struct PanelClusters {
    std::vector<int> x, y;
    int n_clusters = 0;
};

struct ClusterOptions {
    ClusterMethod method = ClusterMethod::even;
    bool jenks_log_sizes = true;  // cluster log sizes, raw wages
    bool higher_better = true;    // false for rank-valued data (1 = best)
};

inline PanelClusters cluster_panel(const std::vector<PanelRecord>& recs, int n,
                                   const ClusterOptions& opt) {
    PanelClusters out;
    out.n_clusters = n;
    out.x.assign(recs.size(), 0);
    out.y.assign(recs.size(), 0);
    std::map<int, std::vector<int>> by_period;
    for (int i = 0; i < static_cast<int>(recs.size()); ++i)
        by_period[recs[i].period].push_back(i);
    for (const auto& [period, idx] : by_period) {
        std::vector<double> sizes, wages;
        std::vector<std::string> ids;
        for (int i : idx) {
            sizes.push_back(recs[i].size_value);
            wages.push_back(recs[i].wage_value);
            ids.push_back(recs[i].entity_id);
        }
        std::vector<int> cx, cy;
        if (opt.method == ClusterMethod::even) {
            cx = even_clusters(sizes, ids, n, opt.higher_better);
            cy = even_clusters(wages, ids, n, opt.higher_better);
        } else {
            cx = jenks_clusters(sizes, n, opt.jenks_log_sizes, opt.higher_better).cluster;
            cy = jenks_clusters(wages, n, false, opt.higher_better).cluster;
        }
        for (size_t k = 0; k < idx.size(); ++k) {
            out.x[idx[k]] = cx[k];
            out.y[idx[k]] = cy[k];
        }
    }
    return out;
}

// Mean absolute gap between size and wage cluster indices over all
// entity-periods.
inline double sale_wage_discrepancy(const std::vector<int>& ax, const std::vector<int>& ay) {
    if (ax.size() != ay.size() || ax.empty())
        throw Error("sale_wage_discrepancy: coverage mismatch");
    double s = 0.0;
    for (size_t i = 0; i < ax.size(); ++i) s += std::abs(ax[i] - ay[i]);
    return s / static_cast<double>(ax.size());
}

// Pooled rank correlations between size and wage over all entity-periods.
inline RankCorr efficiency_coefficient(const std::vector<PanelRecord>& recs) {
    if (recs.empty()) throw Error("efficiency_coefficient: empty panel");
    std::vector<double> sizes, wages;
    for (const auto& r : recs) {
        sizes.push_back(r.size_value);
        wages.push_back(r.wage_value);
    }
    return rank_correlations(sizes, wages);
}

// Cluster paths for entities, one path per maximal run of contiguous periods
// covering the full window; entities missing any window period are skipped.
struct PanelPaths {
    std::vector<RankPath> xs, ys;
    std::vector<std::string> entities;
    std::vector<int> window;  // the contiguous period window used
};

inline PanelPaths build_panel_paths(const std::vector<PanelRecord>& recs,
                                    const PanelClusters& clusters) {
    std::vector<int> window = panel_periods(recs);
    for (size_t i = 1; i < window.size(); ++i)
        if (window[i] != window[i - 1] + 1)
            throw Error("panel periods are not contiguous; cannot build paths");
    std::map<std::string, std::map<int, int>> slots;  // entity -> period -> record index
    for (int i = 0; i < static_cast<int>(recs.size()); ++i)
        slots[recs[i].entity_id][recs[i].period] = i;
    PanelPaths out;
    out.window = window;
    for (const auto& [entity, by_period] : slots) {
        if (by_period.size() != window.size()) continue;
        RankPath x, y;
        for (int p : window) {
            int i = by_period.at(p);
            x.push_back(clusters.x[i]);
            y.push_back(clusters.y[i]);
        }
        out.xs.push_back(std::move(x));
        out.ys.push_back(std::move(y));
        out.entities.push_back(entity);
    }
    return out;
}

inline PathMeasure paths_to_measure(const PanelPaths& paths, int n_states) {
    if (paths.xs.empty()) throw Error("no full-window entity paths in panel");
    PathMeasure out;
    out.x_values = FiniteProcess::default_values(n_states);
    out.y_values = out.x_values;
    double w = 1.0 / static_cast<double>(paths.xs.size());
    for (size_t i = 0; i < paths.xs.size(); ++i) out.add(paths.xs[i], paths.ys[i], w);
    out.finalize();
    out.renormalize();
    return out;
}

struct ClusterDiagnostics {
    std::vector<int> candidates;
    std::vector<double> spearman, kendall;  // corr(discrepancy, efficiency) across sectors
};

struct ClusterSelection {
    int n = 0;
    ClusterDiagnostics diagnostics;
};

struct ClusterSelectionError : Error {
    ClusterDiagnostics diagnostics;
    explicit ClusterSelectionError(ClusterDiagnostics d)
        : Error("no candidate cluster count reaches the correlation threshold"),
          diagnostics(std::move(d)) {}
};

// Smallest candidate n whose across-sector correlation between the sale-wage
// discrepancy and the efficiency coefficient is at or below the threshold.
inline ClusterSelection select_cluster_count(const std::vector<PanelRecord>& recs,
                                             const std::vector<int>& candidates,
                                             const ClusterOptions& opt, double threshold = -0.5,
                                             bool gate_on_kendall = false) {
    std::vector<std::string> sectors = panel_sectors(recs);
    if (sectors.size() < 3)
        throw Error("select_cluster_count: need at least 3 sectors for a correlation");
    if (candidates.empty()) throw Error("select_cluster_count: no candidates");
    std::vector<std::vector<PanelRecord>> per_sector;
    std::vector<double> efficiency;
    for (const auto& s : sectors) {
        per_sector.push_back(filter_sector(recs, s));
        efficiency.push_back(efficiency_coefficient(per_sector.back()).spearman);
    }
    ClusterDiagnostics diag;
    std::optional<int> chosen;
    for (int n : candidates) {
        std::vector<double> discrepancy;
        for (const auto& sec : per_sector) {
            PanelClusters c = cluster_panel(sec, n, opt);
            discrepancy.push_back(sale_wage_discrepancy(c.x, c.y));
        }
        RankCorr corr = rank_correlations(discrepancy, efficiency);
        diag.candidates.push_back(n);
        diag.spearman.push_back(corr.spearman);
        diag.kendall.push_back(corr.kendall);
        double gate = gate_on_kendall ? corr.kendall : corr.spearman;
        if (!chosen && gate <= threshold) chosen = n;
    }
    if (!chosen) throw ClusterSelectionError(std::move(diag));
    return {*chosen, std::move(diag)};
}

}  // namespace bcot
