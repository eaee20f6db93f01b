#pragma once

#include "bcot/calibration.hpp"
#include "bcot/panel.hpp"
#include "bcot/serialize.hpp"

namespace bcot {

inline std::string curve_csv(const CalibrationCurve& curve) {
    std::string out = "alpha,distance,normalized_distance,denoised_distance\n";
    const std::vector<double>& den =
        curve.denoised_distances.empty() ? curve.distances : curve.denoised_distances;
    for (size_t i = 0; i < curve.alphas.size(); ++i) {
        out += fmt_double(curve.alphas[i]);
        out += ',';
        out += fmt_double(curve.distances[i]);
        out += ',';
        out += fmt_double(curve.normalized_distances[i]);
        out += ',';
        out += fmt_double(den[i]);
        out += '\n';
    }
    return out;
}

inline std::string transitions_csv(const FiniteProcess& p) {
    std::string out = "from";
    for (int j = 0; j < p.n_states; ++j) out += ",to_" + std::to_string(j);
    out += '\n';
    for (int i = 0; i < p.n_states; ++i) {
        out += std::to_string(i);
        for (int j = 0; j < p.n_states; ++j) {
            out += ',';
            out += fmt_double(p.kernel(i, j));
        }
        out += '\n';
    }
    return out;
}

inline std::string initial_csv(const FiniteProcess& p) {
    std::string out = "state,probability\n";
    for (int i = 0; i < p.n_states; ++i) {
        out += std::to_string(i);
        out += ',';
        out += fmt_double(p.initial[i]);
        out += '\n';
    }
    return out;
}

inline std::string cluster_selection_csv(const ClusterDiagnostics& diag) {
    std::string out = "n_clusters,spearman,kendall\n";
    for (size_t i = 0; i < diag.candidates.size(); ++i) {
        out += std::to_string(diag.candidates[i]);
        out += ',';
        out += fmt_double(diag.spearman[i]);
        out += ',';
        out += fmt_double(diag.kendall[i]);
        out += '\n';
    }
    return out;
}

inline std::string efficiency_csv(const std::vector<std::string>& sectors,
                                  const std::vector<RankCorr>& corr) {
    std::string out = "sector,spearman,spearman_p,kendall,kendall_p\n";
    for (size_t i = 0; i < sectors.size(); ++i) {
        out += sectors[i];
        out += ',';
        out += fmt_double(corr[i].spearman);
        out += ',';
        out += fmt_double(corr[i].spearman_p);
        out += ',';
        out += fmt_double(corr[i].kendall);
        out += ',';
        out += fmt_double(corr[i].kendall_p);
        out += '\n';
    }
    return out;
}

inline ordered_json alpha_report_json(const AlphaReport& report) {
    ordered_json j;
    j["benchmark_alpha"] = report.benchmark_alpha;
    if (!std::isnan(report.raw_alpha)) {
        j["raw_alpha"] = report.raw_alpha;
        j["adjusted_alpha"] = report.adjusted_alpha;
    }
    j["benchmark_per_seed"] = report.benchmark_per_seed;
    if (!report.raw_per_seed.empty()) j["raw_per_seed"] = report.raw_per_seed;
    ordered_json bseeds = ordered_json::array(), rseeds = ordered_json::array();
    for (const auto& c : report.benchmark_curves) bseeds.push_back(c.seed);
    for (const auto& c : report.raw_curves) rseeds.push_back(c.seed);
    j["benchmark_seeds"] = std::move(bseeds);
    if (!report.raw_curves.empty()) j["raw_seeds"] = std::move(rseeds);
    ordered_json braw = ordered_json::array();
    for (const auto& c : report.benchmark_curves) braw.push_back(c.raw_optimum);
    j["benchmark_raw_curve_optima"] = std::move(braw);
    if (!report.raw_curves.empty()) {
        ordered_json rraw = ordered_json::array();
        for (const auto& c : report.raw_curves) rraw.push_back(c.raw_optimum);
        j["raw_raw_curve_optima"] = std::move(rraw);
    }
    return j;
}

}  // namespace bcot
