#pragma once

#include <json.hpp>

#include <charconv>
#include <fstream>

#include "bcot/equilibrium.hpp"

namespace bcot {

using ordered_json = nlohmann::ordered_json;

// Shortest round-trip decimal form; keeps emitted files byte-stable.
inline std::string fmt_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

inline ordered_json mat_to_json(const Mat& m) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < m.rows; ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < m.cols; ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Mat mat_from_json(const ordered_json& j) {
    if (!j.is_array() || j.empty()) throw Error("matrix json: expected nonempty array of rows");
    int rows = static_cast<int>(j.size()), cols = static_cast<int>(j[0].size());
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[i].size()) != cols) throw Error("matrix json: ragged rows");
        for (int k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

inline ordered_json process_to_json(const FiniteProcess& p) {
    ordered_json j;
    j["n_states"] = p.n_states;
    j["horizon"] = p.horizon;
    j["initial"] = p.initial;
    j["kernel"] = mat_to_json(p.kernel);
    j["state_values"] = p.state_values;
    return j;
}

inline FiniteProcess process_from_json(const ordered_json& j) {
    FiniteProcess p;
    p.n_states = j.at("n_states").get<int>();
    p.horizon = j.at("horizon").get<int>();
    p.initial = j.at("initial").get<std::vector<double>>();
    p.kernel = mat_from_json(j.at("kernel"));
    if (j.contains("state_values"))
        p.state_values = j.at("state_values").get<std::vector<double>>();
    else
        p.state_values = FiniteProcess::default_values(p.n_states);
    p.validate();
    return p;
}

inline ordered_json coupling_to_json(const Coupling& c) {
    ordered_json j;
    j["row_marginal"] = c.row_marginal;
    j["col_marginal"] = c.col_marginal;
    j["plan"] = mat_to_json(c.plan);
    return j;
}

inline Coupling coupling_from_json(const ordered_json& j) {
    Coupling c;
    c.row_marginal = j.at("row_marginal").get<std::vector<double>>();
    c.col_marginal = j.at("col_marginal").get<std::vector<double>>();
    c.plan = mat_from_json(j.at("plan"));
    return c;
}

inline ordered_json plan_to_json(const KernelPlan& plan) {
    ordered_json j;
    j["mode"] = plan.mode == HistoryMode::markov ? "markov" : "full";
    j["horizon"] = plan.horizon;
    j["initial"] = coupling_to_json(plan.initial);
    ordered_json steps = ordered_json::array();
    for (const auto& layer : plan.steps) {
        ordered_json entries = ordered_json::array();
        for (const auto& [h, c] : layer) {
            ordered_json e;
            e["x"] = h.x;
            e["y"] = h.y;
            e["coupling"] = coupling_to_json(c);
            entries.push_back(std::move(e));
        }
        steps.push_back(std::move(entries));
    }
    j["steps"] = std::move(steps);
    return j;
}

inline KernelPlan plan_from_json(const ordered_json& j) {
    KernelPlan plan;
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "markov") plan.mode = HistoryMode::markov;
    else if (mode == "full") plan.mode = HistoryMode::full;
    else throw Error("plan json: unknown mode " + mode);
    plan.horizon = j.at("horizon").get<int>();
    plan.initial = coupling_from_json(j.at("initial"));
    for (const auto& layer : j.at("steps")) {
        std::map<HistoryKey, Coupling> m;
        for (const auto& e : layer) {
            HistoryKey h;
            h.x = e.at("x").get<RankPath>();
            h.y = e.at("y").get<RankPath>();
            m[h] = coupling_from_json(e.at("coupling"));
        }
        plan.steps.push_back(std::move(m));
    }
    if (static_cast<int>(plan.steps.size()) != plan.horizon - 1)
        throw Error("plan json: steps/horizon mismatch");
    return plan;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << content;
    if (!out) throw Error("write failed: " + path);
}

inline ordered_json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("bad json in " + path + ": " + e.what());
    }
    return j;
}

}  // namespace bcot
