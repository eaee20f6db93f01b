#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "bcot/bcot.hpp"

namespace fs = std::filesystem;
using namespace bcot;

namespace {

struct PresetDefaults {
    double tau;
    int bootstrap;
    bool higher_better;
    bool jenks_log_sizes;
};

PresetDefaults preset_defaults(const std::string& name) {
    if (name == "executive") return {0.0, 500, true, true};
    if (name == "academic") return {1.0, 200, false, false};
    throw Error("unknown preset: " + name + " (expected executive or academic)");
}

SweepSettings sweep_from_config(const Config& cfg, int cli_threads) {
    PresetDefaults p = preset_defaults(cfg.get_string("preset", "executive"));
    SweepSettings s;
    s.grid = default_alpha_grid(cfg.get_double("grid_min", -1.5), cfg.get_double("grid_max", 1.5),
                                cfg.get_double("grid_step", 0.06));
    s.tau = cfg.get_double("tau", p.tau);
    s.delta = cfg.get_double("delta", 0.9);
    s.K = cfg.get_int("K", 500);
    s.bootstrap = cfg.get_int("bootstrap", p.bootstrap);
    s.denoise_lambda = cfg.get_double("denoise_lambda", -1.0);
    s.renormalize = cfg.get_bool("renormalize", true);
    s.threads = cli_threads > 0 ? cli_threads : cfg.get_int("threads", 1);
    return s;
}

ClusterOptions cluster_from_config(const Config& cfg) {
    PresetDefaults p = preset_defaults(cfg.get_string("preset", "executive"));
    ClusterOptions opt;
    opt.method = parse_cluster_method(cfg.get_string("cluster_method", "even"));
    opt.jenks_log_sizes = cfg.get_bool("jenks_log_sizes", p.jenks_log_sizes);
    opt.higher_better = cfg.get_bool("higher_better", p.higher_better);
    return opt;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s)
        out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_';
    return out.empty() ? std::string("sector") : out;
}

struct SectorData {
    std::string name;
    std::vector<PanelRecord> recs;
    PanelClusters clusters;
    PanelPaths paths;
    FiniteProcess mu, nu;
    PathMeasure pi_r;
};

SectorData prepare_sector(const std::string& name, std::vector<PanelRecord> recs, int n,
                          const ClusterOptions& opt) {
    SectorData d;
    d.name = name;
    d.recs = std::move(recs);
    d.clusters = cluster_panel(d.recs, n, opt);
    d.paths = build_panel_paths(d.recs, d.clusters);
    if (d.paths.xs.empty())
        throw Error("sector " + name + ": no entity covers the full period window");
    d.mu = estimate_process(d.paths.xs, n);
    d.nu = estimate_process(d.paths.ys, n);
    d.pi_r = paths_to_measure(d.paths, n);
    return d;
}

void write_sector_processes(const fs::path& dir, const SectorData& d) {
    write_text_file((dir / "transitions_x.csv").string(), transitions_csv(d.mu));
    write_text_file((dir / "transitions_y.csv").string(), transitions_csv(d.nu));
    write_text_file((dir / "initial_x.csv").string(), initial_csv(d.mu));
    write_text_file((dir / "initial_y.csv").string(), initial_csv(d.nu));
    write_text_file((dir / "process_x.json").string(), process_to_json(d.mu).dump(2) + "\n");
    write_text_file((dir / "process_y.json").string(), process_to_json(d.nu).dump(2) + "\n");
}

void write_efficiency_table(const fs::path& out, const std::vector<PanelRecord>& panel) {
    std::vector<std::string> sectors = panel_sectors(panel);
    std::vector<RankCorr> corr;
    for (const auto& s : sectors) corr.push_back(efficiency_coefficient(filter_sector(panel, s)));
    write_text_file((out / "efficiency.csv").string(), efficiency_csv(sectors, corr));
}

std::vector<int> candidate_counts(const Config& cfg) {
    int lo = cfg.get_int("cluster_min", 4), hi = cfg.get_int("cluster_max", 8);
    if (lo < 1 || hi < lo) throw Error("invalid cluster candidate range");
    std::vector<int> out;
    for (int n = lo; n <= hi; ++n) out.push_back(n);
    return out;
}

int resolve_cluster_count(const std::vector<PanelRecord>& panel, const Config& cfg,
                          const ClusterOptions& opt, const fs::path& out) {
    if (!cfg.get_bool("auto_clusters", false)) return cfg.get_int("n_clusters", 6);
    ClusterSelection sel =
        select_cluster_count(panel, candidate_counts(cfg), opt, cfg.get_double("threshold", -0.5),
                             cfg.get_string("select_stat", "spearman") == "kendall");
    write_text_file((out / "cluster_selection.csv").string(),
                    cluster_selection_csv(sel.diagnostics));
    return sel.n;
}

CostModel cost_from_config(const Config& cfg, const FiniteProcess& mu, const FiniteProcess& nu) {
    std::string model = cfg.get_string("model", "inertia");
    if (mu.n_states != nu.n_states)
        throw Error("cost models require equal state counts on both processes");
    if (model == "pam")
        return pam_linear_cost(mu.n_states, mu.horizon, cfg.get_double("delta", 0.9));
    if (model == "inertia") {
        InertiaSpec spec{cfg.get_double("alpha", 0.0), cfg.get_double("tau", 0.0),
                         cfg.get_double("delta", 0.9), mu.n_states};
        return build_state_cost(spec, mu.horizon);
    }
    throw Error("unknown model: " + model + " (expected pam or inertia)");
}

int cmd_estimate(const std::string& panel_file, const std::string& out_dir, const Config& cfg) {
    std::vector<PanelRecord> panel = read_panel_csv(panel_file);
    ClusterOptions opt = cluster_from_config(cfg);
    fs::path out(out_dir);
    fs::create_directories(out);
    int n = resolve_cluster_count(panel, cfg, opt, out);
    for (const auto& sector : panel_sectors(panel)) {
        SectorData d = prepare_sector(sector, filter_sector(panel, sector), n, opt);
        fs::path dir = out / sanitize(sector);
        fs::create_directories(dir);
        write_sector_processes(dir, d);
        std::cout << sector << ": " << d.paths.xs.size() << " full paths over "
                  << d.paths.window.size() << " periods, " << n << " clusters\n";
    }
    write_efficiency_table(out, panel);
    return 0;
}

int cmd_cluster_select(const std::string& panel_file, const std::string& out_dir,
                       const Config& cfg) {
    std::vector<PanelRecord> panel = read_panel_csv(panel_file);
    ClusterOptions opt = cluster_from_config(cfg);
    fs::path out(out_dir);
    fs::create_directories(out);
    write_efficiency_table(out, panel);
    try {
        ClusterSelection sel = select_cluster_count(
            panel, candidate_counts(cfg), opt, cfg.get_double("threshold", -0.5),
            cfg.get_string("select_stat", "spearman") == "kendall");
        write_text_file((out / "cluster_selection.csv").string(),
                        cluster_selection_csv(sel.diagnostics));
        std::cout << "selected n_clusters=" << sel.n << "\n";
        return 0;
    } catch (const ClusterSelectionError& e) {
        write_text_file((out / "cluster_selection.csv").string(),
                        cluster_selection_csv(e.diagnostics));
        std::cerr << "validation failure: " << e.what() << "\n";
        return 2;
    }
}

int cmd_calibrate(const std::string& panel_file, const std::string& out_dir, const Config& cfg,
                  int threads, bool benchmark_only) {
    std::vector<PanelRecord> panel = read_panel_csv(panel_file);
    ClusterOptions opt = cluster_from_config(cfg);
    SweepSettings settings = sweep_from_config(cfg, threads);
    int n_seeds = cfg.get_int("seeds", 10);
    std::uint64_t base_seed = cfg.get_u64("base_seed", 12345);
    double validate_threshold = cfg.get_double("validate_threshold", 0.12);
    bool nu_copy = cfg.get_bool("benchmark_nu_copy", false);
    fs::path out(out_dir);
    fs::create_directories(out);
    int n = resolve_cluster_count(panel, cfg, opt, out);
    write_efficiency_table(out, panel);
    std::vector<std::string> sectors = panel_sectors(panel);
    bool validation_ok = true;
    for (size_t si = 0; si < sectors.size(); ++si) {
        SectorData d = prepare_sector(sectors[si], filter_sector(panel, sectors[si]), n, opt);
        fs::path dir = out / sanitize(sectors[si]);
        fs::create_directories(dir);
        write_sector_processes(dir, d);
        std::uint64_t sector_seed = mix_seed(base_seed, static_cast<std::uint64_t>(si));
        AlphaReport report =
            run_benchmark_and_raw(d.mu, d.nu, settings, benchmark_only ? nullptr : &d.pi_r,
                                  n_seeds, sector_seed, nu_copy ? &d.mu : nullptr);
        for (const auto& c : report.benchmark_curves) {
            std::string name = benchmark_only ? "curve_" + std::to_string(c.seed) + ".csv"
                                              : "benchmark_curve_" + std::to_string(c.seed) +
                                                    ".csv";
            write_text_file((dir / name).string(), curve_csv(c));
        }
        for (const auto& c : report.raw_curves)
            write_text_file((dir / ("curve_" + std::to_string(c.seed) + ".csv")).string(),
                            curve_csv(c));
        write_text_file((dir / "alpha_report.json").string(),
                        alpha_report_json(report).dump(2) + "\n");
        std::cout << sectors[si] << ": benchmark=" << fmt_double(report.benchmark_alpha);
        if (!benchmark_only)
            std::cout << " raw=" << fmt_double(report.raw_alpha)
                      << " adjusted=" << fmt_double(report.adjusted_alpha);
        std::cout << "\n";
        if (benchmark_only && std::abs(report.benchmark_alpha) > validate_threshold) {
            std::cerr << "validation failure: sector " << sectors[si] << " benchmark alpha "
                      << fmt_double(report.benchmark_alpha) << " exceeds "
                      << fmt_double(validate_threshold) << "\n";
            validation_ok = false;
        }
    }
    return validation_ok ? 0 : 2;
}

int cmd_solve(const std::string& mu_file, const std::string& nu_file, const std::string& out_file,
              const Config& cfg) {
    FiniteProcess mu = process_from_json(read_json_file(mu_file));
    FiniteProcess nu = process_from_json(read_json_file(nu_file));
    CostModel model = cost_from_config(cfg, mu, nu);
    HistoryMode mode =
        cfg.get_string("mode", "markov") == "full" ? HistoryMode::full : HistoryMode::markov;
    EquilibriumSolution sol;
    if (const auto* sc = std::get_if<StateDependentCost>(&model))
        sol = solve_equilibrium_state(mu, nu, *sc, mode);
    else
        sol = solve_equilibrium_linear(mu, nu, std::get<LinearCost>(model));
    ordered_json j;
    j["model"] = cfg.get_string("model", "inertia");
    j["value"] = sol.value;
    j["plan"] = plan_to_json(sol.plan);
    write_text_file(out_file, j.dump(2) + "\n");
    std::cout << "value=" << fmt_double(sol.value) << "\n";
    return 0;
}

int cmd_verify(const std::string& plan_file, const std::string& mu_file,
               const std::string& nu_file, const Config& cfg) {
    FiniteProcess mu = process_from_json(read_json_file(mu_file));
    FiniteProcess nu = process_from_json(read_json_file(nu_file));
    ordered_json pj = read_json_file(plan_file);
    KernelPlan plan = plan_from_json(pj.contains("plan") ? pj.at("plan") : pj);
    CostModel model = cost_from_config(cfg, mu, nu);
    std::vector<Deviation> devs =
        verify_equilibrium(plan, mu, nu, model, cfg.get_double("verify_tol", 1e-7),
                           cfg.get_int("verify_probes", 50), cfg.get_u64("base_seed", 12345));
    if (devs.empty()) {
        std::cout << "no profitable one-step deviation found\n";
        return 0;
    }
    for (const auto& d : devs) {
        std::cout << "deviation at t=" << d.t << " history x=[";
        for (size_t i = 0; i < d.history.x.size(); ++i)
            std::cout << (i ? "," : "") << d.history.x[i];
        std::cout << "] y=[";
        for (size_t i = 0; i < d.history.y.size(); ++i)
            std::cout << (i ? "," : "") << d.history.y[i];
        std::cout << "] improvement=" << fmt_double(d.improvement) << "\n";
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bi-causal equilibrium transport toolkit"};
    app.require_subcommand(1);
    std::string config_file, panel_file, out_path, mu_file, nu_file, plan_file;
    int threads = 0;

    CLI::App* estimate = app.add_subcommand("estimate", "estimate rank processes from a panel");
    estimate->add_option("--panel", panel_file, "panel csv")->required();
    estimate->add_option("--out", out_path, "output directory")->required();
    estimate->add_option("--config", config_file, "config file");

    CLI::App* cluster = app.add_subcommand("cluster-select", "pick the cluster count");
    cluster->add_option("--panel", panel_file, "panel csv")->required();
    cluster->add_option("--out", out_path, "output directory")->required();
    cluster->add_option("--config", config_file, "config file");

    CLI::App* calibrate = app.add_subcommand("calibrate", "full alpha calibration loop");
    calibrate->add_option("--panel", panel_file, "panel csv")->required();
    calibrate->add_option("--out", out_path, "output directory")->required();
    calibrate->add_option("--config", config_file, "config file");
    calibrate->add_option("--threads", threads, "worker threads for the alpha grid");

    CLI::App* validate = app.add_subcommand("validate", "benchmark-only calibration run");
    validate->add_option("--panel", panel_file, "panel csv")->required();
    validate->add_option("--out", out_path, "output directory")->required();
    validate->add_option("--config", config_file, "config file");
    validate->add_option("--threads", threads, "worker threads for the alpha grid");

    CLI::App* solve = app.add_subcommand("solve", "solve one equilibrium problem");
    solve->add_option("--mu", mu_file, "x-process json")->required();
    solve->add_option("--nu", nu_file, "y-process json")->required();
    solve->add_option("--out", out_path, "output json file")->required();
    solve->add_option("--config", config_file, "config file");

    CLI::App* verify = app.add_subcommand("verify", "check a stored plan for deviations");
    verify->add_option("--plan", plan_file, "plan json")->required();
    verify->add_option("--mu", mu_file, "x-process json")->required();
    verify->add_option("--nu", nu_file, "y-process json")->required();
    verify->add_option("--config", config_file, "config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        Config cfg = config_file.empty() ? Config{} : Config::load(config_file);
        if (estimate->parsed()) return cmd_estimate(panel_file, out_path, cfg);
        if (cluster->parsed()) return cmd_cluster_select(panel_file, out_path, cfg);
        if (calibrate->parsed()) return cmd_calibrate(panel_file, out_path, cfg, threads, false);
        if (validate->parsed()) return cmd_calibrate(panel_file, out_path, cfg, threads, true);
        if (solve->parsed()) return cmd_solve(mu_file, nu_file, out_path, cfg);
        if (verify->parsed()) return cmd_verify(plan_file, mu_file, nu_file, cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
