#pragma once

#include <atomic>
#include <thread>

#include "bcot/equilibrium.hpp"
#include "bcot/jobmarket.hpp"
#include "bcot/tv.hpp"

namespace bcot {

struct CurveMeta {
    double tau = 0.0;
    double delta = 0.9;
    int K = 500;
    int bootstrap = 500;
};

struct CalibrationCurve {
    std::vector<double> alphas;
    std::vector<double> distances;
    std::vector<double> normalized_distances;  // distances / distances[0]
    std::vector<double> denoised_distances;    // filled by select_alpha
    double optimum = std::numeric_limits<double>::quiet_NaN();
    double raw_optimum = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
    CurveMeta meta;
};

struct SweepSettings {
    std::vector<double> grid;
    double tau = 0.0;
    double delta = 0.9;
    int K = 500;
    int bootstrap = 500;
    double denoise_lambda = -1.0;  // negative: 0.02 * (max - min) of the curve
    bool renormalize = true;       // renormalize truncated top-K plans
    int threads = 1;
};

// Alpha grid in exact hundredth steps so grid points print cleanly and 0 is
// hit exactly.
inline std::vector<double> default_alpha_grid(double lo = -1.5, double hi = 1.5,
                                              double step = 0.06) {
    if (step <= 0.0) throw Error("alpha grid: step must be positive");
    long long ilo = std::llround(lo * 1e6), ihi = std::llround(hi * 1e6),
              istep = std::llround(step * 1e6);
    if (istep <= 0) throw Error("alpha grid: step too small");
    std::vector<double> out;
    for (long long v = ilo; v <= ihi + istep / 2 && static_cast<long long>(out.size()) < 100000;
         v += istep)
        out.push_back(static_cast<double>(v) / 1e6);
    if (out.size() < 1) throw Error("alpha grid: empty");
    return out;
}

// Resample atoms with replacement proportional to weight; output atoms carry
// uniform weight 1/size (merged).
inline PathMeasure bootstrap_paths(const PathMeasure& data, int size, std::uint64_t seed) {
    if (data.atoms.empty()) throw Error("bootstrap_paths: empty data");
    if (size < 1) throw Error("bootstrap_paths: size must be positive");
    std::vector<double> w(data.atoms.size());
    for (size_t i = 0; i < w.size(); ++i) w[i] = data.atoms[i].weight;
    Rng rng(seed);
    PathMeasure out;
    out.x_values = data.x_values;
    out.y_values = data.y_values;
    double aw = 1.0 / size;
    for (int i = 0; i < size; ++i) {
        int k = rng.pick_weighted(w);
        out.add(data.atoms[k].x, data.atoms[k].y, aw);
    }
    out.finalize();
    out.renormalize();
    return out;
}

// N paths drawn from a plan, as a normalized path measure on the processes'
// value grids.
inline PathMeasure sample_plan_measure(const KernelPlan& plan, const FiniteProcess& mu,
                                       const FiniteProcess& nu, int N, std::uint64_t seed) {
    if (N < 1) throw Error("sample_plan_measure: need at least one draw");
    PathMeasure out;
    out.x_values = mu.state_values;
    out.y_values = nu.state_values;
    Rng rng(seed);
    double w = 1.0 / N;
    for (int i = 0; i < N; ++i) {
        auto [x, y] = simulate_plan_path(plan, rng);
        out.add(std::move(x), std::move(y), w);
    }
    out.finalize();
    out.renormalize();
    return out;
}

// Distance profile over the alpha grid: equilibrium solve per alpha, top-K
// truncation, transport distance against the reference measure. Grid points
// are independent, so they parallelize without changing any result.
inline CalibrationCurve sweep_alpha(const FiniteProcess& mu, const FiniteProcess& nu,
                                    const SweepSettings& settings, const PathMeasure& pi_r) {
    detail::check_process_pair(mu, nu);
    pi_r.validate();
    if (settings.grid.empty()) throw Error("sweep_alpha: empty grid");
    for (size_t i = 1; i < settings.grid.size(); ++i)
        if (settings.grid[i] <= settings.grid[i - 1])
            throw Error("sweep_alpha: grid must be strictly increasing");
    if (settings.K < 1) throw Error("sweep_alpha: K must be positive");
    if (mu.n_states != nu.n_states)
        throw Error("sweep_alpha: state counts must agree for the shared rank grid");

    CalibrationCurve curve;
    curve.alphas = settings.grid;
    curve.meta = {settings.tau, settings.delta, settings.K, settings.bootstrap};
    size_t n = settings.grid.size();
    curve.distances.assign(n, 0.0);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<size_t> cursor{0};
    int n_threads = std::max(1, settings.threads);
    auto worker = [&]() {
        for (;;) {
            size_t i = cursor.fetch_add(1);
            if (i >= n) return;
            try {
                InertiaSpec spec{settings.grid[i], settings.tau, settings.delta, mu.n_states};
                StateDependentCost cost = build_state_cost(spec, mu.horizon);
                EquilibriumSolution sol =
                    solve_equilibrium_state(mu, nu, cost, HistoryMode::markov);
                TopKResult top =
                    top_k_paths(sol.plan, mu, nu, settings.K, settings.renormalize);
                curve.distances[i] =
                    path_wasserstein(top.measure, pi_r, !settings.renormalize);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (size_t i = 0; i < n; ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw Error("sweep failed at alpha=" + std::to_string(settings.grid[i]) + ": " +
                        e.what());
        }
    }
    curve.normalized_distances.assign(n, 1.0);
    double denom = curve.distances[0];
    for (size_t i = 1; i < n; ++i)
        curve.normalized_distances[i] = denom > 0.0 ? curve.distances[i] / denom
                                                    : curve.distances[i];
    return curve;
}

namespace detail {

inline double pick_tied_alpha(const std::vector<double>& alphas,
                              const std::vector<double>& values) {
    double best = *std::min_element(values.begin(), values.end());
    double chosen = alphas[0];
    bool have = false;
    for (size_t i = 0; i < alphas.size(); ++i) {
        if (values[i] > best + 1e-12) continue;
        if (!have) {
            chosen = alphas[i];
            have = true;
            continue;
        }
        double ca = std::abs(chosen), aa = std::abs(alphas[i]);
        if (aa < ca - 1e-15 || (std::abs(aa - ca) <= 1e-15 && alphas[i] > chosen))
            chosen = alphas[i];
    }
    return chosen;
}

}  // namespace detail

// Denoises the distance curve, then picks the grid minimizer; among ties the
// alpha closest to zero wins, and of two equal magnitudes the positive one.
// Fills denoised_distances, optimum, and raw_optimum on the curve.
inline double select_alpha(CalibrationCurve& curve, double denoise_lambda = -1.0) {
    if (curve.distances.empty()) throw Error("select_alpha: empty curve");
    double lam = denoise_lambda;
    if (lam < 0.0) {
        auto [lo, hi] = std::minmax_element(curve.distances.begin(), curve.distances.end());
        lam = 0.02 * (*hi - *lo);
    }
    curve.denoised_distances = tv_denoise(curve.distances, lam);
    curve.optimum = detail::pick_tied_alpha(curve.alphas, curve.denoised_distances);
    curve.raw_optimum = detail::pick_tied_alpha(curve.alphas, curve.distances);
    return curve.optimum;
}

struct AlphaReport {
    double benchmark_alpha = std::numeric_limits<double>::quiet_NaN();
    double raw_alpha = std::numeric_limits<double>::quiet_NaN();
    double adjusted_alpha = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> benchmark_per_seed, raw_per_seed;
    std::vector<CalibrationCurve> benchmark_curves, raw_curves;
};

// The validation protocol: per seed, a benchmark run against synthetic
// perfectly matched data and (when real data is supplied) a raw run against a
// bootstrap of it; the adjusted alpha is raw minus benchmark.
inline AlphaReport run_benchmark_and_raw(const FiniteProcess& mu, const FiniteProcess& nu,
                                         const SweepSettings& settings,
                                         const PathMeasure* pi_r_real, int n_seeds,
                                         std::uint64_t base_seed,
                                         const FiniteProcess* benchmark_nu = nullptr) {
    if (n_seeds < 1) throw Error("run_benchmark_and_raw: need at least one seed");
    const FiniteProcess& bnu = benchmark_nu ? *benchmark_nu : nu;
    AlphaReport report;
    double bench_sum = 0.0, raw_sum = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
        std::uint64_t bench_seed = mix_seed(base_seed, 2 * static_cast<std::uint64_t>(s));
        PathMeasure bench_ref = synth_perfect_paths(mu, settings.bootstrap, bench_seed);
        CalibrationCurve bench = sweep_alpha(mu, bnu, settings, bench_ref);
        bench.seed = bench_seed;
        select_alpha(bench, settings.denoise_lambda);
        bench_sum += bench.optimum;
        report.benchmark_per_seed.push_back(bench.optimum);
        report.benchmark_curves.push_back(std::move(bench));
        if (pi_r_real) {
            std::uint64_t raw_seed = mix_seed(base_seed, 2 * static_cast<std::uint64_t>(s) + 1);
            PathMeasure raw_ref = bootstrap_paths(*pi_r_real, settings.bootstrap, raw_seed);
            CalibrationCurve raw = sweep_alpha(mu, nu, settings, raw_ref);
            raw.seed = raw_seed;
            select_alpha(raw, settings.denoise_lambda);
            raw_sum += raw.optimum;
            report.raw_per_seed.push_back(raw.optimum);
            report.raw_curves.push_back(std::move(raw));
        }
    }
    report.benchmark_alpha = bench_sum / n_seeds;
    if (pi_r_real) {
        report.raw_alpha = raw_sum / n_seeds;
        report.adjusted_alpha = report.raw_alpha - report.benchmark_alpha;
    }
    return report;
}

}  // namespace bcot
