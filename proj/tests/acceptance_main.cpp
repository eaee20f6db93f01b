// Acceptance suite: prints one pass/fail line per criterion and exits
// nonzero if any required criterion fails. Criterion 11 needs external data
// and reports SKIP when it is absent.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "bcot/bcot.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace bcot;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int n, bool pass, const std::string& detail) {
    std::cout << "criterion " << n << ": " << (pass ? "PASS" : "FAIL") << " (" << detail << ")"
              << std::endl;
    if (!pass) ++g_failures;
}

void run(int n, const std::function<std::pair<bool, std::string>()>& fn) {
    try {
        auto [ok, detail] = fn();
        report(n, ok, detail);
    } catch (const std::exception& e) {
        report(n, false, std::string("exception: ") + e.what());
    }
}

double elapsed_s(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(3) << v;
    return os.str();
}

struct StoredSolution {
    KernelPlan plan;
    FiniteProcess mu, nu;
    CostModel model;
};

std::vector<StoredSolution> g_solutions;

std::vector<Mat> random_stage_costs(Rng& rng, int T, int nx, int ny) {
    std::vector<Mat> costs;
    for (int t = 0; t < T; ++t) {
        Mat c(nx, ny);
        for (double& v : c.a) v = rng.uniform();
        costs.push_back(std::move(c));
    }
    return costs;
}

// Band kernel: stay with the given probability, otherwise move to a
// neighboring rank.
FiniteProcess neighbor_chain(int n, int horizon, double stay) {
    FiniteProcess p;
    p.n_states = n;
    p.horizon = horizon;
    p.initial.assign(n, 1.0 / n);
    p.kernel = Mat(n, n);
    for (int i = 0; i < n; ++i) {
        int nb = (i > 0 ? 1 : 0) + (i < n - 1 ? 1 : 0);
        p.kernel(i, i) = stay;
        if (i > 0) p.kernel(i, i - 1) = (1.0 - stay) / nb;
        if (i < n - 1) p.kernel(i, i + 1) = (1.0 - stay) / nb;
    }
    p.state_values = FiniteProcess::default_values(n);
    return p;
}

// Oscillator between the top and bottom rank; middle ranks are absorbing but
// never visited. Full-swing moves make the stay/move trade-off steep enough
// that the keep-the-pair vertex becomes optimal only past a known weight.
FiniteProcess two_level(double stay, int horizon) {
    FiniteProcess p;
    p.n_states = 6;
    p.horizon = horizon;
    p.initial.assign(6, 0.0);
    p.initial[0] = 0.5;
    p.initial[5] = 0.5;
    p.kernel = Mat(6, 6);
    for (int i = 1; i < 5; ++i) p.kernel(i, i) = 1.0;
    p.kernel(0, 0) = stay;
    p.kernel(0, 5) = 1.0 - stay;
    p.kernel(5, 5) = stay;
    p.kernel(5, 0) = 1.0 - stay;
    p.state_values = FiniteProcess::default_values(6);
    return p;
}

std::pair<bool, std::string> criterion1() {
    auto t0 = Clock::now();
    Rng rng(1001);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        int nx = 2 + rng.uniform_int(2), ny = 2 + rng.uniform_int(2);
        FiniteProcess mu = oracle::random_process(rng, nx, 2);
        FiniteProcess nu = oracle::random_process(rng, ny, 2);
        std::vector<Mat> costs = random_stage_costs(rng, 2, nx, ny);
        double delta = 0.85;
        BicausalSolution sol = solve_bicausal_linear(mu, nu, costs, delta);
        oracle::DefinitionalSolver ref(mu, nu, LinearCost{costs, delta});
        worst = std::max(worst, std::abs(sol.value - ref.solve()));
        g_solutions.push_back({sol.plan, mu, nu, LinearCost{costs, delta}});
    }
    double secs = elapsed_s(t0);
    return {worst <= 1e-6 && secs < 30.0,
            "50 instances, max value gap " + fmt(worst) + ", " + fmt(secs) + "s"};
}

std::pair<bool, std::string> criterion2() {
    auto t0 = Clock::now();
    Rng rng(2002);
    const DivergenceKind kinds[] = {DivergenceKind::KL, DivergenceKind::SquaredHellinger,
                                    DivergenceKind::LeCam, DivergenceKind::JensenShannon};
    double worst_state = 0.0, worst_nonlinear = 0.0, worst_fdiv = 0.0;
    for (int i = 0; i < 25; ++i) {
        FiniteProcess mu = oracle::random_process(rng, 2, 2);
        FiniteProcess nu = oracle::random_process(rng, 2, 2);
        {
            std::vector<Mat> stage = random_stage_costs(rng, 2, 2, 2);
            std::vector<double> anchor(16);
            for (double& v : anchor) v = 0.5 * rng.uniform();
            StateDependentCost sc;
            sc.markov = false;
            sc.eval = [stage, anchor](int t, int w, int v, const RankPath& fx,
                                      const RankPath& fy) {
                double s = 0.0;
                for (int per = t + 1; per <= 2; ++per)
                    s += std::pow(0.9, per) * stage[per - 1](fx[per - 1], fy[per - 1]);
                if (t >= 1 && t < 2) s += anchor[((w * 2 + v) * 2 + fx[t]) * 2 + fy[t]];
                return s;
            };
            EquilibriumSolution sol = solve_equilibrium_state(mu, nu, sc, HistoryMode::full);
            oracle::DefinitionalSolver ref(mu, nu, sc);
            worst_state = std::max(worst_state, std::abs(sol.value - ref.solve()));
            g_solutions.push_back({sol.plan, mu, nu, sc});
        }
        {
            std::vector<Mat> stage = random_stage_costs(rng, 2, 2, 2);
            double target = rng.uniform();
            NonlinearCost nc;
            nc.path_cost = [stage](const RankPath& fx, const RankPath& fy) {
                double s = 0.0;
                for (int per = 1; per <= 2; ++per)
                    s += std::pow(0.9, per) * stage[per - 1](fx[per - 1], fy[per - 1]);
                return s;
            };
            nc.statistic = [](const RankPath& fx, const RankPath& fy) {
                return fx[1] == fy[1] ? 1.0 : 0.0;
            };
            nc.outer = [target](double s) { return (s - target) * (s - target); };
            nc.outer_prime = [target](double s) { return 2.0 * (s - target); };
            nc.outer_convex = true;
            EquilibriumSolution sol = solve_equilibrium_nonlinear(mu, nu, nc);
            oracle::DefinitionalSolver ref(mu, nu, nc, 2001);
            worst_nonlinear = std::max(worst_nonlinear, std::abs(sol.value - ref.solve()));
            g_solutions.push_back({sol.plan, mu, nu, nc});
        }
        {
            std::vector<Mat> stage = random_stage_costs(rng, 2, 2, 2);
            FdivCost fc;
            fc.kind = kinds[i % 4];
            fc.path_cost = [stage](const RankPath& fx, const RankPath& fy) {
                double s = 0.0;
                for (int per = 1; per <= 2; ++per)
                    s += std::pow(0.9, per) * stage[per - 1](fx[per - 1], fy[per - 1]);
                return s;
            };
            EquilibriumSolution sol = solve_equilibrium_fdiv(mu, nu, fc);
            oracle::DefinitionalSolver ref(mu, nu, fc, 2001);
            worst_fdiv = std::max(worst_fdiv, std::abs(sol.value - ref.solve()));
            g_solutions.push_back({sol.plan, mu, nu, fc});
        }
    }
    double secs = elapsed_s(t0);
    bool ok = worst_state <= 1e-5 && worst_nonlinear <= 1e-5 && worst_fdiv <= 1e-5 &&
              secs < 120.0;
    return {ok, "25x3 instances, residuals state " + fmt(worst_state) + " nonlinear " +
                    fmt(worst_nonlinear) + " f-div " + fmt(worst_fdiv) + ", " + fmt(secs) + "s"};
}

// Two-period process whose optimal time-0 plan relies on a time-1 kernel
// nobody would follow: globally optimal, not an equilibrium.
StoredSolution precommitment_instance() {
    StoredSolution s;
    FiniteProcess p;
    p.n_states = 2;
    p.horizon = 2;
    p.initial = {0.5, 0.5};
    p.kernel = Mat(2, 2);
    p.kernel(0, 0) = 0.9;
    p.kernel(0, 1) = 0.1;
    p.kernel(1, 0) = 0.1;
    p.kernel(1, 1) = 0.9;
    p.state_values = FiniteProcess::default_values(2);
    s.mu = p;
    s.nu = p;

    NonlinearCost nc;
    nc.path_cost = [](const RankPath&, const RankPath&) { return 0.0; };
    nc.statistic = [](const RankPath& fx, const RankPath& fy) {
        return fx[1] == fy[1] ? 1.0 : 0.0;
    };
    nc.outer = [](double v) { return (v - 0.5) * (v - 0.5); };
    nc.outer_prime = [](double v) { return 2.0 * (v - 0.5); };
    nc.outer_convex = true;
    s.model = nc;

    KernelPlan plan;
    plan.mode = HistoryMode::full;
    plan.horizon = 2;
    plan.initial.row_marginal = {0.5, 0.5};
    plan.initial.col_marginal = {0.5, 0.5};
    plan.initial.plan = Mat(2, 2);
    plan.initial.plan(0, 0) = 3.0 / 16.0;
    plan.initial.plan(0, 1) = 5.0 / 16.0;
    plan.initial.plan(1, 0) = 5.0 / 16.0;
    plan.initial.plan(1, 1) = 3.0 / 16.0;
    plan.steps.resize(1);
    auto put = [&](int a, int b, const Mat& m) {
        Coupling c;
        c.plan = m;
        c.row_marginal = {p.kernel(a, 0), p.kernel(a, 1)};
        c.col_marginal = {p.kernel(b, 0), p.kernel(b, 1)};
        plan.steps[0][make_history(plan.mode, {a}, {b})] = c;
    };
    Mat diag_hi(2, 2), diag_lo(2, 2), cross(2, 2), cross_t(2, 2);
    diag_hi(0, 0) = 0.9;
    diag_hi(1, 1) = 0.1;
    diag_lo(0, 0) = 0.1;
    diag_lo(1, 1) = 0.9;
    cross(0, 0) = 0.1;
    cross(0, 1) = 0.8;
    cross(1, 1) = 0.1;
    cross_t(0, 0) = 0.1;
    cross_t(1, 0) = 0.8;
    cross_t(1, 1) = 0.1;
    put(0, 0, diag_hi);
    put(1, 1, diag_lo);
    put(0, 1, cross);
    put(1, 0, cross_t);
    s.plan = plan;
    return s;
}

std::pair<bool, std::string> criterion3() {
    size_t clean = 0, flagged = 0;
    for (const auto& s : g_solutions) {
        auto devs = verify_equilibrium(s.plan, s.mu, s.nu, s.model, 1e-7, 50, 99);
        if (devs.empty()) ++clean;
        else flagged += devs.size();
    }
    StoredSolution pre = precommitment_instance();
    auto devs = verify_equilibrium(pre.plan, pre.mu, pre.nu, pre.model, 1e-7, 50, 99);
    bool ok = flagged == 0 && clean == g_solutions.size() && !devs.empty();
    return {ok, std::to_string(clean) + "/" + std::to_string(g_solutions.size()) +
                    " solver outputs deviation-free, counterexample flagged " +
                    std::to_string(devs.size()) + " deviation(s) of " +
                    (devs.empty() ? std::string("-") : fmt(devs[0].improvement))};
}

// Time-consistent KL control value: plain backward induction where each step
// pays the one-step relative entropy against the product of kernel rows.
double kl_dpp_value(const FiniteProcess& mu, const FiniteProcess& nu,
                    const std::function<double(const RankPath&, const RankPath&)>& cost) {
    int T = mu.horizon;
    std::map<std::pair<RankPath, RankPath>, double> memo;
    std::function<double(const RankPath&, const RankPath&)> W = [&](const RankPath& x,
                                                                    const RankPath& y) {
        int t = static_cast<int>(x.size());
        if (t == T) return cost(x, y);
        auto key = std::make_pair(x, y);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        std::vector<double> row(2), col(2);
        for (int j = 0; j < 2; ++j) {
            row[j] = t == 0 ? mu.initial[j] : mu.kernel(x.back(), j);
            col[j] = t == 0 ? nu.initial[j] : nu.kernel(y.back(), j);
        }
        auto value_at = [&](double th) {
            Mat g = oracle::coupling_2x2(row, col, th);
            double s = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    double p = g(a, b);
                    if (p <= 0.0) continue;
                    RankPath x2 = x, y2 = y;
                    x2.push_back(a);
                    y2.push_back(b);
                    s += p * std::log(p / (row[a] * col[b])) + p * W(x2, y2);
                }
            return s;
        };
        auto [lo, hi] = oracle::theta_bounds(row, col);
        double best = std::numeric_limits<double>::infinity(), best_th = lo;
        for (int k = 0; k < 2001; ++k) {
            double th = lo + (hi - lo) * k / 2000.0;
            double v = value_at(th);
            if (v < best) {
                best = v;
                best_th = th;
            }
        }
        double span = (hi - lo) / 2000.0;
        double gl = std::max(lo, best_th - span), gh = std::min(hi, best_th + span);
        for (int k = 0; k < 200; ++k) {
            double m1 = gl + (gh - gl) / 3.0, m2 = gh - (gh - gl) / 3.0;
            if (value_at(m1) <= value_at(m2)) gh = m2;
            else gl = m1;
        }
        double v = std::min(best, value_at(0.5 * (gl + gh)));
        memo[key] = v;
        return v;
    };
    return W({}, {});
}

std::pair<bool, std::string> criterion4() {
    Rng rng(4004);
    double worst_kl = 0.0;
    for (int i = 0; i < 20; ++i) {
        int n = 2 + rng.uniform_int(2);
        int T = 2 + i % 2;
        FiniteProcess mu = oracle::random_process(rng, n, T);
        FiniteProcess nu = oracle::random_process(rng, n, T);
        std::vector<Mat> costs = random_stage_costs(rng, T, n, n);
        BicausalSolution sol = solve_bicausal_linear(mu, nu, costs, 0.9);
        worst_kl = std::max(worst_kl, chain_rule_gap(sol.plan, mu, nu, DivergenceKind::KL));
    }

    FiniteProcess chain;
    chain.n_states = 2;
    chain.horizon = 2;
    chain.initial = {0.5, 0.5};
    chain.kernel = Mat(2, 2);
    chain.kernel(0, 0) = 0.7;
    chain.kernel(0, 1) = 0.3;
    chain.kernel(1, 0) = 0.4;
    chain.kernel(1, 1) = 0.6;
    chain.state_values = FiniteProcess::default_values(2);
    KernelPlan diag;
    diag.mode = HistoryMode::markov;
    diag.horizon = 2;
    diag.initial.row_marginal = chain.initial;
    diag.initial.col_marginal = chain.initial;
    diag.initial.plan = Mat(2, 2);
    diag.initial.plan(0, 0) = 0.5;
    diag.initial.plan(1, 1) = 0.5;
    diag.steps.resize(1);
    for (int a = 0; a < 2; ++a) {
        Coupling c;
        c.row_marginal = {chain.kernel(a, 0), chain.kernel(a, 1)};
        c.col_marginal = c.row_marginal;
        c.plan = Mat(2, 2);
        c.plan(0, 0) = c.row_marginal[0];
        c.plan(1, 1) = c.row_marginal[1];
        diag.steps[0][make_history(diag.mode, {a}, {a})] = c;
    }
    double sh_gap = chain_rule_gap(diag, chain, chain, DivergenceKind::SquaredHellinger);

    Rng rng2(4414);
    FiniteProcess mu = oracle::random_process(rng2, 2, 2);
    FiniteProcess nu = oracle::random_process(rng2, 2, 2);
    FdivCost fc;
    fc.kind = DivergenceKind::KL;
    fc.path_cost = [&mu, &nu](const RankPath& fx, const RankPath& fy) {
        double s = 0.0;
        for (int per = 1; per <= 2; ++per)
            s += std::pow(0.9, per) *
                 std::abs(mu.state_values[fx[per - 1]] - nu.state_values[fy[per - 1]]);
        return s;
    };
    EquilibriumSolution sol = solve_equilibrium_fdiv(mu, nu, fc);
    PathMeasure joint = concatenate(sol.plan, mu, nu);
    double total = 0.0;
    for (const auto& atom : joint.atoms) {
        double q = path_probability(mu, atom.x) * path_probability(nu, atom.y);
        total += atom.weight * fc.path_cost(atom.x, atom.y) +
                 atom.weight * std::log(atom.weight / q);
    }
    double dpp = kl_dpp_value(mu, nu, fc.path_cost);
    double total_gap = std::abs(total - sol.value);
    double dpp_gap = std::abs(dpp - sol.value);

    bool ok = worst_kl <= 1e-10 && sh_gap > 1e-4 && total_gap <= 1e-7 && dpp_gap <= 1e-7;
    return {ok, "KL chain gap " + fmt(worst_kl) + ", Hellinger gap " + fmt(sh_gap) +
                    ", objective vs recursion " + fmt(total_gap) + ", vs classic DPP " +
                    fmt(dpp_gap)};
}

std::pair<bool, std::string> criterion5() {
    auto t0 = Clock::now();
    FiniteProcess mu = neighbor_chain(6, 5, 0.7);
    SweepSettings s;
    s.grid = default_alpha_grid(-1.5, 1.5, 0.06);
    s.tau = 0.0;
    s.delta = 0.9;
    s.K = 500;
    s.bootstrap = 500;
    s.threads = 4;
    AlphaReport rep = run_benchmark_and_raw(mu, mu, s, nullptr, 10, 555);
    double mean_abs = 0.0;
    for (double a : rep.benchmark_per_seed) mean_abs += std::abs(a);
    mean_abs /= static_cast<double>(rep.benchmark_per_seed.size());
    double secs = elapsed_s(t0);
    return {mean_abs <= 0.12 && secs < 300.0,
            "mean |benchmark alpha| " + fmt(mean_abs) + " over 10 seeds, " + fmt(secs) + "s"};
}

std::pair<bool, std::string> criterion6() {
    auto t0 = Clock::now();
    FiniteProcess mu = two_level(0.7, 17);
    FiniteProcess nu = two_level(0.8, 17);
    InertiaSpec spec{0.9, 1.0, 0.9, 6};
    KernelPlan plan =
        solve_equilibrium_state(mu, nu, build_state_cost(spec, mu.horizon), HistoryMode::markov)
            .plan;
    SweepSettings s;
    s.grid = default_alpha_grid(-1.5, 1.5, 0.06);
    s.tau = 1.0;
    s.delta = 0.9;
    s.K = 500;
    s.threads = 4;
    std::vector<double> recovered;
    for (int seed = 0; seed < 10; ++seed) {
        PathMeasure pi_r =
            sample_plan_measure(plan, mu, nu, 500, mix_seed(666, static_cast<std::uint64_t>(seed)));
        CalibrationCurve curve = sweep_alpha(mu, nu, s, pi_r);
        select_alpha(curve);
        recovered.push_back(curve.optimum);
    }
    std::sort(recovered.begin(), recovered.end());
    double median = 0.5 * (recovered[4] + recovered[5]);
    double secs = elapsed_s(t0);
    return {std::abs(median - 0.9) <= 0.18 && secs < 600.0,
            "median recovered alpha " + fmt(median) + " (true 0.9), " + fmt(secs) + "s"};
}

std::pair<bool, std::string> criterion7() {
    Rng rng(7007);
    double worst_feas = 0.0, worst_norm = 0.0;
    int cases = 0;
    auto note_measure = [&](const PathMeasure& m) {
        worst_norm = std::max(worst_norm, std::abs(m.total_weight() - 1.0));
    };
    auto note_plan = [&](const KernelPlan& plan, const FiniteProcess& mu,
                         const FiniteProcess& nu) {
        for (const auto& v : check_bicausal(plan, mu, nu, 0.0))
            worst_feas = std::max(worst_feas, v.violation);
    };
    while (cases < 1000) {
        int which = cases % 7;
        int n = 2 + rng.uniform_int(3);
        int m = 2 + rng.uniform_int(3);
        std::vector<double> r = oracle::random_simplex(rng, n);
        std::vector<double> c = oracle::random_simplex(rng, m);
        if (which == 0) {
            Mat cost(n, m);
            for (double& v : cost.a) v = rng.uniform();
            worst_feas = std::max(worst_feas,
                                  solve_linear_ot(r, c, cost).coupling.feasibility_violation());
        } else if (which == 1) {
            worst_feas =
                std::max(worst_feas, random_vertex_coupling(r, c, rng).feasibility_violation());
        } else if (which == 2) {
            worst_feas =
                std::max(worst_feas, independent_coupling(r, c).feasibility_violation());
        } else if (which == 3) {
            CompositeObjective obj;
            obj.linear = Mat(n, m);
            for (double& v : obj.linear.a) v = rng.uniform();
            obj.has_fdiv = true;
            obj.fdiv_kind = DivergenceKind::KL;
            obj.fdiv.assign(n * m, {});
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j)
                    obj.fdiv[i * m + j].push_back({1.0 / (r[i] * c[j]), r[i] * c[j]});
            worst_feas = std::max(
                worst_feas,
                solve_composite_ot(r, c, obj, 1e-6).coupling.feasibility_violation());
        } else if (which == 4) {
            int T = 2 + rng.uniform_int(2);
            FiniteProcess mu = oracle::random_process(rng, n, T);
            FiniteProcess nu = oracle::random_process(rng, m, T);
            BicausalSolution sol =
                solve_bicausal_linear(mu, nu, random_stage_costs(rng, T, n, m), 0.9);
            note_plan(sol.plan, mu, nu);
            TopKResult top = top_k_paths(sol.plan, mu, nu, 10);
            note_measure(top.measure);
        } else if (which == 5) {
            FiniteProcess mu = oracle::random_process(rng, n, 2);
            FiniteProcess nu = oracle::random_process(rng, n, 2);
            InertiaSpec spec{rng.uniform() * 2.0 - 1.0, 0.0, 0.9, n};
            EquilibriumSolution sol = solve_equilibrium_state(
                mu, nu, build_state_cost(spec, mu.horizon), HistoryMode::markov);
            note_plan(sol.plan, mu, nu);
            worst_feas = std::max(worst_feas, sol.plan.initial.feasibility_violation());
        } else {
            FiniteProcess mu = oracle::random_process(rng, n, 3);
            note_measure(synth_perfect_paths(mu, 40, rng.next_u64()));
            std::vector<RankPath> paths;
            for (int k = 0; k < 30; ++k) paths.push_back(simulate_path(mu, rng));
            FiniteProcess est = estimate_process(paths, n);
            worst_feas = std::max(worst_feas, std::abs(vec_sum(est.initial) - 1.0));
            for (int i = 0; i < n; ++i) {
                double rs = 0.0;
                for (int j = 0; j < n; ++j) rs += est.kernel(i, j);
                worst_feas = std::max(worst_feas, std::abs(rs - 1.0));
            }
        }
        ++cases;
    }
    bool ok = worst_feas <= 1e-9 && worst_norm <= 1e-9;
    return {ok, "1000 cases, worst marginal violation " + fmt(worst_feas) +
                    ", worst normalization error " + fmt(worst_norm)};
}

std::pair<bool, std::string> criterion8() {
    Rng rng(8008);
    double worst_vs_qp = 0.0, worst_mean = 0.0, worst_tv = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        int n = 2 + rng.uniform_int(49);
        std::vector<double> y(n);
        for (double& v : y) v = rng.uniform() * 8.0 - 4.0;
        double lambda = rep % 4 == 0 ? 0.02 : rng.uniform() * 3.0;
        std::vector<double> fast = tv_denoise(y, lambda);
        std::vector<double> ref = oracle::tv_denoise_qp(y, lambda);
        for (int i = 0; i < n; ++i)
            worst_vs_qp = std::max(worst_vs_qp, std::abs(fast[i] - ref[i]));
        double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
        double mf = std::accumulate(fast.begin(), fast.end(), 0.0) / n;
        worst_mean = std::max(worst_mean, std::abs(my - mf));
        worst_tv = std::max(worst_tv, total_variation(fast) - total_variation(y));
    }
    bool ok = worst_vs_qp <= 1e-8 && worst_mean <= 1e-10 && worst_tv <= 1e-10;
    return {ok, "100 signals, max gap vs QP " + fmt(worst_vs_qp) + ", mean drift " +
                    fmt(worst_mean) + ", TV increase " + fmt(worst_tv)};
}

std::pair<bool, std::string> criterion9() {
    int exact_misses = 0;
    long long perms = 0;
    for (int n = 3; n <= 5; ++n) {
        std::vector<double> x(n), y(n);
        std::iota(x.begin(), x.end(), 1.0);
        y = x;
        do {
            RankCorr rc = rank_correlations(x, y);
            long long d2 = 0, con = 0, dis = 0;
            for (int i = 0; i < n; ++i) {
                long long d = static_cast<long long>(x[i]) - static_cast<long long>(y[i]);
                d2 += d * d;
                for (int j = i + 1; j < n; ++j) {
                    double prod = (x[i] - x[j]) * (y[i] - y[j]);
                    if (prod > 0) ++con;
                    else ++dis;
                }
            }
            double rho = 1.0 - 6.0 * static_cast<double>(d2) /
                                   (static_cast<double>(n) * (static_cast<double>(n) * n - 1.0));
            long long n0 = static_cast<long long>(n) * (n - 1) / 2;
            double tau = static_cast<double>(con - dis) / static_cast<double>(n0);
            if (rc.spearman != rho || rc.kendall != tau) ++exact_misses;
            ++perms;
        } while (std::next_permutation(y.begin(), y.end()));
    }

    Rng rng(9009);
    double worst_tied = 0.0;
    int done = 0;
    while (done < 100) {
        int n = 3 + rng.uniform_int(28);
        std::vector<double> x(n), y(n);
        for (double& v : x) v = static_cast<double>(rng.uniform_int(5));
        for (double& v : y) v = static_cast<double>(rng.uniform_int(5));
        auto varies = [](const std::vector<double>& v) {
            return std::any_of(v.begin(), v.end(), [&](double w) { return w != v[0]; });
        };
        if (!varies(x) || !varies(y)) continue;
        RankCorr rc = rank_correlations(x, y);
        auto [sp, kd] = oracle::naive_rank_corr(x, y);
        worst_tied = std::max({worst_tied, std::abs(rc.spearman - sp), std::abs(rc.kendall - kd)});
        ++done;
    }
    bool ok = exact_misses == 0 && worst_tied <= 1e-12;
    return {ok, std::to_string(perms) + " permutations exact, tied-vector gap " + fmt(worst_tied)};
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[fs::relative(entry.path(), root).string()] = ss.str();
    }
    return out;
}

std::pair<bool, std::string> criterion10() {
    fs::path base = fs::path("acceptance_out") / "determinism";
    fs::remove_all(base);
    fs::create_directories(base);

    std::ostringstream panel;
    panel << "entity_id,period,size_value,wage_value\n";
    for (int e = 0; e < 8; ++e)
        for (int p = 1; p <= 3; ++p) {
            double size = 100.0 + 10.0 * e + 3.0 * ((e + p) % 5);
            double wage = 50.0 + 8.0 * ((2 * e + p) % 7) + e;
            panel << "ent" << e << "," << p << "," << size << "," << wage << "\n";
        }
    fs::path panel_file = base / "panel.csv";
    write_text_file(panel_file.string(), panel.str());
    fs::path cfg_file = base / "run.cfg";
    write_text_file(cfg_file.string(),
                    "preset = executive\n"
                    "n_clusters = 2\n"
                    "grid_min = -0.12\n"
                    "grid_max = 0.12\n"
                    "grid_step = 0.06\n"
                    "K = 80\n"
                    "bootstrap = 30\n"
                    "seeds = 2\n"
                    "base_seed = 4242\n");

    auto run_cli = [&](const std::string& out_dir, int threads) {
        std::ostringstream cmd;
        cmd << '"' << BCOT_CLI_PATH << '"' << " calibrate --panel " << panel_file.string()
            << " --out " << (base / out_dir).string() << " --config " << cfg_file.string()
            << " --threads " << threads << " > " << (base / (out_dir + ".log")).string()
            << " 2>&1";
        return std::system(cmd.str().c_str());
    };
    if (run_cli("r1", 1) != 0) return {false, "first calibrate run failed"};
    if (run_cli("r2", 1) != 0) return {false, "second calibrate run failed"};
    if (run_cli("r4", 4) != 0) return {false, "threaded calibrate run failed"};

    auto t1 = read_tree(base / "r1");
    auto t2 = read_tree(base / "r2");
    auto t4 = read_tree(base / "r4");
    if (t1.empty()) return {false, "calibrate produced no output files"};
    bool rerun_same = t1 == t2, threads_same = t1 == t4;
    return {rerun_same && threads_same,
            std::to_string(t1.size()) + " files, rerun identical: " +
                (rerun_same ? "yes" : "no") + ", threads 1 vs 4 identical: " +
                (threads_same ? "yes" : "no")};
}

struct AcademicRun {
    RankCorr pooled;
    double raw_alpha = 0.0;
};

AcademicRun academic_run(const std::vector<PanelRecord>& recs) {
    AcademicRun out;
    out.pooled = efficiency_coefficient(recs);
    ClusterOptions opt;
    opt.method = ClusterMethod::even;
    opt.higher_better = false;
    PanelClusters clusters = cluster_panel(recs, 6, opt);
    PanelPaths paths = build_panel_paths(recs, clusters);
    PathMeasure pi_r = paths_to_measure(paths, 6);
    FiniteProcess mu = estimate_process(paths.xs, 6);
    FiniteProcess nu = estimate_process(paths.ys, 6);
    SweepSettings s;
    s.grid = default_alpha_grid(-1.5, 1.5, 0.06);
    s.tau = 1.0;
    s.delta = 0.9;
    s.K = 500;
    s.bootstrap = 200;
    s.threads = 4;
    AlphaReport rep = run_benchmark_and_raw(mu, nu, s, &pi_r, 3, 2024);
    out.raw_alpha = rep.raw_alpha;
    return out;
}

void criterion11() {
    const char* dir = std::getenv("BCOT_ACADEMIC_DATA");
    if (!dir) {
        std::cout << "criterion 11: SKIP (set BCOT_ACADEMIC_DATA to the academic csv directory)"
                  << std::endl;
        return;
    }
    try {
        fs::path root(dir);
        std::vector<PanelRecord> faculty, postdoc;
        if (fs::exists(root / "faculty.csv") && fs::exists(root / "postdoc.csv")) {
            faculty = read_panel_csv((root / "faculty.csv").string());
            postdoc = read_panel_csv((root / "postdoc.csv").string());
        } else if (fs::exists(root / "academic.csv")) {
            auto all = read_panel_csv((root / "academic.csv").string());
            for (const auto& r : all) {
                std::string s = r.sector;
                std::transform(s.begin(), s.end(), s.begin(),
                               [](unsigned char ch) { return std::tolower(ch); });
                (s.find("postdoc") != std::string::npos ? postdoc : faculty).push_back(r);
            }
        } else {
            report(11, false, "BCOT_ACADEMIC_DATA set but no faculty/postdoc or academic csv");
            return;
        }
        AcademicRun fac = academic_run(faculty);
        AcademicRun post = academic_run(postdoc);
        bool corr_ok = std::abs(fac.pooled.spearman - 0.78) <= 0.01 &&
                       std::abs(fac.pooled.kendall - 0.616) <= 0.01;
        bool order_ok = post.raw_alpha > fac.raw_alpha;
        report(11, corr_ok && order_ok,
               "faculty spearman " + fmt(fac.pooled.spearman) + " kendall " +
                   fmt(fac.pooled.kendall) + ", raw alpha faculty " + fmt(fac.raw_alpha) +
                   " vs postdoc " + fmt(post.raw_alpha));
    } catch (const std::exception& e) {
        report(11, false, std::string("exception: ") + e.what());
    }
}

}  // namespace

int main() {
    run(1, criterion1);
    run(2, criterion2);
    run(3, criterion3);
    run(4, criterion4);
    run(5, criterion5);
    run(6, criterion6);
    run(7, criterion7);
    run(8, criterion8);
    run(9, criterion9);
    run(10, criterion10);
    criterion11();
    return g_failures == 0 ? 0 : 1;
}