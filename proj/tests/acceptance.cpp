// Acceptance run: one PASS/FAIL line per criterion, nonzero exit when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ballistic/experiment.hpp"

using namespace ballistic;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ExperimentConfig preset(const std::string& file) {
    ExperimentConfig c = load_config(std::string(BALLISTIC_CONFIG_DIR) + "/" + file);
    c.sweep_values.clear();
    return c;
}

struct Line {
    bool pass;
    std::string detail;
};

std::vector<Line> results(9);

void report(int id, bool pass, const std::string& detail) { results[id] = {pass, detail}; }

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

// relative L2 distance over the left nodes between a field series and u(t_k)
double relative_l2(const TimeGrid& tg, const FieldSeries& v, const std::function<VectorFieldd(double)>& u, int nodes) {
    double d = 0.0, r = 0.0;
    for (int k = 0; k < nodes; ++k) {
        const VectorFieldd uk = u(tg.node(k));
        d += tg.dt() * inner_product_vec(v[k] - uk, v[k] - uk);
        r += tg.dt() * inner_product_vec(uk, uk);
    }
    return std::sqrt(d / r);
}

FieldSeries random_series(const OperatorInstance& inst, const TimeGrid& tg, std::uint64_t seed, double amp) {
    FieldSeries E;
    const int cut = probe_mode_cutoff(*inst.space);
    for (int k = 0; k < tg.steps(); ++k) {
        E.push_back(amp * random_smooth_field(inst.space, inst.n, seed * 131 + static_cast<std::uint64_t>(k), cut));
    }
    return E;
}

std::vector<SolveOutcome> bound_runs;

void criterion_1() {
    const auto t0 = Clock::now();
    ExperimentConfig c = preset("ode_three_atoms.json");
    const SolveOutcome o = solve_experiment(c);
    const double secs = seconds_since(t0);
    const Eigen::VectorXd v0 = o.v0.component(0);
    const Eigen::ArrayXd a = v0.array() / (c.T * v0.array() + 2.0);
    const double closed = weighted_sum<double>(*o.instance.space, (v0.array() - 2.0 * v0.array() / (2.0 + c.T * v0.array())).matrix());
    const double J_err = std::abs(o.result.report.J_value - closed) / std::abs(closed);

    auto u = [&](double t) {
        VectorFieldd f(o.instance.space, 1);
        f.component(0) = (2.0 * v0.array() / (2.0 + t * v0.array())).matrix();
        return f;
    };
    const double v_err = relative_l2(o.grid, o.reconstruction->v, u, o.grid.steps());

    double gd = 0.0, gr = 0.0;
    for (int k = 0; k <= o.grid.steps(); ++k) {
        const Eigen::ArrayXd rho = (a * (o.grid.node(k) - c.T) + 1.0).square();
        const Eigen::ArrayXd G = 1.0 + 2.0 * o.result.dual.B[k].entry(0, 0).array();
        gd += (G - rho).square().sum();
        gr += rho.square().sum();
    }
    const double G_err = std::sqrt(gd / gr);
    const double brenier = o.reconstruction->brenier.relative_difference;

    // pointwise formula -Gbar^{-1} E at the interval midpoints, for reference
    double bd = 0.0, br = 0.0;
    for (int k = 0; k < o.grid.steps(); ++k) {
        const VectorFieldd uk = u(o.grid.midpoint(k));
        const VectorFieldd d = o.result.v_opt[k] - uk;
        bd += inner_product_vec(d, d);
        br += inner_product_vec(uk, uk);
    }
    const bool pass = J_err <= 1e-3 && v_err <= 2e-2 && G_err <= 2e-2 && secs < 10.0;
    report(1, pass,
           "J rel err " + num(J_err) + " (<= 1e-3), time-averaged v rel L2 err " + num(v_err) +
               " (<= 2e-2), I+2B vs rho rel err " + num(G_err) + " (<= 2e-2), " + num(secs) +
               " s; pointwise -G^-1 E vs u rel err " + num(std::sqrt(bd / br)) + ", time average vs pointwise " +
               num(brenier));
}

void criterion_3() {
    std::string detail;
    bool pass = true;
    {
        const auto t0 = Clock::now();
        ExperimentConfig c = preset("taylor_green.json");
        const SpaceHandle g = build_space(c);
        const StrongOracle o = stationary_euler_oracle(g);
        const double lambda = 1.0 / (2.0 * o.horizon);
        c.T = 0.9 / (2.0 * lambda);
        const ConsistencyOutcome r = consistency_experiment(c);
        const double pair_err = std::abs(r.pair.gap_ratio - 1.0);
        const double gap = r.solve->result.report.gap_ratio;
        const double secs = seconds_since(t0);
        bound_runs.push_back(*r.solve);
        const bool ok = pair_err <= 1e-4 && gap >= 1.0 - 5e-3 && secs < 300.0;
        pass = pass && ok;
        detail += "Taylor-Green T=" + num(c.T) + ": pair |J/(T K0)-1| " + num(pair_err) + " (<= 1e-4), solve gap " +
                  num(gap) + " (>= 0.995), " + num(secs) + " s; ";
    }
    {
        const auto t0 = Clock::now();
        ExperimentConfig c = preset("kdv_constant.json");
        const ConsistencyOutcome r = consistency_experiment(c);
        const double pair_err = std::abs(r.pair.gap_ratio - 1.0);
        const double gap = r.solve->result.report.gap_ratio;
        const double secs = seconds_since(t0);
        bound_runs.push_back(*r.solve);
        const bool ok = pair_err <= 1e-6 && gap >= 1.0 - 5e-3 && secs < 300.0;
        pass = pass && ok;
        detail += "constant KdV: pair |J/(T K0)-1| " + num(pair_err) + " (<= 1e-6), solve gap " + num(gap) + ", " +
                  num(secs) + " s";
    }
    report(3, pass, detail);
}

void criterion_4() {
    ExperimentConfig c = preset("burgers_preshock.json");
    const SolveOutcome o = solve_experiment(c);
    bound_runs.push_back(o);
    const StrongOracle u = burgers_characteristics_oracle(o.instance.space, o.v0, c.T);
    const double err = relative_l2(o.grid, o.reconstruction->v, u.evaluate, o.grid.steps());
    const double idef = o.reconstruction->initial_defect;
    const double idef_rel = o.reconstruction->initial_defect_relative;
    report(4, err <= 2e-2 && idef <= 2e-2 && idef_rel <= 2e-2,
           "rel L2 err vs characteristics " + num(err) + " (<= 2e-2), initial_defect " + num(idef) + " (relative " +
               num(idef_rel) + ", <= 2e-2)");
}

void criterion_5() {
    const ExperimentConfig base = load_config(std::string(BALLISTIC_CONFIG_DIR) + "/burgers_sweep.json");
    bool pass = true;
    std::string detail;
    for (double T : {0.2, 0.5, 1.5, 2.0}) {
        ExperimentConfig c = base;
        c.sweep_values.clear();
        c.T = T;
        const SolveOutcome o = solve_experiment(c);
        bound_runs.push_back(o);
        const ReconstructionReport& r = *o.reconstruction;
        const DiscrepancyReport& d = r.discrepancy;
        const double noise = 10.0 * r.thresholds.discretization_tolerance;
        bool ok = d.has_oracle && d.agree;
        if (T <= 0.5) ok = ok && !d.flag_iii;
        if (T >= 1.5) ok = ok && d.flag_iii && (o.result.report.gap_ratio < 1.0 || r.initial_defect_relative > noise);
        pass = pass && ok;
        detail += "T=" + num(T) + " gap " + num(o.result.report.gap_ratio) + (o.result.report.converged ? "" : " (not converged)") +
                  " flags " + (d.flag_i ? "1" : "0") + (d.flag_ii ? "1" : "0") + (d.flag_iii ? "1" : "0") +
                  " idef " + num(r.initial_defect_relative) + (d.agree ? "" : " DISAGREE") + "; ";
    }
    report(5, pass, detail);
}

void criterion_2() {
    for (const char* f : {"ode.json", "taylor_green.json", "mhd_small.json", "euler_random.json", "template_matching.json",
                          "kdv_wave.json"}) {
        bound_runs.push_back(solve_experiment(preset(f)));
    }
    int checked = 0, violations = 0, conservative = 0;
    double worst = -1e300;
    for (const auto& o : bound_runs) {
        if (!o.bound_applies) continue;
        ++conservative;
        const SolveReport& r = o.result.report;
        if (!r.converged) continue;
        ++checked;
        const double excess = r.J_value / (r.T * r.K0) - 1.0;
        worst = std::max(worst, excess);
        if (!(r.J_value <= r.T * r.K0 * (1.0 + 1e-6))) ++violations;
    }
    report(2, violations == 0 && checked > 0,
           std::to_string(checked) + " converged runs out of " + std::to_string(conservative) +
               " conservative runs, violations " + std::to_string(violations) + ", max J/(T K0) - 1 = " + num(worst));
}

void criterion_6() {
    struct Case {
        std::string name;
        SpaceHandle space;
    };
    const std::vector<Case> cases = {{"ode", DiscreteSpace::atoms(5)},
                                     {"burgers1d", DiscreteSpace::torus({64})},
                                     {"euler2d", DiscreteSpace::torus({32, 32})},
                                     {"mhd2d", DiscreteSpace::torus({32, 32})},
                                     {"kdv", DiscreteSpace::torus({64})},
                                     {"template_matching", DiscreteSpace::torus({64})},
                                     {"template_matching", DiscreteSpace::torus({32, 32})}};
    bool pass = true;
    double adj = 0, proj = 0, cons = 0, qI = 0, I = 0;
    std::uint64_t seed = 100;
    for (const auto& c : cases) {
        const OperatorInstance inst = make_instance(c.name, c.space);
        const CheckReport a = check_adjoint(inst, 20, ++seed);
        const CheckReport p = check_projector(inst, 20, ++seed);
        adj = std::max(adj, a.max_defect);
        proj = std::max(proj, p.max_defect);
        pass = pass && a.trials >= 20 && a.max_defect <= 1e-10 && p.max_defect <= 1e-10;
        if (inst.flags.conservative) {
            const CheckReport k = check_conservativity(inst, 20, ++seed);
            cons = std::max(cons, k.max_defect);
            pass = pass && k.max_defect <= 1e-9;
        }
        if (c.name == "euler2d" || c.name == "mhd2d") {
            const CheckReport q = check_PL_identity(inst, PLIdentity::qI, 20, ++seed);
            qI = std::max(qI, q.max_defect);
            pass = pass && q.applicable && q.max_defect <= 1e-10;
        }
        if (c.name == "burgers1d" || c.name == "template_matching" || c.name == "kdv") {
            const CheckReport q = check_PL_identity(inst, PLIdentity::I, 20, ++seed);
            I = std::max(I, q.max_defect);
            pass = pass && q.applicable && q.max_defect <= 1e-10;
        }
    }
    report(6, pass,
           "7 instance/space pairs, 20 trials each: adjoint " + num(adj) + ", projector " + num(proj) +
               ", conservativity " + num(cons) + ", PL(qI) " + num(qI) + ", PL(I) " + num(I));
}

double gradient_fd_error(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0, const FieldSeries& E,
                         double mu, std::uint64_t seed) {
    const BarrierValue bv = barrier_objective(inst, tg, v0, E, mu);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> step(0, tg.steps() - 1);
    std::uniform_int_distribution<Eigen::Index> point(0, inst.space->points() - 1);
    const double h = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int k = step(rng);
        const Eigen::Index i = point(rng);
        FieldSeries Ep = E, Em = E;
        Ep[k].values()(i, 0) += h;
        Em[k].values()(i, 0) -= h;
        const double fd =
            (barrier_objective(inst, tg, v0, Ep, mu).value - barrier_objective(inst, tg, v0, Em, mu).value) / (2 * h);
        const double an = bv.gradient[k].values()(i, 0);
        worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-300));
    }
    return worst;
}

void criterion_7() {
    auto a = DiscreteSpace::atoms(4);
    const OperatorInstance ode = make_ode_instance(a);
    const TimeGrid t1(1.0, 16);
    VectorFieldd v0a(a, 1);
    v0a.component(0) << 1.0, -0.6, 0.3, 2.0;
    const FieldSeries Ea = random_series(ode, t1, 4, 0.3);
    const double ma = feasibility_margin(integrate_B_from_E(ode, t1, Ea));
    const double ea = gradient_fd_error(ode, t1, v0a, Ea, 0.1, 17);

    auto g = DiscreteSpace::torus({32});
    const OperatorInstance b = make_burgers_instance(g);
    const TimeGrid t2(0.5, 16);
    const VectorFieldd v0b = random_smooth_field(g, 1, 9, 4);
    const FieldSeries Eb = random_series(b, t2, 5, 0.3);
    const double mb = feasibility_margin(integrate_B_from_E(b, t2, Eb));
    const double eb = gradient_fd_error(b, t2, v0b, Eb, 0.1, 19);
    report(7, ma > 0.0 && mb > 0.0 && ea <= 1e-6 && eb <= 1e-6,
           "max rel err ODE " + num(ea) + " (margin " + num(ma) + "), Burgers " + num(eb) + " (margin " + num(mb) + ")");
}

void criterion_8() {
    auto g = DiscreteSpace::torus({16});
    const OperatorInstance inst = make_burgers_instance(g);
    const TimeGrid tg(0.5, 8);
    double lin = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const FieldSeries E1 = random_series(inst, tg, 300 + s, 1.0);
        const FieldSeries E2 = random_series(inst, tg, 400 + s, 1.0);
        const double alpha = 0.37 + 0.1 * static_cast<double>(s), beta = -1.3;
        FieldSeries mix = series_scaled(E1, alpha);
        series_axpy(mix, beta, E2);
        const MatrixSeries B1 = integrate_B_from_E(inst, tg, E1), B2 = integrate_B_from_E(inst, tg, E2);
        const MatrixSeries Bm = integrate_B_from_E(inst, tg, mix);
        for (std::size_t k = 0; k < Bm.size(); ++k) {
            const Eigen::MatrixXd d = Bm[k].values() - alpha * B1[k].values() - beta * B2[k].values();
            lin = std::max(lin, d.cwiseAbs().maxCoeff());
        }
    }

    const VectorFieldd v0 = random_smooth_field(g, 1, 1, 3);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    double worst = 0.0;
    int tested = 0;
    for (std::uint64_t pair = 0; pair < 50; ++pair) {
        const FieldSeries E1 = random_series(inst, tg, 1000 + pair, 0.8);
        const FieldSeries E2 = random_series(inst, tg, 2000 + pair, 0.8);
        const ObjectiveValue J1 = objective_J(inst, tg, v0, E1);
        const ObjectiveValue J2 = objective_J(inst, tg, v0, E2);
        if (!J1.finite || !J2.finite) continue;
        const double lam = unif(rng);
        FieldSeries mix = series_scaled(E1, lam);
        series_axpy(mix, 1.0 - lam, E2);
        const ObjectiveValue Jm = objective_J(inst, tg, v0, mix);
        if (!Jm.finite) continue;
        worst = std::max(worst, lam * J1.value + (1 - lam) * J2.value - Jm.value);
        ++tested;
    }
    report(8, lin <= 1e-12 && tested == 50 && worst <= 1e-9,
           "B linearity defect " + num(lin) + " (<= 1e-12), concavity violation " + num(worst) + " over " +
               std::to_string(tested) + " feasible pairs (<= 1e-9)");
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<void()>>> order = {
        {1, criterion_1}, {3, criterion_3}, {4, criterion_4}, {5, criterion_5},
        {2, criterion_2}, {6, criterion_6}, {7, criterion_7}, {8, criterion_8}};
    for (const auto& [id, fn] : order) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(id, false, std::string("exception: ") + e.what());
        }
    }
    int failed = 0;
    for (int id = 1; id <= 8; ++id) {
        std::printf("criterion %d: %s  %s\n", id, results[id].pass ? "PASS" : "FAIL", results[id].detail.c_str());
        if (!results[id].pass) ++failed;
    }
    std::fflush(stdout);
    return failed == 0 ? 0 : 1;
}
