#include "ballistic/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

namespace ballistic {

AscentMethod parse_ascent_method(const std::string& name) {
    if (name == "newton_cg" || name == "newton-cg") return AscentMethod::newton_cg;
    if (name == "lbfgs" || name == "quasi-newton" || name == "quasi_newton") return AscentMethod::lbfgs;
    if (name == "momentum" || name == "gradient-ascent-with-momentum") return AscentMethod::momentum;
    throw ParameterError("unknown ascent method '" + name + "'");
}

std::string to_string(AscentMethod m) {
    switch (m) {
        case AscentMethod::newton_cg: return "newton_cg";
        case AscentMethod::lbfgs: return "lbfgs";
        case AscentMethod::momentum: return "momentum";
    }
    return "unknown";
}

void SolverConfig::validate() const {
    if (mu_schedule.empty()) throw ParameterError("barrier schedule must not be empty");
    for (std::size_t i = 0; i < mu_schedule.size(); ++i) {
        if (!(mu_schedule[i] > 0.0)) throw ParameterError("barrier parameters must be positive");
        if (i > 0 && !(mu_schedule[i] < mu_schedule[i - 1])) {
            throw ParameterError("barrier schedule must be strictly decreasing");
        }
    }
    if (max_iterations < 1) throw ParameterError("max_iterations must be positive");
    if (!(gradient_tolerance > 0.0) || !(objective_tolerance > 0.0)) throw ParameterError("tolerances must be positive");
    if (!(backtracking > 0.0 && backtracking < 1.0)) throw ParameterError("backtracking factor must lie in (0, 1)");
    if (!(boundary_keep > 0.0 && boundary_keep < 1.0)) throw ParameterError("boundary fraction must lie in (0, 1)");
    if (memory < 1 || cg_max_iterations < 1) throw ParameterError("memory and CG budget must be positive");
}

FieldSeries initial_guess(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0, double* scale) {
    inst.check_vector(v0);
    const VectorFieldd pv = inst.P(v0);
    FieldSeries zero = zero_series(inst, tg);
    if (norm(pv) == 0.0) {
        if (scale) *scale = 0.0;
        return zero;
    }
    for (double s = 1.0; s >= 1e-6; s *= 0.5) {
        FieldSeries E(static_cast<std::size_t>(tg.steps()), (-s) * pv);
        if (feasibility_margin(integrate_B_from_E(inst, tg, E)) >= 0.5) {
            if (scale) *scale = s;
            return E;
        }
    }
    if (scale) *scale = 0.0;
    return zero;
}

namespace {

using State = BarrierProblem::State;

// Preconditioned CG on -H p = g; returns an ascent direction.
FieldSeries newton_direction(const BarrierProblem& prob, const State& s, double mu, const FieldSeries& g,
                             double forcing, int max_iter, int& iterations) {
    const TimeGrid& tg = prob.grid();
    FieldSeries x = series_scaled(g, 0.0);
    FieldSeries r = g;
    FieldSeries z = prob.precondition(s, r);
    FieldSeries d = z;
    double rz = series_inner(tg, r, z);
    const double stop = forcing * series_norm(tg, g);
    iterations = 0;
    for (int j = 0; j < max_iter; ++j) {
        ++iterations;
        const FieldSeries Ad = series_scaled(prob.hessian_vector(s, mu, d), -1.0);
        const double dAd = series_inner(tg, d, Ad);
        if (!(dAd > 0.0)) {
            if (j == 0) return z;
            break;
        }
        const double a = rz / dAd;
        series_axpy(x, a, d);
        series_axpy(r, -a, Ad);
        if (series_norm(tg, r) <= stop) break;
        z = prob.precondition(s, r);
        const double rz_new = series_inner(tg, r, z);
        FieldSeries dn = z;
        series_axpy(dn, rz_new / rz, d);
        d = std::move(dn);
        rz = rz_new;
    }
    return x;
}

struct CurvaturePair {
    FieldSeries s;
    FieldSeries y;  // difference of -gradient
    double rho;
};

FieldSeries lbfgs_direction(const BarrierProblem& prob, const State& st, const std::deque<CurvaturePair>& mem,
                            const FieldSeries& g) {
    const TimeGrid& tg = prob.grid();
    FieldSeries q = g;
    std::vector<double> alpha(mem.size());
    for (std::size_t i = mem.size(); i-- > 0;) {
        alpha[i] = mem[i].rho * series_inner(tg, mem[i].s, q);
        series_axpy(q, -alpha[i], mem[i].y);
    }
    FieldSeries r = prob.precondition(st, q);
    if (!mem.empty()) {
        const auto& last = mem.back();
        const FieldSeries hy = prob.precondition(st, last.y);
        const double gamma = series_inner(tg, last.s, last.y) / series_inner(tg, last.y, hy);
        if (std::isfinite(gamma) && gamma > 0.0) r = series_scaled(r, gamma);
    }
    for (std::size_t i = 0; i < mem.size(); ++i) {
        const double beta = mem[i].rho * series_inner(tg, mem[i].y, r);
        series_axpy(r, alpha[i] - beta, mem[i].s);
    }
    return r;
}

MatrixSeries shifted(const MatrixSeries& B, double alpha, const MatrixSeries& dB) {
    MatrixSeries out = B;
    for (std::size_t k = 0; k < out.size(); ++k) out[k].values() += alpha * dB[k].values();
    return out;
}

SolveReport base_report(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0, const FieldSeries& E,
                        ObjectiveValue* objective_out) {
    SolveReport rep;
    ObjectiveValue J = objective_J(inst, tg, v0, E);
    rep.J_finite = J.finite;
    rep.J_value = J.finite ? J.value : -std::numeric_limits<double>::infinity();
    rep.v0_projected = J.v0_projected;
    rep.K0 = energy(J.v0_projected ? inst.P(v0) : v0);
    rep.T = tg.horizon();
    rep.gap_ratio = rep.K0 > 0.0 ? rep.J_value / (tg.horizon() * rep.K0) : std::numeric_limits<double>::quiet_NaN();
    rep.feasibility_margin = feasibility_margin(integrate_B_from_E(inst, tg, E));
    if (objective_out) *objective_out = std::move(J);
    return rep;
}

}  // namespace

SolveResult maximize(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0_in, const SolverConfig& cfg) {
    cfg.validate();
    inst.check_vector(v0_in);
    const auto start = std::chrono::steady_clock::now();
    const bool projected = range_defect(inst, v0_in) > 1e-10 * (1.0 + norm(v0_in));
    const VectorFieldd v0 = projected ? inst.P(v0_in) : v0_in;
    const BarrierProblem prob(inst, tg, v0);
    const double scale = std::max(1.0, norm(v0) * std::sqrt(tg.horizon()));

    FieldSeries E = initial_guess(inst, tg, v0);
    std::vector<IterationRecord> trace;
    bool converged = false;
    double final_gn = 0.0;
    int total_iterations = 0;
    const int stages = static_cast<int>(cfg.mu_schedule.size());

    for (int stage = 0; stage < stages; ++stage) {
        const double mu = cfg.mu_schedule[static_cast<std::size_t>(stage)];
        const bool last = stage == stages - 1;
        const double tol = scale * (last ? cfg.gradient_tolerance : std::max(cfg.gradient_tolerance, 0.1 * mu));
        State s = prob.evaluate(E, mu, true);
        if (!s.feasible || !(s.margin > 0.0)) throw InfeasibleError("barrier stage started outside the interior");
        FieldSeries g = prob.gradient(s, mu);
        std::deque<CurvaturePair> memory;
        FieldSeries velocity;
        double step_guess = 1.0;
        int stalls = 0;
        bool stage_done = false;
        for (int it = 0; it < cfg.max_iterations; ++it) {
            const double gn = series_norm(tg, g);
            final_gn = gn;
            if (gn <= tol) {
                stage_done = true;
                break;
            }
            int inner = 0;
            FieldSeries p;
            switch (cfg.method) {
                case AscentMethod::newton_cg:
                    p = newton_direction(prob, s, mu, g, std::min(0.5, std::sqrt(gn / scale)), cfg.cg_max_iterations, inner);
                    break;
                case AscentMethod::lbfgs:
                    p = lbfgs_direction(prob, s, memory, g);
                    break;
                case AscentMethod::momentum:
                    p = prob.precondition(s, g);
                    if (!velocity.empty()) series_axpy(p, cfg.momentum, velocity);
                    break;
            }
            double slope = series_inner(tg, g, p);
            if (!(slope > 0.0)) {
                p = prob.precondition(s, g);
                slope = series_inner(tg, g, p);
                velocity.clear();
                memory.clear();
            }
            const MatrixSeries dB = integrate_B_from_E(inst, tg, p);
            const double alpha_cap = cfg.method == AscentMethod::newton_cg ? 1.0 : std::max(step_guess, 1e-12);
            double alpha = prob.max_feasible_step(s, dB, cfg.boundary_keep * s.margin, alpha_cap);
            State next;
            bool accepted = false;
            while (alpha > 1e-14) {
                FieldSeries En = E;
                series_axpy(En, alpha, p);
                next = prob.evaluate(En, shifted(s.B, alpha, dB), mu);
                const double slack = 1e-12 * std::max(1.0, std::abs(s.value));
                if (next.feasible && next.value >= s.value + cfg.armijo * alpha * slope - slack) {
                    accepted = true;
                    break;
                }
                alpha *= cfg.backtracking;
            }
            if (!accepted) break;
            next.margin = feasibility_margin(next.B);
            FieldSeries gn_next = prob.gradient(next, mu);
            if (cfg.method == AscentMethod::lbfgs) {
                CurvaturePair cp{series_scaled(p, alpha), g, 0.0};
                series_axpy(cp.y, -1.0, gn_next);
                const double sy = series_inner(tg, cp.s, cp.y);
                if (sy > 1e-16 * series_norm(tg, cp.s) * series_norm(tg, cp.y)) {
                    cp.rho = 1.0 / sy;
                    memory.push_back(std::move(cp));
                    if (static_cast<int>(memory.size()) > cfg.memory) memory.pop_front();
                }
            } else if (cfg.method == AscentMethod::momentum) {
                velocity = series_scaled(p, alpha);
            }
            step_guess = std::min(1e6, 2.0 * alpha);
            const double change = next.value - s.value;
            trace.push_back({stage, mu, it, next.value, gn, alpha, next.margin, inner});
            ++total_iterations;
            E = next.E;
            s = std::move(next);
            g = std::move(gn_next);
            if (std::abs(change) <= cfg.objective_tolerance * std::max(1.0, std::abs(s.value))) {
                if (++stalls >= 5) break;
            } else {
                stalls = 0;
            }
        }
        if (last) {
            final_gn = series_norm(tg, g);
            converged = stage_done || final_gn <= tol;
        }
    }

    SolveResult result{DualVariables::from_E(inst, tg, E), {}, {}, {}};
    ObjectiveValue J;
    result.report = base_report(inst, tg, v0, E, &J);
    result.report.v0_projected = projected;
    result.report.iterations = total_iterations;
    result.report.converged = converged;
    result.report.final_gradient_norm = final_gn;
    result.report.final_mu = cfg.mu_schedule.back();
    result.report.method = to_string(cfg.method);
    result.report.trace = std::move(trace);
    result.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.v_opt = std::move(J.v_opt);
    result.step_contributions = std::move(J.step_contributions);
    return result;
}

SolveReport evaluate_candidate(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0,
                               const FieldSeries& E) {
    const auto start = std::chrono::steady_clock::now();
    SolveReport rep = base_report(inst, tg, v0, E, nullptr);
    rep.converged = rep.J_finite;
    rep.method = "evaluate";
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

}  // namespace ballistic
