#include "ballistic/dual_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ballistic/parallel.hpp"

namespace ballistic {

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ParameterError("time horizon must be positive");
    if (steps < 2) throw ParameterError("time grid needs at least two steps");
}

FieldSeries zero_series(const OperatorInstance& inst, const TimeGrid& tg) {
    return FieldSeries(static_cast<std::size_t>(tg.steps()), VectorFieldd(inst.space, inst.n));
}

double series_inner(const TimeGrid& tg, const FieldSeries& a, const FieldSeries& b) {
    if (a.size() != b.size()) throw DimensionError("series length mismatch");
    CompensatedSum<double> acc;
    for (std::size_t k = 0; k < a.size(); ++k) acc += tg.dt() * inner_product_vec(a[k], b[k]);
    return acc.value();
}

double series_norm(const TimeGrid& tg, const FieldSeries& a) { return std::sqrt(std::max(0.0, series_inner(tg, a, a))); }

void series_axpy(FieldSeries& y, double alpha, const FieldSeries& x) {
    if (y.size() != x.size()) throw DimensionError("series length mismatch");
    for (std::size_t k = 0; k < y.size(); ++k) {
        x[k].check_compatible(y[k]);
        y[k].values() += alpha * x[k].values();
    }
}

FieldSeries series_scaled(const FieldSeries& x, double alpha) {
    FieldSeries out = x;
    for (auto& f : out) f *= alpha;
    return out;
}

namespace {

void check_series(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E) {
    if (static_cast<int>(E.size()) != tg.steps()) throw DimensionError("E must have one field per time step");
    for (const auto& e : E) inst.check_vector(e);
}

// Cholesky-based inverse and log-determinant of a small SPD matrix.
bool spd_inverse(const PointMatrix<double>& g, PointMatrix<double>& inv, double& log_det) {
    const Eigen::Index n = g.rows();
    if (n == 1) {
        if (!(g(0, 0) > 0.0)) return false;
        inv.resize(1, 1);
        inv(0, 0) = 1.0 / g(0, 0);
        log_det = std::log(g(0, 0));
        return true;
    }
    Eigen::LLT<PointMatrix<double>> llt(g);
    if (llt.info() != Eigen::Success) return false;
    log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = llt.matrixLLT()(i, i);
        if (!(d > 0.0)) return false;
        log_det += 2.0 * std::log(d);
    }
    inv = llt.solve(PointMatrix<double>::Identity(n, n));
    return inv.allFinite();
}

double min_eigenvalue(const PointMatrix<double>& g) {
    if (g.rows() == 1) return g(0, 0);
    Eigen::SelfAdjointEigenSolver<PointMatrix<double>> es(g, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

PointMatrix<double> node_matrix(const SymMatrixFieldd& b, Eigen::Index i) {
    PointMatrix<double> g = 2.0 * b.matrix_at(i);
    g.diagonal().array() += 1.0;
    return g;
}

PointMatrix<double> midpoint_matrix(const SymMatrixFieldd& b0, const SymMatrixFieldd& b1, Eigen::Index i) {
    PointMatrix<double> g = b0.matrix_at(i) + b1.matrix_at(i);
    g.diagonal().array() += 1.0;
    return g;
}

double weighted(const DiscreteSpace& space, const Eigen::VectorXd& f) { return weighted_sum<double>(space, f); }

}  // namespace

double range_defect(const OperatorInstance& inst, const VectorFieldd& v) { return norm(inst.P(v) - v); }

MatrixSeries integrate_B_from_E(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E) {
    check_series(inst, tg, E);
    const int N = tg.steps();
    MatrixSeries F(static_cast<std::size_t>(N));
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t k) { F[k] = inst.LstarP(E[k]); });
    MatrixSeries B(static_cast<std::size_t>(N + 1), SymMatrixFieldd(inst.space, inst.n));
    // Running sum from the terminal node, each node scaled once by -dt.
    SymMatrixFieldd acc(inst.space, inst.n);
    for (int k = N - 1; k >= 0; --k) {
        acc += F[static_cast<std::size_t>(k)];
        B[static_cast<std::size_t>(k)] = (-tg.dt()) * acc;
    }
    return B;
}

DualVariables DualVariables::from_E(const OperatorInstance& inst, const TimeGrid& tg, FieldSeries E) {
    MatrixSeries B = integrate_B_from_E(inst, tg, E);
    return DualVariables{tg, std::move(E), std::move(B)};
}

KMinusValue K_minus_pointwise(const PointVector<double>& e, const PointMatrix<double>& G, double tol) {
    if (!(tol > 0.0)) throw ParameterError("K_minus_pointwise: tolerance must be positive");
    if (G.rows() != G.cols() || G.rows() != e.size()) throw DimensionError("K_minus_pointwise: size mismatch");
    const double scale = 1.0 + G.cwiseAbs().maxCoeff();
    if ((G - G.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ParameterError("K_minus_pointwise: G must be symmetric");
    }
    KMinusValue out;
    Eigen::SelfAdjointEigenSolver<PointMatrix<double>> es(G);
    const auto& lam = es.eigenvalues();
    const auto& Q = es.eigenvectors();
    if (lam[0] < -tol) return out;
    const double cut = tol * std::max(lam[lam.size() - 1], 1.0);
    const PointVector<double> c = Q.transpose() * e;
    double outside = 0.0;
    PointVector<double> y = PointVector<double>::Zero(e.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] > cut) {
            y[i] = c[i] / lam[i];
        } else {
            outside += c[i] * c[i];
        }
    }
    if (std::sqrt(outside) > tol * e.norm()) return out;
    out.finite = true;
    out.v_opt = -(Q * y);
    out.value = 0.5 * e.dot(out.v_opt);
    return out;
}

ObjectiveValue objective_J(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0,
                           const FieldSeries& E) {
    check_series(inst, tg, E);
    inst.check_vector(v0);
    ObjectiveValue out;
    VectorFieldd u0 = v0;
    if (range_defect(inst, v0) > 1e-10 * (1.0 + norm(v0))) {
        u0 = inst.P(v0);
        out.v0_projected = true;
    }
    const MatrixSeries B = integrate_B_from_E(inst, tg, E);
    // the cone constraint is imposed at the nodes
    if (feasibility_margin(B) < -1e-10) return out;
    const int N = tg.steps();
    const Eigen::Index pts = inst.space->points();
    out.step_contributions.assign(static_cast<std::size_t>(N), 0.0);
    out.v_opt.assign(static_cast<std::size_t>(N), VectorFieldd(inst.space, inst.n));
    std::vector<char> finite(static_cast<std::size_t>(N), 1);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t k) {
        Eigen::VectorXd kval(pts);
        for (Eigen::Index i = 0; i < pts; ++i) {
            const KMinusValue r = K_minus_pointwise(E[k].at(i), midpoint_matrix(B[k], B[k + 1], i));
            if (!r.finite) {
                finite[k] = 0;
                return;
            }
            kval[i] = r.value;
            out.v_opt[k].set(i, r.v_opt);
        }
        out.step_contributions[k] = tg.dt() * (-inner_product_vec(u0, E[k]) + weighted(*inst.space, kval));
    });
    out.finite = std::all_of(finite.begin(), finite.end(), [](char f) { return f != 0; });
    if (out.finite) out.value = compensated_sum(std::span<const double>(out.step_contributions));
    return out;
}

std::vector<double> node_margins(const MatrixSeries& B) {
    std::vector<double> m(B.size(), 1.0);
    parallel_for(B.size(), [&](std::size_t k) {
        double lo = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < B[k].points(); ++i) lo = std::min(lo, min_eigenvalue(node_matrix(B[k], i)));
        m[k] = lo;
    });
    return m;
}

double feasibility_margin(const MatrixSeries& B) {
    if (B.size() < 2) throw DimensionError("feasibility_margin: empty B series");
    const std::vector<double> m = node_margins(B);
    return *std::min_element(m.begin(), m.end() - 1);
}

BarrierProblem::BarrierProblem(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0)
    : inst_(inst), tg_(tg), v0_(v0) {
    inst_.check_vector(v0_);
}

BarrierProblem::State BarrierProblem::evaluate(const FieldSeries& E, double mu, bool with_margin) const {
    return evaluate(E, integrate_B_from_E(inst_, tg_, E), mu, with_margin);
}

BarrierProblem::State BarrierProblem::evaluate(const FieldSeries& E, MatrixSeries B, double mu,
                                               bool with_margin) const {
    check_series(inst_, tg_, E);
    const int N = tg_.steps();
    const Eigen::Index pts = inst_.space->points();
    const Eigen::Index n = inst_.n;
    State s;
    s.E = E;
    s.B = std::move(B);
    s.v.assign(static_cast<std::size_t>(N), VectorFieldd(inst_.space, n));
    s.gbar_inv.assign(static_cast<std::size_t>(N), SymMatrixFieldd(inst_.space, n));
    s.g_inv.assign(static_cast<std::size_t>(N), SymMatrixFieldd(inst_.space, n));
    std::vector<double> obj(static_cast<std::size_t>(N), 0.0), logdet(static_cast<std::size_t>(N), 0.0);
    std::vector<char> ok(static_cast<std::size_t>(N), 1);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t k) {
        Eigen::VectorXd kval(pts), ld(pts);
        PointMatrix<double> inv;
        for (Eigen::Index i = 0; i < pts; ++i) {
            double l = 0.0, lbar = 0.0;
            if (!spd_inverse(node_matrix(s.B[k], i), inv, l)) {
                ok[k] = 0;
                return;
            }
            s.g_inv[k].set_matrix(i, inv);
            ld[i] = l;
            if (!spd_inverse(midpoint_matrix(s.B[k], s.B[k + 1], i), inv, lbar)) {
                ok[k] = 0;
                return;
            }
            s.gbar_inv[k].set_matrix(i, inv);
            const PointVector<double> e = E[k].at(i);
            const PointVector<double> v = -(inv * e);
            s.v[k].set(i, v);
            kval[i] = 0.5 * e.dot(v);
        }
        obj[k] = tg_.dt() * (-inner_product_vec(v0_, E[k]) + weighted(*inst_.space, kval));
        logdet[k] = tg_.dt() * weighted(*inst_.space, ld);
    });
    s.feasible = std::all_of(ok.begin(), ok.end(), [](char f) { return f != 0; });
    if (!s.feasible) return s;
    s.objective = compensated_sum(std::span<const double>(obj));
    s.log_det_sum = compensated_sum(std::span<const double>(logdet));
    s.value = s.objective + mu * s.log_det_sum;
    if (!std::isfinite(s.value)) s.feasible = false;
    if (with_margin) s.margin = feasibility_margin(s.B);
    return s;
}

FieldSeries BarrierProblem::gradient(const State& s, double mu) const {
    if (!s.feasible) throw InfeasibleError("barrier gradient requested at an infeasible point");
    const int N = tg_.steps();
    const Eigen::Index n = inst_.n;
    // S_k = sum_{m<k} 1/2 v_m v_m^T + 1/4 v_k v_k^T + mu sum_{m<=k} G_m^{-1}
    MatrixSeries S(static_cast<std::size_t>(N), SymMatrixFieldd(inst_.space, n));
    SymMatrixFieldd acc(inst_.space, n);
    for (int k = 0; k < N; ++k) {
        const std::size_t kk = static_cast<std::size_t>(k);
        const SymMatrixFieldd vv = outer(s.v[kk]);
        acc += mu * s.g_inv[kk];
        S[kk] = acc + 0.25 * vv;
        acc += 0.5 * vv;
    }
    FieldSeries g(static_cast<std::size_t>(N));
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t k) {
        g[k] = s.v[k] - v0_ - (2.0 * tg_.dt()) * inst_.PL(S[k]);
    });
    return g;
}

FieldSeries BarrierProblem::hessian_vector(const State& s, double mu, const FieldSeries& d) const {
    if (!s.feasible) throw InfeasibleError("Hessian requested at an infeasible point");
    const int N = tg_.steps();
    const Eigen::Index n = inst_.n;
    const MatrixSeries dB = integrate_B_from_E(inst_, tg_, d);
    FieldSeries dv(static_cast<std::size_t>(N));
    MatrixSeries dGinv(static_cast<std::size_t>(N));
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t k) {
        // dv = -Gbar^{-1}(d + dGbar v), dGbar = dB_k + dB_{k+1}
        const SymMatrixFieldd dgbar = dB[k] + dB[k + 1];
        dv[k] = -apply(s.gbar_inv[k], d[k] + apply(dgbar, s.v[k]));
        // d(G^{-1}) = -G^{-1} (2 dB_k) G^{-1}
        SymMatrixFieldd out(inst_.space, n);
        for (Eigen::Index i = 0; i < inst_.space->points(); ++i) {
            const PointMatrix<double> gi = s.g_inv[k].matrix_at(i);
            out.set_matrix(i, -2.0 * gi * dB[k].matrix_at(i) * gi);
        }
        dGinv[k] = std::move(out);
    });
    MatrixSeries dS(static_cast<std::size_t>(N), SymMatrixFieldd(inst_.space, n));
    SymMatrixFieldd acc(inst_.space, n);
    for (int k = 0; k < N; ++k) {
        const std::size_t kk = static_cast<std::size_t>(k);
        const SymMatrixFieldd cross = symmetric_outer(dv[kk], s.v[kk]);
        acc += mu * dGinv[kk];
        dS[kk] = acc + 0.5 * cross;
        acc += cross;
    }
    FieldSeries h(static_cast<std::size_t>(N));
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t k) { h[k] = dv[k] - (2.0 * tg_.dt()) * inst_.PL(dS[k]); });
    return h;
}

FieldSeries BarrierProblem::precondition(const State& s, const FieldSeries& r) const {
    FieldSeries out(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        const SymMatrixFieldd gbar = 0.5 * (s.B[k] + s.B[k + 1]);
        out[k] = r[k] + 2.0 * apply(gbar, r[k]);
    }
    return out;
}

double BarrierProblem::max_feasible_step(const State& s, const MatrixSeries& dB, double floor, double alpha_cap) const {
    const int N = tg_.steps();
    std::vector<double> cap(static_cast<std::size_t>(N), alpha_cap);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t k) {
        double a = alpha_cap;
        for (Eigen::Index i = 0; i < inst_.space->points(); ++i) {
            PointMatrix<double> c = node_matrix(s.B[k], i);
            c.diagonal().array() -= floor;
            const PointMatrix<double> db = -2.0 * dB[k].matrix_at(i);
            double rho;
            if (c.rows() == 1) {
                if (!(c(0, 0) > 0.0)) {
                    a = 0.0;
                    break;
                }
                rho = db(0, 0) / c(0, 0);
            } else {
                Eigen::LLT<PointMatrix<double>> llt(c);
                if (llt.info() != Eigen::Success) {
                    a = 0.0;
                    break;
                }
                PointMatrix<double> m = llt.matrixL().solve(db);
                m = llt.matrixL().solve(PointMatrix<double>(m.transpose()));
                Eigen::SelfAdjointEigenSolver<PointMatrix<double>> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
                rho = es.eigenvalues()[es.eigenvalues().size() - 1];
            }
            if (rho > 0.0) a = std::min(a, 1.0 / rho);
        }
        cap[k] = a;
    });
    return *std::min_element(cap.begin(), cap.end());
}

BarrierValue barrier_objective(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0,
                               const FieldSeries& E, double mu) {
    if (!(mu > 0.0)) throw ParameterError("barrier parameter must be positive");
    const BarrierProblem problem(inst, tg, v0);
    const BarrierProblem::State s = problem.evaluate(E, mu);
    if (!s.feasible) throw InfeasibleError("barrier_objective needs a strictly feasible E");
    BarrierValue out;
    out.value = s.value;
    out.objective = s.objective;
    out.log_det_sum = s.log_det_sum;
    out.riesz_gradient = problem.gradient(s, mu);
    out.gradient = out.riesz_gradient;
    const Eigen::VectorXd& w = inst.space->weights();
    for (auto& g : out.gradient) {
        for (Eigen::Index c = 0; c < g.components(); ++c) g.component(c) = tg.dt() * g.component(c).cwiseProduct(w);
    }
    return out;
}

}  // namespace ballistic
