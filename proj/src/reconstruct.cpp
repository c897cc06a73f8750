#include "ballistic/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ballistic/parallel.hpp"

namespace ballistic {

namespace {

void check_E(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E) {
    if (static_cast<int>(E.size()) != tg.steps()) throw DimensionError("E must have one field per time step");
    for (const auto& e : E) inst.check_vector(e);
}

// Backward running sums S_k = sum_{j >= k} P E_j, k = 0..N_t (S_N = 0).
FieldSeries tail_sums(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E) {
    check_E(inst, tg, E);
    const int N = tg.steps();
    FieldSeries PE(static_cast<std::size_t>(N));
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t k) { PE[k] = inst.P(E[k]); });
    FieldSeries S(static_cast<std::size_t>(N) + 1, VectorFieldd(inst.space, inst.n));
    for (int k = N - 1; k >= 0; --k) S[k] = S[k + 1] + PE[k];
    return S;
}

double min_eig(const PointMatrix<double>& g) {
    if (g.rows() == 1) return g(0, 0);
    Eigen::SelfAdjointEigenSolver<PointMatrix<double>> es(g, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

// -2 P[L* v . v] with the products dealiased on grids.
VectorFieldd nonlinear_term(const OperatorInstance& inst, const VectorFieldd& v) { return euler_rhs(inst, v); }

}  // namespace

FieldSeries generalized_solution(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E) {
    const FieldSeries S = tail_sums(inst, tg, E);
    FieldSeries v(static_cast<std::size_t>(tg.steps()));
    for (int k = 0; k < tg.steps(); ++k) v[k] = (-tg.dt() / (tg.horizon() - tg.node(k))) * S[k];
    return v;
}

VectorFieldd generalized_solution_at(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E, int k) {
    if (k < 0 || k >= tg.steps()) throw ParameterError("generalized solution is defined on t_k < T only");
    return generalized_solution(inst, tg, E)[static_cast<std::size_t>(k)];
}

FieldSeries generalized_solution_midpoint(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E) {
    const FieldSeries S = tail_sums(inst, tg, E);
    FieldSeries v(static_cast<std::size_t>(tg.steps()));
    for (int k = 0; k < tg.steps(); ++k) {
        v[k] = (-tg.dt() / (tg.horizon() - tg.midpoint(k))) * (0.5 * (S[k] + S[k + 1]));
    }
    return v;
}

double b_identity_defect(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E, const FieldSeries& v) {
    if (static_cast<int>(v.size()) != tg.steps()) throw DimensionError("v must have one field per left node");
    const MatrixSeries B = integrate_B_from_E(inst, tg, E);
    std::vector<double> d(v.size());
    parallel_for(v.size(), [&](std::size_t k) {
        const SymMatrixFieldd lhs = (tg.horizon() - tg.node(static_cast<int>(k))) * inst.Lstar(v[k]);
        d[k] = norm(lhs - B[k]) / (1.0 + norm(B[k]));
    });
    return *std::max_element(d.begin(), d.end());
}

ResidualR residual_r(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E) {
    const FieldSeries vbar = generalized_solution_midpoint(inst, tg, E);
    const MatrixSeries B = integrate_B_from_E(inst, tg, E);
    ResidualR out;
    out.r.resize(E.size());
    parallel_for(E.size(), [&](std::size_t k) {
        out.r[k] = vbar[k] + apply(B[k] + B[k + 1], vbar[k]) + E[k];
    });
    out.norm = series_norm(tg, out.r);
    return out;
}

double strong_residual(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& v) {
    if (v.size() < 2) return 0.0;
    if (static_cast<int>(v.size()) > tg.steps() + 1) throw DimensionError("too many time nodes for the grid");
    std::vector<double> terms(v.size() - 1);
    parallel_for(terms.size(), [&](std::size_t k) {
        const VectorFieldd mid = 0.5 * (v[k] + v[k + 1]);
        const VectorFieldd d = (1.0 / tg.dt()) * (v[k + 1] - v[k]) - nonlinear_term(inst, mid);
        const double w = tg.horizon() - tg.node(static_cast<int>(k));
        terms[k] = tg.dt() * w * w * inner_product_vec(d, d);
    });
    return std::sqrt(compensated_sum(std::span<const double>(terms)));
}

double initial_defect(const OperatorInstance& inst, const FieldSeries& v, const VectorFieldd& v0) {
    if (v.empty()) throw DimensionError("empty reconstruction");
    return norm(v.front() - inst.P(v0));
}

BrenierComparison brenier_comparison(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E,
                                     double tol) {
    const FieldSeries vbar = generalized_solution_midpoint(inst, tg, E);
    const MatrixSeries B = integrate_B_from_E(inst, tg, E);
    const Eigen::Index pts = inst.space->points();
    const Eigen::VectorXd& w = inst.space->weights();
    std::vector<double> diff(E.size()), ref(E.size()), admitted(E.size());
    parallel_for(E.size(), [&](std::size_t k) {
        CompensatedSum<double> d, r;
        double count = 0.0;
        for (Eigen::Index i = 0; i < pts; ++i) {
            PointMatrix<double> g = B[k].matrix_at(i) + B[k + 1].matrix_at(i);
            g.diagonal().array() += 1.0;
            if (!(min_eig(g) > tol)) continue;
            const PointVector<double> vb = -g.ldlt().solve(E[k].at(i));
            const PointVector<double> vg = vbar[k].at(i);
            d += w[i] * (vb - vg).squaredNorm();
            r += w[i] * vg.squaredNorm();
            count += 1.0;
        }
        diff[k] = d.value();
        ref[k] = r.value();
        admitted[k] = count;
    });
    BrenierComparison out;
    const double dn = compensated_sum(std::span<const double>(diff));
    const double rn = compensated_sum(std::span<const double>(ref));
    out.relative_difference = std::sqrt(dn) / std::max(std::sqrt(rn), std::numeric_limits<double>::min());
    if (dn == 0.0) out.relative_difference = 0.0;
    out.admitted_fraction = compensated_sum(std::span<const double>(admitted)) /
                            (static_cast<double>(E.size()) * static_cast<double>(pts));
    return out;
}

DiscrepancyReport discrepancy_diagnostics(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& v,
                                          double J, double K0, const StrongOracle* oracle,
                                          const DiscrepancyThresholds& th, bool require_oracle) {
    if (static_cast<int>(v.size()) != tg.steps()) throw DimensionError("v must have one field per left node");
    if (require_oracle && !oracle) throw ParameterError("flags i and iii need a strong-solution oracle");
    const double T = tg.horizon();
    DiscrepancyReport out;

    out.threshold_ii = 1.0 - th.gap;
    if (K0 > 0.0) {
        out.measure_ii = J / (T * K0);
        out.flag_ii = out.measure_ii < out.threshold_ii;
        const double deficit = 1.0 - out.measure_ii;
        out.decisive_ii = deficit >= th.band * th.gap || deficit <= th.gap / th.band;
    } else {
        out.measure_ii = std::numeric_limits<double>::quiet_NaN();
        out.decisive_ii = true;  // K0 = 0 forces J = 0 = T K0
    }

    if (oracle) {
        out.has_oracle = true;
        out.threshold_i = 10.0 * (oracle->tolerance + th.discretization_tolerance);
        out.threshold_iii = th.eigenvalue;
        out.oracle_horizon = oracle->horizon < T ? 0.95 * oracle->horizon : T;
        std::vector<int> nodes;
        for (int k = 0; k < tg.steps(); ++k) {
            if (tg.node(k) < out.oracle_horizon) nodes.push_back(k);
        }
        std::vector<double> dsq(nodes.size()), usq(nodes.size()), lam(nodes.size());
        parallel_for(nodes.size(), [&](std::size_t j) {
            const int k = nodes[j];
            const VectorFieldd u = oracle->evaluate(tg.node(k));
            inst.check_vector(u);
            const VectorFieldd d = v[k] - u;
            dsq[j] = tg.dt() * inner_product_vec(d, d);
            usq[j] = tg.dt() * inner_product_vec(u, u);
            const SymMatrixFieldd b = (T - tg.node(k)) * inst.Lstar(u);
            double lo = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < b.points(); ++i) {
                PointMatrix<double> g = 2.0 * b.matrix_at(i);
                g.diagonal().array() += 1.0;
                lo = std::min(lo, min_eig(g));
            }
            lam[j] = lo;
        });
        const double dn = std::sqrt(compensated_sum(std::span<const double>(dsq)));
        const double un = std::sqrt(compensated_sum(std::span<const double>(usq)));
        out.measure_i = un > 0.0 ? dn / un : dn;
        out.flag_i = out.measure_i > out.threshold_i;
        out.decisive_i = out.measure_i >= th.band * out.threshold_i || out.measure_i <= out.threshold_i / th.band;
        out.measure_iii = lam.empty() ? 1.0 : *std::min_element(lam.begin(), lam.end());
        out.flag_iii = out.measure_iii < out.threshold_iii;
        out.decisive_iii = std::abs(out.measure_iii - out.threshold_iii) >= th.eigenvalue_band;
    }

    std::vector<bool> decided;
    if (out.decisive_ii) decided.push_back(out.flag_ii);
    if (out.has_oracle && out.decisive_i) decided.push_back(out.flag_i);
    if (out.has_oracle && out.decisive_iii) decided.push_back(out.flag_iii);
    out.agree = std::all_of(decided.begin(), decided.end(), [&](bool f) { return f == decided.front(); });
    return out;
}

ReconstructionReport reconstruct(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E,
                                 const VectorFieldd& v0, double J, double K0, const StrongOracle* oracle,
                                 const DiscrepancyThresholds& th) {
    ReconstructionReport rep;
    rep.thresholds = th;
    rep.v = generalized_solution(inst, tg, E);
    for (const auto& vk : rep.v) rep.range_defect = std::max(rep.range_defect, range_defect(inst, vk));
    rep.B_identity_defect = b_identity_defect(inst, tg, E, rep.v);
    rep.residual_r_norm = residual_r(inst, tg, E).norm;
    rep.initial_defect = initial_defect(inst, rep.v, v0);
    const double n0 = norm(inst.P(v0));
    rep.initial_defect_relative = n0 > 0.0 ? rep.initial_defect / n0 : rep.initial_defect;
    rep.strong_residual = strong_residual(inst, tg, rep.v);
    rep.brenier = brenier_comparison(inst, tg, E);
    rep.discrepancy = discrepancy_diagnostics(inst, tg, rep.v, J, K0, oracle, th);
    return rep;
}

}  // namespace ballistic
