#pragma once

#include <vector>

#include "ballistic/operators.hpp"

namespace ballistic {

/// Uniform time nodes t_k = k T / N_t, k = 0..N_t, with t_{N_t} = T exactly.
class TimeGrid {
public:
    TimeGrid(double horizon, int steps);

    double horizon() const { return horizon_; }
    int steps() const { return steps_; }
    double dt() const { return horizon_ / steps_; }
    double node(int k) const { return k == steps_ ? horizon_ : horizon_ * k / steps_; }
    double midpoint(int k) const { return horizon_ * (k + 0.5) / steps_; }

    bool operator==(const TimeGrid& o) const { return horizon_ == o.horizon_ && steps_ == o.steps_; }

private:
    double horizon_;
    int steps_;
};

using FieldSeries = std::vector<VectorFieldd>;
using MatrixSeries = std::vector<SymMatrixFieldd>;

/// Zero series of N_t vector fields.
FieldSeries zero_series(const OperatorInstance& inst, const TimeGrid& tg);

/// Space-time pairing sum_k dt (a_k, b_k).
double series_inner(const TimeGrid& tg, const FieldSeries& a, const FieldSeries& b);
double series_norm(const TimeGrid& tg, const FieldSeries& a);
/// y += alpha x
void series_axpy(FieldSeries& y, double alpha, const FieldSeries& x);
FieldSeries series_scaled(const FieldSeries& x, double alpha);

/// B_k = -dt sum_{j >= k} (L* P) E_j for k = 0..N_t (N_t + 1 entries, B_{N_t} = 0).
MatrixSeries integrate_B_from_E(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E);

/// Dual unknowns: E on the N_t intervals and the B nodes it determines.
struct DualVariables {
    TimeGrid grid;
    FieldSeries E;
    MatrixSeries B;

    static DualVariables from_E(const OperatorInstance& inst, const TimeGrid& tg, FieldSeries E);
};

struct KMinusValue {
    bool finite = false;  // false encodes -infinity
    double value = 0.0;
    PointVector<double> v_opt;
};

/// K_-(e, G) = -1/2 e^T G^+ e with v_opt = -G^+ e, or -infinity when G has an
/// eigenvalue below -tol or e has a component outside range(G). Eigenvalues above
/// tol * max(lambda_max, 1) span the range.
KMinusValue K_minus_pointwise(const PointVector<double>& e, const PointMatrix<double>& G, double tol = 1e-10);

struct ObjectiveValue {
    bool finite = false;
    double value = 0.0;
    std::vector<double> step_contributions;  // dt [-(v0, E_k) + (1, K_-)] per interval
    FieldSeries v_opt;                       // pointwise maximizers -Gbar_k^+ E_k
    bool v0_projected = false;               // v0 was outside range(P) and got projected
};

/// Discrete dual objective. Interval k pairs E_k with the midpoint matrix
/// Gbar_k = I + B_k + B_{k+1}.
ObjectiveValue objective_J(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0,
                           const FieldSeries& E);

/// min over nodes k < N_t and points of lambda_min(I + 2 B_k).
double feasibility_margin(const MatrixSeries& B);
/// Per-node version, N_t + 1 entries (the last is always 1).
std::vector<double> node_margins(const MatrixSeries& B);

/// objective_J + mu sum_k dt (1, log det(I + 2 B_k)) for strictly feasible E.
/// `gradient` holds the coordinate partials d value / d E_k(i); `riesz_gradient`
/// the same derivative represented in the space-time pairing.
struct BarrierValue {
    double value = 0.0;
    double objective = 0.0;
    double log_det_sum = 0.0;
    FieldSeries gradient;
    FieldSeries riesz_gradient;
};

BarrierValue barrier_objective(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0,
                               const FieldSeries& E, double mu);

/// Barrier-smoothed dual problem with cached pointwise factorizations, used by
/// the solver for values, gradients and Hessian-vector products.
class BarrierProblem {
public:
    struct State {
        bool feasible = false;
        double value = 0.0;
        double objective = 0.0;
        double log_det_sum = 0.0;
        FieldSeries E;
        MatrixSeries B;
        FieldSeries v;            // -Gbar_k^{-1} E_k
        MatrixSeries gbar_inv;    // (I + B_k + B_{k+1})^{-1}
        MatrixSeries g_inv;       // (I + 2 B_k)^{-1}
        double margin = 0.0;
    };

    BarrierProblem(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0);

    const OperatorInstance& instance() const { return inst_; }
    const TimeGrid& grid() const { return tg_; }
    const VectorFieldd& v0() const { return v0_; }

    /// Evaluates at E; infeasible points return feasible == false without throwing.
    State evaluate(const FieldSeries& E, double mu, bool with_margin = false) const;
    /// Same, reusing a precomputed B = integrate_B_from_E(E).
    State evaluate(const FieldSeries& E, MatrixSeries B, double mu, bool with_margin = false) const;

    /// Riesz gradient g_k = v_k - v0 - 2 dt PL(S_k).
    FieldSeries gradient(const State& s, double mu) const;
    /// Hessian applied to d, in the same representation as gradient().
    FieldSeries hessian_vector(const State& s, double mu, const FieldSeries& d) const;
    /// Pointwise preconditioner for -H: r -> Gbar_k r.
    FieldSeries precondition(const State& s, const FieldSeries& r) const;

    /// Largest alpha <= alpha_cap with lambda_min(I + 2(B_k + alpha dB_k)) >= floor at every node.
    double max_feasible_step(const State& s, const MatrixSeries& dB, double floor, double alpha_cap) const;

private:
    OperatorInstance inst_;
    TimeGrid tg_;
    VectorFieldd v0_;
};

/// Orthogonal projection defect ||P v0 - v0||.
double range_defect(const OperatorInstance& inst, const VectorFieldd& v);

}  // namespace ballistic
