#pragma once

#include "ballistic/oracles.hpp"

namespace ballistic {

/// v_k = (1 / (T - t_k)) dt sum_{j >= k} (-P E_j) on the left nodes k = 0..N_t-1.
FieldSeries generalized_solution(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E);
/// Single node; k = N_t (t = T) is outside the domain and throws ParameterError.
VectorFieldd generalized_solution_at(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E, int k);
/// Same time average taken from the interval midpoints t_{k+1/2}, k = 0..N_t-1.
FieldSeries generalized_solution_midpoint(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E);

/// max_k ||(T - t_k) L* v_k - B_k|| / (1 + ||B_k||).
double b_identity_defect(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E, const FieldSeries& v);

struct ResidualR {
    FieldSeries r;
    double norm = 0.0;  // sqrt(sum_k dt ||r_k||^2)
};

/// r_k = vbar_k + 2 Bbar_k vbar_k + E_k with the midpoint generalized solution vbar_k and
/// Bbar_k = (B_k + B_{k+1}) / 2, the pairing the objective uses on interval k.
ResidualR residual_r(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E);

/// sqrt(sum_k dt (T - t_k)^2 ||(v_{k+1} - v_k) / dt + 2 P[L* vbar . vbar]||^2) over
/// consecutive node pairs, vbar = (v_k + v_{k+1}) / 2.
double strong_residual(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& v);

/// ||v_0 - P v0||.
double initial_defect(const OperatorInstance& inst, const FieldSeries& v, const VectorFieldd& v0);

struct BrenierComparison {
    double relative_difference = 0.0;  // ||v_brenier - vbar|| / ||vbar|| over the admitted points
    double admitted_fraction = 0.0;    // share of (k, point) pairs with lambda_min(Gbar) > tol
};

/// Pointwise formula -Gbar_k^{-1} E_k against the midpoint generalized solution.
BrenierComparison brenier_comparison(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E,
                                     double tol = 1e-6);

struct DiscrepancyThresholds {
    double discretization_tolerance = 2e-3;  // relative L2 level of the reconstruction on calibration runs
    double gap = 1e-3;                       // ii: J < T K0 (1 - gap)
    double eigenvalue = -1e-6;               // iii: lambda_min below this
    double band = 3.0;                       // decisions within a factor `band` of i/ii thresholds are noise
    double eigenvalue_band = 1e-4;           // iii decisions with |lambda - threshold| below this are noise
};

struct DiscrepancyReport {
    bool has_oracle = false;
    bool flag_i = false, flag_ii = false, flag_iii = false;
    double measure_i = 0.0;    // relative L2 distance to the oracle on t_k < min(T, horizon)
    double measure_ii = 0.0;   // J / (T K0)
    double measure_iii = 0.0;  // min lambda_min(I + 2 (T - t_k) L* u(t_k))
    double threshold_i = 0.0, threshold_ii = 0.0, threshold_iii = 0.0;
    bool decisive_i = false, decisive_ii = false, decisive_iii = false;
    double oracle_horizon = 0.0;  // time window used for i and iii
    bool agree = true;            // all decisive flags equal
};

/// Flags (i) v differs from u, (ii) J < T K0, (iii) the consistency cone condition fails for u.
/// Without an oracle only ii is evaluated; require_oracle makes a missing oracle a ParameterError.
DiscrepancyReport discrepancy_diagnostics(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& v,
                                          double J, double K0, const StrongOracle* oracle,
                                          const DiscrepancyThresholds& th = {}, bool require_oracle = false);

struct ReconstructionReport {
    FieldSeries v;
    double range_defect = 0.0;  // max_k ||P v_k - v_k||
    double B_identity_defect = 0.0;
    double residual_r_norm = 0.0;
    double initial_defect = 0.0;
    double initial_defect_relative = 0.0;
    double strong_residual = 0.0;
    BrenierComparison brenier;
    DiscrepancyReport discrepancy;
    DiscrepancyThresholds thresholds;
};

ReconstructionReport reconstruct(const OperatorInstance& inst, const TimeGrid& tg, const FieldSeries& E,
                                 const VectorFieldd& v0, double J, double K0, const StrongOracle* oracle = nullptr,
                                 const DiscrepancyThresholds& th = {});

}  // namespace ballistic
