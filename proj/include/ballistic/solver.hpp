#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ballistic/dual_core.hpp"

namespace ballistic {

enum class AscentMethod { newton_cg, lbfgs, momentum };

AscentMethod parse_ascent_method(const std::string& name);
std::string to_string(AscentMethod m);

struct SolverConfig {
    std::vector<double> mu_schedule = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    int max_iterations = 500;             // per barrier stage
    double gradient_tolerance = 1e-7;     // relative to max(1, ||v0|| sqrt(T))
    double objective_tolerance = 1e-9;    // relative change; five such steps in a row end a stage
    double backtracking = 0.5;
    double boundary_keep = 0.01;          // new margin >= boundary_keep * current margin
    double armijo = 1e-4;
    AscentMethod method = AscentMethod::newton_cg;
    int memory = 10;                      // quasi-Newton pairs
    int cg_max_iterations = 1000;
    double momentum = 0.9;
    std::uint64_t seed = 0;

    /// Throws ParameterError on a non-decreasing schedule or non-positive tolerances.
    void validate() const;
};

struct IterationRecord {
    int stage = 0;
    double mu = 0.0;
    int iteration = 0;
    double barrier_value = 0.0;
    double gradient_norm = 0.0;
    double step = 0.0;
    double margin = 0.0;
    int inner_iterations = 0;
};

struct SolveReport {
    bool J_finite = false;
    double J_value = 0.0;
    double K0 = 0.0;
    double T = 0.0;
    double gap_ratio = 0.0;  // NaN when K0 == 0
    double feasibility_margin = 0.0;
    int iterations = 0;
    bool converged = false;
    double final_gradient_norm = 0.0;
    double final_mu = 0.0;
    double wall_time = 0.0;
    bool v0_projected = false;
    std::string method;
    std::vector<IterationRecord> trace;
};

struct SolveResult {
    DualVariables dual;
    SolveReport report;
    FieldSeries v_opt;                        // pointwise maximizers of K_- per interval
    std::vector<double> step_contributions;   // per-interval objective terms
};

/// E_k = -s P v0 with s halved from 1 until the node margin is at least 0.5;
/// falls back to E = 0 once s drops below 1e-6. The accepted s is written to `scale`.
FieldSeries initial_guess(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0,
                          double* scale = nullptr);

/// Barrier continuation ascent on the dual objective. Never throws on budget
/// exhaustion; the report then carries converged == false.
SolveResult maximize(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0,
                     const SolverConfig& cfg = {});

/// Report for externally supplied dual variables, without optimization.
SolveReport evaluate_candidate(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0,
                               const FieldSeries& E);

}  // namespace ballistic
