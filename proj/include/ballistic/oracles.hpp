#pragma once

#include <functional>
#include <limits>
#include <string>

#include "ballistic/dual_core.hpp"

namespace ballistic {

/// A strong solution u(t) of the abstract Euler equation, known independently of the solver.
struct StrongOracle {
    std::string instance;
    std::function<VectorFieldd(double)> evaluate;
    double K0 = 0.0;
    double horizon = std::numeric_limits<double>::infinity();  // T_max
    double tolerance = 0.0;                                    // accuracy of evaluate
};

/// Scalar ODE v' = -v^2 / 2 on atoms with its optimal dual pair.
struct OdeOracle {
    StrongOracle oracle;
    FieldSeries E;        // E_k = -(rho_{k+1} - rho_k) / dt
    MatrixSeries B;       // (rho_k - 1) / 2, N_t + 1 nodes
    double J_closed = 0.0;
};

/// u(t) = 2 v0 / (2 + t v0), rho(t) = (a (t - T) + 1)^2 with a = v0 / (T v0 + 2).
/// Refuses unless T v0 + 2 > 0 at every atom.
OdeOracle ode_oracle(const SpaceHandle& atoms, const Eigen::VectorXd& v0, const TimeGrid& tg);

/// First time a characteristic crossing occurs, 1 / max(-v0'), infinite when v0' >= 0.
double burgers_shock_time(const VectorFieldd& v0);

/// u(t, x) = v0(xi) with x = xi + t v0(xi), v0 read as its trigonometric interpolant.
/// Refuses when T reaches the shock time; evaluate() refuses beyond it as well.
StrongOracle burgers_characteristics_oracle(const SpaceHandle& grid, const VectorFieldd& v0, double T);

/// Taylor-Green (sin x cos y, -cos x sin y), stationary; T_max = 1 / (2 lambda) with
/// lambda the largest measured eigenvalue modulus of sym grad u.
StrongOracle stationary_euler_oracle(const SpaceHandle& grid);

/// (c, 1) in the extended KdV variables.
StrongOracle constant_kdv_oracle(const SpaceHandle& grid, double c);

struct ConsistencyPair {
    FieldSeries E;            // E_k = (a_{k+1} - a_k) / dt + w(t_{k+1/2})
    MatrixSeries B;           // integrate_B_from_E(E)
    MatrixSeries B_analytic;  // (T - t_k) L* u(t_k)
    double min_eigenvalue = 0.0;
};

/// Dual pair built from a strong solution, a = (T - t) u and w = 2 (t - T)(I - P)[L* u . u].
/// Refuses with the measured eigenvalue when lambda_min(I + 2 (T - t_k) L* u(t_k)) < -1e-8.
ConsistencyPair consistency_pair(const OperatorInstance& inst, const TimeGrid& tg, const StrongOracle& oracle);

/// -2 P[L* v . v], products dealiased on grids.
VectorFieldd euler_rhs(const OperatorInstance& inst, const VectorFieldd& v);

struct MarchResult {
    FieldSeries v;  // N_t + 1 nodes
    double max_energy_drift = 0.0;
};

/// Classical RK4 for dv/dt + 2 P[L* v . v] = 0 with `substeps` stages per interval.
/// Throws ResolutionError once the relative energy drift exceeds 1e-4.
MarchResult strong_march(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0, int substeps = 1);

}  // namespace ballistic
