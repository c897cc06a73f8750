#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "ballistic/space.hpp"

namespace ballistic {

/// Structural claims an instance makes about its operators. The probes in this
/// header test them on random smooth fields.
struct OperatorFlags {
    bool conservative = false;       // (L(v (x) v), v) = 0 (and (Av, v) = 0) on range(P)
    bool trace_condition = false;    // analytic claim, only supported by trace_probe
    bool PL_of_qI_zero = false;      // PL(q I) = 0 for smooth scalar q
    bool PL_of_I_zero = false;       // PL(I) = 0
    bool extended_system = false;    // built by extend_with_linear_term
};

/// A (P, L, L*) triple on one discrete space, plus an optional linear term A.
/// L maps symmetric n x n matrix fields to n-vector fields; L* is its exact
/// discrete adjoint under the quadrature inner products.
struct OperatorInstance {
    using LinearL = std::function<VectorFieldd(const SymMatrixFieldd&)>;
    using LinearLstar = std::function<SymMatrixFieldd(const VectorFieldd&)>;
    using LinearV = std::function<VectorFieldd(const VectorFieldd&)>;

    std::string name;
    SpaceHandle space;
    Eigen::Index n = 0;
    LinearL apply_L;
    LinearLstar apply_Lstar;
    LinearV apply_P;
    LinearV apply_A;  // empty when the instance has no linear term
    OperatorFlags flags;

    bool has_linear_term() const { return static_cast<bool>(apply_A); }

    VectorFieldd L(const SymMatrixFieldd& m) const { return apply_L(m); }
    SymMatrixFieldd Lstar(const VectorFieldd& v) const { return apply_Lstar(v); }
    VectorFieldd P(const VectorFieldd& v) const { return apply_P(v); }
    VectorFieldd PL(const SymMatrixFieldd& m) const { return apply_P(apply_L(m)); }
    SymMatrixFieldd LstarP(const VectorFieldd& v) const { return apply_Lstar(apply_P(v)); }

    /// Throws DimensionError unless v lives on this instance's space with n components.
    void check_vector(const VectorFieldd& v) const;
};

/// Outcome of one structural probe.
struct CheckReport {
    std::string check;
    bool applicable = true;  // false when the instance does not claim the property
    int trials = 0;
    double max_defect = 0.0;
    double tolerance = 0.0;
    std::string note;

    bool passed() const { return !applicable || max_defect <= tolerance; }
};

/// Random smooth symmetric matrix field (band-limited entries on grids).
SymMatrixFieldd random_smooth_matrix_field(const SpaceHandle& space, Eigen::Index n, std::uint64_t seed,
                                           int mode_cutoff);

/// Mode cutoff used by the probes: well inside the 2/3 band of the coarsest axis.
int probe_mode_cutoff(const DiscreteSpace& space);

/// max |(L M, v) - (M, L* v)| / (1 + max(|(L M, v)|, |(M, L* v)|)).
CheckReport check_adjoint(const OperatorInstance& inst, int trials, std::uint64_t seed);

/// Idempotence ||P P a - P a|| and self-adjointness |(P a, b) - (a, P b)|, normalized.
CheckReport check_projector(const OperatorInstance& inst, int trials, std::uint64_t seed);

/// |(L(v (x) v), v)| / (1 + ||v||^3) over random v in range(P), quadratic product
/// dealiased on grids; with a linear term also |(A v, v)| / (1 + ||v||^2).
CheckReport check_conservativity(const OperatorInstance& inst, int trials, std::uint64_t seed);

enum class PLIdentity { qI, I };

/// ||PL(q I)|| / ||q|| over random smooth scalars q, or ||PL(I)||. For extended
/// systems the I probe is the block-diagonal identity of the extended state.
CheckReport check_PL_identity(const OperatorInstance& inst, PLIdentity which, int trials, std::uint64_t seed);

/// Largest |tr L* zeta| over points and random zeta in range(P). Evidence only.
CheckReport trace_probe(const OperatorInstance& inst, int trials, std::uint64_t seed);

/// Pointwise trace of L* zeta for a given field (used by the probe and its tests).
Eigen::VectorXd trace_of_Lstar(const OperatorInstance& inst, const VectorFieldd& zeta);

}  // namespace ballistic
