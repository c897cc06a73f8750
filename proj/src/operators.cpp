#include "ballistic/operators.hpp"

#include <algorithm>
#include <cmath>

#include "ballistic/spectral.hpp"

namespace ballistic {

void OperatorInstance::check_vector(const VectorFieldd& v) const {
    if (!same_space(v.space(), space) || v.components() != n) {
        throw DimensionError("field does not match instance '" + name + "'");
    }
}

SymMatrixFieldd random_smooth_matrix_field(const SpaceHandle& space, Eigen::Index n, std::uint64_t seed,
                                           int mode_cutoff) {
    const VectorFieldd packed = random_smooth_field(space, SymMatrixFieldd::packed_size(n), seed, mode_cutoff);
    SymMatrixFieldd m(space, n);
    m.values() = packed.values();
    return m;
}

int probe_mode_cutoff(const DiscreteSpace& space) {
    if (!space.is_grid()) return 0;
    std::size_t smallest = space.sizes()[0];
    for (std::size_t s : space.sizes()) smallest = std::min(smallest, s);
    return std::max(0, std::min(6, dealias_cutoff(smallest) - 1));
}

namespace {

std::uint64_t trial_seed(std::uint64_t seed, int trial, int slot) {
    return seed * 1000003ULL + static_cast<std::uint64_t>(trial) * 7919ULL + static_cast<std::uint64_t>(slot);
}

}  // namespace

CheckReport check_adjoint(const OperatorInstance& inst, int trials, std::uint64_t seed) {
    CheckReport rep{"adjoint", true, trials, 0.0, 1e-10, ""};
    const int cut = probe_mode_cutoff(*inst.space);
    for (int t = 0; t < trials; ++t) {
        const SymMatrixFieldd m = random_smooth_matrix_field(inst.space, inst.n, trial_seed(seed, t, 0), cut);
        const VectorFieldd v = random_smooth_field(inst.space, inst.n, trial_seed(seed, t, 1), cut);
        const double lhs = inner_product_vec(inst.L(m), v);
        const double rhs = inner_product_sym(m, inst.Lstar(v));
        rep.max_defect = std::max(rep.max_defect, std::abs(lhs - rhs) / (1.0 + std::max(std::abs(lhs), std::abs(rhs))));
    }
    return rep;
}

CheckReport check_projector(const OperatorInstance& inst, int trials, std::uint64_t seed) {
    CheckReport rep{"projector", true, trials, 0.0, 1e-10, ""};
    const int cut = probe_mode_cutoff(*inst.space);
    for (int t = 0; t < trials; ++t) {
        const VectorFieldd a = random_smooth_field(inst.space, inst.n, trial_seed(seed, t, 0), cut);
        const VectorFieldd b = random_smooth_field(inst.space, inst.n, trial_seed(seed, t, 1), cut);
        const VectorFieldd pa = inst.P(a);
        const double idem = norm(inst.P(pa) - pa) / (1.0 + norm(a));
        const double lhs = inner_product_vec(pa, b);
        const double rhs = inner_product_vec(a, inst.P(b));
        const double sym = std::abs(lhs - rhs) / (1.0 + norm(a) * norm(b));
        rep.max_defect = std::max({rep.max_defect, idem, sym});
    }
    return rep;
}

CheckReport check_conservativity(const OperatorInstance& inst, int trials, std::uint64_t seed) {
    CheckReport rep{"conservativity", inst.flags.conservative, trials, 0.0, 1e-9, ""};
    if (!inst.flags.conservative) {
        rep.trials = 0;
        rep.note = "not claimed";
        return rep;
    }
    const int cut = probe_mode_cutoff(*inst.space);
    for (int t = 0; t < trials; ++t) {
        const VectorFieldd v = inst.P(random_smooth_field(inst.space, inst.n, trial_seed(seed, t, 0), cut));
        SymMatrixFieldd vv = outer(v);
        if (inst.space->is_grid()) vv = dealias(vv);
        const double nv = norm(v);
        double defect = std::abs(inner_product_vec(inst.L(vv), v)) / (1.0 + nv * nv * nv);
        if (inst.has_linear_term()) {
            defect = std::max(defect, std::abs(inner_product_vec(inst.apply_A(v), v)) / (1.0 + nv * nv));
        }
        rep.max_defect = std::max(rep.max_defect, defect);
    }
    return rep;
}

CheckReport check_PL_identity(const OperatorInstance& inst, PLIdentity which, int trials, std::uint64_t seed) {
    if (which == PLIdentity::qI) {
        CheckReport rep{"PL(qI)", inst.flags.PL_of_qI_zero, trials, 0.0, 1e-10, ""};
        if (!rep.applicable) {
            rep.trials = 0;
            rep.note = "not claimed";
            return rep;
        }
        const int cut = probe_mode_cutoff(*inst.space);
        for (int t = 0; t < trials; ++t) {
            const Eigen::VectorXd q = random_smooth_scalar(inst.space, trial_seed(seed, t, 0), cut);
            const double qn = std::sqrt(weighted_sum<double>(*inst.space, q.cwiseProduct(q)));
            const VectorFieldd out = inst.PL(scalar_identity<double>(inst.space, inst.n, q));
            rep.max_defect = std::max(rep.max_defect, norm(out) / std::max(qn, 1e-300));
        }
        return rep;
    }
    // The identity of an extended state is blockdiag(I, 1), i.e. again the identity.
    const bool claimed = inst.flags.PL_of_I_zero || inst.flags.extended_system;
    CheckReport rep{"PL(I)", claimed, 1, 0.0, 1e-10, ""};
    if (!claimed) {
        rep.trials = 0;
        rep.note = "not claimed";
        return rep;
    }
    if (inst.flags.extended_system && !inst.flags.PL_of_I_zero) rep.note = "block-diagonal identity of the extended state";
    rep.max_defect = norm(inst.PL(identity_field<double>(inst.space, inst.n)));
    (void)seed;
    return rep;
}

Eigen::VectorXd trace_of_Lstar(const OperatorInstance& inst, const VectorFieldd& zeta) {
    inst.check_vector(zeta);
    return trace(inst.Lstar(zeta));
}

CheckReport trace_probe(const OperatorInstance& inst, int trials, std::uint64_t seed) {
    // A vanishing trace is the sufficient condition behind PL(qI) = 0 instances;
    // elsewhere the probe only reports.
    CheckReport rep{"trace_probe", inst.flags.PL_of_qI_zero, trials, 0.0, 1e-10, ""};
    if (!rep.applicable) rep.note = "reported only";
    const int cut = probe_mode_cutoff(*inst.space);
    for (int t = 0; t < trials; ++t) {
        const VectorFieldd zeta = inst.P(random_smooth_field(inst.space, inst.n, trial_seed(seed, t, 0), cut));
        rep.max_defect = std::max(rep.max_defect, trace_of_Lstar(inst, zeta).cwiseAbs().maxCoeff());
    }
    return rep;
}

}  // namespace ballistic
