#include "ballistic/instances.hpp"

#include "ballistic/spectral.hpp"

namespace ballistic {

namespace {

void require_torus(const SpaceHandle& space, int d, const std::string& who) {
    if (!space || !space->is_grid()) throw UnsupportedSpaceError(who + " requires a torus grid");
    if (d > 0 && space->dim() != d) {
        throw DimensionError(who + " requires a " + std::to_string(d) + "D torus grid");
    }
}

Eigen::VectorXd dx(const DiscreteSpace& space, const Eigen::VectorXd& f, int order = 1) {
    return spectral_derivative(space, f, 0, order);
}

}  // namespace

std::vector<std::vector<Eigen::VectorXd>> spectral_jacobian(const VectorFieldd& v) {
    const DiscreteSpace& space = *v.space();
    const int d = space.dim();
    if (v.components() != d) throw DimensionError("spectral_jacobian: components must equal grid dimension");
    std::vector<std::vector<Eigen::VectorXd>> jac(d, std::vector<Eigen::VectorXd>(d));
    for (int i = 0; i < d; ++i) {
        const Eigen::VectorXcd s = fourier_forward(space, Eigen::VectorXd(v.component(i)));
        for (int j = 0; j < d; ++j) jac[i][j] = spectral_derivative_from(space, s, j, 1);
    }
    return jac;
}

OperatorInstance make_ode_instance(const SpaceHandle& atoms) {
    if (!atoms || atoms->is_grid()) throw UnsupportedSpaceError("ode instance requires an atom space");
    OperatorInstance inst;
    inst.name = "ode";
    inst.space = atoms;
    inst.n = 1;
    inst.apply_L = [atoms](const SymMatrixFieldd& m) {
        VectorFieldd out(atoms, 1);
        out.component(0) = -0.5 * m.entry(0, 0);
        return out;
    };
    inst.apply_Lstar = [atoms](const VectorFieldd& v) {
        SymMatrixFieldd out(atoms, 1);
        out.entry(0, 0) = -0.5 * v.component(0);
        return out;
    };
    inst.apply_P = [](const VectorFieldd& v) { return v; };
    return inst;
}

OperatorInstance make_burgers_instance(const SpaceHandle& grid) {
    require_torus(grid, 1, "burgers1d instance");
    OperatorInstance inst;
    inst.name = "burgers1d";
    inst.space = grid;
    inst.n = 1;
    inst.apply_L = [grid](const SymMatrixFieldd& m) {
        VectorFieldd out(grid, 1);
        out.component(0) = -0.5 * dx(*grid, Eigen::VectorXd(m.entry(0, 0)));
        return out;
    };
    inst.apply_Lstar = [grid](const VectorFieldd& v) {
        SymMatrixFieldd out(grid, 1);
        out.entry(0, 0) = 0.5 * dx(*grid, Eigen::VectorXd(v.component(0)));
        return out;
    };
    inst.apply_P = [](const VectorFieldd& v) { return v; };
    inst.flags.conservative = true;
    inst.flags.PL_of_I_zero = true;
    return inst;
}

OperatorInstance make_euler2d_instance(const SpaceHandle& grid) {
    require_torus(grid, 2, "euler2d instance");
    OperatorInstance inst;
    inst.name = "euler2d";
    inst.space = grid;
    inst.n = 2;
    inst.apply_L = [](const SymMatrixFieldd& m) { return -matrix_divergence(m, 0, 0); };
    inst.apply_Lstar = [grid](const VectorFieldd& v) {
        const auto jac = spectral_jacobian(v);
        SymMatrixFieldd out(grid, 2);
        for (int i = 0; i < 2; ++i) {
            for (int j = i; j < 2; ++j) out.entry(i, j) = 0.5 * (jac[i][j] + jac[j][i]);
        }
        return out;
    };
    inst.apply_P = [](const VectorFieldd& v) { return leray_project(v); };
    inst.flags = {true, true, true, true, false};
    return inst;
}

OperatorInstance make_mhd2d_instance(const SpaceHandle& grid) {
    require_torus(grid, 2, "mhd2d instance");
    OperatorInstance inst;
    inst.name = "mhd2d";
    inst.space = grid;
    inst.n = 4;
    inst.apply_L = [grid](const SymMatrixFieldd& m) {
        const VectorFieldd du = matrix_divergence(m, 2, 2) - matrix_divergence(m, 0, 0);
        const VectorFieldd db = matrix_divergence(m, 0, 2) - matrix_divergence(m, 0, 2, true);
        VectorFieldd out(grid, 4);
        out.values().leftCols(2) = du.values();
        out.values().rightCols(2) = db.values();
        return out;
    };
    inst.apply_Lstar = [grid](const VectorFieldd& v) {
        const VectorFieldd phi(grid, Eigen::MatrixXd(v.values().leftCols(2)));
        const VectorFieldd chi(grid, Eigen::MatrixXd(v.values().rightCols(2)));
        const auto gp = spectral_jacobian(phi);
        const auto gc = spectral_jacobian(chi);
        SymMatrixFieldd out(grid, 4);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                if (j >= i) {
                    const Eigen::VectorXd s = 0.5 * (gp[i][j] + gp[j][i]);
                    out.entry(i, j) = s;
                    out.entry(2 + i, 2 + j) = -s;
                }
                out.entry(i, 2 + j) = 0.5 * (gc[j][i] - gc[i][j]);
            }
        }
        return out;
    };
    inst.apply_P = [grid](const VectorFieldd& v) {
        const VectorFieldd u = leray_project(VectorFieldd(grid, Eigen::MatrixXd(v.values().leftCols(2))));
        const VectorFieldd b = leray_project(VectorFieldd(grid, Eigen::MatrixXd(v.values().rightCols(2))));
        VectorFieldd out(grid, 4);
        out.values().leftCols(2) = u.values();
        out.values().rightCols(2) = b.values();
        return out;
    };
    inst.flags = {true, true, true, true, false};
    return inst;
}

OperatorInstance extend_with_linear_term(const OperatorInstance& base, OperatorInstance::LinearV apply_A,
                                         OperatorInstance::LinearV apply_Astar, const std::string& name) {
    if (!apply_A || !apply_Astar) throw ParameterError("extend_with_linear_term needs A and its adjoint");
    const SpaceHandle space = base.space;
    const Eigen::Index n = base.n;
    OperatorInstance inst;
    inst.name = name;
    inst.space = space;
    inst.n = n + 1;
    inst.apply_L = [base, apply_A, space, n](const SymMatrixFieldd& w) {
        SymMatrixFieldd m(space, n);
        VectorFieldd z(space, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i; j < n; ++j) m.entry(i, j) = w.entry(i, j);
            z.component(i) = w.entry(i, n);
        }
        const VectorFieldd lz = base.L(m) - apply_A(z);
        VectorFieldd out(space, n + 1);
        out.values().leftCols(n) = lz.values();
        return out;
    };
    inst.apply_Lstar = [base, apply_Astar, space, n](const VectorFieldd& v) {
        const VectorFieldd phi(space, Eigen::MatrixXd(v.values().leftCols(n)));
        const SymMatrixFieldd top = base.Lstar(phi);
        const VectorFieldd aphi = apply_Astar(phi);
        SymMatrixFieldd out(space, n + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i; j < n; ++j) out.entry(i, j) = top.entry(i, j);
            out.entry(i, n) = -0.5 * aphi.component(i);
        }
        return out;
    };
    inst.apply_P = [base, space, n](const VectorFieldd& v) {
        const VectorFieldd pv = base.P(VectorFieldd(space, Eigen::MatrixXd(v.values().leftCols(n))));
        VectorFieldd out(space, n + 1);
        out.values().leftCols(n) = pv.values();
        out.component(n).setConstant(weighted_sum<double>(*space, v.component(n)));
        return out;
    };
    inst.apply_A = [apply_A, space, n](const VectorFieldd& v) {
        const VectorFieldd av = apply_A(VectorFieldd(space, Eigen::MatrixXd(v.values().leftCols(n))));
        VectorFieldd out(space, n + 1);
        out.values().leftCols(n) = av.values();
        return out;
    };
    inst.flags.extended_system = true;
    return inst;
}

OperatorInstance make_kdv_extended_instance(const SpaceHandle& grid) {
    require_torus(grid, 1, "kdv instance");
    OperatorInstance base;
    base.name = "kdv_base";
    base.space = grid;
    base.n = 1;
    base.apply_L = [grid](const SymMatrixFieldd& m) {
        VectorFieldd out(grid, 1);
        out.component(0) = 3.0 * dx(*grid, Eigen::VectorXd(m.entry(0, 0)));
        return out;
    };
    base.apply_Lstar = [grid](const VectorFieldd& v) {
        SymMatrixFieldd out(grid, 1);
        out.entry(0, 0) = -3.0 * dx(*grid, Eigen::VectorXd(v.component(0)));
        return out;
    };
    base.apply_P = [](const VectorFieldd& v) { return v; };
    auto third = [grid](const VectorFieldd& v, double sign) {
        VectorFieldd out(grid, 1);
        out.component(0) = sign * dx(*grid, Eigen::VectorXd(v.component(0)), 3);
        return out;
    };
    OperatorInstance inst = extend_with_linear_term(
        base, [third](const VectorFieldd& v) { return third(v, 1.0); },
        [third](const VectorFieldd& v) { return third(v, -1.0); }, "kdv");
    inst.flags.conservative = true;
    inst.flags.trace_condition = true;
    return inst;
}

OperatorInstance make_template_matching_instance(const SpaceHandle& grid) {
    require_torus(grid, 0, "template_matching instance");
    const int d = grid->dim();
    OperatorInstance inst;
    inst.name = "template_matching";
    inst.space = grid;
    inst.n = d;
    inst.apply_L = [grid, d](const SymMatrixFieldd& m) {
        VectorFieldd out = -matrix_divergence(m, 0, 0);
        const Eigen::VectorXd tr = trace(m);
        for (int i = 0; i < d; ++i) out.component(i) -= 0.5 * spectral_derivative(*grid, tr, i, 1);
        return out;
    };
    inst.apply_Lstar = [grid, d](const VectorFieldd& v) {
        const auto jac = spectral_jacobian(v);
        Eigen::VectorXd div = Eigen::VectorXd::Zero(grid->points());
        for (int i = 0; i < d; ++i) div += jac[i][i];
        SymMatrixFieldd out(grid, d);
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) out.entry(i, j) = 0.5 * (jac[i][j] + jac[j][i]);
            out.entry(i, i) += 0.5 * div;
        }
        return out;
    };
    inst.apply_P = [](const VectorFieldd& v) { return v; };
    inst.flags.conservative = true;
    inst.flags.PL_of_I_zero = true;
    return inst;
}

const std::vector<std::string>& instance_names() {
    static const std::vector<std::string> names = {"ode", "burgers1d", "euler2d", "mhd2d", "kdv", "template_matching"};
    return names;
}

OperatorInstance make_instance(const std::string& name, const SpaceHandle& space) {
    if (name == "ode") return make_ode_instance(space);
    if (name == "burgers1d") return make_burgers_instance(space);
    if (name == "euler2d") return make_euler2d_instance(space);
    if (name == "mhd2d") return make_mhd2d_instance(space);
    if (name == "kdv") return make_kdv_extended_instance(space);
    if (name == "template_matching") return make_template_matching_instance(space);
    throw ParameterError("unknown instance '" + name + "'");
}

}  // namespace ballistic
