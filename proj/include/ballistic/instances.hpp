#pragma once

#include <string>
#include <vector>

#include "ballistic/operators.hpp"

namespace ballistic {

/// Scalar ODE on an atom space: L = -1/2 I, P = I.
OperatorInstance make_ode_instance(const SpaceHandle& atoms);

/// Inviscid Burgers on a 1D torus: L(m) = -1/2 m_x, L* phi = 1/2 phi_x, P = I.
OperatorInstance make_burgers_instance(const SpaceHandle& grid);

/// Incompressible Euler on a 2D torus: L = -div, L* v = sym grad v, P = Leray.
OperatorInstance make_euler2d_instance(const SpaceHandle& grid);

/// Ideal incompressible MHD on a 2D torus, state (u, b), matrices in blocks [[M, N], [N^T, S]].
/// L = (div S - div M, div N - div N^T), P = blockdiag(Leray, Leray).
OperatorInstance make_mhd2d_instance(const SpaceHandle& grid);

/// Folds a linear term A into an (n+1)-component system with state (v, a):
/// P~(v, a) = (P v, mean a), L~([[M, z], [z^T, q]]) = (L M - A z, 0).
/// `apply_Astar` must be the discrete adjoint of `apply_A`.
OperatorInstance extend_with_linear_term(const OperatorInstance& base, OperatorInstance::LinearV apply_A,
                                         OperatorInstance::LinearV apply_Astar, const std::string& name);

/// KdV v_t + v_xxx = 6 v v_x as an extended system: base L(s) = 3 s_x, A = d^3/dx^3.
OperatorInstance make_kdv_extended_instance(const SpaceHandle& grid);

/// Right-invariant multidimensional Burgers (d = 1 or 2): L(M) = -div M - 1/2 grad tr M, P = I.
OperatorInstance make_template_matching_instance(const SpaceHandle& grid);

/// Names accepted by make_instance.
const std::vector<std::string>& instance_names();

/// Builds an instance by name; throws ParameterError for unknown names.
OperatorInstance make_instance(const std::string& name, const SpaceHandle& space);

/// Jacobian of a d-component field on a d-dimensional grid: result[i][j] = d_j v_i.
std::vector<std::vector<Eigen::VectorXd>> spectral_jacobian(const VectorFieldd& v);

}  // namespace ballistic
