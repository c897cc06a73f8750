#pragma once

#include <Eigen/Dense>

#include "ballistic/space.hpp"

namespace ballistic {

/// Discrete Fourier transform of a real grid function (full complex spectrum,
/// same row-major layout as the grid, unnormalized forward).
Eigen::VectorXcd fourier_forward(const DiscreteSpace& space, const Eigen::VectorXd& f);

/// Inverse of fourier_forward; the imaginary residue is discarded.
Eigen::VectorXd fourier_inverse(const DiscreteSpace& space, const Eigen::VectorXcd& spectrum);

/// Integer wavenumber along `axis` for every spectral index. With zero_nyquist the
/// Nyquist entry (even axis lengths) is set to zero, which keeps odd-order
/// derivatives real and exactly skew-adjoint.
Eigen::VectorXd wavenumbers(const DiscreteSpace& space, int axis, bool zero_nyquist);

/// Largest retained wavenumber under the 2/3 dealiasing rule: 3K < n.
int dealias_cutoff(std::size_t n);

/// d^order f / dx_axis^order for a band-limited interpretation of f; order in {1, 2, 3}.
Eigen::VectorXd spectral_derivative(const DiscreteSpace& space, const Eigen::VectorXd& f, int axis, int order);

/// Derivative of a function given by its spectrum (avoids repeated forward transforms).
Eigen::VectorXd spectral_derivative_from(const DiscreteSpace& space, const Eigen::VectorXcd& spectrum, int axis,
                                         int order);

/// Zeroes every mode with |k_axis| > dealias_cutoff(n_axis) on some axis.
Eigen::VectorXd dealias(const DiscreteSpace& space, const Eigen::VectorXd& f);
VectorFieldd dealias(const VectorFieldd& v);
SymMatrixFieldd dealias(const SymMatrixFieldd& m);

/// Leray-Helmholtz projection of a 2-component field on a 2D torus grid:
/// removes the discrete gradient part, keeps the zero mode.
VectorFieldd leray_project(const VectorFieldd& v);

/// Discrete divergence of a d-component field on a d-dimensional grid.
Eigen::VectorXd divergence(const VectorFieldd& v);

/// Row-wise divergence of a symmetric matrix field block: (div M)_i = sum_j d_j M_ij,
/// restricted to rows/columns [offset_row, offset_row + d) x [offset_col, offset_col + d).
/// With transpose the block is read as M_ji.
VectorFieldd matrix_divergence(const SymMatrixFieldd& m, Eigen::Index row_offset, Eigen::Index col_offset,
                               bool transpose = false);

}  // namespace ballistic
