#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ballistic/errors.hpp"
#include "ballistic/summation.hpp"

namespace ballistic {

/// Largest per-point component count any shipped instance uses, plus headroom.
inline constexpr int kMaxComponents = 6;

template <typename Scalar>
using PointVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxComponents, 1>;

template <typename Scalar>
using PointMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxComponents, kMaxComponents>;

/// Finite probability space: a list of weighted atoms, or a uniform periodic
/// grid on [0, 2pi)^d with d in {1, 2}. Grid points are stored row-major
/// (last axis fastest).
class DiscreteSpace {
public:
    enum class Kind { atoms, torus_grid };

    static std::shared_ptr<const DiscreteSpace> atoms(std::size_t count);
    /// Weights must be positive and sum to one (within 1e-12); they are renormalized.
    static std::shared_ptr<const DiscreteSpace> atoms(std::vector<double> weights);
    static std::shared_ptr<const DiscreteSpace> torus(std::vector<std::size_t> sizes);

    Kind kind() const { return kind_; }
    bool is_grid() const { return kind_ == Kind::torus_grid; }
    int dim() const { return static_cast<int>(sizes_.size()); }
    const std::vector<std::size_t>& sizes() const { return sizes_; }
    std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
    Eigen::Index points() const { return weights_.size(); }
    const Eigen::VectorXd& weights() const { return weights_; }

    /// Physical coordinate along `axis` at every point (grid only).
    Eigen::VectorXd coordinate(int axis) const;

    std::string describe() const;

    bool operator==(const DiscreteSpace& other) const;
    bool operator!=(const DiscreteSpace& other) const { return !(*this == other); }

private:
    DiscreteSpace(Kind kind, std::vector<std::size_t> sizes, Eigen::VectorXd weights)
        : kind_(kind), sizes_(std::move(sizes)), weights_(std::move(weights)) {}

    Kind kind_;
    std::vector<std::size_t> sizes_;
    Eigen::VectorXd weights_;
};

using SpaceHandle = std::shared_ptr<const DiscreteSpace>;

inline bool same_space(const SpaceHandle& a, const SpaceHandle& b) {
    return a == b || (a && b && *a == *b);
}

/// One R^n vector per point. Values are stored points x components so that each
/// component is a contiguous column.
template <typename Scalar>
class VectorField {
public:
    using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    VectorField() = default;
    VectorField(SpaceHandle space, Eigen::Index components)
        : space_(std::move(space)), values_(Values::Zero(space_->points(), components)) {}
    VectorField(SpaceHandle space, Values values) : space_(std::move(space)), values_(std::move(values)) {
        if (values_.rows() != space_->points()) {
            throw DimensionError("VectorField: value rows do not match the space point count");
        }
    }

    const SpaceHandle& space() const { return space_; }
    Eigen::Index components() const { return values_.cols(); }
    Eigen::Index points() const { return values_.rows(); }

    Values& values() { return values_; }
    const Values& values() const { return values_; }

    auto component(Eigen::Index c) { return values_.col(c); }
    auto component(Eigen::Index c) const { return values_.col(c); }

    PointVector<Scalar> at(Eigen::Index point) const { return values_.row(point).transpose(); }
    void set(Eigen::Index point, const PointVector<Scalar>& v) { values_.row(point) = v.transpose(); }

    bool all_finite() const { return values_.allFinite(); }

    VectorField& operator+=(const VectorField& o) {
        check_compatible(o);
        values_ += o.values_;
        return *this;
    }
    VectorField& operator-=(const VectorField& o) {
        check_compatible(o);
        values_ -= o.values_;
        return *this;
    }
    VectorField& operator*=(Scalar s) {
        values_ *= s;
        return *this;
    }

    friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
    friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
    friend VectorField operator*(Scalar s, VectorField a) { return a *= s; }
    friend VectorField operator*(VectorField a, Scalar s) { return a *= s; }
    friend VectorField operator-(VectorField a) { return a *= Scalar(-1); }

    void check_compatible(const VectorField& o) const {
        if (!same_space(space_, o.space_) || components() != o.components()) {
            throw DimensionError("VectorField: space or component count mismatch");
        }
    }

private:
    SpaceHandle space_;
    Values values_;
};

/// One symmetric n x n matrix per point; only the upper triangle is stored,
/// packed row by row: (0,0), (0,1), ..., (0,n-1), (1,1), ...
template <typename Scalar>
class SymMatrixField {
public:
    using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    static Eigen::Index packed_size(Eigen::Index n) { return n * (n + 1) / 2; }
    static Eigen::Index packed_index(Eigen::Index i, Eigen::Index j, Eigen::Index n) {
        if (i > j) std::swap(i, j);
        return i * n - i * (i - 1) / 2 + (j - i);
    }

    SymMatrixField() = default;
    SymMatrixField(SpaceHandle space, Eigen::Index n)
        : space_(std::move(space)), size_(n), values_(Values::Zero(space_->points(), packed_size(n))) {}

    const SpaceHandle& space() const { return space_; }
    Eigen::Index size() const { return size_; }
    Eigen::Index points() const { return values_.rows(); }

    Values& values() { return values_; }
    const Values& values() const { return values_; }

    /// Column holding entry (i, j) == (j, i) at every point.
    auto entry(Eigen::Index i, Eigen::Index j) { return values_.col(packed_index(i, j, size_)); }
    auto entry(Eigen::Index i, Eigen::Index j) const { return values_.col(packed_index(i, j, size_)); }

    PointMatrix<Scalar> matrix_at(Eigen::Index point) const {
        PointMatrix<Scalar> m(size_, size_);
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < size_; ++i) {
            for (Eigen::Index j = i; j < size_; ++j, ++k) {
                m(i, j) = values_(point, k);
                m(j, i) = values_(point, k);
            }
        }
        return m;
    }

    /// Stores the symmetric part of m.
    void set_matrix(Eigen::Index point, const PointMatrix<Scalar>& m) {
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < size_; ++i) {
            for (Eigen::Index j = i; j < size_; ++j, ++k) {
                values_(point, k) = i == j ? m(i, i) : Scalar(0.5) * (m(i, j) + m(j, i));
            }
        }
    }

    bool all_finite() const { return values_.allFinite(); }

    SymMatrixField& operator+=(const SymMatrixField& o) {
        check_compatible(o);
        values_ += o.values_;
        return *this;
    }
    SymMatrixField& operator-=(const SymMatrixField& o) {
        check_compatible(o);
        values_ -= o.values_;
        return *this;
    }
    SymMatrixField& operator*=(Scalar s) {
        values_ *= s;
        return *this;
    }

    friend SymMatrixField operator+(SymMatrixField a, const SymMatrixField& b) { return a += b; }
    friend SymMatrixField operator-(SymMatrixField a, const SymMatrixField& b) { return a -= b; }
    friend SymMatrixField operator*(Scalar s, SymMatrixField a) { return a *= s; }
    friend SymMatrixField operator*(SymMatrixField a, Scalar s) { return a *= s; }

    void check_compatible(const SymMatrixField& o) const {
        if (!same_space(space_, o.space_) || size_ != o.size_) {
            throw DimensionError("SymMatrixField: space or size mismatch");
        }
    }

private:
    SpaceHandle space_;
    Eigen::Index size_ = 0;
    Values values_;
};

using VectorFieldd = VectorField<double>;
using SymMatrixFieldd = SymMatrixField<double>;

/// Quadrature-weighted sum of a per-point quantity, compensated.
template <typename Scalar, typename Derived>
Scalar weighted_sum(const DiscreteSpace& space, const Eigen::MatrixBase<Derived>& per_point) {
    CompensatedSum<Scalar> acc;
    const auto& w = space.weights();
    for (Eigen::Index i = 0; i < per_point.size(); ++i) acc += Scalar(w[i]) * per_point[i];
    return acc.value();
}

template <typename Scalar>
Scalar inner_product_vec(const VectorField<Scalar>& a, const VectorField<Scalar>& b) {
    a.check_compatible(b);
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> per_point =
        a.values().cwiseProduct(b.values()).rowwise().sum();
    return weighted_sum<Scalar>(*a.space(), per_point);
}

/// Frobenius pairing per point, quadrature-weighted. Off-diagonal entries count twice.
template <typename Scalar>
Scalar inner_product_sym(const SymMatrixField<Scalar>& a, const SymMatrixField<Scalar>& b) {
    a.check_compatible(b);
    const Eigen::Index n = a.size();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> per_point =
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(a.points());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const Scalar mult = i == j ? Scalar(1) : Scalar(2);
            per_point += mult * a.entry(i, j).cwiseProduct(b.entry(i, j));
        }
    }
    return weighted_sum<Scalar>(*a.space(), per_point);
}

template <typename Scalar>
Scalar norm(const VectorField<Scalar>& a) {
    using std::sqrt;
    return sqrt(inner_product_vec(a, a));
}

template <typename Scalar>
Scalar norm(const SymMatrixField<Scalar>& a) {
    using std::sqrt;
    return sqrt(inner_product_sym(a, a));
}

/// K = 1/2 (v, v).
template <typename Scalar>
Scalar energy(const VectorField<Scalar>& v) {
    return Scalar(0.5) * inner_product_vec(v, v);
}

/// Pointwise a (x) b symmetrized: 1/2 (a b^T + b a^T). For a == b this is v (x) v.
template <typename Scalar>
SymMatrixField<Scalar> symmetric_outer(const VectorField<Scalar>& a, const VectorField<Scalar>& b) {
    a.check_compatible(b);
    const Eigen::Index n = a.components();
    SymMatrixField<Scalar> out(a.space(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            out.entry(i, j) = Scalar(0.5) * (a.component(i).cwiseProduct(b.component(j)) +
                                             a.component(j).cwiseProduct(b.component(i)));
        }
    }
    return out;
}

template <typename Scalar>
SymMatrixField<Scalar> outer(const VectorField<Scalar>& v) {
    return symmetric_outer(v, v);
}

/// q(x) I at every point.
template <typename Scalar>
SymMatrixField<Scalar> scalar_identity(const SpaceHandle& space, Eigen::Index n,
                                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& q) {
    SymMatrixField<Scalar> out(space, n);
    for (Eigen::Index i = 0; i < n; ++i) out.entry(i, i) = q;
    return out;
}

template <typename Scalar>
SymMatrixField<Scalar> identity_field(const SpaceHandle& space, Eigen::Index n) {
    return scalar_identity<Scalar>(space, n, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Ones(space->points()));
}

/// Pointwise matrix-vector product M.v.
template <typename Scalar>
VectorField<Scalar> apply(const SymMatrixField<Scalar>& m, const VectorField<Scalar>& v) {
    if (!same_space(m.space(), v.space()) || m.size() != v.components()) {
        throw DimensionError("apply: matrix field and vector field do not match");
    }
    const Eigen::Index n = m.size();
    VectorField<Scalar> out(v.space(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out.component(i) += m.entry(i, j).cwiseProduct(v.component(j));
        }
    }
    return out;
}

/// Pointwise trace.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> trace(const SymMatrixField<Scalar>& m) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> t = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(m.points());
    for (Eigen::Index i = 0; i < m.size(); ++i) t += m.entry(i, i);
    return t;
}

/// Smooth random test field. On grids only Fourier modes with |k_axis| <= cutoff
/// on every axis are populated (amplitudes decay like 1/(1+|k|^2)); on atom spaces
/// values are i.i.d. standard normal and the cutoff is ignored.
VectorFieldd random_smooth_field(const SpaceHandle& space, Eigen::Index components, std::uint64_t seed,
                                 int mode_cutoff);

/// Scalar version of random_smooth_field.
Eigen::VectorXd random_smooth_scalar(const SpaceHandle& space, std::uint64_t seed, int mode_cutoff);

}  // namespace ballistic
