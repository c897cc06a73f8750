#include "ballistic/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <vector>

namespace ballistic {

namespace {

using Complex = std::complex<double>;

Eigen::FFT<double>& fft_engine() {
    // Eigen::FFT caches plans internally and is not safe to share across threads.
    thread_local Eigen::FFT<double> engine;
    return engine;
}

void require_grid(const DiscreteSpace& space, const char* what) {
    if (!space.is_grid()) throw UnsupportedSpaceError(std::string(what) + " requires a torus grid");
}

// In-place 1D transforms along one axis of a row-major array.
void transform_axis(std::vector<Complex>& data, std::size_t n0, std::size_t n1, int axis, bool inverse) {
    auto& fft = fft_engine();
    const std::size_t len = axis == 0 ? n0 : n1;
    const std::size_t count = axis == 0 ? n1 : n0;
    std::vector<Complex> in(len), out(len);
    for (std::size_t line = 0; line < count; ++line) {
        for (std::size_t m = 0; m < len; ++m) in[m] = axis == 0 ? data[m * n1 + line] : data[line * n1 + m];
        if (inverse) {
            fft.inv(out, in);
        } else {
            fft.fwd(out, in);
        }
        for (std::size_t m = 0; m < len; ++m) {
            if (axis == 0) {
                data[m * n1 + line] = out[m];
            } else {
                data[line * n1 + m] = out[m];
            }
        }
    }
}

std::pair<std::size_t, std::size_t> shape(const DiscreteSpace& space) {
    const auto& s = space.sizes();
    return s.size() == 1 ? std::pair<std::size_t, std::size_t>{1, s[0]} : std::pair<std::size_t, std::size_t>{s[0], s[1]};
}

// Axis index in the (n0, n1) row-major shape used above.
int storage_axis(const DiscreteSpace& space, int axis) { return space.dim() == 1 ? 1 : axis; }

}  // namespace

Eigen::VectorXcd fourier_forward(const DiscreteSpace& space, const Eigen::VectorXd& f) {
    require_grid(space, "fourier_forward");
    if (f.size() != space.points()) throw DimensionError("fourier_forward: size mismatch");
    const auto [n0, n1] = shape(space);
    std::vector<Complex> data(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) data[i] = Complex(f[i], 0.0);
    if (space.dim() == 2) transform_axis(data, n0, n1, 0, false);
    transform_axis(data, n0, n1, 1, false);
    return Eigen::Map<Eigen::VectorXcd>(data.data(), f.size());
}

Eigen::VectorXd fourier_inverse(const DiscreteSpace& space, const Eigen::VectorXcd& spectrum) {
    require_grid(space, "fourier_inverse");
    if (spectrum.size() != space.points()) throw DimensionError("fourier_inverse: size mismatch");
    const auto [n0, n1] = shape(space);
    std::vector<Complex> data(spectrum.data(), spectrum.data() + spectrum.size());
    transform_axis(data, n0, n1, 1, true);
    if (space.dim() == 2) transform_axis(data, n0, n1, 0, true);
    Eigen::VectorXd f(spectrum.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = data[i].real();
    return f;
}

Eigen::VectorXd wavenumbers(const DiscreteSpace& space, int axis, bool zero_nyquist) {
    require_grid(space, "wavenumbers");
    if (axis < 0 || axis >= space.dim()) throw ParameterError("axis out of range");
    const auto [n0, n1] = shape(space);
    const int sa = storage_axis(space, axis);
    const std::size_t len = sa == 0 ? n0 : n1;
    Eigen::VectorXd k(space.points());
    for (std::size_t p = 0; p < static_cast<std::size_t>(space.points()); ++p) {
        const std::size_t m = sa == 0 ? p / n1 : p % n1;
        double km;
        if (2 * m < len) {
            km = static_cast<double>(m);
        } else if (2 * m == len) {
            km = zero_nyquist ? 0.0 : static_cast<double>(m);
        } else {
            km = static_cast<double>(m) - static_cast<double>(len);
        }
        k[static_cast<Eigen::Index>(p)] = km;
    }
    return k;
}

int dealias_cutoff(std::size_t n) { return static_cast<int>((n - 1) / 3); }

Eigen::VectorXd spectral_derivative_from(const DiscreteSpace& space, const Eigen::VectorXcd& spectrum, int axis,
                                         int order) {
    if (order < 1 || order > 3) throw ParameterError("spectral_derivative: order must be 1, 2 or 3");
    const Eigen::VectorXd k = wavenumbers(space, axis, order % 2 == 1);
    Eigen::VectorXcd d(spectrum.size());
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
        Complex factor(1.0, 0.0);
        for (int o = 0; o < order; ++o) factor *= Complex(0.0, k[i]);
        d[i] = factor * spectrum[i];
    }
    return fourier_inverse(space, d);
}

Eigen::VectorXd spectral_derivative(const DiscreteSpace& space, const Eigen::VectorXd& f, int axis, int order) {
    require_grid(space, "spectral_derivative");
    return spectral_derivative_from(space, fourier_forward(space, f), axis, order);
}

Eigen::VectorXd dealias(const DiscreteSpace& space, const Eigen::VectorXd& f) {
    Eigen::VectorXcd s = fourier_forward(space, f);
    for (int axis = 0; axis < space.dim(); ++axis) {
        const Eigen::VectorXd k = wavenumbers(space, axis, false);
        const double cut = dealias_cutoff(space.sizes()[axis]);
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            if (std::abs(k[i]) > cut) s[i] = 0.0;
        }
    }
    return fourier_inverse(space, s);
}

VectorFieldd dealias(const VectorFieldd& v) {
    VectorFieldd out(v.space(), v.components());
    for (Eigen::Index c = 0; c < v.components(); ++c) out.component(c) = dealias(*v.space(), Eigen::VectorXd(v.component(c)));
    return out;
}

SymMatrixFieldd dealias(const SymMatrixFieldd& m) {
    SymMatrixFieldd out(m.space(), m.size());
    for (Eigen::Index c = 0; c < m.values().cols(); ++c) {
        out.values().col(c) = dealias(*m.space(), Eigen::VectorXd(m.values().col(c)));
    }
    return out;
}

VectorFieldd leray_project(const VectorFieldd& v) {
    const DiscreteSpace& space = *v.space();
    require_grid(space, "leray_project");
    if (space.dim() != 2 || v.components() != 2) {
        throw DimensionError("leray_project expects a 2-component field on a 2D grid");
    }
    const Eigen::VectorXd k0 = wavenumbers(space, 0, true);
    const Eigen::VectorXd k1 = wavenumbers(space, 1, true);
    Eigen::VectorXcd a = fourier_forward(space, Eigen::VectorXd(v.component(0)));
    Eigen::VectorXcd b = fourier_forward(space, Eigen::VectorXd(v.component(1)));
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double kk = k0[i] * k0[i] + k1[i] * k1[i];
        if (kk == 0.0) continue;
        const Complex dot = (k0[i] * a[i] + k1[i] * b[i]) / kk;
        a[i] -= k0[i] * dot;
        b[i] -= k1[i] * dot;
    }
    VectorFieldd out(v.space(), 2);
    out.component(0) = fourier_inverse(space, a);
    out.component(1) = fourier_inverse(space, b);
    return out;
}

Eigen::VectorXd divergence(const VectorFieldd& v) {
    const DiscreteSpace& space = *v.space();
    require_grid(space, "divergence");
    if (v.components() != space.dim()) throw DimensionError("divergence: components must equal grid dimension");
    Eigen::VectorXd div = Eigen::VectorXd::Zero(space.points());
    for (int j = 0; j < space.dim(); ++j) div += spectral_derivative(space, Eigen::VectorXd(v.component(j)), j, 1);
    return div;
}

VectorFieldd matrix_divergence(const SymMatrixFieldd& m, Eigen::Index row_offset, Eigen::Index col_offset,
                               bool transpose) {
    const DiscreteSpace& space = *m.space();
    require_grid(space, "matrix_divergence");
    const int d = space.dim();
    if (row_offset + d > m.size() || col_offset + d > m.size()) throw DimensionError("matrix_divergence: block out of range");
    VectorFieldd out(m.space(), d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const Eigen::Index r = transpose ? row_offset + j : row_offset + i;
            const Eigen::Index c = transpose ? col_offset + i : col_offset + j;
            out.component(i) += spectral_derivative(space, Eigen::VectorXd(m.entry(r, c)), j, 1);
        }
    }
    return out;
}

}  // namespace ballistic
