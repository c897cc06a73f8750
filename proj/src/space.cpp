#include "ballistic/space.hpp"

#include <numbers>
#include <random>
#include <sstream>

namespace ballistic {

std::shared_ptr<const DiscreteSpace> DiscreteSpace::atoms(std::size_t count) {
    if (count == 0) throw ParameterError("atom space needs at least one atom");
    return atoms(std::vector<double>(count, 1.0 / static_cast<double>(count)));
}

std::shared_ptr<const DiscreteSpace> DiscreteSpace::atoms(std::vector<double> weights) {
    if (weights.empty()) throw ParameterError("atom space needs at least one atom");
    CompensatedSum<double> total;
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("atom weights must be positive and finite");
        total += w;
    }
    if (std::abs(total.value() - 1.0) > 1e-12) throw ParameterError("atom weights must sum to one");
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    w /= total.value();
    return std::shared_ptr<const DiscreteSpace>(new DiscreteSpace(Kind::atoms, {}, std::move(w)));
}

std::shared_ptr<const DiscreteSpace> DiscreteSpace::torus(std::vector<std::size_t> sizes) {
    if (sizes.empty() || sizes.size() > 2) throw ParameterError("torus grids support d = 1 or d = 2");
    std::size_t total = 1;
    for (std::size_t s : sizes) {
        if (s < 2) throw ParameterError("torus grid axes need at least two points");
        total *= s;
    }
    Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(total), 1.0 / static_cast<double>(total));
    return std::shared_ptr<const DiscreteSpace>(new DiscreteSpace(Kind::torus_grid, std::move(sizes), std::move(w)));
}

Eigen::VectorXd DiscreteSpace::coordinate(int axis) const {
    if (!is_grid()) throw UnsupportedSpaceError("coordinates are only defined on torus grids");
    if (axis < 0 || axis >= dim()) throw ParameterError("axis out of range");
    Eigen::VectorXd x(points());
    const std::size_t inner = dim() == 2 ? sizes_[1] : 1;
    for (Eigen::Index p = 0; p < points(); ++p) {
        const std::size_t idx = static_cast<std::size_t>(p);
        const std::size_t i = axis == 0 ? idx / inner : idx % inner;
        x[p] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(sizes_[axis]);
    }
    return x;
}

std::string DiscreteSpace::describe() const {
    std::ostringstream os;
    if (is_grid()) {
        os << "torus";
        for (std::size_t i = 0; i < sizes_.size(); ++i) os << (i == 0 ? " " : "x") << sizes_[i];
    } else {
        os << "atoms " << size();
    }
    return os.str();
}

bool DiscreteSpace::operator==(const DiscreteSpace& other) const {
    return kind_ == other.kind_ && sizes_ == other.sizes_ && weights_.size() == other.weights_.size() &&
           weights_ == other.weights_;
}

namespace {

// Trigonometric tables cos(k x_i), sin(k x_i) for k = 0..cutoff along one axis.
struct TrigTable {
    Eigen::MatrixXd c;
    Eigen::MatrixXd s;
};

TrigTable trig_table(std::size_t n, int cutoff) {
    TrigTable t{Eigen::MatrixXd(n, cutoff + 1), Eigen::MatrixXd(n, cutoff + 1)};
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        for (int k = 0; k <= cutoff; ++k) {
            t.c(i, k) = std::cos(k * x);
            t.s(i, k) = std::sin(k * x);
        }
    }
    return t;
}

Eigen::VectorXd band_limited_sample(const DiscreteSpace& space, std::mt19937_64& rng, int cutoff) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(space.points());
    if (space.dim() == 1) {
        const auto tab = trig_table(space.sizes()[0], cutoff);
        f.array() += normal(rng);
        for (int k = 1; k <= cutoff; ++k) {
            const double amp = 1.0 / (1.0 + k * k);
            const double a = amp * normal(rng);
            const double b = amp * normal(rng);
            f += a * tab.c.col(k) + b * tab.s.col(k);
        }
        return f;
    }
    const std::size_t n0 = space.sizes()[0];
    const std::size_t n1 = space.sizes()[1];
    const auto t0 = trig_table(n0, cutoff);
    const auto t1 = trig_table(n1, cutoff);
    f.array() += normal(rng);
    // Half-plane of wavevectors: k0 > 0, or k0 == 0 and k1 > 0.
    for (int k0 = 0; k0 <= cutoff; ++k0) {
        for (int k1 = -cutoff; k1 <= cutoff; ++k1) {
            if (k0 == 0 && k1 <= 0) continue;
            const double amp = 1.0 / (1.0 + k0 * k0 + k1 * k1);
            const double a = amp * normal(rng);
            const double b = amp * normal(rng);
            const int ak1 = std::abs(k1);
            const double sign1 = k1 < 0 ? -1.0 : 1.0;
            for (std::size_t i = 0; i < n0; ++i) {
                const double c0 = t0.c(i, k0);
                const double s0 = t0.s(i, k0);
                for (std::size_t j = 0; j < n1; ++j) {
                    const double c1 = t1.c(j, ak1);
                    const double s1 = sign1 * t1.s(j, ak1);
                    // cos(k.x) and sin(k.x) by angle addition
                    const double ck = c0 * c1 - s0 * s1;
                    const double sk = s0 * c1 + c0 * s1;
                    f[static_cast<Eigen::Index>(i * n1 + j)] += a * ck + b * sk;
                }
            }
        }
    }
    return f;
}

void check_cutoff(const DiscreteSpace& space, int cutoff) {
    if (cutoff < 0) throw ParameterError("mode cutoff must be non-negative");
    for (std::size_t n : space.sizes()) {
        if (2 * static_cast<std::size_t>(cutoff) >= n) {
            throw ParameterError("mode cutoff must lie below the Nyquist wavenumber");
        }
    }
}

}  // namespace

Eigen::VectorXd random_smooth_scalar(const SpaceHandle& space, std::uint64_t seed, int mode_cutoff) {
    std::mt19937_64 rng(seed);
    if (!space->is_grid()) {
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd f(space->points());
        for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = normal(rng);
        return f;
    }
    check_cutoff(*space, mode_cutoff);
    return band_limited_sample(*space, rng, mode_cutoff);
}

VectorFieldd random_smooth_field(const SpaceHandle& space, Eigen::Index components, std::uint64_t seed,
                                 int mode_cutoff) {
    if (components < 1) throw ParameterError("random_smooth_field needs at least one component");
    VectorFieldd out(space, components);
    std::mt19937_64 rng(seed);
    if (!space->is_grid()) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index c = 0; c < components; ++c) {
            for (Eigen::Index i = 0; i < space->points(); ++i) out.values()(i, c) = normal(rng);
        }
        return out;
    }
    check_cutoff(*space, mode_cutoff);
    for (Eigen::Index c = 0; c < components; ++c) out.component(c) = band_limited_sample(*space, rng, mode_cutoff);
    return out;
}

}  // namespace ballistic
