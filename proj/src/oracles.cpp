#include "ballistic/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "ballistic/instances.hpp"
#include "ballistic/parallel.hpp"
#include "ballistic/spectral.hpp"

namespace ballistic {

OdeOracle ode_oracle(const SpaceHandle& atoms, const Eigen::VectorXd& v0, const TimeGrid& tg) {
    if (!atoms || atoms->is_grid()) throw UnsupportedSpaceError("ode oracle requires an atom space");
    if (v0.size() != atoms->points()) throw DimensionError("ode oracle: one initial value per atom");
    const double T = tg.horizon();
    const double worst = (T * v0.array() + 2.0).minCoeff();
    if (!(worst > 0.0)) throw OracleRefused("ode oracle: T v0 + 2 must be positive at every atom", worst);

    OdeOracle out;
    const Eigen::ArrayXd a = v0.array() / (T * v0.array() + 2.0);
    auto rho = [a, T](double t) { return ((a * (t - T) + 1.0).square()).eval(); };
    out.oracle.instance = "ode";
    out.oracle.evaluate = [atoms, v0](double t) {
        VectorFieldd u(atoms, 1);
        u.component(0) = (2.0 * v0.array() / (2.0 + t * v0.array())).matrix();
        return u;
    };
    out.oracle.K0 = 0.5 * weighted_sum<double>(*atoms, v0.cwiseProduct(v0));
    out.oracle.horizon = T;
    out.oracle.tolerance = 1e-14;
    out.J_closed = weighted_sum<double>(*atoms, (v0.array() - 2.0 * v0.array() / (2.0 + T * v0.array())).matrix());

    const int N = tg.steps();
    for (int k = 0; k <= N; ++k) {
        SymMatrixFieldd b(atoms, 1);
        b.entry(0, 0) = (k == N ? Eigen::ArrayXd::Zero(v0.size()) : ((rho(tg.node(k)) - 1.0) * 0.5).eval()).matrix();
        out.B.push_back(std::move(b));
    }
    for (int k = 0; k < N; ++k) {
        // E_k = 2 (B_k - B_{k+1}) / dt, so integrate_B_from_E reproduces B exactly
        VectorFieldd e(atoms, 1);
        e.component(0) = 2.0 * (out.B[k].entry(0, 0) - out.B[k + 1].entry(0, 0)) / tg.dt();
        out.E.push_back(std::move(e));
    }
    return out;
}

namespace {

// Real trigonometric interpolant of 1D grid data, keeping only non-negligible modes.
struct TrigSeries {
    double mean = 0.0;
    std::vector<int> k;
    std::vector<double> c, s;  // f = mean + sum c cos(k x) + s sin(k x)

    explicit TrigSeries(const VectorFieldd& v) {
        const DiscreteSpace& space = *v.space();
        const Eigen::Index n = space.points();
        const Eigen::VectorXcd coef = fourier_forward(space, Eigen::VectorXd(v.component(0)));
        mean = coef[0].real() / static_cast<double>(n);
        const double big = coef.cwiseAbs().maxCoeff();
        for (Eigen::Index m = 1; 2 * m <= n; ++m) {
            if (std::abs(coef[m]) <= 1e-15 * big) continue;
            const double f = 2 * m == n ? 1.0 : 2.0;
            k.push_back(static_cast<int>(m));
            c.push_back(f * coef[m].real() / static_cast<double>(n));
            s.push_back(2 * m == n ? 0.0 : -f * coef[m].imag() / static_cast<double>(n));
        }
    }

    void eval(double x, double& f, double& df) const {
        f = mean;
        df = 0.0;
        for (std::size_t i = 0; i < k.size(); ++i) {
            const double cs = std::cos(k[i] * x), sn = std::sin(k[i] * x);
            f += c[i] * cs + s[i] * sn;
            df += k[i] * (s[i] * cs - c[i] * sn);
        }
    }
};

void require_burgers_data(const SpaceHandle& grid, const VectorFieldd& v0) {
    if (!grid || !grid->is_grid() || grid->dim() != 1) throw UnsupportedSpaceError("burgers oracle requires a 1D torus grid");
    if (!same_space(grid, v0.space()) || v0.components() != 1) throw DimensionError("burgers oracle: v0 must be a scalar field on the grid");
}

// Extremes of f and -f' sampled on a grid refined 16 times.
void sample_extremes(const TrigSeries& ts, std::size_t n, double& max_abs, double& max_neg_slope) {
    const std::size_t fine = 16 * n;
    max_abs = 0.0;
    max_neg_slope = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fine; ++i) {
        double f, df;
        ts.eval(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(fine), f, df);
        max_abs = std::max(max_abs, std::abs(f));
        max_neg_slope = std::max(max_neg_slope, -df);
    }
}

}  // namespace

double burgers_shock_time(const VectorFieldd& v0) {
    require_burgers_data(v0.space(), v0);
    const TrigSeries ts(v0);
    double max_abs, slope;
    sample_extremes(ts, v0.space()->size(), max_abs, slope);
    return slope > 0.0 ? 1.0 / slope : std::numeric_limits<double>::infinity();
}

StrongOracle burgers_characteristics_oracle(const SpaceHandle& grid, const VectorFieldd& v0, double T) {
    require_burgers_data(grid, v0);
    auto ts = std::make_shared<const TrigSeries>(v0);
    double max_abs, slope;
    sample_extremes(*ts, grid->size(), max_abs, slope);
    const double shock = slope > 0.0 ? 1.0 / slope : std::numeric_limits<double>::infinity();
    if (!(T < shock)) throw OracleRefused("burgers oracle: horizon is past the shock time", shock);
    const double reach = 1.05 * max_abs + 1e-12;

    StrongOracle o;
    o.instance = "burgers1d";
    o.K0 = energy(v0);
    o.horizon = shock;
    o.tolerance = 1e-10;
    o.evaluate = [grid, ts, reach, shock](double t) {
        if (!(t < shock)) throw OracleRefused("burgers oracle: time is past the shock time", shock);
        const Eigen::VectorXd x = grid->coordinate(0);
        VectorFieldd u(grid, 1);
        auto col = u.component(0);
        parallel_for(static_cast<std::size_t>(x.size()), [&](std::size_t p) {
            const double xp = x[static_cast<Eigen::Index>(p)];
            double lo = xp - t * reach, hi = xp + t * reach;
            double f, df;
            ts->eval(xp, f, df);
            double xi = std::clamp(xp - t * f, lo, hi);
            for (int it = 0; it < 200; ++it) {
                ts->eval(xi, f, df);
                const double F = xi + t * f - xp;
                if (std::abs(F) <= 1e-13) break;
                (F > 0.0 ? hi : lo) = xi;
                const double dF = 1.0 + t * df;
                double next = dF > 0.0 ? xi - F / dF : lo - 1.0;
                if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
                if (hi - lo < 1e-15) break;
                xi = next;
            }
            ts->eval(xi, f, df);
            col[static_cast<Eigen::Index>(p)] = f;
        });
        return u;
    };
    return o;
}

StrongOracle stationary_euler_oracle(const SpaceHandle& grid) {
    if (!grid || !grid->is_grid() || grid->dim() != 2) throw UnsupportedSpaceError("stationary Euler oracle requires a 2D torus grid");
    if (grid->sizes()[0] < 32 || grid->sizes()[1] < 32) throw ParameterError("stationary Euler oracle needs at least a 32x32 grid");
    const Eigen::ArrayXd x = grid->coordinate(0).array(), y = grid->coordinate(1).array();
    VectorFieldd u(grid, 2);
    u.component(0) = (x.sin() * y.cos()).matrix();
    u.component(1) = (-x.cos() * y.sin()).matrix();

    const OperatorInstance inst = make_euler2d_instance(grid);
    const SymMatrixFieldd s = inst.Lstar(u);
    double lambda = 0.0;
    for (Eigen::Index p = 0; p < s.points(); ++p) {
        Eigen::SelfAdjointEigenSolver<PointMatrix<double>> es(s.matrix_at(p), Eigen::EigenvaluesOnly);
        lambda = std::max(lambda, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    StrongOracle o;
    o.instance = "euler2d";
    o.K0 = energy(u);
    o.horizon = lambda > 0.0 ? 1.0 / (2.0 * lambda) : std::numeric_limits<double>::infinity();
    o.tolerance = 1e-12;
    o.evaluate = [u](double) { return u; };
    return o;
}

StrongOracle constant_kdv_oracle(const SpaceHandle& grid, double c) {
    if (!grid || !grid->is_grid() || grid->dim() != 1) throw UnsupportedSpaceError("constant KdV oracle requires a 1D torus grid");
    VectorFieldd u(grid, 2);
    u.component(0).setConstant(c);
    u.component(1).setOnes();
    StrongOracle o;
    o.instance = "kdv";
    o.K0 = energy(u);
    o.tolerance = 1e-14;
    o.evaluate = [u](double) { return u; };
    return o;
}

VectorFieldd euler_rhs(const OperatorInstance& inst, const VectorFieldd& v) {
    if (!inst.space->is_grid()) return -2.0 * inst.P(apply(inst.Lstar(v), v));
    const VectorFieldd vd = dealias(v);
    return -2.0 * inst.P(dealias(apply(inst.Lstar(vd), vd)));
}

ConsistencyPair consistency_pair(const OperatorInstance& inst, const TimeGrid& tg, const StrongOracle& oracle) {
    const double T = tg.horizon();
    const int N = tg.steps();
    ConsistencyPair out;
    std::vector<VectorFieldd> a(static_cast<std::size_t>(N) + 1);
    out.B_analytic.resize(static_cast<std::size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) {
        const double t = tg.node(k);
        if (k == N) {
            a[k] = VectorFieldd(inst.space, inst.n);
            out.B_analytic[k] = SymMatrixFieldd(inst.space, inst.n);
            continue;
        }
        const VectorFieldd u = oracle.evaluate(t);
        inst.check_vector(u);
        a[k] = (T - t) * u;
        out.B_analytic[k] = (T - t) * inst.Lstar(u);
    }
    out.min_eigenvalue = feasibility_margin(out.B_analytic);
    if (out.min_eigenvalue < -1e-8) {
        throw OracleRefused("consistency pair: I + 2 (T - t) L* u is not positive semidefinite", out.min_eigenvalue);
    }
    for (int k = 0; k < N; ++k) {
        const double tm = tg.midpoint(k);
        const VectorFieldd u = oracle.evaluate(tm);
        const VectorFieldd q = apply(inst.Lstar(u), u);
        const VectorFieldd w = (2.0 * (tm - T)) * (q - inst.P(q));
        out.E.push_back((1.0 / tg.dt()) * (a[k + 1] - a[k]) + w);
    }
    out.B = integrate_B_from_E(inst, tg, out.E);
    return out;
}

MarchResult strong_march(const OperatorInstance& inst, const TimeGrid& tg, const VectorFieldd& v0_in, int substeps) {
    if (!inst.flags.conservative) throw ParameterError("strong_march requires a conservative instance");
    if (substeps < 1) throw ParameterError("strong_march needs at least one substep");
    inst.check_vector(v0_in);
    VectorFieldd v = inst.space->is_grid() ? inst.P(dealias(v0_in)) : inst.P(v0_in);
    const double K0 = energy(v);
    const double h = tg.dt() / substeps;
    MarchResult out;
    out.v.push_back(v);
    for (int k = 0; k < tg.steps(); ++k) {
        for (int s = 0; s < substeps; ++s) {
            const VectorFieldd k1 = euler_rhs(inst, v);
            const VectorFieldd k2 = euler_rhs(inst, v + (0.5 * h) * k1);
            const VectorFieldd k3 = euler_rhs(inst, v + (0.5 * h) * k2);
            const VectorFieldd k4 = euler_rhs(inst, v + h * k3);
            v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (K0 > 0.0) {
            const double drift = std::abs(energy(v) - K0) / K0;
            out.max_energy_drift = std::max(out.max_energy_drift, drift);
            if (drift > 1e-4) {
                throw ResolutionError("strong_march: relative energy drift " + std::to_string(drift) + " at t = " +
                                      std::to_string(tg.node(k + 1)) + "; refine the time step or the grid");
            }
        }
        out.v.push_back(v);
    }
    return out;
}

}  // namespace ballistic
