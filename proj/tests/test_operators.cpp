#include "doctest.h"

#include <cmath>

#include "ballistic/instances.hpp"
#include "ballistic/operators.hpp"
#include "ballistic/spectral.hpp"

using namespace ballistic;

namespace {

double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("spectral_derivative of Fourier modes") {
    auto g = DiscreteSpace::torus({32});
    const Eigen::VectorXd x = g->coordinate(0);
    const Eigen::VectorXd s1 = x.array().sin();
    CHECK(max_abs(spectral_derivative(*g, s1, 0, 1) - Eigen::VectorXd(x.array().cos())) <= 1e-11);

    const Eigen::VectorXd s2 = (2 * x).array().sin();
    const Eigen::VectorXd expect3 = -8.0 * (2 * x).array().cos();
    CHECK(max_abs(spectral_derivative(*g, s2, 0, 3) - expect3) <= 1e-10);
    const Eigen::VectorXd expect2 = -4.0 * (2 * x).array().sin();
    CHECK(max_abs(spectral_derivative(*g, s2, 0, 2) - expect2) <= 1e-10);

    const Eigen::VectorXd c = Eigen::VectorXd::Constant(32, 3.5);
    for (int order = 1; order <= 3; ++order) CHECK(max_abs(spectral_derivative(*g, c, 0, order)) <= 1e-12);

    CHECK_THROWS_AS(spectral_derivative(*DiscreteSpace::atoms(3), Eigen::VectorXd::Ones(3), 0, 1), UnsupportedSpaceError);
    CHECK_THROWS_AS(spectral_derivative(*g, c, 0, 4), ParameterError);
}

TEST_CASE("spectral_derivative on a rectangular 2D grid") {
    auto g = DiscreteSpace::torus({16, 24});
    const Eigen::VectorXd x = g->coordinate(0), y = g->coordinate(1);
    const Eigen::VectorXd f = (x + 2 * y).array().sin();
    const Eigen::VectorXd fx = (x + 2 * y).array().cos();
    CHECK(max_abs(spectral_derivative(*g, f, 0, 1) - fx) <= 1e-11);
    CHECK(max_abs(spectral_derivative(*g, f, 1, 1) - 2 * fx) <= 1e-11);
}

TEST_CASE("odd derivatives are exactly skew") {
    auto g = DiscreteSpace::torus({16});
    const Eigen::VectorXd a = random_smooth_scalar(g, 1, 7);
    Eigen::VectorXd b = random_smooth_scalar(g, 2, 7);
    b[3] += 1.0;  // excite the Nyquist mode as well
    for (int order : {1, 3}) {
        const double lhs = weighted_sum<double>(*g, spectral_derivative(*g, a, 0, order).cwiseProduct(b));
        const double rhs = weighted_sum<double>(*g, a.cwiseProduct(spectral_derivative(*g, b, 0, order)));
        CHECK(std::abs(lhs + rhs) <= 1e-12);
    }
}

TEST_CASE("leray_project") {
    auto g = DiscreteSpace::torus({32, 32});
    const Eigen::VectorXd x = g->coordinate(0), y = g->coordinate(1);

    VectorFieldd grad(g, 2);
    grad.component(0) = (x + y).array().cos();
    grad.component(1) = (x + y).array().cos();
    CHECK(norm(leray_project(grad)) <= 1e-10);

    VectorFieldd tg(g, 2);
    tg.component(0) = x.array().sin() * y.array().cos();
    tg.component(1) = -(x.array().cos() * y.array().sin());
    CHECK(norm(leray_project(tg) - tg) <= 1e-10);

    VectorFieldd sh(g, 2);
    sh.component(0) = y.array().sin();
    sh.component(1) = x.array().sin();
    CHECK(max_abs(divergence(sh)) <= 1e-12);
    CHECK(norm(leray_project(sh) - sh) <= 1e-10);

    VectorFieldd constant(g, 2);
    constant.component(0).setConstant(0.7);
    constant.component(1).setConstant(-0.2);
    CHECK(norm(leray_project(constant) - constant) <= 1e-14);

    const VectorFieldd r = random_smooth_field(g, 2, 11, 6);
    const VectorFieldd pr = leray_project(r);
    CHECK(max_abs(divergence(pr)) <= 1e-10);
    CHECK(norm(leray_project(pr) - pr) <= 1e-10);

    CHECK_THROWS_AS(leray_project(VectorFieldd(g, 3)), DimensionError);
}

TEST_CASE("dealias removes the upper third") {
    auto g = DiscreteSpace::torus({24});
    const Eigen::VectorXd x = g->coordinate(0);
    const Eigen::VectorXd low = (7 * x).array().cos();
    const Eigen::VectorXd high = (8 * x).array().sin();
    CHECK(dealias_cutoff(24) == 7);
    CHECK(max_abs(dealias(*g, low + high) - low) <= 1e-12);
}

TEST_CASE("probes on every shipped instance") {
    struct Case {
        std::string name;
        SpaceHandle space;
    };
    const std::vector<Case> cases = {
        {"ode", DiscreteSpace::atoms(6)},
        {"burgers1d", DiscreteSpace::torus({32})},
        {"euler2d", DiscreteSpace::torus({16, 16})},
        {"mhd2d", DiscreteSpace::torus({16, 16})},
        {"kdv", DiscreteSpace::torus({32})},
        {"template_matching", DiscreteSpace::torus({32})},
        {"template_matching", DiscreteSpace::torus({16, 16})},
    };
    for (const auto& c : cases) {
        CAPTURE(c.name);
        const OperatorInstance inst = make_instance(c.name, c.space);
        const CheckReport adj = check_adjoint(inst, 20, 5);
        CHECK(adj.max_defect <= 1e-10);
        CHECK(check_projector(inst, 20, 6).max_defect <= 1e-10);
        const CheckReport cons = check_conservativity(inst, 20, 7);
        CHECK(cons.applicable == inst.flags.conservative);
        CHECK(cons.passed());
        CHECK(check_PL_identity(inst, PLIdentity::qI, 20, 8).passed());
        CHECK(check_PL_identity(inst, PLIdentity::I, 20, 9).passed());
        CHECK(trace_probe(inst, 20, 10).passed());
    }
}

TEST_CASE("M = 0 gives vanishing pairings") {
    const OperatorInstance inst = make_euler2d_instance(DiscreteSpace::torus({8, 8}));
    const SymMatrixFieldd zero(inst.space, 2);
    CHECK(norm(inst.L(zero)) == 0.0);
}

TEST_CASE("trace probe evidence") {
    auto g = DiscreteSpace::torus({32});
    const OperatorInstance burgers = make_burgers_instance(g);
    VectorFieldd zeta(g, 1);
    zeta.component(0) = g->coordinate(0).array().sin();
    CHECK(max_abs(trace_of_Lstar(burgers, zeta)) == doctest::Approx(0.5).epsilon(1e-12));
    const CheckReport rep = trace_probe(burgers, 20, 3);
    CHECK_FALSE(rep.applicable);
    CHECK(rep.max_defect > 0.1);

    const OperatorInstance euler = make_euler2d_instance(DiscreteSpace::torus({16, 16}));
    CHECK(trace_probe(euler, 20, 3).max_defect <= 1e-10);
}
