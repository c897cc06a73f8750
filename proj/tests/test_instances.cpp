#include "doctest.h"

#include <cmath>

#include "ballistic/instances.hpp"
#include "ballistic/spectral.hpp"

using namespace ballistic;

namespace {

double max_abs(const Eigen::MatrixXd& v) { return v.cwiseAbs().maxCoeff(); }

VectorFieldd taylor_green(const SpaceHandle& g) {
    const Eigen::VectorXd x = g->coordinate(0), y = g->coordinate(1);
    VectorFieldd u(g, 2);
    u.component(0) = x.array().sin() * y.array().cos();
    u.component(1) = -(x.array().cos() * y.array().sin());
    return u;
}

}  // namespace

TEST_CASE("ode instance") {
    auto a = DiscreteSpace::atoms(3);
    const OperatorInstance inst = make_ode_instance(a);
    CHECK(inst.n == 1);
    SymMatrixFieldd two(a, 1);
    two.entry(0, 0).setConstant(2.0);
    CHECK(max_abs(inst.L(two).values() + Eigen::MatrixXd::Ones(3, 1)) == 0.0);
    CHECK(check_adjoint(inst, 20, 1).max_defect <= 1e-14);

    VectorFieldd one(a, 1);
    one.component(0).setConstant(1.0);
    // -1/2 * integral of v^3
    CHECK(inner_product_vec(inst.L(outer(one)), one) == doctest::Approx(-0.5));
    CHECK_FALSE(inst.flags.conservative);
    CHECK_THROWS_AS(make_ode_instance(DiscreteSpace::torus({8})), UnsupportedSpaceError);
}

TEST_CASE("burgers instance") {
    auto g = DiscreteSpace::torus({64});
    const OperatorInstance inst = make_burgers_instance(g);
    const Eigen::VectorXd x = g->coordinate(0);
    SymMatrixFieldd m(g, 1);
    m.entry(0, 0) = x.array().sin();
    CHECK(max_abs(inst.L(m).component(0) + 0.5 * Eigen::VectorXd(x.array().cos())) <= 1e-11);
    CHECK(norm(inst.PL(identity_field<double>(g, 1))) <= 1e-14);

    VectorFieldd v(g, 1);
    v.component(0) = x.array().cos();
    // direct quadrature of -1/2 cos^2
    double direct = 0.0;
    for (Eigen::Index i = 0; i < 64; ++i) direct += -0.5 * std::cos(x[i]) * std::cos(x[i]) / 64.0;
    CHECK(direct == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK(std::abs(inner_product_vec(inst.L(m), v) - direct) <= 1e-12);
    CHECK(std::abs(inner_product_sym(m, inst.Lstar(v)) - direct) <= 1e-12);

    VectorFieldd s(g, 1);
    s.component(0) = x.array().sin();
    CHECK(std::abs(inner_product_vec(inst.L(outer(s)), s)) <= 1e-12);
    CHECK_THROWS_AS(make_burgers_instance(DiscreteSpace::torus({8, 8})), DimensionError);
}

TEST_CASE("euler2d instance") {
    auto g = DiscreteSpace::torus({32, 32});
    const OperatorInstance inst = make_euler2d_instance(g);
    const Eigen::VectorXd x = g->coordinate(0), y = g->coordinate(1);
    const Eigen::VectorXd q = (x + y).array().sin();
    CHECK(norm(inst.PL(scalar_identity<double>(g, 2, q))) <= 1e-10);

    const VectorFieldd u = taylor_green(g);
    CHECK(norm(inst.PL(outer(u))) <= 1e-9);

    // sym grad u of Taylor-Green is diag(cos x cos y, -cos x cos y)
    const SymMatrixFieldd s = inst.Lstar(u);
    const Eigen::VectorXd cc = x.array().cos() * y.array().cos();
    CHECK(max_abs(s.entry(0, 0) - cc) <= 1e-12);
    CHECK(max_abs(s.entry(1, 1) + cc) <= 1e-12);
    CHECK(max_abs(s.entry(0, 1)) <= 1e-12);
    CHECK(check_adjoint(inst, 20, 3).max_defect <= 1e-10);
}

TEST_CASE("mhd2d reduces to euler when b = 0") {
    auto g = DiscreteSpace::torus({16, 16});
    const OperatorInstance mhd = make_mhd2d_instance(g);
    const OperatorInstance euler = make_euler2d_instance(g);
    const VectorFieldd u = euler.P(random_smooth_field(g, 2, 4, 4));
    VectorFieldd v(g, 4);
    v.values().leftCols(2) = u.values();
    const VectorFieldd lm = mhd.L(outer(v));
    const VectorFieldd le = euler.L(outer(u));
    CHECK(max_abs(lm.values().leftCols(2) - le.values()) <= 1e-12);
    CHECK(max_abs(lm.values().rightCols(2)) <= 1e-12);

    const Eigen::VectorXd q = random_smooth_scalar(g, 9, 4);
    CHECK(norm(mhd.PL(scalar_identity<double>(g, 4, q))) <= 1e-10 * (1.0 + q.norm()));
    CHECK(trace_probe(mhd, 20, 2).max_defect <= 1e-10);
}

TEST_CASE("mhd2d induction term matches the classical form") {
    // div(u b^T) - div(b u^T) = (b.grad)u - (u.grad)b for divergence-free u, b
    auto g = DiscreteSpace::torus({16, 16});
    const OperatorInstance mhd = make_mhd2d_instance(g);
    const VectorFieldd v = mhd.P(random_smooth_field(g, 4, 12, 3));
    const VectorFieldd u(g, Eigen::MatrixXd(v.values().leftCols(2)));
    const VectorFieldd b(g, Eigen::MatrixXd(v.values().rightCols(2)));
    const auto gu = spectral_jacobian(u);
    const auto gb = spectral_jacobian(b);
    Eigen::MatrixXd expect(g->points(), 2);
    for (int i = 0; i < 2; ++i) {
        expect.col(i).setZero();
        for (int j = 0; j < 2; ++j) {
            expect.col(i) += b.component(j).cwiseProduct(gu[i][j]) - u.component(j).cwiseProduct(gb[i][j]);
        }
    }
    const VectorFieldd lv = mhd.L(outer(v));
    // products of band-limited fields are resolved on this grid
    CHECK(max_abs(lv.values().rightCols(2) - expect) <= 1e-11);
}

TEST_CASE("kdv extended instance") {
    auto g = DiscreteSpace::torus({32});
    const OperatorInstance inst = make_kdv_extended_instance(g);
    CHECK(inst.n == 2);
    CHECK(inst.has_linear_term());
    const Eigen::VectorXd x = g->coordinate(0);

    SymMatrixFieldd w(g, 2);
    w.entry(0, 0) = x.array().sin();
    w.entry(1, 1).setConstant(0.3);
    const VectorFieldd lw = inst.L(w);
    CHECK(max_abs(lw.component(0) - 3.0 * Eigen::VectorXd(x.array().cos())) <= 1e-10);
    CHECK(max_abs(lw.component(1)) == 0.0);

    VectorFieldd c(g, 2);
    c.component(0).setConstant(0.8);
    c.component(1).setConstant(1.0);
    CHECK(max_abs(inst.L(outer(c)).values()) <= 1e-12);

    // analytic adjoint 1/2 [[-6 phi_x, phi_xxx], [phi_xxx, 0]]
    VectorFieldd phi(g, 2);
    phi.component(0) = (2 * x).array().sin();
    phi.component(1) = x.array().cos();
    const SymMatrixFieldd ls = inst.Lstar(phi);
    CHECK(max_abs(ls.entry(0, 0) + 6.0 * Eigen::VectorXd((2 * x).array().cos())) <= 1e-10);
    CHECK(max_abs(ls.entry(0, 1) + 4.0 * Eigen::VectorXd((2 * x).array().cos())) <= 1e-10);
    CHECK(max_abs(ls.entry(1, 1)) == 0.0);

    const VectorFieldd p = inst.P(phi);
    CHECK(max_abs(p.component(1)) <= 1e-15);
    CHECK(check_adjoint(inst, 20, 4).max_defect <= 1e-10);
}

TEST_CASE("template matching instance") {
    auto g = DiscreteSpace::torus({32});
    const OperatorInstance inst = make_template_matching_instance(g);
    const Eigen::VectorXd x = g->coordinate(0);
    SymMatrixFieldd m(g, 1);
    m.entry(0, 0) = (3 * x).array().cos();
    // one-dimensional reduction: L m = -3/2 m_x
    CHECK(max_abs(inst.L(m).component(0) - 4.5 * Eigen::VectorXd((3 * x).array().sin())) <= 1e-10);
    VectorFieldd psi(g, 1);
    psi.component(0) = x.array().sin();
    CHECK(max_abs(inst.Lstar(psi).entry(0, 0) - 1.5 * Eigen::VectorXd(x.array().cos())) <= 1e-12);
    CHECK(check_adjoint(inst, 20, 8).max_defect <= 1e-12);
    CHECK(norm(inst.PL(identity_field<double>(g, 1))) <= 1e-14);

    auto g2 = DiscreteSpace::torus({16, 16});
    const OperatorInstance inst2 = make_template_matching_instance(g2);
    CHECK(inst2.n == 2);
    CHECK(norm(inst2.PL(identity_field<double>(g2, 2))) <= 1e-14);
}

TEST_CASE("make_instance by name") {
    CHECK(instance_names().size() == 6);
    CHECK(make_instance("burgers1d", DiscreteSpace::torus({8})).name == "burgers1d");
    CHECK_THROWS_AS(make_instance("navier", DiscreteSpace::torus({8})), ParameterError);
}
