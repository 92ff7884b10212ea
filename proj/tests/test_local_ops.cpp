#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "avem/local_ops.hpp"
#include "avem/reference_solution.hpp"
#include "support.hpp"

using namespace avem;
using avem::testing::global_poly;

namespace {

Poly random_poly(const Frame& fr, int degree, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Poly p(fr, degree);
    for (int i = 0; i < p.coef().size(); ++i) p.coef()(i) = u(rng);
    return p;
}

double max_coef_diff(const Poly& a, const Poly& b) {
    const int d = std::max(a.degree(), b.degree());
    return (a.rebased(b.frame()).with_degree(d) - b.with_degree(d)).coef().cwiseAbs().maxCoeff();
}

// Unit square with element 0 bisected: element 1 is a polygon with a
// refined diagonal.
Mesh hanging_square(int k) {
    Mesh m = Mesh::unit_square(k, 3);
    m.bisect(0);
    return m;
}

PiecewiseData variable_data(const Mesh& m) {
    const int k = m.degree();
    return PiecewiseData::uniform(m, global_poly(k - 1, {{2.0, 0, 0}, {0.5, 1, 0}}), global_poly(0, {{0.3, 0, 0}}),
                                  global_poly(k - 1, {{1.5, 0, 0}, {0.25, 0, 1}}),
                                  global_poly(k - 1, {{1.0, 0, 0}, {0.5, 0, 1}}),
                                  global_poly(k - 1, {{1.0, 0, 0}, {1.0, 1, 0}}));
}

}  // namespace

TEST_CASE("local DOF counts") {
    for (int k : {2, 3, 4}) {
        const Mesh m = Mesh::unit_square(k);
        CHECK(local_dof_map(m, 0).size() == 3 * k + k * (k - 1) / 2);
        const Mesh h = hanging_square(k);
        const LocalDofMap map = local_dof_map(h, 1);
        CHECK(map.leaves.size() == 4);
        CHECK(map.boundary_count() == 4 * k);
        CHECK(map.moments == k * (k - 1) / 2);
    }
}

TEST_CASE("projectors reproduce polynomials") {
    std::mt19937_64 rng(11);
    for (int k : {2, 3, 4}) {
        const Mesh m = hanging_square(k);
        const PiecewiseData data = variable_data(m);
        for (int e : m.active_elements()) {
            const LocalOps ops = build_local_ops(m, e, data);
            for (int t = 0; t < 3; ++t) {
                const Poly q = random_poly(ops.frame, k, rng);
                const Eigen::VectorXd d = polynomial_dofs(m, ops, q);
                CHECK(max_coef_diff(apply_pi_nabla(ops, d), q) < 1e-10);
                CHECK(max_coef_diff(apply_pi0(ops, d), q) < 1e-10);
                CHECK(max_coef_diff(apply_lagrange(ops, d), q) < 1e-10);
                const auto g = apply_pi0_grad(ops, d);
                CHECK(max_coef_diff(g[0], q.derivative(0)) < 1e-9);
                CHECK(max_coef_diff(g[1], q.derivative(1)) < 1e-9);
                CHECK(stabilization_energy(ops, d) < 1e-20);
            }
        }
    }
}

TEST_CASE("enhancement identity for basis functions") {
    for (int k : {2, 3}) {
        const Mesh m = hanging_square(k);
        const PiecewiseData data = variable_data(m);
        for (int e : m.active_elements()) {
            const LocalOps ops = build_local_ops(m, e, data);
            const int nb = ops.dofs.boundary_count();
            for (int i = 0; i < ops.ndof(); ++i) {
                const Eigen::VectorXd d = Eigen::VectorXd::Unit(ops.ndof(), i);
                const Poly p0 = apply_pi0(ops, d);
                const Poly pn = apply_pi_nabla(ops, d);
                const auto& ex = monomial_exponents(k);
                for (int j = 0; j < monomial_count(k); ++j) {
                    Poly mj(ops.frame, k);
                    mj.coef()(j) = 1.0;
                    const double m0 = integrate(ops.tri, [&](const Vec2& x) { return p0(x) * mj(x); }, 2 * k) / ops.area;
                    if (ex[j][0] + ex[j][1] >= k - 1) {
                        // Degrees k-1 and k come from the elliptic projection.
                        const double mn =
                            integrate(ops.tri, [&](const Vec2& x) { return pn(x) * mj(x); }, 2 * k) / ops.area;
                        CHECK(m0 == doctest::Approx(mn).epsilon(1e-10).scale(1.0));
                    } else {
                        // Lower moments are the DOFs themselves.
                        CHECK(m0 == doctest::Approx(d(nb + j)).epsilon(1e-10).scale(1.0));
                    }
                }
            }
        }
    }
}

TEST_CASE("local forms agree with quadrature on polynomials") {
    std::mt19937_64 rng(13);
    for (int k : {2, 3, 4}) {
        const Mesh m = hanging_square(k);
        const PiecewiseData data = variable_data(m);
        for (int e : m.active_elements()) {
            const ElementData ed = data.on_element(m, e);
            const LocalOps ops = build_local_ops(m, e, ed);
            const Poly p = random_poly(ops.frame, k, rng);
            const Poly q = random_poly(ops.frame, k, rng);
            const Eigen::VectorXd dp = polynomial_dofs(m, ops, p);
            const Eigen::VectorXd dq = polynomial_dofs(m, ops, q);
            const double a = integrate(
                ops.tri,
                [&](const Vec2& x) {
                    const Eigen::Vector2d gp(p.derivative(0)(x), p.derivative(1)(x));
                    const Eigen::Vector2d gq(q.derivative(0)(x), q.derivative(1)(x));
                    return gp.dot(ed.A_at(x) * gq);
                },
                3 * k);
            const double c = integrate(ops.tri, [&](const Vec2& x) { return ed.c(x) * p(x) * q(x); }, 3 * k);
            const double l = integrate(ops.tri, [&](const Vec2& x) { return ed.f(x) * q(x); }, 3 * k);
            CHECK(dp.dot(ops.stiffness * dq) == doctest::Approx(a).epsilon(1e-10));
            CHECK(dp.dot(ops.mass * dq) == doctest::Approx(c).epsilon(1e-10));
            CHECK(ops.load.dot(dq) == doctest::Approx(l).epsilon(1e-10));
        }
    }
}

TEST_CASE("stiffness on the Lagrange basis equals the conforming element matrix") {
    for (int k : {2, 3, 4}) {
        const Mesh m = Mesh::unit_square(k);
        const PiecewiseData data = variable_data(m);
        for (int e : m.active_elements()) {
            const ElementData ed = data.on_element(m, e);
            const LocalOps ops = build_local_ops(m, e, ed);
            const auto nodes = conforming_nodes(ops.tri, k);
            const int n = static_cast<int>(nodes.size());
            REQUIRE(n == monomial_count(k));
            // Lagrange basis through a Vandermonde solve.
            Eigen::MatrixXd V(n, n);
            for (int i = 0; i < n; ++i) V.row(i) = eval_monomials(ops.frame, k, nodes[i]).transpose();
            const Eigen::MatrixXd C = V.inverse();
            Eigen::MatrixXd D(ops.ndof(), n);
            for (int j = 0; j < n; ++j) D.col(j) = polynomial_dofs(m, ops, Poly(ops.frame, k, C.col(j)));
            const Eigen::MatrixXd vem = D.transpose() * ops.stiffness * D;
            const Eigen::MatrixXd fem = conforming_stiffness(ops.tri, k, ed);
            CHECK((vem - fem).cwiseAbs().maxCoeff() < 1e-9 * fem.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("local matrices are symmetric with constants in the kernel") {
    for (int k : {2, 3, 4}) {
        const Mesh m = hanging_square(k);
        const PiecewiseData data = variable_data(m);
        for (int e : m.active_elements()) {
            const LocalOps ops = build_local_ops(m, e, data);
            CHECK((ops.stiffness - ops.stiffness.transpose()).norm() < 1e-12 * ops.stiffness.norm());
            CHECK((ops.mass - ops.mass.transpose()).norm() < 1e-12 * ops.mass.norm());
            CHECK((ops.stab - ops.stab.transpose()).norm() < 1e-12 * (1.0 + ops.stab.norm()));
            const Eigen::VectorXd one = polynomial_dofs(m, ops, Poly::constant(ops.frame, 1.0));
            CHECK((ops.stiffness * one).norm() < 1e-11);
            CHECK((ops.stab * one).norm() < 1e-11);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ops.stiffness + ops.stab);
            CHECK(es.eigenvalues().minCoeff() > -1e-11);
        }
    }
}

TEST_CASE("stabilization sees a perturbed hanging value only on the coarse side") {
    const int k = 2;
    Mesh m = hanging_square(k);
    const PiecewiseData data = variable_data(m);
    const LocalOps coarse = build_local_ops(m, 1, data);
    const Poly q = global_poly(2, {{1.0, 2, 0}, {-1.0, 1, 1}}).rebased(coarse.frame);
    Eigen::VectorXd d = polynomial_dofs(m, coarse, q);
    CHECK(stabilization_energy(coarse, d) < 1e-20);
    // Find a hanging node among the coarse element's boundary DOFs.
    int slot = -1;
    for (int i = 0; i < coarse.dofs.boundary_count(); ++i) {
        if (m.is_hanging(coarse.dofs.boundary_nodes[i])) slot = i;
    }
    REQUIRE(slot >= 0);
    d(slot) += 1e-3;
    CHECK(stabilization_energy(coarse, d) > 1e-8);
    // On a conforming triangle every boundary DOF is interpolated, so S vanishes.
    const LocalOps child = build_local_ops(m, m.active_elements().back(), data);
    Eigen::VectorXd dc = Eigen::VectorXd::Random(child.ndof());
    CHECK(stabilization_energy(child, dc) < 1e-20);
}
