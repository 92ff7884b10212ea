#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "avem/estimators.hpp"
#include "avem/oracles.hpp"
#include "avem/quadrature.hpp"
#include "support.hpp"

using namespace avem;
using avem::testing::global_poly;

namespace {

// Pointwise residual assembled from its three addends.
double residual_at(const LocalOps& ops, const ElementData& d, const Eigen::VectorXd& dofs, const Vec2& x) {
    const auto g = apply_pi0_grad(ops, dofs);
    const Poly s0 = d.a(0, 0) * g[0] + d.a(0, 1) * g[1];
    const Poly s1 = d.a(1, 0) * g[0] + d.a(1, 1) * g[1];
    return d.f(x) + s0.derivative(0)(x) + s1.derivative(1)(x) - d.c(x) * apply_pi0(ops, dofs)(x);
}

// eta^2 of one element from leaf-wise Gauss quadrature.
double eta_sq_oracle(const Discretization& disc, const PiecewiseData& data, const VemFunction& u, int e) {
    const Mesh& m = *disc.mesh;
    const LocalOps& ops = disc.ops_of(e);
    const ElementData d = data.on_element(m, e);
    const Eigen::VectorXd dofs = local_dofs(ops, u);
    const double h = std::sqrt(m.area(e));
    double eta = h * h * integrate(ops.tri, [&](const Vec2& x) { return std::pow(residual_at(ops, d, dofs, x), 2); },
                                   4 * ops.k);
    const auto mine = discrete_flux(ops, d, dofs);
    const LineRule& g = gauss_line(2 * ops.k + 2);
    for (const LeafEdge& leaf : m.polygon_boundary(e)) {
        const int other = m.owner_on_side(leaf.edge, 1 - m.side_of(leaf.edge, e));
        if (other < 0) continue;
        const LocalOps& oops = disc.ops_of(other);
        const auto theirs = discrete_flux(oops, data.on_element(m, other), local_dofs(oops, u));
        const auto p = m.edge_points(leaf.edge);
        const Vec2 t = p[1] - p[0];
        const Vec2 n(t.y(), -t.x());
        double j2 = 0.0;
        for (std::size_t q = 0; q < g.points.size(); ++q) {
            const Vec2 x = p[0] + g.points[q] * t;
            const double j = ((mine[0](x) - theirs[0](x)) * n.x() + (mine[1](x) - theirs[1](x)) * n.y()) / t.norm();
            j2 += g.weights[q] * j * j;
        }
        eta += 0.5 * h * j2 * t.norm();
    }
    return eta;
}

}  // namespace

TEST_CASE("patch-test solution has vanishing indicators") {
    for (int k : {2, 3}) {
        Mesh m = Mesh::unit_square(k, 3);
        m.bisect(0);
        m.bisect(2);
        m.bisect(4);
        const Poly u = global_poly(k, {{1.0, k, 0}, {-0.5, 1, 1}, {0.3, 0, 1}});
        const Poly f = (u.derivative(0).derivative(0) * 2.0 + u.derivative(1).derivative(1) * 1.5) * -1.0;
        const PiecewiseData data = PiecewiseData::uniform(m, Poly::constant(Frame{}, 2.0), Poly::constant(Frame{}, 0.0),
                                                          Poly::constant(Frame{}, 1.5), Poly::constant(Frame{}, 0.0), f);
        const Discretization disc = discretize(m, data);
        const VemFunction lift = interpolate_polynomial(m, disc, u);
        const VemFunction sol = to_function(disc, solve(assemble(disc, 10.0, &lift), 1e-14), &lift);
        const IndicatorSet ind = estimate(disc, data, sol);
        CHECK(ind.eta_sq <= 1e-16);
        CHECK(ind.psi_sq() <= 1e-16);
        CHECK(ind.stab <= 1e-16);
    }
}

TEST_CASE("residual matches its addends at sample points") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Mesh m = Mesh::unit_square(3, 3);
    avem::testing::random_refine(m, rng, 6);
    const PiecewiseData data = avem::testing::smooth_benchmark(m);
    const Discretization disc = discretize(m, data);
    const VemFunction v = random_function(m, rng, true);
    for (int e : disc.active) {
        const LocalOps& ops = disc.ops_of(e);
        const ElementData d = data.on_element(m, e);
        const Eigen::VectorXd dofs = local_dofs(ops, v);
        const Poly r = internal_residual(ops, d, dofs);
        CHECK(r.degree() <= 2 * ops.k - 2 + 1);
        for (int t = 0; t < 5; ++t) {
            double a = unit(rng), b = unit(rng);
            if (a + b > 1.0) a = 1.0 - a, b = 1.0 - b;
            const Vec2 x = ops.tri[0] + a * (ops.tri[1] - ops.tri[0]) + b * (ops.tri[2] - ops.tri[0]);
            CHECK(r(x) == doctest::Approx(residual_at(ops, d, dofs, x)).epsilon(1e-10));
        }
    }
}

TEST_CASE("element indicators match leaf-wise quadrature across hanging edges") {
    std::mt19937_64 rng(31);
    for (int k : {2, 3}) {
        Mesh m = avem::testing::hanging_chain(k);
        const PiecewiseData data = PiecewiseData::uniform(
            m, global_poly(k - 1, {{1.0, 0, 0}, {0.05, 1, 0}}), Poly::constant(Frame{}, 0.1),
            global_poly(k - 1, {{1.0, 0, 0}, {0.05, 0, 1}}), global_poly(k - 1, {{1.0, 0, 0}}),
            global_poly(k - 1, {{1.0, 0, 0}, {1.0, 1, 0}}));
        const Discretization disc = discretize(m, data);
        const VemFunction v = random_function(m, rng, true);
        const IndicatorSet ind = estimate(disc, data, v);
        double total = 0.0;
        for (const auto& item : ind.items) {
            CHECK(item.eta_sq == doctest::Approx(eta_sq_oracle(disc, data, v, item.element)).epsilon(1e-10));
            CHECK(item.eta_sq >= 0.0);
            CHECK(item.psi_A_sq >= 0.0);
            CHECK(item.psi_c_sq >= 0.0);
            total += item.eta_sq;
        }
        CHECK(ind.eta_sq == doctest::Approx(total));
    }
}

TEST_CASE("affine function with identity diffusion has no jumps") {
    Mesh m = Mesh::unit_square(2, 3);
    m.refine_uniform();
    m.refine_uniform();
    const PiecewiseData data =
        PiecewiseData::uniform(m, Poly::constant(Frame{}, 1.0), Poly::constant(Frame{}, 0.0),
                               Poly::constant(Frame{}, 1.0), Poly::constant(Frame{}, 0.0), Poly::constant(Frame{}, 0.0));
    const Discretization disc = discretize(m, data);
    const VemFunction v = interpolate_polynomial(m, disc, global_poly(1, {{0.5, 0, 0}, {2.0, 1, 0}, {-1.0, 0, 1}}));
    // Zero load, harmonic affine function: residual and jumps vanish.
    CHECK(estimate(disc, data, v).eta_sq < 1e-24);
}

TEST_CASE("inconsistency estimators") {
    std::mt19937_64 rng(37);
    SUBCASE("constant coefficients") {
        for (int k : {2, 3}) {
            Mesh m = Mesh::unit_square(k, 3);
            avem::testing::random_refine(m, rng, 5);
            const PiecewiseData data = PiecewiseData::uniform(
                m, Poly::constant(Frame{}, 2.0), Poly::constant(Frame{}, 0.3), Poly::constant(Frame{}, 1.0),
                Poly::constant(Frame{}, 0.7), global_poly(k - 1, {{1.0, 1, 0}}));
            const Discretization disc = discretize(m, data);
            const IndicatorSet ind = estimate(disc, data, random_function(m, rng, true));
            CHECK(ind.psi_A_sq < 1e-24);
            CHECK(ind.psi_c_sq < 1e-24);
        }
    }
    SUBCASE("linear diffusion entry against a project-then-subtract oracle") {
        const int k = 2;
        Mesh m = Mesh::unit_square(k, 3);
        avem::testing::random_refine(m, rng, 5);
        const PiecewiseData data = avem::testing::smooth_benchmark(m);
        const Discretization disc = discretize(m, data);
        const VemFunction v = random_function(m, rng, true);
        for (int e : disc.active) {
            const LocalOps& ops = disc.ops_of(e);
            const ElementData d = data.on_element(m, e);
            const Eigen::VectorXd dofs = local_dofs(ops, v);
            const auto g = apply_pi0_grad(ops, dofs);
            const Poly u0 = apply_pi0(ops, dofs);
            double psi_a = 0.0;
            for (int i = 0; i < 2; ++i) {
                auto sigma = [&](const Vec2& x) { return (d.A_at(x) * Eigen::Vector2d(g[0](x), g[1](x)))(i); };
                const Poly p(ops.frame, k - 1, project_L2(ops.tri, ops.frame, k - 1, sigma, 2 * k - 2));
                psi_a += integrate(ops.tri, [&](const Vec2& x) { return std::pow(sigma(x) - p(x), 2); }, 4 * k);
            }
            auto cu = [&](const Vec2& x) { return d.c(x) * u0(x); };
            const Poly pc(ops.frame, k, project_L2(ops.tri, ops.frame, k, cu, 2 * k - 1));
            const double psi_c =
                m.area(e) * integrate(ops.tri, [&](const Vec2& x) { return std::pow(cu(x) - pc(x), 2); }, 4 * k);
            const auto got = local_psi_sq(ops, d, dofs);
            CHECK(got[0] == doctest::Approx(psi_a).epsilon(1e-9));
            CHECK(got[1] == doctest::Approx(psi_c).epsilon(1e-9));
            CHECK(got[0] > 0.0);
        }
    }
}

TEST_CASE("perturbing one node changes only nearby indicators") {
    std::mt19937_64 rng(41);
    Mesh m = Mesh::unit_square(2, 3);
    m.refine_uniform();
    m.refine_uniform();
    avem::testing::random_refine(m, rng, 4);
    const PiecewiseData data = avem::testing::smooth_benchmark(m);
    const Discretization disc = discretize(m, data);
    VemFunction v = random_function(m, rng, true);
    const IndicatorSet before = estimate(disc, data, v);
    int node = -1;
    for (std::size_t i = 0; i < m.nodes().size() && node < 0; ++i) {
        if (!m.nodes()[i].on_boundary) node = static_cast<int>(i);
    }
    REQUIRE(node >= 0);
    v.node_values(node) += 0.1;
    const IndicatorSet after = estimate(disc, data, v);
    // Star of the node plus the edge neighbours of the star.
    std::set<int> star;
    for (int e : disc.active) {
        for (int x : m.boundary_nodes(e)) {
            if (x == node) star.insert(e);
        }
    }
    std::set<int> zone = star;
    for (int e : star) {
        for (const LeafEdge& leaf : m.polygon_boundary(e)) {
            const int other = m.owner_on_side(leaf.edge, 1 - m.side_of(leaf.edge, e));
            if (other >= 0) zone.insert(other);
        }
    }
    int changed_in_star = 0;
    for (std::size_t i = 0; i < before.items.size(); ++i) {
        const int e = before.items[i].element;
        const bool changed = before.items[i].eta_sq != after.items[i].eta_sq;
        if (!zone.count(e)) CHECK_FALSE(changed);
        if (star.count(e) && changed) ++changed_in_star;
    }
    CHECK(changed_in_star > 0);
}

TEST_CASE("indicator dump") {
    IndicatorSet s;
    s.add({3, 0.5, 0.25, 0.125, 0.0});
    std::ostringstream os;
    write_indicators(os, s);
    CHECK(os.str() == "element_id,eta_sq,psi_A_sq,psi_c_sq,stab\n3,0.5,0.25,0.125,0\n");
    CHECK(s.eta_sq == 0.5);
    CHECK(s.psi_sq() == 0.375);
}
