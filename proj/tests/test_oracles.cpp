#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "avem/oracles.hpp"
#include "support.hpp"

using namespace avem;
using avem::testing::global_poly;

TEST_CASE("refinement factor table") {
    CHECK(mu_squared(2, 1) == doctest::Approx(1.0).epsilon(5e-4));
    CHECK(mu_squared(2, 2) == doctest::Approx(0.3153).epsilon(5e-4 / 0.3153));
    CHECK(mu_squared(3, 1) == doctest::Approx(1.0).epsilon(5e-4));
    CHECK(mu_squared(3, 2) == doctest::Approx(0.6648).epsilon(5e-4 / 0.6648));
    for (int k = 2; k <= 4; ++k) {
        double prev = mu_squared(k, 1);
        CHECK(prev >= 0.0);
        for (int m = 2; m <= 3; ++m) {
            const double cur = mu_squared(k, m);
            CHECK(cur <= prev + 1e-10);
            prev = cur;
        }
    }
    CHECK(minimal_uniform_levels(2) == 2);
    CHECK(minimal_uniform_levels(3) == 2);
    CHECK_THROWS(mu_squared(1, 1));
    CHECK_THROWS(mu_squared(5, 1));
    std::ostringstream os;
    write_table1(os);
    CHECK(os.str().rfind("k,m,mu_squared\n", 0) == 0);
    CHECK(os.str().find("2,2,0.3153") != std::string::npos);
}

TEST_CASE("split parent of a first-level node") {
    const int k = 3;
    Mesh m = Mesh::unit_square(k, 3);
    const int split = m.elements()[0].side[2];
    m.bisect(0);
    int checked = 0;
    for (std::size_t i = 0; i < m.nodes().size(); ++i) {
        const NodeKey& key = m.nodes()[i].key;
        if (key.level != 1 || key.num % 2 == 0) continue;
        const SplitParent sp = split_parent(m, static_cast<int>(i));
        CHECK(sp.level == 0);
        CHECK(sp.zeta >= 0);
        CHECK(sp.zeta < k);
        REQUIRE(sp.lattice.size() == k + 1);
        for (int n = 0; n <= k; ++n) CHECK(sp.lattice[n] == m.lattice_node(split, n));
        ++checked;
    }
    CHECK(checked == k);
    CHECK_THROWS(split_parent(m, m.elements()[0].v[0]));
}

TEST_CASE("details vanish on conforming functions") {
    std::mt19937_64 rng(43);
    for (int k : {2, 3}) {
        Mesh m = Mesh::unit_square(k, 3);
        avem::testing::random_refine(m, rng, 8);
        const PiecewiseData data = avem::testing::smooth_benchmark(m);
        const Discretization disc = discretize(m, data);
        const VemFunction w = conforming_interpolant(disc, random_function(m, rng));
        const DetailVector det = hierarchical_details(disc, w);
        CHECK_FALSE(det.hanging.empty());
        CHECK(det.d.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(det.delta.cwiseAbs().maxCoeff() < 1e-12);
        const VemFunction again = conforming_interpolant(disc, w);
        CHECK((again.node_values - w.node_values).cwiseAbs().maxCoeff() < 1e-12);
        const VemFunction p = interpolate_polynomial(m, disc, global_poly(k, {{1.0, k, 0}, {2.0, 0, 1}}));
        CHECK(hierarchical_details(disc, p).d.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("one perturbed hanging value gives one detail") {
    const int k = 2;
    Mesh m = Mesh::unit_square(k, 3);
    m.bisect(0);
    const PiecewiseData data = avem::testing::smooth_benchmark(m);
    const Discretization disc = discretize(m, data);
    VemFunction v = interpolate_polynomial(m, disc, global_poly(2, {{1.0, 1, 1}}));
    int node = -1;
    for (std::size_t i = 0; i < m.nodes().size() && node < 0; ++i) {
        if (m.is_hanging(static_cast<int>(i))) node = static_cast<int>(i);
    }
    REQUIRE(node >= 0);
    v.node_values(node) += 0.25;
    const DetailVector det = hierarchical_details(disc, v);
    for (int x : det.hanging) {
        if (x == node) CHECK(det.d(x) == doctest::Approx(0.25));
        else CHECK(std::abs(det.d(x)) < 1e-14);
    }
}

TEST_CASE("reconstruction and delta-d recursion on random functions") {
    std::mt19937_64 rng(47);
    for (int k : {2, 3, 4}) {
        Mesh m = Mesh::unit_square(k, 3);
        avem::testing::random_refine(m, rng, 12);
        const PiecewiseData data = avem::testing::smooth_benchmark(m);
        const Discretization disc = discretize(m, data);
        for (int t = 0; t < 10; ++t) {
            const VemFunction v = random_function(m, rng);
            const DetailVector det = hierarchical_details(disc, v);
            CHECK(reconstruction_defect(disc, v, det) <= 1e-12);
            CHECK(delta_d_defect(m, det) <= 1e-12);
            // delta is v minus the conforming interpolant at hanging nodes.
            const VemFunction c = conforming_interpolant(disc, v);
            for (int x : det.hanging) CHECK(det.delta(x) == doctest::Approx(v.node_values(x) - c.node_values(x)));
        }
    }
}

TEST_CASE("conforming interpolant keeps proper values and low moments") {
    std::mt19937_64 rng(53);
    const int k = 3;
    Mesh m = Mesh::unit_square(k, 3);
    avem::testing::random_refine(m, rng, 10);
    const PiecewiseData data = avem::testing::smooth_benchmark(m);
    const Discretization disc = discretize(m, data);
    const VemFunction v = random_function(m, rng);
    const VemFunction c = conforming_interpolant(disc, v);
    for (std::size_t i = 0; i < m.nodes().size(); ++i) {
        if (!m.is_hanging(static_cast<int>(i))) CHECK(c.node_values(i) == v.node_values(i));
    }
    // Only the moments of degree <= k - 3 are kept.
    for (int e : disc.active) CHECK(std::abs(c.moments[e](0) - v.moments[e](0)) < 1e-12);
}

TEST_CASE("interpolation ratios are finite and positive") {
    std::mt19937_64 rng(59);
    for (int k : {2, 3}) {
        Mesh m = Mesh::unit_square(k, 3);
        avem::testing::random_refine(m, rng, 12);
        const PiecewiseData data = avem::testing::smooth_benchmark(m);
        const Discretization disc = discretize(m, data);
        for (int t = 0; t < 5; ++t) {
            const RatioStudy r = ratio_study(disc, random_function(m, rng));
            CHECK(std::isfinite(r.details_vs_interp));
            CHECK(std::isfinite(r.interp_gap_vs_delta));
            CHECK(std::isfinite(r.conforming_vs_local));
            CHECK(r.details_vs_interp > 0.0);
            CHECK(r.conforming_vs_local > 0.0);
        }
    }
}
