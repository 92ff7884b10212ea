#include <doctest.h>

#include <random>
#include <sstream>

#include "avem/problem_data.hpp"
#include "support.hpp"

using namespace avem;

namespace {

PiecewiseData parse(const Mesh& m, const std::string& text) {
    std::istringstream in(text);
    return read_problem(in, m);
}

}  // namespace

TEST_CASE("constant data") {
    const Mesh m = Mesh::unit_square(2);
    const PiecewiseData d = parse(m, "A constant 1\nc constant 0\nf constant 1\n");
    for (int e : m.active_elements()) {
        const ElementData ed = d.on_element(m, e);
        CHECK(ed.A_at(m.centroid(e)).isApprox(Eigen::Matrix2d::Identity()));
        CHECK(ed.c(m.centroid(e)) == 0.0);
        CHECK(ed.f(m.centroid(e)) == 1.0);
        CHECK(ed.f.effective_degree() == 0);
    }
}

TEST_CASE("linear coefficient is re-centred in each element frame") {
    Mesh m = Mesh::unit_square(3);
    m.refine_uniform();
    m.refine_uniform();
    const PiecewiseData d = parse(m, "A poly 1:0:0 1:1:0 | 0:0:0 | 1:0:0\nc constant 0\nf constant 1\n");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int e : m.active_elements()) {
        const ElementData ed = d.on_element(m, e);
        CHECK(ed.A[0].frame().center.isApprox(m.centroid(e)));
        for (int t = 0; t < 10; ++t) {
            const Vec2 x(u(rng), u(rng));
            CHECK(std::abs(ed.a(0, 0)(x) - (1.0 + x.x())) < 1e-13);
            CHECK(std::abs(ed.a(1, 1)(x) - 1.0) < 1e-13);
        }
    }
}

TEST_CASE("restriction to a child preserves the polynomial") {
    Mesh m = Mesh::unit_square(3);
    const PiecewiseData d = parse(m, "A constant 1\nc poly 1:0:0 2:1:1 -0.5:0:2\nf poly 1:1:0\n");
    const auto kids = m.bisect(0);
    const ElementData parent = d.on_element(m, 0);
    for (int c : kids) {
        const ElementData child = PiecewiseData::restrict_to(parent, Frame::of_triangle(m.corners(c)));
        CHECK(child.c.degree() == parent.c.degree());
        for (const Vec2& x : m.corners(c)) {
            CHECK(child.c(x) == doctest::Approx(parent.c(x)).epsilon(1e-13));
            CHECK(child.f(x) == doctest::Approx(parent.f(x)).epsilon(1e-13));
        }
    }
}

TEST_CASE("per-element blocks") {
    const Mesh m = Mesh::unit_square(2);
    const PiecewiseData d =
        parse(m, "A constant 2 0.5 1\nc constant 0\n# two different right-hand sides\nf per_element\n0 constant 1\n"
                 "1 poly 2:1:0\nend\n");
    CHECK(d.on_element(m, 0).f(Vec2(0.7, 0.2)) == doctest::Approx(1.0));
    CHECK(d.on_element(m, 1).f(Vec2(0.2, 0.7)) == doctest::Approx(0.4));
    CHECK(d.on_element(m, 1).a(0, 1)(Vec2(0.2, 0.7)) == doctest::Approx(0.5));
}

TEST_CASE("invalid data is rejected") {
    const Mesh m = Mesh::unit_square(2);
    SUBCASE("negative reaction") {
        try {
            parse(m, "A constant 1\nc constant -1\nf constant 1\n");
            FAIL("accepted c = -1");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("negative") != std::string::npos);
        }
    }
    SUBCASE("asymmetric diffusion") {
        CHECK_THROWS_AS(parse(m, "A constant 1 0.5 0 1\nc constant 0\nf constant 1\n"), DataError);
    }
    SUBCASE("indefinite diffusion") {
        CHECK_THROWS_AS(parse(m, "A poly 1:0:0 -3:1:0 | 0:0:0 | 1:0:0\nc constant 0\nf constant 1\n"), DataError);
    }
    SUBCASE("degree above k - 1") {
        CHECK_THROWS_AS(parse(m, "A constant 1\nc poly 1:2:0\nf constant 1\n"), DataError);
    }
    SUBCASE("load may have degree k") {
        CHECK_NOTHROW(parse(m, "A constant 1\nc constant 0\nf poly 1:2:0\n"));
    }
    SUBCASE("missing block") { CHECK_THROWS_AS(parse(m, "A constant 1\nf constant 1\n"), DataError); }
    SUBCASE("unknown element id") {
        CHECK_THROWS_AS(parse(m, "A constant 1\nc constant 0\nf per_element\n0 constant 1\n7 constant 1\nend\n"),
                        DataError);
    }
}
