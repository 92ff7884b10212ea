#include <doctest.h>

#include <random>

#include "avem/lagrange_split.hpp"
#include "avem/quadrature.hpp"

using namespace avem;

namespace {

using Row = std::vector<Rational>;

Rational r(long long n, long long d) { return Rational(n, d); }

// Closed Newton-Cotes weights on [0,1] with k+1 points.
std::vector<Rational> newton_cotes(int k) {
    switch (k) {
        case 1: return {r(1, 2), r(1, 2)};
        case 2: return {r(1, 6), r(4, 6), r(1, 6)};
        case 3: return {r(1, 8), r(3, 8), r(3, 8), r(1, 8)};
        case 4: return {r(7, 90), r(32, 90), r(12, 90), r(32, 90), r(7, 90)};
        default: return {};
    }
}

}  // namespace

TEST_CASE("split coefficients for k = 2") {
    const auto& a = lagrange_split_coefficients(2);
    REQUIRE(a.size() == 2);
    CHECK(a[0] == Row{r(3, 8), r(3, 4), r(-1, 8)});
    CHECK(a[1] == Row{r(-1, 8), r(3, 4), r(3, 8)});
}

TEST_CASE("split coefficients for k = 3") {
    const auto& a = lagrange_split_coefficients(3);
    REQUIRE(a.size() == 3);
    CHECK(a[0] == Row{r(5, 16), r(15, 16), r(-5, 16), r(1, 16)});
    CHECK(a[1] == Row{r(-1, 16), r(9, 16), r(9, 16), r(-1, 16)});
    CHECK(a[2] == Row{r(1, 16), r(-5, 16), r(15, 16), r(5, 16)});
}

TEST_CASE("split coefficient rows sum to one and reproduce polynomials") {
    for (int k = 1; k <= 4; ++k) {
        const auto& a = lagrange_split_coefficients(k);
        REQUIRE(static_cast<int>(a.size()) == k);
        for (int i = 0; i < k; ++i) {
            REQUIRE(static_cast<int>(a[i].size()) == k + 1);
            Rational sum = 0;
            for (const auto& x : a[i]) sum += x;
            CHECK(sum == Rational(1));
            // q(s) = s^p for p <= k, evaluated exactly at zeta_i.
            const Rational z = zeta_position(k, i);
            for (int p = 0; p <= k; ++p) {
                Rational lhs = 0;
                for (int n = 0; n <= k; ++n) {
                    Rational xp = 1;
                    for (int t = 0; t < p; ++t) xp *= Rational(n, k);
                    lhs += a[i][n] * xp;
                }
                Rational zp = 1;
                for (int t = 0; t < p; ++t) zp *= z;
                CHECK(lhs == zp);
            }
        }
    }
}

TEST_CASE("double coefficients agree with the rationals") {
    for (int k = 1; k <= 4; ++k) {
        const auto& a = lagrange_split_coefficients(k);
        const auto d = lagrange_split_coefficients_double(k);
        for (int i = 0; i < k; ++i) {
            for (int n = 0; n <= k; ++n) {
                CHECK(d[i][n] == doctest::Approx(boost::rational_cast<double>(a[i][n])).epsilon(1e-16));
            }
        }
    }
}

TEST_CASE("unsupported degrees are rejected") {
    CHECK_THROWS_AS(lagrange_split_coefficients(5), UnsupportedDegree);
    CHECK_THROWS_AS(lagrange_split_coefficients(0), UnsupportedDegree);
}

TEST_CASE("detail basis is cardinal on the fine lattice") {
    for (int k = 1; k <= 4; ++k) {
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                CHECK(detail_basis_psi(k, i, zeta_position(k, j)) == Rational(i == j ? 1 : 0));
            }
            for (int n = 0; n <= k; ++n) CHECK(detail_basis_psi(k, i, Rational(n, k)) == Rational(0));
        }
    }
}

TEST_CASE("k = 1 detail basis is the midpoint hat") {
    for (int t = 0; t <= 8; ++t) {
        const Rational s(t, 8);
        const Rational hat = s <= Rational(1, 2) ? 2 * s : 2 * (1 - s);
        CHECK(detail_basis_psi(1, 0, s) == hat);
    }
}

TEST_CASE("integral of the detail basis matches Newton-Cotes weights") {
    for (int k = 1; k <= 4; ++k) {
        const auto nc = newton_cotes(k);
        const LineRule& g = gauss_line(k + 2);
        for (int i = 0; i < k; ++i) {
            // zeta_i is fine lattice point m = 2i + 1 of the half-lattices.
            const int m = 2 * i + 1;
            double exact = 0.0;
            if (m < k) exact = 0.5 * boost::rational_cast<double>(nc[m]);
            else if (m > k) exact = 0.5 * boost::rational_cast<double>(nc[m - k]);
            else exact = 0.5 * boost::rational_cast<double>(nc[k] + nc[0]);
            double quad = 0.0;
            for (std::size_t q = 0; q < g.points.size(); ++q) {
                quad += 0.5 * g.weights[q] * detail_basis_psi(k, i, 0.5 * g.points[q]);
                quad += 0.5 * g.weights[q] * detail_basis_psi(k, i, 0.5 + 0.5 * g.points[q]);
            }
            CHECK(quad == doctest::Approx(exact).epsilon(1e-14));
        }
    }
}
