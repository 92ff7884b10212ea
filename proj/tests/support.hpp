#pragma once

#include <initializer_list>
#include <random>
#include <tuple>

#include "avem/mesh.hpp"
#include "avem/polynomial.hpp"
#include "avem/problem_data.hpp"

namespace avem::testing {

/// Polynomial in global coordinates from (coef, px, py) terms.
inline Poly global_poly(int degree, std::initializer_list<std::tuple<double, int, int>> terms) {
    Poly p(Frame{}, degree);
    for (const auto& [c, a, b] : terms) p.coef()(monomial_index(a, b)) += c;
    return p;
}

/// Two triangles sharing the segment from (0,0) to (12,0); the lower one is
/// bisected three times towards (12,0), leaving a chain of hanging nodes.
inline Mesh hanging_chain(int k) {
    std::vector<std::array<Dyadic, 2>> v{{Dyadic(0, 0), Dyadic(0, 0)},
                                         {Dyadic(12, 0), Dyadic(0, 0)},
                                         {Dyadic(4, 0), Dyadic(3, 0)},
                                         {Dyadic(4, 0), Dyadic::from_double(-2.7)}};
    Mesh m(k, v, {{{0, 1, 2}, 2}, {{0, 3, 1}, 1}}, 10);
    int e = 1;
    for (int step = 0; step < 3; ++step) {
        const auto kids = m.bisect(e);
        for (int c : kids) {
            for (int x : m.elements()[c].v) {
                if (x == 1) e = c;
            }
        }
    }
    return m;
}

/// Bisects `count` randomly chosen active elements, restoring admissibility
/// after each one.
inline void random_refine(Mesh& mesh, std::mt19937_64& rng, int count) {
    for (int i = 0; i < count; ++i) {
        const auto active = mesh.active_elements();
        std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
        mesh.bisect(active[pick(rng)]);
        mesh.enforce_admissibility();
    }
}

/// A = I + diag(x, y) truncated to degree k-1, c = 1 + x, f = 1 + x + y.
inline PiecewiseData smooth_benchmark(const Mesh& mesh) {
    const int k = mesh.degree();
    const Poly a11 = global_poly(k - 1, {{1.0, 0, 0}, {1.0, 1, 0}});
    const Poly a22 = global_poly(k - 1, {{1.0, 0, 0}, {1.0, 0, 1}});
    const Poly a12 = global_poly(0, {});
    const Poly c = global_poly(k - 1, {{1.0, 0, 0}, {1.0, 1, 0}});
    const Poly f = global_poly(k - 1, {{1.0, 0, 0}, {1.0, 1, 0}, {1.0, 0, 1}});
    return PiecewiseData::uniform(mesh, a11, a12, a22, c, f);
}

}  // namespace avem::testing
