#include "avem/reference_solution.hpp"

#include <Eigen/LU>

#include "avem/quadrature.hpp"

namespace avem {

int close_conforming(Mesh& mesh) {
    int count = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int e : mesh.active_elements()) {
            const auto& el = mesh.elements()[e];
            if (!el.active) continue;
            for (int s : el.side) {
                if (!mesh.edges()[s].is_leaf()) {
                    mesh.bisect(e);
                    ++count;
                    changed = true;
                    break;
                }
            }
        }
    }
    return count;
}

std::vector<Vec2> conforming_nodes(const Triangle2& tri, int k) {
    std::vector<Vec2> out;
    // Boundary: v0 -> v1 -> v2 -> v0, k points per side.
    for (int s = 0; s < 3; ++s) {
        const Vec2& a = tri[s];
        const Vec2& b = tri[(s + 1) % 3];
        for (int j = 0; j < k; ++j) out.push_back(a + (static_cast<double>(j) / k) * (b - a));
    }
    for (int i = 1; i < k; ++i) {
        for (int j = 1; i + j < k; ++j) {
            out.push_back((static_cast<double>(k - i - j) * tri[0] + i * tri[1] + j * tri[2]) / k);
        }
    }
    return out;
}

namespace {

struct LocalFem {
    Frame frame;
    Eigen::MatrixXd basis;  // columns: monomial coefficients of each nodal basis function
    Eigen::MatrixXd stiffness;
    Eigen::MatrixXd mass;
    Eigen::VectorXd load;
};

LocalFem local_fem(const Triangle2& tri, int k, const ElementData& data, bool with_rhs) {
    LocalFem out;
    out.frame = Frame::of_triangle(tri);
    const auto nodes = conforming_nodes(tri, k);
    const int n = static_cast<int>(nodes.size());
    Eigen::MatrixXd V(n, n);
    for (int i = 0; i < n; ++i) V.row(i) = eval_monomials(out.frame, k, nodes[i]).transpose();
    out.basis = V.fullPivLu().inverse();
    const Eigen::MatrixXd Dx = [&] {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(monomial_count(k - 1), n);
        const auto& ex = monomial_exponents(k);
        for (int i = 0; i < n; ++i) {
            if (ex[i][0] > 0) D(monomial_index(ex[i][0] - 1, ex[i][1]), i) = ex[i][0] / out.frame.h;
        }
        return D;
    }();
    const Eigen::MatrixXd Dy = [&] {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(monomial_count(k - 1), n);
        const auto& ex = monomial_exponents(k);
        for (int i = 0; i < n; ++i) {
            if (ex[i][1] > 0) D(monomial_index(ex[i][0], ex[i][1] - 1), i) = ex[i][1] / out.frame.h;
        }
        return D;
    }();
    const std::array<Eigen::MatrixXd, 2> G{Dx * out.basis, Dy * out.basis};
    out.stiffness = Eigen::MatrixXd::Zero(n, n);
    for (int c = 0; c < 2; ++c) {
        for (int d = 0; d < 2; ++d) {
            out.stiffness += G[c].transpose() * monomial_mass(tri, out.frame, k - 1, data.a(c, d)) * G[d];
        }
    }
    if (with_rhs) {
        out.mass = out.basis.transpose() * monomial_mass(tri, out.frame, k, data.c) * out.basis;
        const Poly f = data.f;
        const Eigen::VectorXd fm =
            project_L2(tri, out.frame, k, [&](const Vec2& x) { return f(x); }, f.degree());
        out.load = out.basis.transpose() * (monomial_mass(tri, out.frame, k) * fm);
    }
    return out;
}

}  // namespace

Eigen::MatrixXd conforming_stiffness(const Triangle2& tri, int k, const ElementData& data) {
    return local_fem(tri, k, data, false).stiffness;
}

ConformingSolution solve_conforming(Mesh mesh, const PiecewiseData& data, double tol) {
    const int k = mesh.degree();
    for (int e : mesh.active_elements()) {
        for (int s : mesh.elements()[e].side) {
            if (!mesh.edges()[s].is_leaf()) throw MeshError("solve_conforming: mesh has hanging nodes");
        }
    }
    const auto active = mesh.active_elements();
    std::vector<int> node_dof(mesh.nodes().size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < mesh.nodes().size(); ++i) {
        if (!mesh.nodes()[i].on_boundary) node_dof[i] = next++;
    }
    const int interior = (k - 1) * (k - 2) / 2;
    std::vector<int> interior_offset(mesh.elements().size(), -1);
    for (int e : active) {
        interior_offset[e] = next;
        next += interior;
    }
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(next);
    std::vector<LocalFem> locals;
    std::vector<std::vector<int>> maps;
    for (int e : active) {
        const auto tri = mesh.corners(e);
        LocalFem lf = local_fem(tri, k, data.on_element(mesh, e), true);
        std::vector<int> g;
        for (int node : mesh.proper_lattice(e)) g.push_back(node_dof[node]);
        for (int i = 0; i < interior; ++i) g.push_back(interior_offset[e] + i);
        const Eigen::MatrixXd K = lf.stiffness + lf.mass;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g[i] < 0) continue;
            rhs(g[i]) += lf.load(i);
            for (std::size_t j = 0; j < g.size(); ++j) {
                if (g[j] >= 0) trip.emplace_back(g[i], g[j], K(i, j));
            }
        }
        locals.push_back(std::move(lf));
        maps.push_back(std::move(g));
    }
    SparseSystem sys;
    sys.matrix.resize(next, next);
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.rhs = rhs;
    const Eigen::VectorXd x = solve(sys, tol);

    ConformingSolution out{std::move(mesh), next, {}};
    out.u.assign(out.mesh.elements().size(), std::nullopt);
    for (std::size_t i = 0; i < active.size(); ++i) {
        Eigen::VectorXd vals(maps[i].size());
        for (std::size_t j = 0; j < maps[i].size(); ++j) vals(j) = maps[i][j] >= 0 ? x(maps[i][j]) : 0.0;
        out.u[active[i]] = Poly(locals[i].frame, k, locals[i].basis * vals);
    }
    return out;
}

ConformingSolution reference_solution(const Mesh& mesh, const PiecewiseData& data, int levels, double tol) {
    Mesh fine = mesh;
    fine.set_lambda_cap(1 << 20);
    for (int l = 0; l < levels; ++l) fine.refine_uniform();
    close_conforming(fine);
    return solve_conforming(std::move(fine), data, tol);
}

SolutionSnapshot take_snapshot(const Discretization& disc, const VemFunction& u) {
    SolutionSnapshot snap;
    snap.elements.assign(disc.mesh->elements().size(), std::nullopt);
    for (const LocalOps& ops : disc.ops) {
        const Eigen::VectorXd d = local_dofs(ops, u);
        snap.elements[ops.element] = SolutionSnapshot::Entry{apply_pi0(ops, d), apply_pi0_grad(ops, d)};
    }
    return snap;
}

double surrogate_error_sq(const ConformingSolution& ref, const PiecewiseData& data, const SolutionSnapshot& snap) {
    const Mesh& mesh = ref.mesh;
    const int k = mesh.degree();
    const TriangleRule& rule = triangle_rule(3 * k);
    double total = 0.0;
    for (int r : mesh.active_elements()) {
        int anc = r;
        while (anc >= 0 && (anc >= static_cast<int>(snap.elements.size()) || !snap.elements[anc])) {
            anc = mesh.elements()[anc].parent;
        }
        if (anc < 0) throw std::invalid_argument("surrogate_error_sq: reference mesh does not refine the snapshot");
        const auto& entry = *snap.elements[anc];
        const Poly& ur = *ref.u[r];
        const Poly urx = ur.derivative(0);
        const Poly ury = ur.derivative(1);
        const ElementData d = data.on_element(mesh, r);
        const auto tri = mesh.corners(r);
        const double area = std::abs(triangle_area(tri));
        const auto pts = map_points(rule, tri);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const Vec2& x = pts[q];
            const Vec2 g(urx(x) - entry.grad[0](x), ury(x) - entry.grad[1](x));
            const double v = ur(x) - entry.value(x);
            total += area * rule.weights[q] * (g.dot(d.A_at(x) * g) + d.c(x) * v * v);
        }
    }
    return total;
}

}  // namespace avem
