#include "avem/local_ops.hpp"

#include <unordered_map>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "avem/lagrange_split.hpp"
#include "avem/quadrature.hpp"

namespace avem {

Eigen::MatrixXd derivative_matrix(int p, int dir, double h) {
    const int rows = monomial_count(std::max(0, p - 1));
    const auto& ex = monomial_exponents(p);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(rows, ex.size());
    for (std::size_t i = 0; i < ex.size(); ++i) {
        const int a = ex[i][0];
        const int b = ex[i][1];
        if (dir == 0 && a > 0) D(monomial_index(a - 1, b), i) = a / h;
        if (dir == 1 && b > 0) D(monomial_index(a, b - 1), i) = b / h;
    }
    return D;
}

LocalDofMap local_dof_map(const Mesh& mesh, int element) {
    LocalDofMap map;
    map.leaves = mesh.polygon_boundary(element);
    map.boundary_nodes = mesh.boundary_nodes(element);
    const int k = mesh.degree();
    map.moments = monomial_count(k - 2);
    return map;
}

LocalOps build_local_ops(const Mesh& mesh, int element, const PiecewiseData& data) {
    return build_local_ops(mesh, element, data.on_element(mesh, element));
}

LocalOps build_local_ops(const Mesh& mesh, int element, const ElementData& data) {
    LocalOps ops;
    const int k = mesh.degree();
    ops.element = element;
    ops.k = k;
    ops.tri = mesh.corners(element);
    ops.frame = Frame::of_triangle(ops.tri);
    ops.area = triangle_area(ops.tri);
    ops.dofs = local_dof_map(mesh, element);

    const int nb = ops.dofs.boundary_count();
    const int nm = ops.dofs.moments;
    const int nd = nb + nm;
    const int nk = monomial_count(k);
    const int nk1 = monomial_count(k - 1);
    const double area = ops.area;
    const Frame& fr = ops.frame;

    std::unordered_map<int, int> local_of;
    for (int i = 0; i < nb; ++i) local_of.emplace(ops.dofs.boundary_nodes[i], i);
    for (int node : mesh.proper_lattice(element)) {
        auto it = local_of.find(node);
        if (it == local_of.end()) throw std::logic_error("lattice point missing from the polygon boundary");
        ops.lattice_dofs.push_back(it->second);
    }

    const Eigen::MatrixXd Dx = derivative_matrix(k, 0, fr.h);
    const Eigen::MatrixXd Dy = derivative_matrix(k, 1, fr.h);
    const Eigen::MatrixXd Dx1 = derivative_matrix(k - 1, 0, fr.h);
    const Eigen::MatrixXd Dy1 = derivative_matrix(k - 1, 1, fr.h);

    // Boundary integrals: v is degree k on every leaf, so k+1 Gauss points
    // integrate v times polynomials of degree k+1.
    const LineRule& gl = gauss_line(k + 1);
    std::vector<std::vector<double>> lag(gl.points.size());
    for (std::size_t q = 0; q < gl.points.size(); ++q) lag[q] = lagrange_basis(k, gl.points[q]);

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nk, nk);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nk, nd);
    std::array<Eigen::MatrixXd, 2> Dc{Eigen::MatrixXd::Zero(nk1, nd), Eigen::MatrixXd::Zero(nk1, nd)};

    for (std::size_t l = 0; l < ops.dofs.leaves.size(); ++l) {
        const auto ln = mesh.leaf_nodes(ops.dofs.leaves[l]);
        const Vec2 a = mesh.nodes()[ln.front()].pos;
        const Vec2 b = mesh.nodes()[ln.back()].pos;
        const Vec2 t = b - a;
        const double len = t.norm();
        const Vec2 n(t.y() / len, -t.x() / len);
        for (std::size_t q = 0; q < gl.points.size(); ++q) {
            const Vec2 x = a + gl.points[q] * t;
            const double w = gl.weights[q] * len;
            const Eigen::VectorXd m = eval_monomials(fr, k, x);
            const Eigen::VectorXd dn = (Dx.transpose() * m.head(nk1)) * n.x() + (Dy.transpose() * m.head(nk1)) * n.y();
            G.row(0) += w * m.transpose();
            for (int j = 0; j <= k; ++j) {
                const int col = ops.dofs.leaf_dof(static_cast<int>(l), j, k);
                const double phi = lag[q][j] * w;
                B(0, col) += phi;
                B.col(col).tail(nk - 1) += phi * dn.tail(nk - 1);
                Dc[0].col(col) += phi * n.x() * m.head(nk1);
                Dc[1].col(col) += phi * n.y() * m.head(nk1);
            }
        }
    }

    // Interior terms through the moments.
    const Eigen::MatrixXd H = monomial_mass(ops.tri, fr, k);
    check_conditioning(H, "element mass");
    const Eigen::MatrixXd Hgrad = Dx.transpose() * H.topLeftCorner(nk1, nk1) * Dx +
                                  Dy.transpose() * H.topLeftCorner(nk1, nk1) * Dy;
    G.bottomRows(nk - 1) = Hgrad.bottomRows(nk - 1);
    const Eigen::MatrixXd lap = Dx1 * Dx + Dy1 * Dy;  // P_k -> P_{k-2}
    B.block(1, nb, nk - 1, nm) -= area * lap.rightCols(nk - 1).transpose();
    Dc[0].rightCols(nm) -= area * Dx1.transpose();
    Dc[1].rightCols(nm) -= area * Dy1.transpose();

    ops.P_nabla = G.partialPivLu().solve(B);

    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nk, nd);
    C.block(0, nb, nm, nm) = area * Eigen::MatrixXd::Identity(nm, nm);
    C.bottomRows(nk - nm) = (H * ops.P_nabla).bottomRows(nk - nm);
    const auto Hllt = H.llt();
    ops.P0 = Hllt.solve(C);
    const auto H1llt = H.topLeftCorner(nk1, nk1).llt();
    ops.P0_grad[0] = H1llt.solve(Dc[0]);
    ops.P0_grad[1] = H1llt.solve(Dc[1]);

    // Lagrange interpolant at the 3k macro lattice points and moments <= k-3.
    const int nlow = monomial_count(k - 3);
    Eigen::MatrixXd Q(nk, nk);
    Eigen::MatrixXd Sel = Eigen::MatrixXd::Zero(nk, nd);
    for (int i = 0; i < 3 * k; ++i) {
        const int d = ops.lattice_dofs[i];
        Q.row(i) = eval_monomials(fr, k, mesh.nodes()[ops.dofs.boundary_nodes[d]].pos).transpose();
        Sel(i, d) = 1.0;
    }
    for (int g = 0; g < nlow; ++g) {
        Q.row(3 * k + g) = H.row(g) / area;
        Sel(3 * k + g, nb + g) = 1.0;
    }
    const auto Qlu = Q.fullPivLu();
    if (Qlu.rank() < nk) throw IllConditionedError("Lagrange interpolation matrix is singular");
    ops.I_lagrange = Qlu.solve(Sel);

    Eigen::MatrixXd Mb(nb, nk);
    for (int i = 0; i < nb; ++i) {
        Mb.row(i) = eval_monomials(fr, k, mesh.nodes()[ops.dofs.boundary_nodes[i]].pos).transpose();
    }
    ops.stab_rows = -Mb * ops.I_lagrange;
    ops.stab_rows.leftCols(nb) += Eigen::MatrixXd::Identity(nb, nb);
    ops.stab = ops.stab_rows.transpose() * ops.stab_rows;

    ops.stiffness = Eigen::MatrixXd::Zero(nd, nd);
    for (int c = 0; c < 2; ++c) {
        for (int d = 0; d < 2; ++d) {
            const Eigen::MatrixXd M = monomial_mass(ops.tri, fr, k - 1, data.a(c, d));
            ops.stiffness.noalias() += ops.P0_grad[c].transpose() * M * ops.P0_grad[d];
        }
    }
    ops.stiffness = 0.5 * (ops.stiffness + ops.stiffness.transpose());
    ops.mass = ops.P0.transpose() * monomial_mass(ops.tri, fr, k, data.c) * ops.P0;
    ops.mass = 0.5 * (ops.mass + ops.mass.transpose());

    const Poly fk = data.f;
    const Eigen::VectorXd fm = project_L2(ops.tri, fr, k, [&](const Vec2& x) { return fk(x); }, fk.degree());
    ops.load = ops.P0.transpose() * (H * fm);
    return ops;
}

Poly apply_pi_nabla(const LocalOps& ops, const Eigen::VectorXd& dofs) {
    if (dofs.size() != ops.ndof()) throw std::invalid_argument("apply_pi_nabla: DOF vector has wrong size");
    return Poly(ops.frame, ops.k, ops.P_nabla * dofs);
}

Poly apply_pi0(const LocalOps& ops, const Eigen::VectorXd& dofs) {
    if (dofs.size() != ops.ndof()) throw std::invalid_argument("apply_pi0: DOF vector has wrong size");
    return Poly(ops.frame, ops.k, ops.P0 * dofs);
}

std::array<Poly, 2> apply_pi0_grad(const LocalOps& ops, const Eigen::VectorXd& dofs) {
    if (dofs.size() != ops.ndof()) throw std::invalid_argument("apply_pi0_grad: DOF vector has wrong size");
    return {Poly(ops.frame, ops.k - 1, ops.P0_grad[0] * dofs), Poly(ops.frame, ops.k - 1, ops.P0_grad[1] * dofs)};
}

Poly apply_lagrange(const LocalOps& ops, const Eigen::VectorXd& dofs) {
    if (dofs.size() != ops.ndof()) throw std::invalid_argument("apply_lagrange: DOF vector has wrong size");
    return Poly(ops.frame, ops.k, ops.I_lagrange * dofs);
}

double stabilization_energy(const LocalOps& ops, const Eigen::VectorXd& dofs) {
    if (dofs.size() != ops.ndof()) throw std::invalid_argument("stabilization_energy: DOF vector has wrong size");
    return (ops.stab_rows * dofs).squaredNorm();
}

Eigen::VectorXd polynomial_dofs(const Mesh& mesh, const LocalOps& ops, const Poly& q) {
    Eigen::VectorXd v(ops.ndof());
    const int nb = ops.dofs.boundary_count();
    for (int i = 0; i < nb; ++i) v(i) = q(mesh.nodes()[ops.dofs.boundary_nodes[i]].pos);
    const int km2 = ops.k - 2;
    const Poly qq = q.rebased(ops.frame);
    const Eigen::VectorXd mom = monomial_mass(ops.tri, ops.frame, std::max(qq.degree(), km2)).topLeftCorner(
                                    ops.dofs.moments, monomial_count(std::max(qq.degree(), km2))) *
                                qq.with_degree(std::max(qq.degree(), km2)).coef();
    v.tail(ops.dofs.moments) = mom / ops.area;
    return v;
}

}  // namespace avem
