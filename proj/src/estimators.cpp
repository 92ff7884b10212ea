#include "avem/estimators.hpp"

#include <iomanip>
#include <ostream>

#include "avem/quadrature.hpp"

namespace avem {

void IndicatorSet::add(const ElementIndicators& e) {
    items.push_back(e);
    eta_sq += e.eta_sq;
    psi_A_sq += e.psi_A_sq;
    psi_c_sq += e.psi_c_sq;
    stab += e.stab;
}

std::array<Poly, 2> discrete_flux(const LocalOps& ops, const ElementData& data, const Eigen::VectorXd& dofs) {
    const auto g = apply_pi0_grad(ops, dofs);
    return {data.a(0, 0) * g[0] + data.a(0, 1) * g[1], data.a(1, 0) * g[0] + data.a(1, 1) * g[1]};
}

Poly internal_residual(const LocalOps& ops, const ElementData& data, const Eigen::VectorXd& dofs) {
    const auto s = discrete_flux(ops, data, dofs);
    Poly r = data.f.rebased(ops.frame);
    r += s[0].derivative(0);
    r += s[1].derivative(1);
    r -= data.c * apply_pi0(ops, dofs);
    return r;
}

double jump_sq(const std::array<Poly, 2>& s1, const std::array<Poly, 2>& s2, const Vec2& a, const Vec2& b) {
    const int deg = std::max({s1[0].degree(), s1[1].degree(), s2[0].degree(), s2[1].degree()});
    const LineRule& rule = gauss_line_for_degree(2 * deg);
    const Vec2 t = b - a;
    const double len = t.norm();
    const Vec2 n(t.y() / len, -t.x() / len);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec2 x = a + rule.points[q] * t;
        const double j = (s1[0](x) - s2[0](x)) * n.x() + (s1[1](x) - s2[1](x)) * n.y();
        sum += rule.weights[q] * j * j;
    }
    return sum * len;
}

std::array<double, 2> local_psi_sq(const LocalOps& ops, const ElementData& data, const Eigen::VectorXd& dofs) {
    const auto s = discrete_flux(ops, data, dofs);
    double psi_a = 0.0;
    for (const Poly& sc : s) psi_a += l2_norm_sq(ops.tri, sc - project_L2(ops.tri, sc, ops.k - 1));
    const Poly cu = data.c * apply_pi0(ops, dofs);
    const double psi_c = ops.area * l2_norm_sq(ops.tri, cu - project_L2(ops.tri, cu, ops.k));
    return {psi_a, psi_c};
}

IndicatorSet estimate(const Discretization& disc, const PiecewiseData& data, const VemFunction& u) {
    const Mesh& mesh = *disc.mesh;
    const std::size_t n = disc.ops.size();
    std::vector<ElementData> edata(n);
    std::vector<Eigen::VectorXd> dofs(n);
    std::vector<std::array<Poly, 2>> flux(n);
    for (std::size_t i = 0; i < n; ++i) {
        edata[i] = PiecewiseData::restrict_to(data.roots().at(mesh.elements()[disc.active[i]].root_element),
                                              disc.ops[i].frame);
        dofs[i] = local_dofs(disc.ops[i], u);
        flux[i] = discrete_flux(disc.ops[i], edata[i], dofs[i]);
    }
    IndicatorSet set;
    for (std::size_t i = 0; i < n; ++i) {
        const LocalOps& ops = disc.ops[i];
        ElementIndicators ind;
        ind.element = ops.element;
        const double h2 = ops.area;
        ind.eta_sq = h2 * l2_norm_sq(ops.tri, internal_residual(ops, edata[i], dofs[i]));
        for (const LeafEdge& leaf : ops.dofs.leaves) {
            const int side = mesh.side_of(leaf.edge, ops.element);
            const int other = mesh.owner_on_side(leaf.edge, 1 - side);
            if (other < 0) continue;
            const auto pts = mesh.edge_points(leaf.edge);
            const double j2 = jump_sq(flux[i], flux[disc.slot[other]], pts[leaf.reversed ? 1 : 0],
                                      pts[leaf.reversed ? 0 : 1]);
            ind.eta_sq += 0.5 * std::sqrt(h2) * j2;
        }
        const auto psi = local_psi_sq(ops, edata[i], dofs[i]);
        ind.psi_A_sq = psi[0];
        ind.psi_c_sq = psi[1];
        ind.stab = stabilization_energy(ops, dofs[i]);
        set.add(ind);
    }
    return set;
}

void write_indicators(std::ostream& out, const IndicatorSet& set) {
    out << "element_id,eta_sq,psi_A_sq,psi_c_sq,stab\n";
    out << std::setprecision(17);
    for (const auto& e : set.items) {
        out << e.element << ',' << e.eta_sq << ',' << e.psi_A_sq << ',' << e.psi_c_sq << ',' << e.stab << '\n';
    }
}

}  // namespace avem
