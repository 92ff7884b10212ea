#include "avem/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "avem/lagrange_split.hpp"
#include "avem/quadrature.hpp"

namespace avem {

namespace {

// Defects (I - Pi0_{k-1,T}) m_i on T for the monomials of degree k..2k-2 in
// the frame `basis`, as polynomials in T's frame.
std::vector<Poly> defects(const Triangle2& tri, const Frame& basis, int k) {
    const int top = 2 * k - 2;
    const Frame fr = Frame::of_triangle(tri);
    std::vector<Poly> out;
    const auto& ex = monomial_exponents(top);
    for (std::size_t i = monomial_count(k - 1); i < ex.size(); ++i) {
        Poly m(basis, top);
        m.coef()(i) = 1.0;
        const Poly local = m.rebased(fr);
        out.push_back(local - project_L2(tri, local, k - 1));
    }
    return out;
}

Eigen::MatrixXd defect_gram(const Triangle2& tri, const std::vector<Poly>& d) {
    const int n = static_cast<int>(d.size());
    const TriangleRule& rule = triangle_rule(2 * d.front().degree());
    const auto pts = map_points(rule, tri);
    const double area = std::abs(triangle_area(tri));
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t q = 0; q < pts.size(); ++q) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = d[i](pts[q]);
        G.noalias() += (area * rule.weights[q]) * v * v.transpose();
    }
    return G;
}

}  // namespace

double mu_squared(int k, int m) {
    if (k < 2 || k > 4) throw std::invalid_argument("mu_squared: k must be 2, 3 or 4");
    if (m < 1 || m > 8) throw std::invalid_argument("mu_squared: m must be between 1 and 8");
    std::vector<std::array<Dyadic, 2>> v{{Dyadic(1, 0), Dyadic(0, 0)}, {Dyadic(0, 0), Dyadic(1, 0)}, {Dyadic(0, 0), Dyadic(0, 0)}};
    Mesh ref(k, v, {{{0, 1, 2}, 2}}, 1 << 20);
    const Triangle2 hat = ref.corners(0);
    const Frame basis = Frame::of_triangle(hat);
    for (int l = 0; l < m; ++l) ref.refine_uniform();

    const Eigen::MatrixXd R = defect_gram(hat, defects(hat, basis, k));
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(R.rows(), R.cols());
    for (int e : ref.active_elements()) {
        const Triangle2 t = ref.corners(e);
        L += defect_gram(t, defects(t, basis, k));
    }
    check_conditioning(R, "mu_squared right-hand form");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (L + L.transpose()), 0.5 * (R + R.transpose()),
                                                                 Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw IllConditionedError("mu_squared: eigensolver failed");
    return es.eigenvalues().maxCoeff();
}

int minimal_uniform_levels(int k) {
    for (int m = 1; m <= 8; ++m) {
        if (mu_squared(k, m) < 1.0 - 1e-8) return m;
    }
    throw std::runtime_error("no m <= 8 gives mu^2 < 1 for k = " + std::to_string(k));
}

void write_table1(std::ostream& out) {
    out << "k,m,mu_squared\n";
    out << std::fixed << std::setprecision(6);
    for (int k = 2; k <= 4; ++k) {
        for (int m = 1; m <= 3; ++m) out << k << ',' << m << ',' << mu_squared(k, m) << '\n';
    }
}

SplitParent split_parent(const Mesh& mesh, int node) {
    const NodeKey& key = mesh.nodes().at(node).key;
    if (key.root < 0 || key.level < 1) throw std::invalid_argument("split_parent: node was not created by a split");
    const int k = mesh.degree();
    SplitParent sp;
    sp.root = key.root;
    sp.level = key.level - 1;
    sp.index = key.num / (2 * k);
    const std::int64_t pos = key.num - 2 * k * sp.index;  // odd, in (0, 2k)
    sp.zeta = static_cast<int>((pos - 1) / 2);
    for (int n = 0; n <= k; ++n) {
        const int id = mesh.node_at(key.root, sp.index * k + n, sp.level);
        if (id < 0) throw std::logic_error("split_parent: parent lattice point not registered");
        sp.lattice.push_back(id);
    }
    return sp;
}

namespace {

std::vector<int> hanging_by_level(const Mesh& mesh) {
    std::vector<int> h;
    for (std::size_t i = 0; i < mesh.nodes().size(); ++i) {
        if (mesh.is_hanging(static_cast<int>(i))) h.push_back(static_cast<int>(i));
    }
    std::sort(h.begin(), h.end(), [&](int a, int b) {
        const int la = mesh.nodes()[a].key.level;
        const int lb = mesh.nodes()[b].key.level;
        return la != lb ? la < lb : a < b;
    });
    return h;
}

}  // namespace

VemFunction conforming_interpolant(const Discretization& disc, const VemFunction& v) {
    const Mesh& mesh = *disc.mesh;
    const int k = mesh.degree();
    const auto alpha = lagrange_split_coefficients_double(k);
    VemFunction w;
    w.node_values = v.node_values;
    std::vector<char> done(mesh.nodes().size(), 1);
    const auto hanging = hanging_by_level(mesh);
    for (int x : hanging) done[x] = 0;
    // A parent lattice point may hang on another root at a deeper level, so
    // sweep until every node whose parents are final has been filled.
    std::vector<SplitParent> parents;
    for (int x : hanging) parents.push_back(split_parent(mesh, x));
    std::size_t remaining = hanging.size();
    while (remaining > 0) {
        std::size_t filled = 0;
        for (std::size_t i = 0; i < hanging.size(); ++i) {
            const int x = hanging[i];
            if (done[x]) continue;
            const SplitParent& sp = parents[i];
            if (!std::all_of(sp.lattice.begin(), sp.lattice.end(), [&](int n) { return done[n] != 0; })) continue;
            double value = 0.0;
            for (int n = 0; n <= k; ++n) value += alpha[sp.zeta][n] * w.node_values(sp.lattice[n]);
            w.node_values(x) = value;
            done[x] = 1;
            ++filled;
        }
        if (filled == 0) throw std::logic_error("conforming_interpolant: cyclic dependency among hanging nodes");
        remaining -= filled;
    }
    w.moments = v.moments;
    const int nlow = monomial_count(k - 3);
    for (const LocalOps& ops : disc.ops) {
        Eigen::VectorXd d = local_dofs(ops, w);
        d.tail(ops.dofs.moments).tail(ops.dofs.moments - nlow).setZero();  // unused by I_E
        const Poly q = apply_lagrange(ops, d);
        w.moments[ops.element] = polynomial_dofs(mesh, ops, q).tail(ops.dofs.moments);
    }
    return w;
}

DetailVector hierarchical_details(const Discretization& disc, const VemFunction& v) {
    const Mesh& mesh = *disc.mesh;
    const int k = mesh.degree();
    const auto alpha = lagrange_split_coefficients_double(k);
    DetailVector out;
    out.hanging = hanging_by_level(mesh);
    out.d = Eigen::VectorXd::Zero(mesh.nodes().size());
    const VemFunction w = conforming_interpolant(disc, v);
    out.delta = v.node_values - w.node_values;
    for (int x : out.hanging) {
        const SplitParent sp = split_parent(mesh, x);
        double interp = 0.0;
        for (int n = 0; n <= k; ++n) interp += alpha[sp.zeta][n] * v.node_values(sp.lattice[n]);
        out.d(x) = v.node_values(x) - interp;
    }
    return out;
}

double reconstruction_defect(const Discretization& disc, const VemFunction& v, const DetailVector& details) {
    const Mesh& mesh = *disc.mesh;
    const int k = mesh.degree();
    std::vector<std::vector<int>> by_root(mesh.edges().size());
    for (int x : details.hanging) by_root[mesh.nodes()[x].key.root].push_back(x);
    auto param = [&](const NodeKey& key) { return std::ldexp(static_cast<double>(key.num), -key.level) / k; };
    double worst = 0.0;
    for (const LocalOps& ops : disc.ops) {
        const Eigen::VectorXd dofs = local_dofs(ops, v);
        const Poly iv = apply_lagrange(ops, dofs);
        for (int side : mesh.elements()[ops.element].side) {
            const EdgeNode& s = mesh.edges()[side];
            const double lo = std::ldexp(static_cast<double>(s.index), -s.level);
            const double hi = std::ldexp(static_cast<double>(s.index + 1), -s.level);
            std::vector<int> leaves;
            mesh.collect_leaves(side, leaves);
            for (int leaf : leaves) {
                for (int j = 0; j <= k; ++j) {
                    const int p = mesh.lattice_node(leaf, j);
                    const NodeRecord& rec = mesh.nodes()[p];
                    const double lhs = v.node_values(p) - iv(rec.pos);
                    // Parameter of p on the root edge of this side.
                    const EdgeNode& l = mesh.edges()[leaf];
                    const double tp = std::ldexp(static_cast<double>(l.index * k + j), -l.level) / k;
                    double rhs = 0.0;
                    for (int x : by_root[s.root]) {
                        const NodeKey& key = mesh.nodes()[x].key;
                        const double tx = param(key);
                        if (key.level <= s.level || tx <= lo || tx >= hi) continue;
                        const SplitParent sp = split_parent(mesh, x);
                        const double sloc = std::ldexp(tp, sp.level) - static_cast<double>(sp.index);
                        rhs += details.d(x) * detail_basis_psi(k, sp.zeta, sloc);
                    }
                    worst = std::max(worst, std::abs(lhs - rhs));
                }
            }
        }
    }
    return worst;
}

double delta_d_defect(const Mesh& mesh, const DetailVector& details) {
    const int k = mesh.degree();
    const auto alpha = lagrange_split_coefficients_double(k);
    double worst = 0.0;
    for (int x : details.hanging) {
        const SplitParent sp = split_parent(mesh, x);
        double rhs = details.d(x);
        for (int n = 0; n <= k; ++n) rhs += alpha[sp.zeta][n] * details.delta(sp.lattice[n]);
        worst = std::max(worst, std::abs(details.delta(x) - rhs));
    }
    return worst;
}

RatioStudy ratio_study(const Discretization& disc, const VemFunction& v) {
    const VemFunction w = conforming_interpolant(disc, v);
    const DetailVector det = hierarchical_details(disc, v);
    double local = 0.0;
    double conforming = 0.0;
    double gap = 0.0;
    for (const LocalOps& ops : disc.ops) {
        const Eigen::VectorXd dv = local_dofs(ops, v);
        const Eigen::VectorXd dw = local_dofs(ops, w);
        const auto g = apply_pi0_grad(ops, dv);
        const Poly q = apply_lagrange(ops, dv);
        const Poly q0 = apply_lagrange(ops, dw);
        const double s = stabilization_energy(ops, dv);
        for (int c = 0; c < 2; ++c) {
            local += l2_norm_sq(ops.tri, g[c] - q.derivative(c));
            conforming += l2_norm_sq(ops.tri, g[c] - q0.derivative(c));
            gap += l2_norm_sq(ops.tri, q.derivative(c) - q0.derivative(c));
        }
        local += s;
        conforming += s;
    }
    double d2 = 0.0;
    double delta2 = 0.0;
    for (int x : det.hanging) {
        d2 += det.d(x) * det.d(x);
        delta2 += det.delta(x) * det.delta(x);
    }
    RatioStudy r;
    r.details_vs_interp = local > 0.0 ? d2 / local : 0.0;
    r.interp_gap_vs_delta = delta2 > 0.0 ? gap / delta2 : 0.0;
    r.conforming_vs_local = local > 0.0 ? std::sqrt(conforming / local) : 0.0;
    return r;
}

VemFunction random_function(const Mesh& mesh, std::mt19937_64& rng, bool zero_boundary) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VemFunction v;
    v.node_values.resize(mesh.nodes().size());
    for (std::size_t i = 0; i < mesh.nodes().size(); ++i) {
        v.node_values(i) = zero_boundary && mesh.nodes()[i].on_boundary ? 0.0 : u(rng);
    }
    v.moments.assign(mesh.elements().size(), Eigen::VectorXd());
    const int nm = monomial_count(mesh.degree() - 2);
    for (int e : mesh.active_elements()) {
        v.moments[e] = Eigen::VectorXd(nm);
        for (int j = 0; j < nm; ++j) v.moments[e](j) = u(rng);
    }
    return v;
}

}  // namespace avem
