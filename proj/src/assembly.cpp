#include "avem/assembly.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "avem/lagrange_split.hpp"

namespace avem {

GlobalDofMap build_dof_map(const Mesh& mesh) {
    GlobalDofMap map;
    map.node_dof.assign(mesh.nodes().size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < mesh.nodes().size(); ++i) {
        if (!mesh.nodes()[i].on_boundary) map.node_dof[i] = next++;
    }
    const int nm = monomial_count(mesh.degree() - 2);
    map.moment_offset.assign(mesh.elements().size(), -1);
    for (int e : mesh.active_elements()) {
        map.moment_offset[e] = next;
        next += nm;
    }
    map.size = next;
    return map;
}

Discretization discretize(const Mesh& mesh, const PiecewiseData& data) {
    Discretization d;
    d.mesh = &mesh;
    d.active = mesh.active_elements();
    d.slot.assign(mesh.elements().size(), -1);
    d.ops.reserve(d.active.size());
    for (std::size_t i = 0; i < d.active.size(); ++i) {
        d.slot[d.active[i]] = static_cast<int>(i);
        d.ops.push_back(build_local_ops(mesh, d.active[i], data));
    }
    d.map = build_dof_map(mesh);
    return d;
}

Eigen::VectorXd local_dofs(const LocalOps& ops, const VemFunction& v) {
    Eigen::VectorXd out(ops.ndof());
    const int nb = ops.dofs.boundary_count();
    for (int i = 0; i < nb; ++i) out(i) = v.node_values(ops.dofs.boundary_nodes[i]);
    const Eigen::VectorXd& m = v.moments.at(ops.element);
    if (m.size() != ops.dofs.moments) throw std::invalid_argument("local_dofs: element has no moment vector");
    out.tail(ops.dofs.moments) = m;
    return out;
}

std::vector<int> local_to_global(const Discretization& disc, const LocalOps& ops) {
    std::vector<int> g(ops.ndof());
    const int nb = ops.dofs.boundary_count();
    for (int i = 0; i < nb; ++i) g[i] = disc.map.node_dof[ops.dofs.boundary_nodes[i]];
    for (int j = 0; j < ops.dofs.moments; ++j) g[nb + j] = disc.map.moment_offset[ops.element] + j;
    return g;
}

SparseSystem assemble(const Discretization& disc, double gamma, const VemFunction* lifting) {
    std::vector<Eigen::Triplet<double>> trip;
    SparseSystem sys;
    sys.rhs = Eigen::VectorXd::Zero(disc.map.size);
    for (const LocalOps& ops : disc.ops) {
        const Eigen::MatrixXd K = ops.stiffness + ops.mass + gamma * ops.stab;
        const auto g = local_to_global(disc, ops);
        Eigen::VectorXd lifted;
        if (lifting) lifted = local_dofs(ops, *lifting);
        for (int i = 0; i < ops.ndof(); ++i) {
            if (g[i] < 0) continue;
            sys.rhs(g[i]) += ops.load(i);
            for (int j = 0; j < ops.ndof(); ++j) {
                if (g[j] >= 0) {
                    trip.emplace_back(g[i], g[j], K(i, j));
                } else if (lifting) {
                    sys.rhs(g[i]) -= K(i, j) * lifted(j);
                }
            }
        }
    }
    sys.matrix.resize(disc.map.size, disc.map.size);
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    return sys;
}

Eigen::VectorXd solve(const SparseSystem& system, double tol, SolveInfo* info) {
    const Eigen::SparseMatrix<double>& A = system.matrix;
    const Eigen::VectorXd& b = system.rhs;
    const Eigen::Index n = b.size();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    const double bnorm = b.norm();
    if (info) *info = SolveInfo{};
    if (n == 0 || bnorm == 0.0) return x;
    Eigen::VectorXd inv_diag = A.diagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(inv_diag(i) > 0.0)) {
            throw SolverFailure("matrix has a nonpositive diagonal entry at row " + std::to_string(i), {});
        }
        inv_diag(i) = 1.0 / inv_diag(i);
    }
    // Plain PCG so that the residual history is available on failure.
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    std::vector<double> history{1.0};
    const long cap = 20 * static_cast<long>(n);
    for (long it = 1; it <= cap; ++it) {
        const Eigen::VectorXd Ap = A * p;
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0)) {
            throw SolverFailure("CG breakdown: matrix not positive definite (p^T A p = " + std::to_string(pAp) + ")",
                                history);
        }
        const double alpha = rz / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        const double rel = r.norm() / bnorm;
        history.push_back(rel);
        if (rel <= tol) {
            if (info) *info = SolveInfo{static_cast<int>(it), rel};
            return x;
        }
        z = inv_diag.cwiseProduct(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    throw SolverFailure("CG did not reach relative residual " + std::to_string(tol) + " in " + std::to_string(cap) +
                            " iterations (last " + std::to_string(history.back()) + ")",
                        history);
}

VemFunction to_function(const Discretization& disc, const Eigen::VectorXd& x, const VemFunction* lifting) {
    const Mesh& mesh = *disc.mesh;
    VemFunction v;
    v.node_values = Eigen::VectorXd::Zero(mesh.nodes().size());
    for (std::size_t i = 0; i < mesh.nodes().size(); ++i) {
        const int g = disc.map.node_dof[i];
        if (g >= 0) {
            v.node_values(i) = x(g);
        } else if (lifting) {
            v.node_values(i) = lifting->node_values(i);
        }
    }
    v.moments.assign(mesh.elements().size(), Eigen::VectorXd());
    const int nm = monomial_count(mesh.degree() - 2);
    for (int e : disc.active) v.moments[e] = x.segment(disc.map.moment_offset[e], nm);
    return v;
}

Eigen::VectorXd to_vector(const Discretization& disc, const VemFunction& v) {
    Eigen::VectorXd x(disc.map.size);
    for (std::size_t i = 0; i < disc.map.node_dof.size(); ++i) {
        if (disc.map.node_dof[i] >= 0) x(disc.map.node_dof[i]) = v.node_values(i);
    }
    const int nm = monomial_count(disc.mesh->degree() - 2);
    for (int e : disc.active) x.segment(disc.map.moment_offset[e], nm) = v.moments.at(e);
    return x;
}

VemFunction interpolate_polynomial(const Mesh& mesh, const Discretization& disc, const Poly& q) {
    VemFunction v;
    v.node_values.resize(mesh.nodes().size());
    for (std::size_t i = 0; i < mesh.nodes().size(); ++i) v.node_values(i) = q(mesh.nodes()[i].pos);
    v.moments.assign(mesh.elements().size(), Eigen::VectorXd());
    for (const LocalOps& ops : disc.ops) {
        v.moments[ops.element] = polynomial_dofs(mesh, ops, q).tail(ops.dofs.moments);
    }
    return v;
}

double bilinear(const Discretization& disc, const VemFunction& v, const VemFunction& w, double gamma) {
    double sum = 0.0;
    for (const LocalOps& ops : disc.ops) {
        const Eigen::VectorXd a = local_dofs(ops, v);
        const Eigen::VectorXd b = local_dofs(ops, w);
        sum += a.dot((ops.stiffness + ops.mass + gamma * ops.stab) * b);
    }
    return sum;
}

double energy_sq(const Discretization& disc, const VemFunction& v, double gamma) { return bilinear(disc, v, v, gamma); }

double stabilization_form(const Discretization& disc, const VemFunction& v, const VemFunction& w) {
    double sum = 0.0;
    for (const LocalOps& ops : disc.ops) {
        sum += (ops.stab_rows * local_dofs(ops, v)).dot(ops.stab_rows * local_dofs(ops, w));
    }
    return sum;
}

VemFunction prolongate(const Mesh& fine, std::size_t first_step, const VemFunction& coarse) {
    const int k = fine.degree();
    const auto& history = fine.bisection_history();
    if (first_step > history.size()) throw std::invalid_argument("prolongate: history index out of range");
    const Eigen::Index old_nodes = coarse.node_values.size();
    if (old_nodes > static_cast<Eigen::Index>(fine.nodes().size())) {
        throw std::invalid_argument("prolongate: meshes are not nested");
    }
    VemFunction out;
    out.node_values = Eigen::VectorXd::Constant(fine.nodes().size(), std::numeric_limits<double>::quiet_NaN());
    out.node_values.head(old_nodes) = coarse.node_values;
    out.moments = coarse.moments;
    out.moments.resize(fine.elements().size());

    std::vector<double> at_half;
    for (std::size_t step = first_step; step < history.size(); ++step) {
        const Element& el = fine.elements()[history[step]];
        const int split = el.side[2];
        const EdgeNode& s = fine.edges()[split];
        std::vector<double> xi(k + 1);
        for (int n = 0; n <= k; ++n) xi[n] = out.node_values(fine.lattice_node(split, n));
        for (int c = 0; c < 2; ++c) {
            for (int j = 0; j <= k; ++j) {
                const int node = fine.lattice_node(s.child[c], j);
                if (!std::isnan(out.node_values(node))) continue;
                const auto L = lagrange_basis(k, static_cast<double>(c * k + j) / (2.0 * k));
                double v = 0.0;
                for (int n = 0; n <= k; ++n) v += L[n] * xi[n];
                out.node_values(node) = v;
            }
        }
        const int cut = fine.elements()[el.child[0]].side[1];
        const double vm = out.node_values(fine.lattice_node(cut, 0));
        const double vt = out.node_values(fine.lattice_node(cut, k));
        for (int j = 1; j < k; ++j) {
            const int node = fine.lattice_node(cut, j);
            const double t = static_cast<double>(j) / k;
            out.node_values(node) = (1.0 - t) * vm + t * vt;
        }
        const Eigen::VectorXd parent = out.moments.at(history[step]);
        out.moments[el.child[0]] = parent;
        out.moments[el.child[1]] = parent;
        out.moments[history[step]] = Eigen::VectorXd();
    }
    for (Eigen::Index i = 0; i < out.node_values.size(); ++i) {
        if (std::isnan(out.node_values(i))) throw std::logic_error("prolongate: node left without a value");
    }
    return out;
}

double energy_norm_diff(const Discretization& fine, std::size_t first_step, const VemFunction& u_fine,
                        const VemFunction& u_coarse, double gamma) {
    VemFunction w = prolongate(*fine.mesh, first_step, u_coarse);
    w.node_values = u_fine.node_values - w.node_values;
    for (int e : fine.active) w.moments[e] = u_fine.moments.at(e) - w.moments.at(e);
    return std::sqrt(std::max(0.0, energy_sq(fine, w, gamma)));
}

void write_matrix(std::ostream& out, const Eigen::SparseMatrix<double>& m) {
    out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
    out << std::setprecision(17);
    for (int c = 0; c < m.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, c); it; ++it) {
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
        }
    }
}

}  // namespace avem
