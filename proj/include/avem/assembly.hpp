#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "avem/local_ops.hpp"
#include "avem/mesh.hpp"
#include "avem/problem_data.hpp"

namespace avem {

struct SolverFailure : std::runtime_error {
    SolverFailure(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residuals(std::move(history)) {}
    std::vector<double> residuals;
};

/// A member of V_T by its degrees of freedom: one value per registered node
/// and the moment vector of every active element (indexed by element id).
struct VemFunction {
    Eigen::VectorXd node_values;
    std::vector<Eigen::VectorXd> moments;
};

/// Global numbering. Nodes on the domain boundary are eliminated (-1).
struct GlobalDofMap {
    std::vector<int> node_dof;
    std::vector<int> moment_offset;
    int size = 0;
};

/// Mesh plus the operator bundles of its active elements.
struct Discretization {
    const Mesh* mesh = nullptr;
    std::vector<int> active;
    /// Position in `active` / `ops` of an element id, -1 if inactive.
    std::vector<int> slot;
    std::vector<LocalOps> ops;
    GlobalDofMap map;

    const LocalOps& ops_of(int element) const { return ops.at(slot.at(element)); }
};

GlobalDofMap build_dof_map(const Mesh& mesh);
Discretization discretize(const Mesh& mesh, const PiecewiseData& data);

/// Local DOF vector of v on the element described by ops.
Eigen::VectorXd local_dofs(const LocalOps& ops, const VemFunction& v);
/// Global indices of the local DOFs (-1 where eliminated).
std::vector<int> local_to_global(const Discretization& disc, const LocalOps& ops);

struct SparseSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
};

/// B_T = a_T + m_T + gamma S_T and F_T over the free DOFs. With a lifting,
/// its boundary node values are imposed and moved to the right-hand side.
SparseSystem assemble(const Discretization& disc, double gamma, const VemFunction* lifting = nullptr);

struct SolveInfo {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Diagonally preconditioned CG to relative residual `tol`, at most 20 dim
/// iterations. Throws SolverFailure on non-convergence.
Eigen::VectorXd solve(const SparseSystem& system, double tol = 1e-10, SolveInfo* info = nullptr);

/// Expands a free-DOF vector into a function; eliminated values come from
/// the lifting or are zero.
VemFunction to_function(const Discretization& disc, const Eigen::VectorXd& x, const VemFunction* lifting = nullptr);
/// Free-DOF vector of a function.
Eigen::VectorXd to_vector(const Discretization& disc, const VemFunction& v);

/// DOFs of a global polynomial (given in any frame) on the mesh.
VemFunction interpolate_polynomial(const Mesh& mesh, const Discretization& disc, const Poly& q);

/// B_T(v, v) (gamma included).
double energy_sq(const Discretization& disc, const VemFunction& v, double gamma);
/// a_T + m_T + gamma S_T between two functions.
double bilinear(const Discretization& disc, const VemFunction& v, const VemFunction& w, double gamma);
/// S_T(v, w) without gamma.
double stabilization_form(const Discretization& disc, const VemFunction& v, const VemFunction& w);

/// Canonical embedding V_T -> V_T* for a mesh obtained from the coarse mesh
/// by the bisections history[first_step..]: new points on split edges take
/// the values of the edge polynomial, new bisection edges carry the linear
/// interpolant of their endpoints, children inherit the parent moments.
VemFunction prolongate(const Mesh& fine, std::size_t first_step, const VemFunction& coarse);

/// |||u_fine - prolongate(u_coarse)||| on the fine discretization.
double energy_norm_diff(const Discretization& fine, std::size_t first_step, const VemFunction& u_fine,
                        const VemFunction& u_coarse, double gamma);

/// Coordinate-format dump: "rows cols nnz" then "i j value" (one-based).
void write_matrix(std::ostream& out, const Eigen::SparseMatrix<double>& m);

}  // namespace avem
