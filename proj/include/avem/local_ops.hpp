#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "avem/mesh.hpp"
#include "avem/polynomial.hpp"
#include "avem/problem_data.hpp"

namespace avem {

/// Local degrees of freedom of one element seen as a polygon: values at the
/// k-lattice of every leaf edge (counterclockwise, shared endpoints counted
/// once) followed by the moments (1/|E|) int v m_p, |p| <= k-2.
struct LocalDofMap {
    std::vector<LeafEdge> leaves;
    std::vector<int> boundary_nodes;
    int moments = 0;

    int boundary_count() const { return static_cast<int>(boundary_nodes.size()); }
    int size() const { return boundary_count() + moments; }
    /// Local index of node j (0..k) of leaf i.
    int leaf_dof(int leaf, int j, int k) const { return (leaf * k + j) % boundary_count(); }
};

/// Operator bundle of one element. Projections map local DOF vectors to
/// coefficients in the element's scaled monomial frame.
struct LocalOps {
    int element = -1;
    int k = 0;
    Triangle2 tri;
    Frame frame;
    double area = 0.0;
    LocalDofMap dofs;
    /// Local indices of the 3k proper-lattice points of the macro triangle.
    std::vector<int> lattice_dofs;

    Eigen::MatrixXd P_nabla;                // dim P_k x ndof
    Eigen::MatrixXd P0;                     // dim P_k x ndof
    std::array<Eigen::MatrixXd, 2> P0_grad;  // dim P_{k-1} x ndof
    Eigen::MatrixXd I_lagrange;             // dim P_k x ndof
    /// Rows (v - I_E v)(x_i) over boundary nodes x_i; stab = R^T R.
    Eigen::MatrixXd stab_rows;
    Eigen::MatrixXd stab;
    Eigen::MatrixXd stiffness;
    Eigen::MatrixXd mass;
    Eigen::VectorXd load;

    int ndof() const { return dofs.size(); }
};

LocalDofMap local_dof_map(const Mesh& mesh, int element);

LocalOps build_local_ops(const Mesh& mesh, int element, const ElementData& data);
LocalOps build_local_ops(const Mesh& mesh, int element, const PiecewiseData& data);

Poly apply_pi_nabla(const LocalOps& ops, const Eigen::VectorXd& dofs);
Poly apply_pi0(const LocalOps& ops, const Eigen::VectorXd& dofs);
std::array<Poly, 2> apply_pi0_grad(const LocalOps& ops, const Eigen::VectorXd& dofs);
Poly apply_lagrange(const LocalOps& ops, const Eigen::VectorXd& dofs);

/// S_E(v, v) without the factor gamma.
double stabilization_energy(const LocalOps& ops, const Eigen::VectorXd& dofs);

/// Local DOF vector of a polynomial (values at boundary nodes, moments).
Eigen::VectorXd polynomial_dofs(const Mesh& mesh, const LocalOps& ops, const Poly& q);

/// Coefficient matrix of d/dx (dir 0) or d/dy (dir 1) from degree p to p-1
/// in a frame of scale h.
Eigen::MatrixXd derivative_matrix(int p, int dir, double h);

}  // namespace avem
