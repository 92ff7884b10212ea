#pragma once

#include <array>
#include <optional>
#include <vector>

#include "avem/assembly.hpp"
#include "avem/problem_data.hpp"

namespace avem {

/// Bisects every element that has a refined side until the mesh is
/// conforming. Returns the number of bisections.
int close_conforming(Mesh& mesh);

/// Conforming Lagrange P_k finite element solution of the same problem.
struct ConformingSolution {
    Mesh mesh;
    int dofs = 0;
    /// Per element id (active elements only): the solution polynomial in the
    /// element frame.
    std::vector<std::optional<Poly>> u;
};

/// Solves on `mesh` (must be conforming) with homogeneous Dirichlet data.
ConformingSolution solve_conforming(Mesh mesh, const PiecewiseData& data, double tol = 1e-12);

/// Copy of `mesh`, refined uniformly `levels` times and closed, then solved.
ConformingSolution reference_solution(const Mesh& mesh, const PiecewiseData& data, int levels = 2,
                                      double tol = 1e-12);

/// Element stiffness matrix of conforming P_k on one triangle (nodes in the
/// order: 3k boundary lattice points counterclockwise from v[0], then
/// interior points), A from data, no reaction term.
Eigen::MatrixXd conforming_stiffness(const Triangle2& tri, int k, const ElementData& data);
/// Lattice points of a triangle in the order used by conforming_stiffness.
std::vector<Vec2> conforming_nodes(const Triangle2& tri, int k);

/// Computable projections of a discrete solution, kept per element id.
struct SolutionSnapshot {
    struct Entry {
        Poly value;
        std::array<Poly, 2> grad;
    };
    std::vector<std::optional<Entry>> elements;
};

SolutionSnapshot take_snapshot(const Discretization& disc, const VemFunction& u);

/// sum_R int (grad u_ref - Pi0 grad u_T) . A (...) + c (u_ref - Pi0 u_T)^2 over
/// the reference elements R, each paired with its ancestor in the snapshot.
double surrogate_error_sq(const ConformingSolution& ref, const PiecewiseData& data, const SolutionSnapshot& snap);

}  // namespace avem
