#pragma once

#include <iosfwd>
#include <string>

#include "avem/mesh.hpp"

namespace avem {

/// Reads the plain-text initial mesh format:
///
///     vertices N
///     id x y            (N lines)
///     triangles M
///     id v0 v1 v2 [newest_index]   (M lines)
///
/// Blank lines and lines starting with '#' are ignored. Vertex ids must be
/// 0..N-1 and triangle ids 0..M-1 (any order).
Mesh read_mesh(std::istream& in, int degree, int lambda_cap);
Mesh read_mesh_file(const std::string& path, int degree, int lambda_cap);

/// Legacy VTK unstructured grid of the active macro triangles with cell data
/// (element id, generation, number of polygon edges) and optional per-element
/// scalars.
void write_vtk(std::ostream& out, const Mesh& mesh,
               const std::vector<std::pair<std::string, std::vector<double>>>& cell_data = {});

/// Deterministic dump of the initial mesh and the bisection history.
void write_tree(std::ostream& out, const Mesh& mesh);
/// Rebuilds a mesh from write_tree output by replaying the bisections.
Mesh read_tree(std::istream& in);

}  // namespace avem
