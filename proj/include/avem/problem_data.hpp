#pragma once

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "avem/mesh.hpp"
#include "avem/polynomial.hpp"

namespace avem {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Data restricted to one element, expanded in that element's frame.
struct ElementData {
    /// a11, a12, a22.
    std::array<Poly, 3> A;
    Poly c;
    Poly f;

    Eigen::Matrix2d A_at(const Vec2& x) const;
    /// Entry (i, j) of A as a polynomial.
    const Poly& a(int i, int j) const { return A[i + j]; }
};

/// D = (A, c, f) as polynomials on each initial triangle.
class PiecewiseData {
public:
    PiecewiseData() = default;
    PiecewiseData(int degree, std::vector<ElementData> roots);

    /// Same global polynomials on every initial triangle (coefficients given
    /// in the frame of each argument).
    static PiecewiseData uniform(const Mesh& mesh, const Poly& a11, const Poly& a12, const Poly& a22, const Poly& c,
                                 const Poly& f);

    int degree() const { return k_; }
    const std::vector<ElementData>& roots() const { return roots_; }

    /// Data on an element of the mesh, re-expanded in Frame::of_triangle of
    /// that element.
    ElementData on_element(const Mesh& mesh, int element) const;
    /// Re-expansion of parent data in the child's frame.
    static ElementData restrict_to(const ElementData& parent, const Frame& child);

    /// Degree limits (A, c <= k-1; f <= k), symmetry, positive definiteness
    /// of A and nonnegativity of c sampled on a lattice of every initial
    /// triangle. Throws DataError naming the offending point.
    void validate(const Mesh& mesh) const;

private:
    int k_ = 0;
    std::vector<ElementData> roots_;
};

/// Problem file, one block per coefficient:
///
///     A constant 1                      # isotropic
///     A constant 2 0.5 1                # a11 a12 a22
///     A poly 1:0:0 1:1:0 | 0:0:0 | 1:0:0 1:0:1
///     c poly 1:0:0 0.5:1:1              # terms coef:px:py in x, y
///     f per_element
///     0 constant 1
///     1 poly 2:1:0
///     end
///
/// `A poly` takes one term list (isotropic), three (a11 | a12 | a22) or four
/// (a11 | a12 | a21 | a22, must be symmetric). Same for `A constant`.
PiecewiseData read_problem(std::istream& in, const Mesh& mesh);
PiecewiseData read_problem_file(const std::string& path, const Mesh& mesh);

}  // namespace avem
