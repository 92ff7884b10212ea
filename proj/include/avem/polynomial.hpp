#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace avem {

using Vec2 = Eigen::Vector2d;
using Triangle2 = std::array<Vec2, 3>;

struct IllConditionedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Center and scale of a scaled monomial basis ((x - center) / h)^s.
struct Frame {
    Vec2 center = Vec2::Zero();
    double h = 1.0;

    Vec2 local(const Vec2& x) const { return (x - center) / h; }
    static Frame of_triangle(const Triangle2& t);
};

/// (p + 1)(p + 2) / 2.
int monomial_count(int p);
/// Position of x^a y^b in graded lexicographic order: 1, x, y, x^2, xy, y^2, ...
int monomial_index(int a, int b);
/// Exponents in graded lexicographic order up to degree p.
const std::vector<std::array<int, 2>>& monomial_exponents(int p);

/// Values of all scaled monomials of degree <= p at x.
Eigen::VectorXd eval_monomials(const Frame& frame, int p, const Vec2& x);

/// Bivariate polynomial in a scaled monomial basis.
class Poly {
public:
    Poly() = default;
    Poly(const Frame& frame, int degree);
    Poly(const Frame& frame, int degree, Eigen::VectorXd coef);
    static Poly constant(const Frame& frame, double value);

    const Frame& frame() const { return frame_; }
    int degree() const { return degree_; }
    const Eigen::VectorXd& coef() const { return coef_; }
    Eigen::VectorXd& coef() { return coef_; }

    double operator()(const Vec2& x) const;
    /// Partial derivative along x (dir 0) or y (dir 1).
    Poly derivative(int dir) const;
    /// The same function expanded in another frame (exact up to rounding).
    Poly rebased(const Frame& frame) const;
    /// Coefficients padded or truncated to the given degree.
    Poly with_degree(int degree) const;
    /// Highest degree with a coefficient above tol in magnitude.
    int effective_degree(double tol = 0.0) const;

    Poly& operator+=(const Poly& other);
    Poly& operator-=(const Poly& other);
    Poly& operator*=(double s);
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(Poly a, double s) { return a *= s; }
    friend Poly operator*(double s, Poly a) { return a *= s; }
    /// Product; the right factor is rebased into the left factor's frame.
    friend Poly operator*(const Poly& a, const Poly& b);

private:
    Frame frame_;
    int degree_ = 0;
    Eigen::VectorXd coef_ = Eigen::VectorXd::Zero(1);
};

double triangle_area(const Triangle2& t);

/// Integral of a callable over a triangle with a rule exact to `degree`.
double integrate(const Triangle2& tri, const std::function<double(const Vec2&)>& fn, int degree);

/// Gram matrix of the scaled monomials of degree <= p over a triangle.
Eigen::MatrixXd monomial_mass(const Triangle2& tri, const Frame& frame, int p);
/// Weighted Gram matrix, entries int weight * m_a * m_b.
Eigen::MatrixXd monomial_mass(const Triangle2& tri, const Frame& frame, int p, const Poly& weight);

/// Throws IllConditionedError when the symmetric matrix has 2-norm condition
/// number above 1e12.
void check_conditioning(const Eigen::MatrixXd& gram, const char* what);

/// Coefficients of the L2(tri) projection of `target` onto P_p in `frame`.
/// `target_degree` is the exactness needed for the target (its polynomial
/// degree, or a quadrature degree for general functions).
Eigen::VectorXd project_L2(const Triangle2& tri, const Frame& frame, int p,
                           const std::function<double(const Vec2&)>& target, int target_degree);
Poly project_L2(const Triangle2& tri, const Poly& q, int p);

/// ||q||^2 over the triangle.
double l2_norm_sq(const Triangle2& tri, const Poly& q);

}  // namespace avem
