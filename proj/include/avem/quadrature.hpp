#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

namespace avem {

/// Rule on [0,1]; weights sum to 1.
struct LineRule {
    std::vector<double> points;
    std::vector<double> weights;
};

/// Rule on the reference simplex, stored as barycentric triples; weights
/// are positive and sum to 1 (fraction of the triangle area).
struct TriangleRule {
    int degree = 0;
    std::vector<std::array<double, 3>> bary;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [0,1], exact up to degree 2n-1.
const LineRule& gauss_line(int n);
/// Gauss-Legendre rule exact for polynomials of the given degree.
const LineRule& gauss_line_for_degree(int degree);

/// Collapsed (Duffy) tensor Gauss rule exact for bivariate polynomials of the
/// given total degree.
const TriangleRule& triangle_rule(int degree);

/// Physical points of a triangle rule on the triangle with corners a, b, c.
std::vector<Eigen::Vector2d> map_points(const TriangleRule& rule, const std::array<Eigen::Vector2d, 3>& tri);

}  // namespace avem
