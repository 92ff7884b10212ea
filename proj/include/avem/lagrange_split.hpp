#pragma once

#include <stdexcept>
#include <vector>

#include <boost/rational.hpp>

namespace avem {

using Rational = boost::rational<long long>;

struct UnsupportedDegree : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// alpha[i][n]: value at the i-th new node zeta_i of a split edge of the
/// Lagrange basis function of the n-th coarse lattice point xi_n (both
/// counted from the edge's first endpoint, zero-based). Size k x (k+1).
/// Supported for 1 <= k <= 4.
const std::vector<std::vector<Rational>>& lagrange_split_coefficients(int k);
std::vector<std::vector<double>> lagrange_split_coefficients_double(int k);

/// Value at s in [0,1] of the k+1 equispaced Lagrange basis functions on
/// [0,1] (nodes n/k).
std::vector<Rational> lagrange_basis(int k, const Rational& s);
std::vector<double> lagrange_basis(int k, double s);

/// Detail basis function psi_i (i = 0..k-1) of a split edge, evaluated at
/// the parameter s in [0,1] of the parent segment. Piecewise degree k on
/// [0,1/2] and [1/2,1]; one at zeta_i, zero at the other zeta_j and at every
/// coarse lattice point.
Rational detail_basis_psi(int k, int i, const Rational& s);
double detail_basis_psi(int k, int i, double s);

/// Parameter of zeta_i on the parent segment: (2i + 1) / (2k).
Rational zeta_position(int k, int i);

}  // namespace avem
