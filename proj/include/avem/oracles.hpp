#pragma once

#include <iosfwd>
#include <random>
#include <vector>

#include "avem/assembly.hpp"

namespace avem {

/// Largest generalized eigenvalue of
///   q -> sum_i ||(I - Pi0_{k-1,E_i}) q||^2   versus   q -> ||(I - Pi0_{k-1,E}) q||^2
/// over q in P_{2k-2}, E the reference triangle (1,0), (0,1), (0,0) with the
/// newest vertex at the right angle and E_i its m-level uniform bisection.
double mu_squared(int k, int m);

/// Smallest m with mu_squared(k, m) < 1.
int minimal_uniform_levels(int k);

/// CSV k,m,mu_squared for k = 2..4, m = 1..3.
void write_table1(std::ostream& out);

/// The k+1 lattice nodes of the segment split to create a node of level >= 1,
/// and the index of the node among that split's new points.
struct SplitParent {
    std::vector<int> lattice;
    int zeta = -1;
    int root = -1;
    int level = 0;  // level of the parent segment
    std::int64_t index = 0;
};
SplitParent split_parent(const Mesh& mesh, int node);

/// Details of every hanging node (indexed by node id; zero elsewhere).
struct DetailVector {
    std::vector<int> hanging;
    Eigen::VectorXd d;
    Eigen::VectorXd delta;
};

/// I0_T v: the continuous piecewise P_k function that keeps v at proper
/// nodes and the moments of degree <= k-3.
VemFunction conforming_interpolant(const Discretization& disc, const VemFunction& v);

DetailVector hierarchical_details(const Discretization& disc, const VemFunction& v);

/// Largest deviation over the boundary lattice of every element between
/// (v - I_E v) and the detail expansion sum_x d(v, x) psi_x.
double reconstruction_defect(const Discretization& disc, const VemFunction& v, const DetailVector& details);

/// Largest deviation of delta(x) - d(x) - sum_n alpha_n delta(xi_n).
double delta_d_defect(const Mesh& mesh, const DetailVector& details);

/// Ratios of the interpolation estimates, with the broken H1 seminorm of
/// a virtual function replaced by sum_E ||Pi0 grad w||^2 + S_E(w).
struct RatioStudy {
    double details_vs_interp = 0.0;       // sum d^2 / |v - I_T v|^2
    double interp_gap_vs_delta = 0.0;     // |I_T v - I0_T v|^2 / sum delta^2
    double conforming_vs_local = 0.0;     // |v - I0_T v| / |v - I_T v|
};
RatioStudy ratio_study(const Discretization& disc, const VemFunction& v);

/// Random node values (zero on the domain boundary if requested) and moments.
VemFunction random_function(const Mesh& mesh, std::mt19937_64& rng, bool zero_boundary = false);

}  // namespace avem
