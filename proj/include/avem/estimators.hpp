#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "avem/assembly.hpp"

namespace avem {

struct ElementIndicators {
    int element = -1;
    double eta_sq = 0.0;
    double psi_A_sq = 0.0;
    double psi_c_sq = 0.0;
    /// S_E(u_T, u_T), without gamma.
    double stab = 0.0;

    double psi_sq() const { return psi_A_sq + psi_c_sq; }
};

struct IndicatorSet {
    std::vector<ElementIndicators> items;
    double eta_sq = 0.0;
    double psi_A_sq = 0.0;
    double psi_c_sq = 0.0;
    double stab = 0.0;

    double psi_sq() const { return psi_A_sq + psi_c_sq; }
    void add(const ElementIndicators& e);
};

/// A Pi0_{k-1} grad v, one polynomial per component.
std::array<Poly, 2> discrete_flux(const LocalOps& ops, const ElementData& data, const Eigen::VectorXd& dofs);

/// f + div(A Pi0_{k-1} grad v) - c Pi0_k v.
Poly internal_residual(const LocalOps& ops, const ElementData& data, const Eigen::VectorXd& dofs);

/// Squared L2 norm over a segment of the normal jump (s1 - s2) . n.
double jump_sq(const std::array<Poly, 2>& s1, const std::array<Poly, 2>& s2, const Vec2& a, const Vec2& b);

/// (psi_A^2, psi_c^2) of one element.
std::array<double, 2> local_psi_sq(const LocalOps& ops, const ElementData& data, const Eigen::VectorXd& dofs);

/// All indicators of u on the discretized mesh.
IndicatorSet estimate(const Discretization& disc, const PiecewiseData& data, const VemFunction& u);

/// CSV: element_id,eta_sq,psi_A_sq,psi_c_sq,stab
void write_indicators(std::ostream& out, const IndicatorSet& set);

}  // namespace avem
