#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "avem/estimators.hpp"
#include "avem/reference_solution.hpp"

namespace avem {

struct MarkSet {
    std::vector<int> elements;
    double theta = 0.0;
    /// Sum of eta^2 + psi^2 over the marked elements and over all elements.
    double marked = 0.0;
    double total = 0.0;

    double achieved() const { return total > 0.0 ? marked / total : 0.0; }
};

/// Greedy Doerfler marking by descending eta^2 + psi^2 (ties by element id).
/// theta in (0, 1]; theta = 1 selects every element with nonzero indicator.
MarkSet mark(const IndicatorSet& indicators, double theta);

struct RefineReport {
    int single = 0;
    int uniform = 0;
    int bisections = 0;
    int admissibility_bisections = 0;
};

/// Marked elements with eta >= psi are bisected once, the others get m
/// levels of uniform bisection; then admissibility is restored.
RefineReport refine(Mesh& mesh, const MarkSet& marks, const IndicatorSet& indicators, int m);

struct GalerkinConfig {
    double gamma = 10.0;
    double theta = 0.5;
    double eps = 1e-3;
    /// Uniform levels for psi-dominated elements; 0 picks the default for k.
    int m = 0;
    int max_iters = 30;
    double beta = 1.0;
    double zeta = 1.0;
    /// Compute the surrogate error columns from a conforming reference.
    bool reference = false;
    int reference_levels = 2;
    /// Record estimator reduction samples for marked elements.
    bool audit_post_refine = false;
};

struct IterationRecord {
    int iter = 0;
    int dofs = 0;
    int elements = 0;
    double eta_sq = 0.0;
    double psi_sq = 0.0;
    double stab = 0.0;
    int marked = 0;
    /// |||u_j - u_{j-1}||| on mesh j (NaN for j = 0).
    double step_energy = std::numeric_limits<double>::quiet_NaN();
    double err_sq = std::numeric_limits<double>::quiet_NaN();
    double Q = std::numeric_limits<double>::quiet_NaN();
    /// Q_j / Q_{j-1}.
    double alpha_hat = std::numeric_limits<double>::quiet_NaN();
};

/// One marked element: eta and psi of the coarse element, eta_* and psi_*
/// over its descendants with the prolonged solution, and S over the coarse
/// element and its neighbours.
struct PostRefineSample {
    int iter = 0;
    int element = -1;
    double eta = 0.0;
    double psi = 0.0;
    double eta_star = 0.0;
    double psi_star = 0.0;
    double stab_patch = 0.0;
};

struct IterationView {
    int iter;
    const Mesh& mesh;
    const Discretization& disc;
    const VemFunction& u;
    const IndicatorSet& indicators;
};

struct GalerkinResult {
    Mesh mesh;
    VemFunction u;
    bool converged = false;
    std::vector<IterationRecord> log;
    std::vector<PostRefineSample> post_refine;
    std::vector<SolutionSnapshot> snapshots;
};

/// m used by default: the smallest number of uniform levels whose refinement
/// factor mu^2 is below one.
int default_uniform_levels(int k);

/// SOLVE -> ESTIMATE -> MARK -> REFINE until eta^2 + psi^2 <= eps^2 or
/// max_iters solves. The observer sees every solved iteration.
GalerkinResult galerkin(Mesh mesh, const PiecewiseData& data, const GalerkinConfig& config,
                        const std::function<void(const IterationView&)>& observer = {});

/// Fills err_sq, Q and alpha_hat from a reference solution.
void fill_error_columns(GalerkinResult& result, const PiecewiseData& data, const GalerkinConfig& config,
                        const ConformingSolution& reference);

struct ContractionSummary {
    std::vector<double> alpha_hat;
    double max = 0.0;
    double mean = 0.0;
    double geometric_mean = 0.0;
    std::vector<int> flagged;
    /// Per step, shares of err^2, beta eta^2, zeta psi^2 in Q.
    std::vector<std::array<double, 3>> shares;
};

ContractionSummary contraction_monitor(const std::vector<IterationRecord>& log, double beta, double zeta);

/// err_{j+1}^2 <= (1 + 4 delta) err_j^2 - E_j^2 + 2 delta (psi_j^2 + psi_{j+1}^2); returns the
/// indices j where this fails.
std::vector<int> quasi_orthogonality_violations(const std::vector<IterationRecord>& log, double delta);

}  // namespace avem
