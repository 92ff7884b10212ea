#include "avem/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "avem/oracles.hpp"

namespace avem {

MarkSet mark(const IndicatorSet& indicators, double theta) {
    if (indicators.items.empty()) throw std::invalid_argument("mark: empty indicator set");
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("mark: theta must lie in (0, 1]");
    std::vector<std::size_t> order(indicators.items.size());
    std::iota(order.begin(), order.end(), 0);
    auto value = [&](std::size_t i) { return indicators.items[i].eta_sq + indicators.items[i].psi_sq(); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = value(a);
        const double vb = value(b);
        if (va != vb) return va > vb;
        return indicators.items[a].element < indicators.items[b].element;
    });
    MarkSet out;
    out.theta = theta;
    for (std::size_t i : order) out.total += value(i);
    for (std::size_t i : order) {
        if (theta < 1.0 && out.marked >= theta * out.total) break;
        if (value(i) <= 0.0) break;
        out.elements.push_back(indicators.items[i].element);
        out.marked += value(i);
    }
    return out;
}

RefineReport refine(Mesh& mesh, const MarkSet& marks, const IndicatorSet& indicators, int m) {
    if (m < 1) throw std::invalid_argument("refine: m must be >= 1");
    std::unordered_map<int, const ElementIndicators*> by_id;
    for (const auto& e : indicators.items) by_id.emplace(e.element, &e);
    RefineReport rep;
    for (int e : marks.elements) {
        auto it = by_id.find(e);
        if (it == by_id.end()) throw std::invalid_argument("refine: marked element without indicators");
        if (!mesh.elements().at(e).active) throw std::invalid_argument("refine: marked element is not active");
        const double eta = std::sqrt(it->second->eta_sq);
        const double psi = std::sqrt(it->second->psi_sq());
        if (eta >= psi) {
            mesh.bisect(e);
            ++rep.single;
            ++rep.bisections;
        } else {
            std::vector<int> level{e};
            for (int l = 0; l < m; ++l) {
                std::vector<int> next;
                for (int x : level) {
                    const auto c = mesh.bisect(x);
                    next.push_back(c[0]);
                    next.push_back(c[1]);
                    ++rep.bisections;
                }
                level = std::move(next);
            }
            ++rep.uniform;
        }
    }
    rep.admissibility_bisections = mesh.enforce_admissibility();
    return rep;
}

int default_uniform_levels(int k) {
    if (k == 2 || k == 3) return 2;
    return minimal_uniform_levels(k);
}

namespace {

// Elements sharing a boundary segment with e, plus e itself.
std::vector<int> patch_of(const Mesh& mesh, int e) {
    std::vector<int> out{e};
    for (const LeafEdge& leaf : mesh.polygon_boundary(e)) {
        const int side = mesh.side_of(leaf.edge, e);
        const int other = mesh.owner_on_side(leaf.edge, 1 - side);
        if (other >= 0 && std::find(out.begin(), out.end(), other) == out.end()) out.push_back(other);
    }
    return out;
}

}  // namespace

GalerkinResult galerkin(Mesh mesh, const PiecewiseData& data, const GalerkinConfig& config,
                        const std::function<void(const IterationView&)>& observer) {
    if (!(config.theta > 0.0 && config.theta < 1.0)) throw std::invalid_argument("theta must lie in (0, 1)");
    if (!(config.eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(config.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (config.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    const int m = config.m > 0 ? config.m : default_uniform_levels(mesh.degree());
    if (!mesh.is_admissible()) throw std::invalid_argument("initial mesh is not admissible");

    GalerkinResult res{mesh, {}, false, {}, {}, {}};
    Mesh& T = res.mesh;
    std::optional<VemFunction> prev;
    std::size_t prev_history = 0;
    std::optional<Discretization> disc;
    for (int j = 0; j < config.max_iters; ++j) {
        if (!disc) disc = discretize(T, data);
        const SparseSystem sys = assemble(*disc, config.gamma);
        const Eigen::VectorXd x = solve(sys);
        VemFunction u = to_function(*disc, x);
        const IndicatorSet ind = estimate(*disc, data, u);

        IterationRecord rec;
        rec.iter = j;
        rec.dofs = disc->map.size;
        rec.elements = static_cast<int>(disc->active.size());
        rec.eta_sq = ind.eta_sq;
        rec.psi_sq = ind.psi_sq();
        rec.stab = ind.stab;
        if (prev) rec.step_energy = energy_norm_diff(*disc, prev_history, u, *prev, config.gamma);
        res.snapshots.push_back(take_snapshot(*disc, u));
        if (observer) observer(IterationView{j, T, *disc, u, ind});

        const bool done = ind.eta_sq + ind.psi_sq() <= config.eps * config.eps;
        if (done || j + 1 == config.max_iters) {
            res.log.push_back(rec);
            res.u = std::move(u);
            res.converged = done;
            break;
        }
        const MarkSet marks = mark(ind, config.theta);
        rec.marked = static_cast<int>(marks.elements.size());
        res.log.push_back(rec);

        std::vector<std::vector<int>> patches;
        std::vector<double> patch_stab;
        if (config.audit_post_refine) {
            std::unordered_map<int, double> stab;
            for (const auto& e : ind.items) stab.emplace(e.element, e.stab);
            for (int e : marks.elements) {
                double s = 0.0;
                for (int p : patch_of(T, e)) s += stab.at(p);
                patch_stab.push_back(s);
            }
        }

        const std::size_t history_before = T.bisection_history().size();
        refine(T, marks, ind, m);
        disc = discretize(T, data);

        if (config.audit_post_refine) {
            const VemFunction v_star = prolongate(T, history_before, u);
            const IndicatorSet fine = estimate(*disc, data, v_star);
            std::unordered_map<int, std::size_t> which;
            for (std::size_t i = 0; i < marks.elements.size(); ++i) which.emplace(marks.elements[i], i);
            std::vector<double> eta2(marks.elements.size(), 0.0);
            std::vector<double> psi2(marks.elements.size(), 0.0);
            for (const auto& e : fine.items) {
                for (int a = e.element; a >= 0; a = T.elements()[a].parent) {
                    auto it = which.find(a);
                    if (it != which.end()) {
                        eta2[it->second] += e.eta_sq;
                        psi2[it->second] += e.psi_sq();
                        break;
                    }
                }
            }
            std::unordered_map<int, const ElementIndicators*> coarse;
            for (const auto& e : ind.items) coarse.emplace(e.element, &e);
            for (std::size_t i = 0; i < marks.elements.size(); ++i) {
                const auto* c = coarse.at(marks.elements[i]);
                res.post_refine.push_back(PostRefineSample{j, marks.elements[i], std::sqrt(c->eta_sq),
                                                           std::sqrt(c->psi_sq()), std::sqrt(eta2[i]),
                                                           std::sqrt(psi2[i]), patch_stab[i]});
            }
        }
        prev = std::move(u);
        prev_history = history_before;
    }
    if (config.reference) {
        const ConformingSolution ref = reference_solution(res.mesh, data, config.reference_levels);
        fill_error_columns(res, data, config, ref);
    }
    return res;
}

void fill_error_columns(GalerkinResult& result, const PiecewiseData& data, const GalerkinConfig& config,
                        const ConformingSolution& reference) {
    for (std::size_t j = 0; j < result.log.size(); ++j) {
        auto& r = result.log[j];
        r.err_sq = surrogate_error_sq(reference, data, result.snapshots.at(j));
        r.Q = r.err_sq + config.beta * r.eta_sq + config.zeta * r.psi_sq;
        if (j > 0) r.alpha_hat = r.Q / result.log[j - 1].Q;
    }
}

ContractionSummary contraction_monitor(const std::vector<IterationRecord>& log, double beta, double zeta) {
    ContractionSummary s;
    if (log.size() < 2) return s;
    double log_sum = 0.0;
    for (std::size_t j = 1; j < log.size(); ++j) {
        const double q0 = log[j - 1].err_sq + beta * log[j - 1].eta_sq + zeta * log[j - 1].psi_sq;
        const double q1 = log[j].err_sq + beta * log[j].eta_sq + zeta * log[j].psi_sq;
        const double a = q1 / q0;
        s.alpha_hat.push_back(a);
        s.shares.push_back({log[j].err_sq / q1, beta * log[j].eta_sq / q1, zeta * log[j].psi_sq / q1});
        if (!(a < 1.0)) s.flagged.push_back(static_cast<int>(j));
        log_sum += std::log(a);
    }
    const double n = static_cast<double>(s.alpha_hat.size());
    s.max = *std::max_element(s.alpha_hat.begin(), s.alpha_hat.end());
    s.mean = std::accumulate(s.alpha_hat.begin(), s.alpha_hat.end(), 0.0) / n;
    s.geometric_mean = std::exp(log_sum / n);
    return s;
}

std::vector<int> quasi_orthogonality_violations(const std::vector<IterationRecord>& log, double delta) {
    std::vector<int> out;
    for (std::size_t j = 0; j + 1 < log.size(); ++j) {
        const auto& a = log[j];
        const auto& b = log[j + 1];
        const double rhs = (1.0 + 4.0 * delta) * a.err_sq - b.step_energy * b.step_energy +
                           2.0 * delta * (a.psi_sq + b.psi_sq);
        if (b.err_sq > rhs) out.push_back(static_cast<int>(j));
    }
    return out;
}

}  // namespace avem
