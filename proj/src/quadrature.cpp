#include "avem/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace avem {

namespace {

std::mutex cache_mutex;

// Golub-Welsch on the Legendre Jacobi matrix, then mapped to [0,1].
LineRule build_gauss(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double b = i / std::sqrt(4.0 * i * i - 1.0);
        J(i, i - 1) = b;
        J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    LineRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v0 = es.eigenvectors()(0, i);
        rule.points[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
        rule.weights[i] = v0 * v0;  // the Legendre weight has total mass 2; halved by the map
    }
    return rule;
}

}  // namespace

const LineRule& gauss_line(int n) {
    if (n < 1 || n > 64) {
        throw std::invalid_argument("gauss_line: unsupported point count " + std::to_string(n));
    }
    static std::map<int, std::unique_ptr<LineRule>> cache;
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<LineRule>(build_gauss(n));
    return *slot;
}

const LineRule& gauss_line_for_degree(int degree) { return gauss_line(std::max(1, degree / 2 + 1)); }

const TriangleRule& triangle_rule(int degree) {
    if (degree < 0 || degree > 100) {
        throw std::invalid_argument("triangle_rule: unsupported degree " + std::to_string(degree));
    }
    static std::map<int, std::unique_ptr<TriangleRule>> cache;
    {
        std::lock_guard lock(cache_mutex);
        if (auto it = cache.find(degree); it != cache.end()) return *it->second;
    }
    // The Duffy map (s, t) -> (s, t (1 - s)) carries a factor (1 - s), so the
    // s-direction needs one extra degree of exactness.
    const LineRule& gs = gauss_line_for_degree(degree + 1);
    const LineRule& gt = gauss_line_for_degree(degree);
    auto rule = std::make_unique<TriangleRule>();
    rule->degree = degree;
    for (std::size_t i = 0; i < gs.points.size(); ++i) {
        for (std::size_t j = 0; j < gt.points.size(); ++j) {
            const double s = gs.points[i];
            const double t = gt.points[j] * (1.0 - s);
            rule->bary.push_back({1.0 - s - t, s, t});
            rule->weights.push_back(2.0 * gs.weights[i] * gt.weights[j] * (1.0 - s));
        }
    }
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[degree];
    if (!slot) slot = std::move(rule);
    return *slot;
}

std::vector<Eigen::Vector2d> map_points(const TriangleRule& rule, const std::array<Eigen::Vector2d, 3>& tri) {
    std::vector<Eigen::Vector2d> out;
    out.reserve(rule.bary.size());
    for (const auto& b : rule.bary) {
        out.push_back(b[0] * tri[0] + b[1] * tri[1] + b[2] * tri[2]);
    }
    return out;
}

}  // namespace avem
