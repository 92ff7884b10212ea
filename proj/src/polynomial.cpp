#include "avem/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "avem/quadrature.hpp"

namespace avem {

Frame Frame::of_triangle(const Triangle2& t) {
    return Frame{(t[0] + t[1] + t[2]) / 3.0, std::sqrt(triangle_area(t))};
}

int monomial_count(int p) { return p < 0 ? 0 : (p + 1) * (p + 2) / 2; }

int monomial_index(int a, int b) {
    const int d = a + b;
    return d * (d + 1) / 2 + b;
}

const std::vector<std::array<int, 2>>& monomial_exponents(int p) {
    static std::mutex m;
    static std::map<int, std::unique_ptr<std::vector<std::array<int, 2>>>> cache;
    std::lock_guard lock(m);
    auto& slot = cache[p];
    if (!slot) {
        slot = std::make_unique<std::vector<std::array<int, 2>>>();
        for (int d = 0; d <= p; ++d) {
            for (int b = 0; b <= d; ++b) slot->push_back({d - b, b});
        }
    }
    return *slot;
}

Eigen::VectorXd eval_monomials(const Frame& frame, int p, const Vec2& x) {
    const Vec2 s = frame.local(x);
    Eigen::VectorXd out(monomial_count(p));
    out(0) = 1.0;
    for (int d = 1; d <= p; ++d) {
        const int prev = monomial_index(d - 1, 0);
        const int cur = monomial_index(d, 0);
        for (int b = 0; b < d; ++b) out(cur + b) = out(prev + b) * s.x();
        out(cur + d) = out(prev + d - 1) * s.y();
    }
    return out;
}

Poly::Poly(const Frame& frame, int degree)
    : frame_(frame), degree_(degree), coef_(Eigen::VectorXd::Zero(monomial_count(degree))) {}

Poly::Poly(const Frame& frame, int degree, Eigen::VectorXd coef)
    : frame_(frame), degree_(degree), coef_(std::move(coef)) {
    if (coef_.size() != monomial_count(degree)) {
        throw std::invalid_argument("Poly: coefficient count does not match degree");
    }
}

Poly Poly::constant(const Frame& frame, double value) {
    Poly p(frame, 0);
    p.coef_(0) = value;
    return p;
}

double Poly::operator()(const Vec2& x) const { return eval_monomials(frame_, degree_, x).dot(coef_); }

Poly Poly::derivative(int dir) const {
    Poly out(frame_, std::max(0, degree_ - 1));
    const auto& ex = monomial_exponents(degree_);
    for (std::size_t i = 0; i < ex.size(); ++i) {
        const int a = ex[i][0];
        const int b = ex[i][1];
        if (dir == 0 && a > 0) {
            out.coef_(monomial_index(a - 1, b)) += a * coef_(i) / frame_.h;
        } else if (dir == 1 && b > 0) {
            out.coef_(monomial_index(a, b - 1)) += b * coef_(i) / frame_.h;
        }
    }
    return out;
}

namespace {

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

Poly Poly::rebased(const Frame& frame) const {
    if (frame.center == frame_.center && frame.h == frame_.h) return *this;
    // (x - c0)/h0 = s (x - c1)/h1 + d with s = h1/h0, d = (c1 - c0)/h0.
    const double s = frame.h / frame_.h;
    const Vec2 d = (frame.center - frame_.center) / frame_.h;
    Poly out(frame, degree_);
    const auto& ex = monomial_exponents(degree_);
    for (std::size_t i = 0; i < ex.size(); ++i) {
        if (coef_(i) == 0.0) continue;
        const int a = ex[i][0];
        const int b = ex[i][1];
        for (int i1 = 0; i1 <= a; ++i1) {
            const double ca = binom(a, i1) * std::pow(s, i1) * std::pow(d.x(), a - i1);
            for (int j1 = 0; j1 <= b; ++j1) {
                const double cb = binom(b, j1) * std::pow(s, j1) * std::pow(d.y(), b - j1);
                out.coef_(monomial_index(i1, j1)) += coef_(i) * ca * cb;
            }
        }
    }
    return out;
}

Poly Poly::with_degree(int degree) const {
    Poly out(frame_, degree);
    const int n = std::min(out.coef_.size(), coef_.size());
    out.coef_.head(n) = coef_.head(n);
    return out;
}

int Poly::effective_degree(double tol) const {
    const auto& ex = monomial_exponents(degree_);
    int d = 0;
    for (std::size_t i = 0; i < ex.size(); ++i) {
        if (std::abs(coef_(i)) > tol) d = std::max(d, ex[i][0] + ex[i][1]);
    }
    return d;
}

Poly& Poly::operator+=(const Poly& other) {
    const Poly o = other.rebased(frame_);
    if (o.degree_ > degree_) *this = with_degree(o.degree_);
    coef_.head(o.coef_.size()) += o.coef_;
    return *this;
}

Poly& Poly::operator-=(const Poly& other) {
    const Poly o = other.rebased(frame_);
    if (o.degree_ > degree_) *this = with_degree(o.degree_);
    coef_.head(o.coef_.size()) -= o.coef_;
    return *this;
}

Poly& Poly::operator*=(double s) {
    coef_ *= s;
    return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
    const Poly bb = b.rebased(a.frame_);
    Poly out(a.frame_, a.degree_ + b.degree_);
    const auto& ea = monomial_exponents(a.degree_);
    const auto& eb = monomial_exponents(b.degree_);
    for (std::size_t i = 0; i < ea.size(); ++i) {
        if (a.coef_(i) == 0.0) continue;
        for (std::size_t j = 0; j < eb.size(); ++j) {
            out.coef_(monomial_index(ea[i][0] + eb[j][0], ea[i][1] + eb[j][1])) += a.coef_(i) * bb.coef_(j);
        }
    }
    return out;
}

double triangle_area(const Triangle2& t) {
    return 0.5 * ((t[1].x() - t[0].x()) * (t[2].y() - t[0].y()) - (t[1].y() - t[0].y()) * (t[2].x() - t[0].x()));
}

double integrate(const Triangle2& tri, const std::function<double(const Vec2&)>& fn, int degree) {
    const TriangleRule& rule = triangle_rule(degree);
    const double area = std::abs(triangle_area(tri));
    const auto pts = map_points(rule, tri);
    double sum = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) sum += rule.weights[q] * fn(pts[q]);
    return area * sum;
}

Eigen::MatrixXd monomial_mass(const Triangle2& tri, const Frame& frame, int p) {
    const TriangleRule& rule = triangle_rule(2 * p);
    const double area = std::abs(triangle_area(tri));
    const auto pts = map_points(rule, tri);
    const int n = monomial_count(p);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t q = 0; q < pts.size(); ++q) {
        const Eigen::VectorXd m = eval_monomials(frame, p, pts[q]);
        M.noalias() += (area * rule.weights[q]) * m * m.transpose();
    }
    return M;
}

Eigen::MatrixXd monomial_mass(const Triangle2& tri, const Frame& frame, int p, const Poly& weight) {
    const TriangleRule& rule = triangle_rule(2 * p + weight.degree());
    const double area = std::abs(triangle_area(tri));
    const auto pts = map_points(rule, tri);
    const int n = monomial_count(p);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t q = 0; q < pts.size(); ++q) {
        const Eigen::VectorXd m = eval_monomials(frame, p, pts[q]);
        M.noalias() += (area * rule.weights[q] * weight(pts[q])) * m * m.transpose();
    }
    return M;
}

void check_conditioning(const Eigen::MatrixXd& gram, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) {
        throw IllConditionedError(std::string(what) + ": Gram matrix condition number " +
                                  std::to_string(lo > 0.0 ? hi / lo : INFINITY) + " exceeds 1e12");
    }
}

Eigen::VectorXd project_L2(const Triangle2& tri, const Frame& frame, int p,
                           const std::function<double(const Vec2&)>& target, int target_degree) {
    const Eigen::MatrixXd M = monomial_mass(tri, frame, p);
    check_conditioning(M, "project_L2");
    const TriangleRule& rule = triangle_rule(p + target_degree);
    const double area = std::abs(triangle_area(tri));
    const auto pts = map_points(rule, tri);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(monomial_count(p));
    for (std::size_t q = 0; q < pts.size(); ++q) {
        rhs += (area * rule.weights[q] * target(pts[q])) * eval_monomials(frame, p, pts[q]);
    }
    return M.llt().solve(rhs);
}

Poly project_L2(const Triangle2& tri, const Poly& q, int p) {
    return Poly(q.frame(), p, project_L2(tri, q.frame(), p, [&](const Vec2& x) { return q(x); }, q.degree()));
}

double l2_norm_sq(const Triangle2& tri, const Poly& q) {
    return integrate(tri, [&](const Vec2& x) {
        const double v = q(x);
        return v * v;
    }, 2 * q.degree());
}

}  // namespace avem
