#include "avem/lagrange_split.hpp"

#include <map>
#include <mutex>
#include <string>

namespace avem {

namespace {

void require_degree(int k) {
    if (k < 1 || k > 4) {
        throw UnsupportedDegree("degree " + std::to_string(k) + " outside the supported range 1..4");
    }
}

template <class T>
std::vector<T> basis_at(int k, const T& s, const std::vector<T>& nodes) {
    std::vector<T> out(k + 1, T(1));
    for (int n = 0; n <= k; ++n) {
        for (int m = 0; m <= k; ++m) {
            if (m != n) out[n] *= (s - nodes[m]) / (nodes[n] - nodes[m]);
        }
    }
    return out;
}

}  // namespace

std::vector<Rational> lagrange_basis(int k, const Rational& s) {
    std::vector<Rational> nodes(k + 1);
    for (int n = 0; n <= k; ++n) nodes[n] = Rational(n, k);
    return basis_at(k, s, nodes);
}

std::vector<double> lagrange_basis(int k, double s) {
    std::vector<double> nodes(k + 1);
    for (int n = 0; n <= k; ++n) nodes[n] = static_cast<double>(n) / k;
    return basis_at(k, s, nodes);
}

Rational zeta_position(int k, int i) { return Rational(2 * i + 1, 2 * k); }

const std::vector<std::vector<Rational>>& lagrange_split_coefficients(int k) {
    require_degree(k);
    static std::mutex m;
    static std::map<int, std::vector<std::vector<Rational>>> cache;
    std::lock_guard lock(m);
    auto it = cache.find(k);
    if (it == cache.end()) {
        std::vector<std::vector<Rational>> alpha(k);
        for (int i = 0; i < k; ++i) alpha[i] = lagrange_basis(k, zeta_position(k, i));
        it = cache.emplace(k, std::move(alpha)).first;
    }
    return it->second;
}

std::vector<std::vector<double>> lagrange_split_coefficients_double(int k) {
    const auto& a = lagrange_split_coefficients(k);
    std::vector<std::vector<double>> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (const Rational& r : a[i]) out[i].push_back(boost::rational_cast<double>(r));
    }
    return out;
}

Rational detail_basis_psi(int k, int i, const Rational& s) {
    require_degree(k);
    if (i < 0 || i >= k) throw std::out_of_range("detail_basis_psi: index out of range");
    if (s < Rational(0) || s > Rational(1)) return Rational(0);
    // Local coordinate on the half containing s; the half's lattice has
    // nodes at j / (2k), j = 0..k, and zeta_i sits at local node 2i+1 - k*half.
    const bool upper = s > Rational(1, 2);
    const Rational local = upper ? 2 * s - 1 : 2 * s;
    const int zeta_global = 2 * i + 1;  // in units of 1/(2k)
    const int offset = upper ? k : 0;
    const int local_node = zeta_global - offset;
    if (local_node < 0 || local_node > k) return Rational(0);
    return lagrange_basis(k, local)[local_node];
}

double detail_basis_psi(int k, int i, double s) {
    require_degree(k);
    if (i < 0 || i >= k) throw std::out_of_range("detail_basis_psi: index out of range");
    if (s < 0.0 || s > 1.0) return 0.0;
    const bool upper = s > 0.5;
    const double local = upper ? 2.0 * s - 1.0 : 2.0 * s;
    const int local_node = 2 * i + 1 - (upper ? k : 0);
    if (local_node < 0 || local_node > k) return 0.0;
    return lagrange_basis(k, local)[local_node];
}

}  // namespace avem
