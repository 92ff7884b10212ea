#include "avem/problem_data.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace avem {

Eigen::Matrix2d ElementData::A_at(const Vec2& x) const {
    Eigen::Matrix2d m;
    m(0, 0) = A[0](x);
    m(0, 1) = m(1, 0) = A[1](x);
    m(1, 1) = A[2](x);
    return m;
}

PiecewiseData::PiecewiseData(int degree, std::vector<ElementData> roots) : k_(degree), roots_(std::move(roots)) {}

PiecewiseData PiecewiseData::uniform(const Mesh& mesh, const Poly& a11, const Poly& a12, const Poly& a22,
                                     const Poly& c, const Poly& f) {
    std::vector<ElementData> roots;
    for (int e = 0; e < mesh.initial_element_count(); ++e) {
        const Frame fr = Frame::of_triangle(mesh.corners(e));
        roots.push_back(ElementData{{a11.rebased(fr), a12.rebased(fr), a22.rebased(fr)}, c.rebased(fr), f.rebased(fr)});
    }
    return PiecewiseData(mesh.degree(), std::move(roots));
}

ElementData PiecewiseData::restrict_to(const ElementData& parent, const Frame& child) {
    return ElementData{{parent.A[0].rebased(child), parent.A[1].rebased(child), parent.A[2].rebased(child)},
                       parent.c.rebased(child), parent.f.rebased(child)};
}

ElementData PiecewiseData::on_element(const Mesh& mesh, int element) const {
    const int root = mesh.elements()[element].root_element;
    return restrict_to(roots_.at(root), Frame::of_triangle(mesh.corners(element)));
}

void PiecewiseData::validate(const Mesh& mesh) const {
    if (static_cast<int>(roots_.size()) != mesh.initial_element_count()) {
        throw DataError("data covers " + std::to_string(roots_.size()) + " initial triangles, mesh has " +
                        std::to_string(mesh.initial_element_count()));
    }
    const double tol = 1e-12;
    for (std::size_t r = 0; r < roots_.size(); ++r) {
        const ElementData& d = roots_[r];
        for (int i = 0; i < 3; ++i) {
            if (d.A[i].effective_degree(tol) > k_ - 1) {
                throw DataError("A on triangle " + std::to_string(r) + " exceeds degree " + std::to_string(k_ - 1));
            }
        }
        if (d.c.effective_degree(tol) > k_ - 1) {
            throw DataError("c on triangle " + std::to_string(r) + " exceeds degree " + std::to_string(k_ - 1));
        }
        if (d.f.effective_degree(tol) > k_) {
            throw DataError("f on triangle " + std::to_string(r) + " exceeds degree " + std::to_string(k_));
        }
        const auto t = mesh.corners(static_cast<int>(r));
        const int n = 2 * k_ + 2;
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; i + j <= n; ++j) {
                const Vec2 x = (static_cast<double>(n - i - j) * t[0] + i * t[1] + j * t[2]) / n;
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(d.A_at(x), Eigen::EigenvaluesOnly);
                std::ostringstream where;
                where << " on triangle " << r << " at (" << x.x() << ", " << x.y() << ")";
                if (!(es.eigenvalues()(0) > 0.0)) {
                    throw DataError("A is not positive definite" + where.str() + ": smallest eigenvalue " +
                                    std::to_string(es.eigenvalues()(0)));
                }
                if (!(d.c(x) >= 0.0)) {
                    throw DataError("c is negative" + where.str() + ": value " + std::to_string(d.c(x)));
                }
            }
        }
    }
}

namespace {

struct Parser {
    int line_no = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw DataError("problem file line " + std::to_string(line_no) + ": " + msg);
    }

    double number(const std::string& s) const {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || !std::isfinite(v)) fail("bad number '" + s + "'");
        return v;
    }

    // Polynomial in global coordinates from "coef:px:py" terms.
    Poly terms(const std::vector<std::string>& tok) const {
        std::vector<std::array<double, 3>> parsed;
        int deg = 0;
        for (const auto& t : tok) {
            const auto a = t.find(':');
            const auto b = a == std::string::npos ? a : t.find(':', a + 1);
            if (b == std::string::npos) fail("term '" + t + "' is not coef:px:py");
            const double c = number(t.substr(0, a));
            const double px = number(t.substr(a + 1, b - a - 1));
            const double py = number(t.substr(b + 1));
            if (px < 0 || py < 0 || px != std::floor(px) || py != std::floor(py) || px + py > 32) {
                fail("bad exponents in term '" + t + "'");
            }
            parsed.push_back({c, px, py});
            deg = std::max(deg, static_cast<int>(px + py));
        }
        Poly p(Frame{}, deg);
        for (const auto& [c, px, py] : parsed) p.coef()(monomial_index(static_cast<int>(px), static_cast<int>(py))) += c;
        return p;
    }

    // One or more '|'-separated groups after "constant" or "poly".
    std::vector<Poly> value(const std::vector<std::string>& tok, std::size_t start) const {
        if (start >= tok.size()) fail("missing 'constant' or 'poly'");
        const std::string kind = tok[start];
        std::vector<std::vector<std::string>> groups(1);
        for (std::size_t i = start + 1; i < tok.size(); ++i) {
            if (tok[i] == "|") {
                groups.emplace_back();
            } else {
                groups.back().push_back(tok[i]);
            }
        }
        std::vector<Poly> out;
        if (kind == "constant") {
            if (groups.size() != 1) fail("'constant' takes plain numbers");
            for (const auto& s : groups[0]) out.push_back(Poly::constant(Frame{}, number(s)));
        } else if (kind == "poly") {
            for (const auto& g : groups) {
                if (g.empty()) fail("empty term list");
                out.push_back(terms(g));
            }
        } else {
            fail("expected 'constant', 'poly' or 'per_element', got '" + kind + "'");
        }
        if (out.empty()) fail("missing value");
        return out;
    }

    std::array<Poly, 3> tensor(const std::vector<Poly>& v) const {
        switch (v.size()) {
            case 1:
                return {v[0], Poly::constant(Frame{}, 0.0), v[0]};
            case 3:
                return {v[0], v[1], v[2]};
            case 4: {
                const Poly diff = v[1] - v[2];
                if (diff.coef().cwiseAbs().maxCoeff() > 1e-14) fail("A is not symmetric (a12 != a21)");
                return {v[0], v[1], v[3]};
            }
            default:
                fail("A takes 1, 3 or 4 entries, got " + std::to_string(v.size()));
        }
    }
};

bool next_tokens(std::istream& in, std::vector<std::string>& tokens, int& line_no) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        tokens.clear();
        for (std::string t; ls >> t;) {
            // Allow '|' glued to neighbours.
            std::size_t pos = 0;
            while (pos < t.size()) {
                const auto bar = t.find('|', pos);
                if (bar == std::string::npos) {
                    tokens.push_back(t.substr(pos));
                    break;
                }
                if (bar > pos) tokens.push_back(t.substr(pos, bar - pos));
                tokens.push_back("|");
                pos = bar + 1;
            }
        }
        if (!tokens.empty()) return true;
    }
    return false;
}

}  // namespace

PiecewiseData read_problem(std::istream& in, const Mesh& mesh) {
    const int nroots = mesh.initial_element_count();
    // Per block, per root: list of polynomials in global coordinates.
    std::map<std::string, std::vector<std::optional<std::vector<Poly>>>> blocks;
    Parser p;
    std::vector<std::string> tok;
    while (next_tokens(in, tok, p.line_no)) {
        const std::string name = tok[0];
        if (name != "A" && name != "c" && name != "f") p.fail("unknown block '" + name + "'");
        if (blocks.count(name)) p.fail("block '" + name + "' given twice");
        auto& slot = blocks[name];
        slot.assign(nroots, std::nullopt);
        if (tok.size() >= 2 && tok[1] == "per_element") {
            if (tok.size() != 2) p.fail("'per_element' takes no arguments");
            bool closed = false;
            while (next_tokens(in, tok, p.line_no)) {
                if (tok[0] == "end") {
                    closed = true;
                    break;
                }
                const double id = p.number(tok[0]);
                if (id < 0 || id >= nroots || id != std::floor(id)) p.fail("unknown initial triangle " + tok[0]);
                if (slot[static_cast<int>(id)]) p.fail("triangle " + tok[0] + " given twice");
                slot[static_cast<int>(id)] = p.value(tok, 1);
            }
            if (!closed) p.fail("'per_element' block without 'end'");
            for (int r = 0; r < nroots; ++r) {
                if (!slot[r]) throw DataError("block '" + name + "' misses triangle " + std::to_string(r));
            }
        } else {
            const auto v = p.value(tok, 1);
            for (auto& s : slot) s = v;
        }
    }
    for (const char* name : {"A", "c", "f"}) {
        if (!blocks.count(name)) throw DataError(std::string("problem file has no '") + name + "' block");
    }
    std::vector<ElementData> roots;
    for (int r = 0; r < nroots; ++r) {
        const Frame fr = Frame::of_triangle(mesh.corners(r));
        const auto& cv = *blocks["c"][r];
        const auto& fv = *blocks["f"][r];
        if (cv.size() != 1) throw DataError("c takes a single value (triangle " + std::to_string(r) + ")");
        if (fv.size() != 1) throw DataError("f takes a single value (triangle " + std::to_string(r) + ")");
        const auto A = p.tensor(*blocks["A"][r]);
        roots.push_back(ElementData{{A[0].rebased(fr), A[1].rebased(fr), A[2].rebased(fr)}, cv[0].rebased(fr),
                                    fv[0].rebased(fr)});
    }
    PiecewiseData data(mesh.degree(), std::move(roots));
    data.validate(mesh);
    return data;
}

PiecewiseData read_problem_file(const std::string& path, const Mesh& mesh) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open problem file '" + path + "'");
    return read_problem(in, mesh);
}

}  // namespace avem
