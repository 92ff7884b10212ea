#include "avem/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace avem {

namespace {

// Next non-empty, non-comment line split into tokens; false at end of input.
bool next_tokens(std::istream& in, std::vector<std::string>& tokens, int& line_no) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        tokens.clear();
        for (std::string t; ls >> t;) tokens.push_back(t);
        if (!tokens.empty()) return true;
    }
    return false;
}

long parse_int(const std::string& s, int line_no) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size()) {
        throw MeshError("line " + std::to_string(line_no) + ": expected an integer, got '" + s + "'");
    }
    return v;
}

Dyadic parse_coord(const std::string& s, int line_no) {
    try {
        return Dyadic::from_string(s);
    } catch (const std::exception&) {
        throw MeshError("line " + std::to_string(line_no) + ": bad coordinate '" + s + "'");
    }
}

}  // namespace

Mesh read_mesh(std::istream& in, int degree, int lambda_cap) {
    std::vector<std::string> tok;
    int line_no = 0;
    if (!next_tokens(in, tok, line_no) || tok.size() != 2 || tok[0] != "vertices") {
        throw MeshError("line " + std::to_string(line_no) + ": expected 'vertices N'");
    }
    const long nv = parse_int(tok[1], line_no);
    if (nv < 3) throw MeshError("need at least 3 vertices");
    std::vector<std::array<Dyadic, 2>> verts(nv);
    std::vector<bool> seen(nv, false);
    for (long i = 0; i < nv; ++i) {
        if (!next_tokens(in, tok, line_no) || tok.size() != 3) {
            throw MeshError("line " + std::to_string(line_no) + ": expected 'id x y'");
        }
        const long id = parse_int(tok[0], line_no);
        if (id < 0 || id >= nv || seen[id]) {
            throw MeshError("line " + std::to_string(line_no) + ": bad or repeated vertex id " + tok[0]);
        }
        seen[id] = true;
        verts[id] = {parse_coord(tok[1], line_no), parse_coord(tok[2], line_no)};
    }
    if (!next_tokens(in, tok, line_no) || tok.size() != 2 || tok[0] != "triangles") {
        throw MeshError("line " + std::to_string(line_no) + ": expected 'triangles M'");
    }
    const long nt = parse_int(tok[1], line_no);
    if (nt < 1) throw MeshError("need at least one triangle");
    std::vector<Mesh::Triangle> tris(nt);
    std::vector<bool> tseen(nt, false);
    for (long i = 0; i < nt; ++i) {
        if (!next_tokens(in, tok, line_no) || (tok.size() != 4 && tok.size() != 5)) {
            throw MeshError("line " + std::to_string(line_no) + ": expected 'id v0 v1 v2 [newest_index]'");
        }
        const long id = parse_int(tok[0], line_no);
        if (id < 0 || id >= nt || tseen[id]) {
            throw MeshError("line " + std::to_string(line_no) + ": bad or repeated triangle id " + tok[0]);
        }
        tseen[id] = true;
        Mesh::Triangle t;
        for (int j = 0; j < 3; ++j) t.v[j] = static_cast<int>(parse_int(tok[1 + j], line_no));
        if (tok.size() == 5) {
            t.newest = static_cast<int>(parse_int(tok[4], line_no));
            if (t.newest < 0 || t.newest > 2) {
                throw MeshError("line " + std::to_string(line_no) + ": newest_index must be 0, 1 or 2");
            }
        }
        tris[id] = t;
    }
    // Check for unique coordinates; repeated points would break node identity.
    std::map<std::pair<Dyadic, Dyadic>, long> where;
    for (long i = 0; i < nv; ++i) {
        auto [it, fresh] = where.emplace(std::make_pair(verts[i][0], verts[i][1]), i);
        if (!fresh) {
            throw MeshError("vertices " + std::to_string(it->second) + " and " + std::to_string(i) +
                            " share coordinates");
        }
    }
    return Mesh(degree, std::move(verts), std::move(tris), lambda_cap);
}

Mesh read_mesh_file(const std::string& path, int degree, int lambda_cap) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file '" + path + "'");
    return read_mesh(in, degree, lambda_cap);
}

void write_vtk(std::ostream& out, const Mesh& mesh,
               const std::vector<std::pair<std::string, std::vector<double>>>& cell_data) {
    const auto active = mesh.active_elements();
    std::map<int, int> point_id;
    std::vector<int> points;
    for (int e : active) {
        for (int v : mesh.elements()[e].v) {
            if (point_id.emplace(v, static_cast<int>(points.size())).second) points.push_back(v);
        }
    }
    out << "# vtk DataFile Version 3.0\n";
    out << "avem mesh k=" << mesh.degree() << "\n";
    out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << points.size() << " double\n";
    out << std::setprecision(17);
    for (int v : points) {
        const Vec2& p = mesh.vertices()[v].pos;
        out << p.x() << ' ' << p.y() << " 0\n";
    }
    out << "CELLS " << active.size() << ' ' << 4 * active.size() << '\n';
    for (int e : active) {
        const auto& v = mesh.elements()[e].v;
        out << "3 " << point_id[v[0]] << ' ' << point_id[v[1]] << ' ' << point_id[v[2]] << '\n';
    }
    out << "CELL_TYPES " << active.size() << '\n';
    for (std::size_t i = 0; i < active.size(); ++i) out << "5\n";
    out << "CELL_DATA " << active.size() << '\n';
    out << "SCALARS element_id int 1\nLOOKUP_TABLE default\n";
    for (int e : active) out << e << '\n';
    out << "SCALARS generation int 1\nLOOKUP_TABLE default\n";
    for (int e : active) out << mesh.elements()[e].generation << '\n';
    out << "SCALARS polygon_edges int 1\nLOOKUP_TABLE default\n";
    for (int e : active) out << mesh.polygon_boundary(e).size() << '\n';
    for (const auto& [name, values] : cell_data) {
        if (values.size() != active.size()) {
            throw std::invalid_argument("write_vtk: cell data '" + name + "' has wrong length");
        }
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : values) out << v << '\n';
    }
}

void write_tree(std::ostream& out, const Mesh& mesh) {
    out << "avem-tree 1\n";
    out << "degree " << mesh.degree() << "\n";
    out << "lambda_cap " << mesh.lambda_cap() << "\n";
    const int nv0 = [&] {
        int n = 0;
        for (const auto& v : mesh.vertices()) n += v.created_on_edge < 0 ? 1 : 0;
        return n;
    }();
    out << "vertices " << nv0 << "\n";
    for (int i = 0; i < nv0; ++i) {
        const auto& v = mesh.vertices()[i];
        out << i << ' ' << v.x.mantissa() << ' ' << v.x.exponent() << ' ' << v.y.mantissa() << ' '
            << v.y.exponent() << '\n';
    }
    // Initial triangles in their stored orientation, newest vertex last.
    out << "triangles " << mesh.initial_element_count() << "\n";
    for (int e = 0; e < mesh.initial_element_count(); ++e) {
        const auto& v = mesh.elements()[e].v;
        out << e << ' ' << v[0] << ' ' << v[1] << ' ' << v[2] << " 2\n";
    }
    out << "bisections " << mesh.bisection_history().size() << "\n";
    for (int e : mesh.bisection_history()) out << e << '\n';
}

Mesh read_tree(std::istream& in) {
    std::string word;
    int version = 0;
    int degree = 0;
    int cap = 0;
    in >> word >> version;
    if (word != "avem-tree" || version != 1) throw MeshError("not an avem tree dump");
    in >> word >> degree;
    if (word != "degree") throw MeshError("tree dump: expected degree");
    in >> word >> cap;
    if (word != "lambda_cap") throw MeshError("tree dump: expected lambda_cap");
    std::size_t nv = 0;
    in >> word >> nv;
    if (word != "vertices") throw MeshError("tree dump: expected vertices");
    std::vector<std::array<Dyadic, 2>> verts(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        std::size_t id = 0;
        std::int64_t mx = 0, my = 0;
        int ex = 0, ey = 0;
        in >> id >> mx >> ex >> my >> ey;
        if (!in || id != i) throw MeshError("tree dump: bad vertex record");
        verts[i] = {Dyadic(mx, ex), Dyadic(my, ey)};
    }
    std::size_t nt = 0;
    in >> word >> nt;
    if (word != "triangles") throw MeshError("tree dump: expected triangles");
    std::vector<Mesh::Triangle> tris(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        std::size_t id = 0;
        in >> id >> tris[i].v[0] >> tris[i].v[1] >> tris[i].v[2] >> tris[i].newest;
        if (!in || id != i) throw MeshError("tree dump: bad triangle record");
    }
    std::size_t nb = 0;
    in >> word >> nb;
    if (word != "bisections") throw MeshError("tree dump: expected bisections");
    Mesh mesh(degree, std::move(verts), std::move(tris), cap);
    for (std::size_t i = 0; i < nb; ++i) {
        int e = -1;
        in >> e;
        if (!in) throw MeshError("tree dump: truncated bisection list");
        mesh.bisect(e);
    }
    return mesh;
}

}  // namespace avem
