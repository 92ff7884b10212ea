#include "avem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace avem {

namespace {

using i128 = __int128;

// Sign of (num / (k 2^level)) - (2 index + 1) / 2^(edge_level + 1).
int compare_to_midpoint(std::int64_t num, int level, int k, std::int64_t index, int edge_level) {
    const i128 a = static_cast<i128>(num) << (edge_level + 1);
    const i128 b = (static_cast<i128>(2 * index + 1) * k) << level;
    if (a < b) return -1;
    if (a > b) return 1;
    return 0;
}

double signed_twice_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

}  // namespace

Mesh::Mesh(int degree, std::vector<std::array<Dyadic, 2>> vertices, std::vector<Triangle> triangles,
           int lambda_cap)
    : k_(degree), lambda_cap_(lambda_cap), initial_vertices_(vertices), initial_triangles_(triangles) {
    if (k_ < 1 || k_ > 4) {
        throw std::invalid_argument("unsupported polynomial degree " + std::to_string(k_));
    }
    if (lambda_cap_ < 1) {
        throw std::invalid_argument("lambda cap must be >= 1");
    }
    if (triangles.empty()) {
        throw MeshError("mesh has no triangles");
    }

    vertices_.reserve(vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        Vertex v;
        v.x = vertices[i][0];
        v.y = vertices[i][1];
        v.pos = Vec2(v.x.to_double(), v.y.to_double());
        NodeRecord rec;
        rec.key = NodeKey{-1, static_cast<std::int64_t>(i), 0};
        rec.pos = v.pos;
        rec.vertex = static_cast<int>(i);
        v.node = static_cast<int>(nodes_.size());
        node_index_.emplace(rec.key, v.node);
        nodes_.push_back(rec);
        dependents_.emplace_back();
        vertices_.push_back(v);
    }

    std::map<std::pair<int, int>, int> edge_of;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        auto tri = triangles[t];
        for (int vid : tri.v) {
            if (vid < 0 || vid >= static_cast<int>(vertices_.size())) {
                throw MeshError("triangle " + std::to_string(t) + " references unknown vertex " +
                                std::to_string(vid));
            }
        }
        if (tri.v[0] == tri.v[1] || tri.v[1] == tri.v[2] || tri.v[0] == tri.v[2]) {
            throw MeshError("triangle " + std::to_string(t) + " repeats a vertex");
        }
        int newest = tri.newest;
        if (newest < 0) {
            // Vertex opposite the longest side.
            double best = -1.0;
            for (int i = 0; i < 3; ++i) {
                const Vec2& a = vertices_[tri.v[(i + 1) % 3]].pos;
                const Vec2& b = vertices_[tri.v[(i + 2) % 3]].pos;
                const double len = (a - b).squaredNorm();
                if (len > best) {
                    best = len;
                    newest = i;
                }
            }
        }
        if (newest > 2) {
            throw MeshError("triangle " + std::to_string(t) + " has newest index outside 0..2");
        }
        std::array<int, 3> v{tri.v[(newest + 1) % 3], tri.v[(newest + 2) % 3], tri.v[newest]};
        const Dyadic orient = (vertices_[v[1]].x - vertices_[v[0]].x) * (vertices_[v[2]].y - vertices_[v[0]].y) -
                              (vertices_[v[1]].y - vertices_[v[0]].y) * (vertices_[v[2]].x - vertices_[v[0]].x);
        if (orient == Dyadic()) {
            throw MeshError("triangle " + std::to_string(t) + " is degenerate");
        }
        if (orient < Dyadic()) {
            std::swap(v[0], v[1]);
        }
        Element el;
        el.v = v;
        el.root_element = static_cast<int>(t);
        const int eid = static_cast<int>(elements_.size());
        // Directed sides in counterclockwise order: opposite v0 is v1->v2, etc.
        for (int i = 0; i < 3; ++i) {
            const int a = v[(i + 1) % 3];
            const int b = v[(i + 2) % 3];
            const auto key = std::minmax(a, b);
            auto it = edge_of.find({key.first, key.second});
            int e = -1;
            if (it == edge_of.end()) {
                e = new_root_edge(a, b, false);
                edge_of.emplace(std::make_pair(key.first, key.second), e);
            } else {
                e = it->second;
            }
            const int slot = edges_[e].v[0] == a ? 0 : 1;
            if (edges_[e].owner[slot] >= 0) {
                throw MeshError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                ") is shared by two triangles with the same orientation");
            }
            edges_[e].owner[slot] = eid;
            el.side[i] = e;
        }
        elements_.push_back(el);
    }
    active_count_ = elements_.size();
    initial_elements_ = static_cast<int>(elements_.size());

    for (int r : roots_) {
        EdgeNode& e = edges_[r];
        e.boundary = e.owner[0] < 0 || e.owner[1] < 0;
        if (e.boundary) {
            nodes_[vertices_[e.v[0]].node].on_boundary = true;
            nodes_[vertices_[e.v[1]].node].on_boundary = true;
        }
    }
    for (int r : roots_) {
        register_edge_lattice(r);
    }
}

Mesh Mesh::unit_square(int degree, int lambda_cap) {
    std::vector<std::array<Dyadic, 2>> v{
        {Dyadic(0, 0), Dyadic(0, 0)}, {Dyadic(1, 0), Dyadic(0, 0)}, {Dyadic(1, 0), Dyadic(1, 0)}, {Dyadic(0, 0), Dyadic(1, 0)}};
    std::vector<Triangle> t{{{0, 1, 2}, 1}, {{0, 2, 3}, 2}};
    return Mesh(degree, std::move(v), std::move(t), lambda_cap);
}

void Mesh::set_lambda_cap(int cap) {
    if (cap < 1) {
        throw std::invalid_argument("lambda cap must be >= 1");
    }
    lambda_cap_ = cap;
}

std::vector<int> Mesh::active_elements() const {
    std::vector<int> out;
    out.reserve(active_count_);
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        if (elements_[i].active) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::array<Vec2, 3> Mesh::corners(int element) const {
    const auto& v = elements_[element].v;
    return {vertices_[v[0]].pos, vertices_[v[1]].pos, vertices_[v[2]].pos};
}

double Mesh::area(int element) const {
    const auto c = corners(element);
    return 0.5 * signed_twice_area(c[0], c[1], c[2]);
}

double Mesh::size(int element) const { return std::sqrt(area(element)); }

Vec2 Mesh::centroid(int element) const {
    const auto c = corners(element);
    return (c[0] + c[1] + c[2]) / 3.0;
}

Dyadic Mesh::twice_area_exact(int element) const {
    const auto& v = elements_[element].v;
    const Vertex& a = vertices_[v[0]];
    const Vertex& b = vertices_[v[1]];
    const Vertex& c = vertices_[v[2]];
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

int Mesh::new_root_edge(int v0, int v1, bool boundary) {
    EdgeNode e;
    e.v = {v0, v1};
    e.root = static_cast<int>(edges_.size());
    e.boundary = boundary;
    edges_.push_back(e);
    roots_.push_back(e.root);
    root_nodes_.resize(edges_.size());
    return e.root;
}

NodeKey Mesh::canonical_key(int root, std::int64_t num, int level) const {
    while (level > 0 && num % 2 == 0) {
        num /= 2;
        --level;
    }
    if (level == 0 && num == 0) {
        return nodes_[vertices_[edges_[root].v[0]].node].key;
    }
    if (level == 0 && num == k_) {
        return nodes_[vertices_[edges_[root].v[1]].node].key;
    }
    return NodeKey{root, num, level};
}

int Mesh::find_node(const NodeKey& key) const {
    auto it = node_index_.find(key);
    return it == node_index_.end() ? -1 : it->second;
}

int Mesh::register_lattice_point(int root, std::int64_t num, int level) {
    const NodeKey key = canonical_key(root, num, level);
    if (const int found = find_node(key); found >= 0) {
        return found;
    }
    const EdgeNode& r = edges_[root];
    NodeRecord rec;
    rec.key = key;
    const double t = std::ldexp(static_cast<double>(key.num), -key.level) / k_;
    rec.pos = (1.0 - t) * vertices_[r.v[0]].pos + t * vertices_[r.v[1]].pos;
    rec.on_boundary = r.boundary;
    const int id = static_cast<int>(nodes_.size());
    if (key.level >= 1) {
        const int left = find_node(canonical_key(root, key.num - 1, key.level));
        const int right = find_node(canonical_key(root, key.num + 1, key.level));
        if (left < 0 || right < 0) {
            throw std::logic_error("closest neighbours of a new lattice point are not registered");
        }
        rec.closest = std::array<int, 2>{left, right};
        dependents_[left].push_back(id);
        dependents_[right].push_back(id);
    }
    node_index_.emplace(key, id);
    nodes_.push_back(rec);
    dependents_.emplace_back();
    root_nodes_[root].push_back(id);
    return id;
}

void Mesh::register_edge_lattice(int edge) {
    const EdgeNode e = edges_[edge];
    for (int j = 1; j < k_; ++j) {
        register_lattice_point(e.root, e.index * k_ + j, e.level);
    }
}

int Mesh::split_edge(int edge) {
    if (!edges_[edge].is_leaf()) {
        return edges_[edge].mid;
    }
    const EdgeNode e = edges_[edge];
    if (e.level >= 55) {
        throw MeshError("edge refinement depth exceeds 55 levels");
    }
    const Vertex& a = vertices_[e.v[0]];
    const Vertex& b = vertices_[e.v[1]];
    Vertex m;
    m.x = Dyadic::midpoint(a.x, b.x);
    m.y = Dyadic::midpoint(a.y, b.y);
    m.pos = Vec2(m.x.to_double(), m.y.to_double());
    m.created_on_edge = edge;
    const int mid = static_cast<int>(vertices_.size());
    vertices_.push_back(m);

    const int mid_node = register_lattice_point(e.root, (2 * e.index + 1) * k_, e.level + 1);
    nodes_[mid_node].vertex = mid;
    nodes_[mid_node].pos = m.pos;
    vertices_[mid].node = mid_node;

    std::array<int, 2> kids{};
    for (int c = 0; c < 2; ++c) {
        EdgeNode child;
        child.v = c == 0 ? std::array<int, 2>{e.v[0], mid} : std::array<int, 2>{mid, e.v[1]};
        child.parent = edge;
        child.root = e.root;
        child.level = e.level + 1;
        child.index = 2 * e.index + c;
        child.boundary = e.boundary;
        kids[c] = static_cast<int>(edges_.size());
        edges_.push_back(child);
    }
    edges_[edge].child = kids;
    edges_[edge].mid = mid;
    register_edge_lattice(kids[0]);
    register_edge_lattice(kids[1]);
    return mid;
}

void Mesh::set_owner(int edge, int element, int value) {
    EdgeNode& e = edges_[edge];
    for (int s = 0; s < 2; ++s) {
        if (e.owner[s] == element) {
            e.owner[s] = value;
            return;
        }
    }
    throw std::logic_error("element does not own the edge it claims as a side");
}

std::array<int, 2> Mesh::bisect(int element) {
    if (element < 0 || element >= static_cast<int>(elements_.size()) || !elements_[element].active) {
        throw std::invalid_argument("bisect: element " + std::to_string(element) + " is not active");
    }
    const Element el = elements_[element];
    const int refine_edge = el.side[2];
    const int slot = side_of(refine_edge, element);
    const int mid = split_edge(refine_edge);
    const EdgeNode s = edges_[refine_edge];
    const bool forward = s.v[0] == el.v[0];
    const int towards_v0 = forward ? s.child[0] : s.child[1];
    const int towards_v1 = forward ? s.child[1] : s.child[0];

    const int cut = new_root_edge(mid, el.v[2], false);
    register_edge_lattice(cut);

    const int c1 = static_cast<int>(elements_.size());
    const int c2 = c1 + 1;
    Element first;
    first.v = {el.v[2], el.v[0], mid};
    first.side = {towards_v0, cut, el.side[1]};
    Element second;
    second.v = {el.v[1], el.v[2], mid};
    second.side = {cut, towards_v1, el.side[0]};
    for (Element* child : {&first, &second}) {
        child->parent = element;
        child->root_element = el.root_element;
        child->generation = el.generation + 1;
        child->active = true;
    }
    elements_.push_back(first);
    elements_.push_back(second);
    elements_[element].active = false;
    elements_[element].child = {c1, c2};
    ++active_count_;

    set_owner(el.side[1], element, c1);
    set_owner(el.side[0], element, c2);
    edges_[refine_edge].owner[slot] = -1;
    edges_[towards_v0].owner[slot] = c1;
    edges_[towards_v1].owner[slot] = c2;
    edges_[cut].owner[0] = c1;
    edges_[cut].owner[1] = c2;

    history_.push_back(element);

    std::vector<int> dirty = root_nodes_[s.root];
    dirty.insert(dirty.end(), root_nodes_[cut].begin(), root_nodes_[cut].end());
    classify_nodes(dirty);
    return {c1, c2};
}

void Mesh::refine_uniform() {
    for (int e : active_elements()) {
        bisect(e);
    }
}

NodeStatus Mesh::compute_status(int node) const {
    const NodeKey& key = nodes_[node].key;
    if (key.root < 0) {
        return NodeStatus::proper;
    }
    int cur = key.root;
    while (true) {
        const EdgeNode& e = edges_[cur];
        // Here the point lies strictly inside e.
        for (int s = 0; s < 2; ++s) {
            if (e.owner[s] >= 0 && e.level < key.level) {
                return NodeStatus::hanging;
            }
        }
        if (e.is_leaf()) {
            break;
        }
        const int c = compare_to_midpoint(key.num, key.level, k_, e.index, e.level);
        if (c == 0) {
            break;
        }
        cur = c < 0 ? e.child[0] : e.child[1];
    }
    return NodeStatus::proper;
}

int Mesh::compute_lambda(int node) const {
    const NodeRecord& rec = nodes_[node];
    if (rec.status == NodeStatus::proper) {
        return 0;
    }
    if (!rec.closest) {
        throw std::logic_error("hanging node without closest neighbours");
    }
    return 1 + std::max(nodes_[(*rec.closest)[0]].lambda, nodes_[(*rec.closest)[1]].lambda);
}

void Mesh::classify_nodes(const std::vector<int>& dirty) {
    std::set<std::pair<int, int>> queue;
    for (int x : dirty) {
        nodes_[x].status = compute_status(x);
        queue.emplace(nodes_[x].key.level, x);
    }
    while (!queue.empty()) {
        const int x = queue.begin()->second;
        queue.erase(queue.begin());
        const int lambda = compute_lambda(x);
        if (lambda != nodes_[x].lambda) {
            nodes_[x].lambda = lambda;
            for (int d : dependents_[x]) {
                queue.emplace(nodes_[d].key.level, d);
            }
        }
    }
}

int Mesh::max_lambda() const {
    int m = 0;
    for (const auto& n : nodes_) m = std::max(m, n.lambda);
    return m;
}

bool Mesh::is_admissible() const { return max_lambda() <= lambda_cap_; }

int Mesh::enforce_admissibility(int max_bisections) {
    int applied = 0;
    while (true) {
        std::vector<int> offenders;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (nodes_[i].lambda > lambda_cap_) offenders.push_back(static_cast<int>(i));
        }
        if (offenders.empty()) {
            return applied;
        }
        for (int x : offenders) {
            if (nodes_[x].lambda <= lambda_cap_) continue;
            // Elements whose side contains x in its interior without x being
            // one of that side's lattice points.
            const NodeKey key = nodes_[x].key;
            std::vector<int> culprits;
            int cur = key.root;
            while (cur >= 0) {
                const EdgeNode& e = edges_[cur];
                for (int s = 0; s < 2; ++s) {
                    if (e.owner[s] >= 0 && e.level < key.level) culprits.push_back(e.owner[s]);
                }
                if (e.is_leaf()) break;
                const int c = compare_to_midpoint(key.num, key.level, k_, e.index, e.level);
                if (c == 0) break;
                cur = c < 0 ? e.child[0] : e.child[1];
            }
            for (int el : culprits) {
                if (!elements_[el].active) continue;
                bisect(el);
                if (++applied > max_bisections) {
                    std::ostringstream os;
                    os << "enforce_admissibility: exceeded " << max_bisections << " bisections; node " << x
                       << " at (" << nodes_[x].pos.x() << ", " << nodes_[x].pos.y() << ") has lambda "
                       << nodes_[x].lambda << " > cap " << lambda_cap_ << "; active elements " << active_count_;
                    throw MeshError(os.str());
                }
            }
        }
    }
}

void Mesh::collect_leaves(int edge, std::vector<int>& out) const {
    const EdgeNode& e = edges_[edge];
    if (e.is_leaf()) {
        out.push_back(edge);
        return;
    }
    collect_leaves(e.child[0], out);
    collect_leaves(e.child[1], out);
}

std::vector<LeafEdge> Mesh::polygon_boundary(int element) const {
    const Element& el = elements_[element];
    if (!el.active) {
        throw std::invalid_argument("polygon_boundary: element is not active");
    }
    std::vector<LeafEdge> out;
    const std::array<std::pair<int, int>, 3> order{{{2, 0}, {0, 1}, {1, 2}}};
    for (auto [side, start] : order) {
        const int e = el.side[side];
        std::vector<int> leaves;
        collect_leaves(e, leaves);
        const bool reversed = edges_[e].v[0] != el.v[start];
        if (reversed) std::reverse(leaves.begin(), leaves.end());
        for (int l : leaves) out.push_back(LeafEdge{l, reversed});
    }
    return out;
}

int Mesh::lattice_node(int edge, int j) const {
    const EdgeNode& e = edges_[edge];
    const int id = find_node(canonical_key(e.root, e.index * k_ + j, e.level));
    if (id < 0) {
        throw std::logic_error("lattice point of an edge is not registered");
    }
    return id;
}

std::vector<int> Mesh::leaf_nodes(const LeafEdge& leaf) const {
    std::vector<int> out(k_ + 1);
    for (int j = 0; j <= k_; ++j) {
        out[j] = lattice_node(leaf.edge, leaf.reversed ? k_ - j : j);
    }
    return out;
}

std::vector<int> Mesh::boundary_nodes(int element) const {
    std::vector<int> out;
    for (const LeafEdge& leaf : polygon_boundary(element)) {
        const auto ln = leaf_nodes(leaf);
        out.insert(out.end(), ln.begin(), ln.end() - 1);
    }
    return out;
}

std::vector<int> Mesh::proper_lattice(int element) const {
    const Element& el = elements_[element];
    std::vector<int> out;
    out.reserve(3 * k_);
    const std::array<std::pair<int, int>, 3> order{{{2, 0}, {0, 1}, {1, 2}}};
    for (auto [side, start] : order) {
        const int e = el.side[side];
        const bool reversed = edges_[e].v[0] != el.v[start];
        for (int j = 0; j < k_; ++j) {
            out.push_back(lattice_node(e, reversed ? k_ - j : j));
        }
    }
    return out;
}

int Mesh::owner_on_side(int edge, int side) const {
    for (int cur = edge; cur >= 0; cur = edges_[cur].parent) {
        if (edges_[cur].owner[side] >= 0) return edges_[cur].owner[side];
    }
    return -1;
}

int Mesh::side_of(int edge, int element) const {
    for (int cur = edge; cur >= 0; cur = edges_[cur].parent) {
        if (edges_[cur].owner[0] == element) return 0;
        if (edges_[cur].owner[1] == element) return 1;
    }
    throw std::logic_error("element is not adjacent to edge");
}

std::array<Vec2, 2> Mesh::edge_points(int edge) const {
    return {vertices_[edges_[edge].v[0]].pos, vertices_[edges_[edge].v[1]].pos};
}

std::int64_t Mesh::lattice_level(int node) const { return nodes_[node].key.level; }

int Mesh::incident_roots(int vertex) const {
    int count = vertices_[vertex].created_on_edge >= 0 ? 1 : 0;
    for (int r : roots_) {
        if (edges_[r].v[0] == vertex || edges_[r].v[1] == vertex) ++count;
    }
    return count;
}

std::vector<std::pair<NodeStatus, int>> Mesh::recompute_from_scratch() const {
    const std::size_t n = nodes_.size();
    std::vector<NodeStatus> status(n, NodeStatus::proper);
    // Scan every side of every active element and flag the registered points
    // that lie strictly inside the side without being on its k-lattice.
    for (const Element& el : elements_) {
        if (!el.active) continue;
        for (int side : el.side) {
            const EdgeNode& e = edges_[side];
            for (int x : root_nodes_[e.root]) {
                const NodeKey& key = nodes_[x].key;
                if (key.root != e.root) continue;  // a vertex registered elsewhere
                // t in (index/2^L, (index+1)/2^L) ?
                const i128 scaled = static_cast<i128>(key.num) << e.level;  // t * k * 2^(L+level)
                const i128 lo = (static_cast<i128>(e.index) * k_) << key.level;
                const i128 hi = (static_cast<i128>(e.index + 1) * k_) << key.level;
                if (scaled <= lo || scaled >= hi) continue;
                const bool on_lattice = key.level <= e.level;
                if (!on_lattice) status[x] = NodeStatus::hanging;
            }
        }
    }
    std::vector<int> lambda(n, -1);
    std::function<int(int)> eval = [&](int x) -> int {
        if (lambda[x] >= 0) return lambda[x];
        if (status[x] == NodeStatus::proper) return lambda[x] = 0;
        const auto& b = nodes_[x].closest;
        if (!b) throw std::logic_error("hanging node without closest neighbours");
        return lambda[x] = 1 + std::max(eval((*b)[0]), eval((*b)[1]));
    };
    std::vector<std::pair<NodeStatus, int>> out(n);
    for (std::size_t x = 0; x < n; ++x) out[x] = {status[x], eval(static_cast<int>(x))};
    return out;
}

Mesh Mesh::replay(std::size_t steps) const {
    Mesh m(k_, initial_vertices_, initial_triangles_, lambda_cap_);
    for (std::size_t i = 0; i < steps && i < history_.size(); ++i) {
        m.bisect(history_[i]);
    }
    return m;
}

}  // namespace avem
