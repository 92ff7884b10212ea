#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "avem/dyadic.hpp"

namespace avem {

using Vec2 = Eigen::Vector2d;

struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class NodeStatus { proper, hanging };

/// Canonical combinatorial identity of a lattice point.
///
/// root < 0: the initial vertex with id `num`.
/// root >= 0: the point at parameter num / (k * 2^level) along the root edge,
/// with the fraction fully reduced (num odd or level == 0). Points at the
/// root endpoints are never encoded this way; they resolve to their vertex.
struct NodeKey {
    int root = -1;
    std::int64_t num = 0;
    int level = 0;

    friend bool operator==(const NodeKey&, const NodeKey&) = default;
};

struct NodeKeyHash {
    std::size_t operator()(const NodeKey& key) const noexcept {
        std::size_t h = std::hash<std::int64_t>{}(key.num);
        h ^= std::hash<int>{}(key.root) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= std::hash<int>{}(key.level) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

struct Vertex {
    Dyadic x;
    Dyadic y;
    Vec2 pos;
    int node = -1;
    /// Edge-tree node whose midpoint this vertex is; -1 for initial vertices.
    int created_on_edge = -1;
};

/// One node of a binary edge-refinement tree.
struct EdgeNode {
    std::array<int, 2> v{-1, -1};
    int parent = -1;
    std::array<int, 2> child{-1, -1};
    int mid = -1;
    int root = -1;
    int level = 0;
    /// Covers [index / 2^level, (index + 1) / 2^level] of the root segment.
    std::int64_t index = 0;
    /// Active element lying left (0) / right (1) of v[0] -> v[1] whose side is
    /// exactly this segment.
    std::array<int, 2> owner{-1, -1};
    bool boundary = false;

    bool is_leaf() const { return child[0] < 0; }
};

struct Element {
    /// Counterclockwise, newest vertex last.
    std::array<int, 3> v{};
    /// side[i] is the edge-tree node opposite v[i]; side[2] is the refinement edge.
    std::array<int, 3> side{};
    int parent = -1;
    std::array<int, 2> child{-1, -1};
    int root_element = -1;
    int generation = 0;
    bool active = true;
};

struct NodeRecord {
    NodeKey key;
    Vec2 pos;
    int vertex = -1;
    NodeStatus status = NodeStatus::proper;
    /// Closest neighbours B(x) for nodes created as midpoints of lattice
    /// segments of a split edge.
    std::optional<std::array<int, 2>> closest;
    int lambda = 0;
    bool on_boundary = false;
};

/// A leaf of a side tree, oriented along the counterclockwise boundary of
/// the element that owns it.
struct LeafEdge {
    int edge = -1;
    bool reversed = false;
};

/// Nonconforming triangulation refined by newest-vertex bisection without
/// completion. Owns the edge trees and the node registry for a fixed degree k.
class Mesh {
public:
    struct Triangle {
        std::array<int, 3> v{};
        /// Index (0..2) of the newest vertex inside v, or -1 to pick the
        /// vertex opposite the longest side.
        int newest = -1;
    };

    Mesh(int degree, std::vector<std::array<Dyadic, 2>> vertices, std::vector<Triangle> triangles,
         int lambda_cap = 1);

    /// Two triangles on [0,1]^2 split along the (0,0)-(1,1) diagonal, newest
    /// vertices at the right angles.
    static Mesh unit_square(int degree, int lambda_cap = 1);

    int degree() const { return k_; }
    int lambda_cap() const { return lambda_cap_; }
    void set_lambda_cap(int cap);

    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<EdgeNode>& edges() const { return edges_; }
    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<NodeRecord>& nodes() const { return nodes_; }
    const std::vector<int>& roots() const { return roots_; }
    const std::vector<int>& bisection_history() const { return history_; }
    int initial_element_count() const { return initial_elements_; }

    std::vector<int> active_elements() const;
    std::size_t active_count() const { return active_count_; }

    // Geometry of an element (the macro triangle).
    std::array<Vec2, 3> corners(int element) const;
    double area(int element) const;
    /// h_E = |E|^{1/2}.
    double size(int element) const;
    Vec2 centroid(int element) const;
    /// Twice the signed area in exact arithmetic.
    Dyadic twice_area_exact(int element) const;

    // Refinement.
    /// Newest-vertex bisection of an active element; returns the two children.
    std::array<int, 2> bisect(int element);
    /// Bisects every active element once.
    void refine_uniform();
    /// Additional bisections until every node has lambda <= lambda_cap.
    /// Returns the number of bisections applied.
    int enforce_admissibility(int max_bisections = 1000000);
    bool is_admissible() const;
    int max_lambda() const;

    /// Recomputes the status and global index of `dirty` nodes and of every
    /// node whose index depends on them.
    void classify_nodes(const std::vector<int>& dirty);

    // Boundary structure.
    std::vector<LeafEdge> polygon_boundary(int element) const;
    /// Nodes at the k-lattice of every leaf edge, counterclockwise starting at
    /// v[0]. Size = (#leaf edges) * k.
    std::vector<int> boundary_nodes(int element) const;
    /// The 3k proper-lattice points P_E of the macro triangle, counterclockwise
    /// starting at v[0].
    std::vector<int> proper_lattice(int element) const;
    /// Nodes of one leaf edge (k+1 of them) in the direction of traversal.
    std::vector<int> leaf_nodes(const LeafEdge& leaf) const;

    /// Active element on the given side (0 = left, 1 = right) of the edge
    /// segment, or -1 (domain boundary).
    int owner_on_side(int edge, int side) const;
    /// Side (0/1) of `edge` on which `element` lies.
    int side_of(int edge, int element) const;
    std::array<Vec2, 2> edge_points(int edge) const;

    // Node registry.
    int find_node(const NodeKey& key) const;
    /// Node at parameter num / (k 2^level) of a root edge, -1 if absent.
    int node_at(int root, std::int64_t num, int level) const { return find_node(canonical_key(root, num, level)); }
    /// Node sitting at lattice position j (0..k) of the edge segment.
    int lattice_node(int edge, int j) const;
    std::int64_t lattice_level(int node) const;
    bool is_hanging(int node) const { return nodes_[node].status == NodeStatus::hanging; }

    /// Number of edge-tree roots meeting the vertex (as endpoint or through
    /// their interior).
    int incident_roots(int vertex) const;

    /// Independent brute-force status/lambda computation by scanning every
    /// active element; used to audit the incremental bookkeeping.
    std::vector<std::pair<NodeStatus, int>> recompute_from_scratch() const;

    /// Builds a copy of this mesh's initial state and replays the first
    /// `steps` bisections of the history.
    Mesh replay(std::size_t steps) const;

    /// Leaf edges of the given side tree in order from v[0] to v[1].
    void collect_leaves(int edge, std::vector<int>& out) const;

private:
    int k_;
    int lambda_cap_;
    std::vector<Vertex> vertices_;
    std::vector<EdgeNode> edges_;
    std::vector<Element> elements_;
    std::vector<NodeRecord> nodes_;
    std::vector<int> roots_;
    std::unordered_map<NodeKey, int, NodeKeyHash> node_index_;
    std::vector<std::vector<int>> dependents_;
    std::vector<std::vector<int>> root_nodes_;
    std::vector<int> history_;
    std::size_t active_count_ = 0;
    int initial_elements_ = 0;
    // Initial data, kept for replay().
    std::vector<std::array<Dyadic, 2>> initial_vertices_;
    std::vector<Triangle> initial_triangles_;

    NodeKey canonical_key(int root, std::int64_t num, int level) const;
    int register_lattice_point(int root, std::int64_t num, int level);
    void register_edge_lattice(int edge);
    int new_root_edge(int v0, int v1, bool boundary);
    int split_edge(int edge);
    void set_owner(int edge, int element, int value);
    NodeStatus compute_status(int node) const;
    int compute_lambda(int node) const;
};

}  // namespace avem
