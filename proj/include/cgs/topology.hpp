#ifndef CGS_TOPOLOGY_HPP
#define CGS_TOPOLOGY_HPP

#include <array>
#include <cstddef>
#include <vector>

namespace cgs::topo {

// Planar positions of the N candidate sensor nodes.
struct NodeLayout {
    std::vector<std::array<double, 2>> points;

    static NodeLayout grid(std::size_t rows, std::size_t cols, double spacing = 1.0);
    static NodeLayout ring(std::size_t n, double radius = 1.0);
    static NodeLayout custom(std::vector<std::array<double, 2>> pts);

    std::size_t size() const { return points.size(); }
};

// Symmetric pairwise distances with zero diagonal, rescaled so the furthest
// pair sits at exactly 1. Thresholds are therefore always relative to the
// layout's diameter.
class DistanceMatrix {
public:
    static DistanceMatrix from_layout(const NodeLayout& layout);
    // Pre-computed distances; validated but not rescaled.
    static DistanceMatrix from_values(std::size_t n, std::vector<double> values);

    double at(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    std::size_t size() const { return n_; }

private:
    DistanceMatrix(std::size_t n, std::vector<double> d) : n_(n), d_(std::move(d)) {}
    std::size_t n_ = 0;
    std::vector<double> d_;
};

// Directed communication tree over the M selection slots. Edge v -> next_hop(v)
// means slot v forwards its measurements one hop toward the sink; the sink is
// the single slot with no next hop.
class CommGraph {
public:
    static CommGraph star(std::size_t m);  // slots 1..m-1 all feed slot 0
    static CommGraph line(std::size_t m);  // chain m-1 -> ... -> 1 -> 0
    // next_hop[v] = receiving slot, or -1 for the sink. Validated.
    static CommGraph from_next_hops(std::vector<int> next_hops);

    std::size_t vertex_count() const { return next_.size(); }
    int next_hop(std::size_t v) const { return next_[v]; }
    std::size_t sink() const { return sink_; }

    bool operator==(const CommGraph& o) const { return next_ == o.next_; }

private:
    CommGraph(std::vector<int> next, std::size_t sink)
        : next_(std::move(next)), sink_(sink) {}
    std::vector<int> next_;
    std::size_t sink_;
};

// The communication tree with every edge reversed: an arborescence rooted at
// the sink, which is the order ancestral sampling walks. order() lists the
// vertices root-first (BFS, children ascending).
class BayesNet {
public:
    explicit BayesNet(const CommGraph& comm);

    std::size_t vertex_count() const { return parent_.size(); }
    std::size_t root() const { return root_; }
    int parent(std::size_t v) const { return parent_[v]; }
    const std::vector<std::size_t>& children(std::size_t v) const { return children_[v]; }
    const std::vector<std::size_t>& order() const { return order_; }
    // Position of vertex v within order().
    std::size_t position(std::size_t v) const { return position_[v]; }

private:
    std::size_t root_;
    std::vector<int> parent_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> position_;
};

BayesNet transpose_to_bayesnet(const CommGraph& comm);
// Reverses the transpose; transpose_to_commgraph(transpose_to_bayesnet(g)) == g.
CommGraph transpose_to_commgraph(const BayesNet& bn);

// Which node choices remain on the table once the distance threshold and
// look-ahead completion pruning are applied.
struct FeasibilityMask {
    std::size_t n_nodes = 0;
    // Root choices from which the whole tree can still be completed.
    std::vector<char> root_allowed;
    // cond_allowed[v][k * n_nodes + n]: vertex v may pick node n when its
    // parent picked node k. Empty for the root.
    std::vector<std::vector<char>> cond_allowed;

    bool cond(std::size_t v, std::size_t k, std::size_t n) const {
        return cond_allowed[v][k * n_nodes + n] != 0;
    }
    std::size_t count_allowed() const;
};

// Builds the masks for one (topology, distances, threshold) triple. A pick is
// kept only if it satisfies the parent edge (distance <= threshold, distinct
// from the parent's node) and every child subtree can still be completed.
// Throws InfeasibleError naming the vertex where feasibility collapses.
FeasibilityMask build_masks(const BayesNet& bn, const DistanceMatrix& dist,
                            double threshold);

// Assignments are indexed by position in bn.order(): assignment[i] is the
// node picked by the i-th vertex in root-first order.
enum class Distinctness {
    kGlobal,    // no node picked twice anywhere
    kAdjacent,  // only vertices joined by an edge must differ
};

// Every tree edge within threshold and endpoints distinct. This is exactly
// what the ancestral sampler guarantees.
bool satisfies_edge_constraints(const std::vector<std::size_t>& assignment,
                                const BayesNet& bn, const DistanceMatrix& dist,
                                double threshold);

// Edge constraints plus global distinctness; the notion of feasibility used
// for reported selections.
bool is_feasible_selection(const std::vector<std::size_t>& assignment,
                           const BayesNet& bn, const DistanceMatrix& dist,
                           double threshold);

// Exhaustive list of feasible assignments in lexicographic order. Guarded to
// small instances (n <= 12 nodes, m <= 4 vertices); throws SizeError beyond.
std::vector<std::vector<std::size_t>> enumerate_feasible(
    const BayesNet& bn, const DistanceMatrix& dist, double threshold,
    Distinctness mode = Distinctness::kGlobal);

}  // namespace cgs::topo

#endif  // CGS_TOPOLOGY_HPP
