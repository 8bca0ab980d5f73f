#include "cgs/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cgs/errors.hpp"

namespace cgs::topo {

NodeLayout NodeLayout::grid(std::size_t rows, std::size_t cols, double spacing) {
    if (rows == 0 || cols == 0) {
        throw ParameterError("grid layout: rows and cols must be positive");
    }
    if (!(spacing > 0.0)) {
        throw ParameterError("grid layout: spacing must be positive");
    }
    NodeLayout l;
    l.points.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            l.points.push_back({static_cast<double>(c) * spacing,
                                static_cast<double>(r) * spacing});
        }
    }
    return l;
}

NodeLayout NodeLayout::ring(std::size_t n, double radius) {
    if (n == 0) {
        throw ParameterError("ring layout: need at least one node");
    }
    if (!(radius > 0.0)) {
        throw ParameterError("ring layout: radius must be positive");
    }
    NodeLayout l;
    l.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ang = 2.0 * std::numbers::pi * static_cast<double>(i) /
                           static_cast<double>(n);
        l.points.push_back({radius * std::cos(ang), radius * std::sin(ang)});
    }
    return l;
}

NodeLayout NodeLayout::custom(std::vector<std::array<double, 2>> pts) {
    NodeLayout l;
    l.points = std::move(pts);
    return l;
}

DistanceMatrix DistanceMatrix::from_layout(const NodeLayout& layout) {
    const std::size_t n = layout.size();
    if (n < 2) {
        throw DegenerateGeometryError("distance matrix needs at least two nodes, got " +
                                      std::to_string(n));
    }
    std::vector<double> d(n * n, 0.0);
    double max_d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = layout.points[i][0] - layout.points[j][0];
            const double dy = layout.points[i][1] - layout.points[j][1];
            const double dist = std::hypot(dx, dy);
            d[i * n + j] = dist;
            d[j * n + i] = dist;
            max_d = std::max(max_d, dist);
        }
    }
    if (max_d == 0.0) {
        throw DegenerateGeometryError("all nodes coincide; cannot normalize distances");
    }
    for (double& v : d) v /= max_d;
    return DistanceMatrix(n, std::move(d));
}

DistanceMatrix DistanceMatrix::from_values(std::size_t n, std::vector<double> values) {
    if (n < 2) {
        throw DegenerateGeometryError("distance matrix needs at least two nodes, got " +
                                      std::to_string(n));
    }
    if (values.size() != n * n) {
        throw DimensionError("distance matrix: expected " + std::to_string(n * n) +
                             " values, got " + std::to_string(values.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (values[i * n + i] != 0.0) {
            throw ParameterError("distance matrix: nonzero diagonal at node " +
                                 std::to_string(i));
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double v = values[i * n + j];
            if (!(v >= 0.0)) {
                throw ParameterError("distance matrix: negative or NaN entry at (" +
                                     std::to_string(i) + ", " + std::to_string(j) + ")");
            }
            if (std::abs(v - values[j * n + i]) > 1e-12) {
                throw ParameterError("distance matrix: asymmetric at (" +
                                     std::to_string(i) + ", " + std::to_string(j) + ")");
            }
        }
    }
    return DistanceMatrix(n, std::move(values));
}

namespace {

std::size_t validate_tree(const std::vector<int>& next) {
    const std::size_t m = next.size();
    if (m == 0) {
        throw InvalidTopologyError("communication graph has no vertices");
    }
    std::size_t sink = m;  // sentinel
    for (std::size_t v = 0; v < m; ++v) {
        const int nh = next[v];
        if (nh == -1) {
            if (sink != m) {
                throw InvalidTopologyError("multiple sinks: vertices " +
                                           std::to_string(sink) + " and " +
                                           std::to_string(v));
            }
            sink = v;
        } else if (nh < 0 || static_cast<std::size_t>(nh) >= m) {
            throw InvalidTopologyError("vertex " + std::to_string(v) +
                                       " forwards to out-of-range vertex " +
                                       std::to_string(nh));
        } else if (static_cast<std::size_t>(nh) == v) {
            throw InvalidTopologyError("vertex " + std::to_string(v) +
                                       " forwards to itself");
        }
    }
    if (sink == m) {
        throw InvalidTopologyError("communication graph has no sink");
    }
    // Every vertex must reach the sink; a walk longer than m vertices means
    // we are circling.
    for (std::size_t v = 0; v < m; ++v) {
        std::size_t cur = v;
        std::size_t hops = 0;
        while (next[cur] != -1) {
            cur = static_cast<std::size_t>(next[cur]);
            if (++hops > m) {
                throw InvalidTopologyError("cycle reachable from vertex " +
                                           std::to_string(v));
            }
        }
    }
    return sink;
}

}  // namespace

CommGraph CommGraph::star(std::size_t m) {
    if (m == 0) throw InvalidTopologyError("star graph needs at least one vertex");
    std::vector<int> next(m, 0);
    next[0] = -1;
    return CommGraph(std::move(next), 0);
}

CommGraph CommGraph::line(std::size_t m) {
    if (m == 0) throw InvalidTopologyError("line graph needs at least one vertex");
    std::vector<int> next(m);
    next[0] = -1;
    for (std::size_t v = 1; v < m; ++v) next[v] = static_cast<int>(v - 1);
    return CommGraph(std::move(next), 0);
}

CommGraph CommGraph::from_next_hops(std::vector<int> next_hops) {
    const std::size_t sink = validate_tree(next_hops);
    return CommGraph(std::move(next_hops), sink);
}

BayesNet::BayesNet(const CommGraph& comm) {
    const std::size_t m = comm.vertex_count();
    root_ = comm.sink();
    parent_.resize(m);
    children_.assign(m, {});
    for (std::size_t v = 0; v < m; ++v) {
        parent_[v] = comm.next_hop(v);
        if (comm.next_hop(v) != -1) {
            children_[static_cast<std::size_t>(comm.next_hop(v))].push_back(v);
        }
    }
    for (auto& ch : children_) std::sort(ch.begin(), ch.end());
    // Root-first breadth-first order; children were sorted above, so the
    // order is fully determined by the graph.
    order_.reserve(m);
    order_.push_back(root_);
    for (std::size_t head = 0; head < order_.size(); ++head) {
        for (std::size_t c : children_[order_[head]]) order_.push_back(c);
    }
    position_.resize(m);
    for (std::size_t i = 0; i < m; ++i) position_[order_[i]] = i;
}

BayesNet transpose_to_bayesnet(const CommGraph& comm) { return BayesNet(comm); }

CommGraph transpose_to_commgraph(const BayesNet& bn) {
    std::vector<int> next(bn.vertex_count());
    for (std::size_t v = 0; v < bn.vertex_count(); ++v) next[v] = bn.parent(v);
    return CommGraph::from_next_hops(std::move(next));
}

std::size_t FeasibilityMask::count_allowed() const {
    std::size_t total = 0;
    for (char c : root_allowed) total += (c != 0);
    for (const auto& m : cond_allowed) {
        for (char c : m) total += (c != 0);
    }
    return total;
}

FeasibilityMask build_masks(const BayesNet& bn, const DistanceMatrix& dist,
                            double threshold) {
    if (threshold < 0.0) {
        throw ParameterError("feasibility threshold must be non-negative, got " +
                             std::to_string(threshold));
    }
    const std::size_t m = bn.vertex_count();
    const std::size_t n = dist.size();

    // viable[v][x]: picking node x for vertex v leaves every child subtree
    // completable. Computed leaf-up, i.e. in reverse topological order.
    std::vector<std::vector<char>> viable(m, std::vector<char>(n, 1));
    const auto& order = bn.order();
    for (std::size_t i = m; i-- > 0;) {
        const std::size_t v = order[i];
        for (std::size_t x = 0; x < n; ++x) {
            for (std::size_t c : bn.children(v)) {
                bool child_ok = false;
                for (std::size_t y = 0; y < n && !child_ok; ++y) {
                    child_ok = y != x && dist.at(x, y) <= threshold && viable[c][y];
                }
                if (!child_ok) {
                    viable[v][x] = 0;
                    break;
                }
            }
        }
    }

    FeasibilityMask mask;
    mask.n_nodes = n;
    mask.root_allowed.assign(viable[bn.root()].begin(), viable[bn.root()].end());
    mask.cond_allowed.assign(m, {});
    for (std::size_t v = 0; v < m; ++v) {
        if (v == bn.root()) continue;
        auto& cm = mask.cond_allowed[v];
        cm.assign(n * n, 0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t x = 0; x < n; ++x) {
                cm[k * n + x] =
                    (x != k && dist.at(k, x) <= threshold && viable[v][x]) ? 1 : 0;
            }
        }
    }

    if (std::none_of(mask.root_allowed.begin(), mask.root_allowed.end(),
                     [](char c) { return c != 0; })) {
        // Point at where the collapse starts: the deepest vertex whose every
        // node choice fails, which is the first all-zero row in leaf-up order.
        std::size_t culprit = bn.root();
        for (std::size_t i = m; i-- > 0;) {
            const std::size_t v = order[i];
            if (std::none_of(viable[v].begin(), viable[v].end(),
                             [](char c) { return c != 0; })) {
                culprit = v;
                break;
            }
        }
        throw InfeasibleError("no feasible assignment at threshold " +
                              std::to_string(threshold) +
                              "; feasibility collapses at vertex " +
                              std::to_string(culprit));
    }
    return mask;
}

namespace {

void validate_assignment(const std::vector<std::size_t>& assignment,
                         const BayesNet& bn, const DistanceMatrix& dist) {
    if (assignment.size() != bn.vertex_count()) {
        throw DimensionError("assignment has " + std::to_string(assignment.size()) +
                             " entries for " + std::to_string(bn.vertex_count()) +
                             " vertices");
    }
    for (std::size_t x : assignment) {
        if (x >= dist.size()) {
            throw ParameterError("assignment names node " + std::to_string(x) +
                                 " but only " + std::to_string(dist.size()) +
                                 " nodes exist");
        }
    }
}

}  // namespace

bool satisfies_edge_constraints(const std::vector<std::size_t>& assignment,
                                const BayesNet& bn, const DistanceMatrix& dist,
                                double threshold) {
    validate_assignment(assignment, bn, dist);
    for (std::size_t v = 0; v < bn.vertex_count(); ++v) {
        const int p = bn.parent(v);
        if (p == -1) continue;
        const std::size_t a = assignment[bn.position(v)];
        const std::size_t b = assignment[bn.position(static_cast<std::size_t>(p))];
        if (a == b || dist.at(a, b) > threshold) return false;
    }
    return true;
}

bool is_feasible_selection(const std::vector<std::size_t>& assignment,
                           const BayesNet& bn, const DistanceMatrix& dist,
                           double threshold) {
    if (!satisfies_edge_constraints(assignment, bn, dist, threshold)) return false;
    std::vector<std::size_t> sorted = assignment;
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

namespace {

void enumerate_rec(const BayesNet& bn, const DistanceMatrix& dist, double threshold,
                   Distinctness mode, std::vector<std::size_t>& partial,
                   std::vector<char>& used,
                   std::vector<std::vector<std::size_t>>& out) {
    const std::size_t i = partial.size();
    if (i == bn.vertex_count()) {
        out.push_back(partial);
        return;
    }
    const std::size_t v = bn.order()[i];
    const int p = bn.parent(v);
    for (std::size_t x = 0; x < dist.size(); ++x) {
        if (mode == Distinctness::kGlobal && used[x]) continue;
        if (p != -1) {
            const std::size_t px =
                partial[bn.position(static_cast<std::size_t>(p))];
            if (x == px || dist.at(px, x) > threshold) continue;
        }
        partial.push_back(x);
        used[x] = 1;
        enumerate_rec(bn, dist, threshold, mode, partial, used, out);
        used[x] = 0;
        partial.pop_back();
    }
}

}  // namespace

std::vector<std::vector<std::size_t>> enumerate_feasible(
    const BayesNet& bn, const DistanceMatrix& dist, double threshold,
    Distinctness mode) {
    if (dist.size() > 12 || bn.vertex_count() > 4) {
        throw SizeError("enumerate_feasible is limited to 12 nodes and 4 vertices, got " +
                        std::to_string(dist.size()) + " nodes, " +
                        std::to_string(bn.vertex_count()) + " vertices");
    }
    if (threshold < 0.0) {
        throw ParameterError("feasibility threshold must be non-negative, got " +
                             std::to_string(threshold));
    }
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> partial;
    std::vector<char> used(dist.size(), 0);
    enumerate_rec(bn, dist, threshold, mode, partial, used, out);
    return out;
}

}  // namespace cgs::topo
