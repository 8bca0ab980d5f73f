#ifndef CGS_BASELINES_HPP
#define CGS_BASELINES_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "cgs/dataset.hpp"
#include "cgs/topology.hpp"

namespace cgs::baseline {

// Mutual information (nats) between each node's per-sample log-variance
// summary and the class label, estimated with equal-frequency binning.
struct MiResult {
    std::vector<double> mi;            // per node
    std::vector<std::size_t> ranking;  // node ids, highest MI first, ties by index
};

MiResult mi_ranking(const data::Dataset& ds, std::size_t n_bins = 8);

// Utility-greedy selection under the distance constraint: vertices are filled
// in topological order, each taking the best-ranked unused node whose parent
// edge fits and from which the rest of the tree can still be completed.
// Returns nullopt when no feasible assignment exists at all. The result is
// indexed by topological position, like every other assignment.
std::optional<std::vector<std::size_t>> greedy_constrained_select(
    const std::vector<std::size_t>& ranking, const topo::BayesNet& bn,
    const topo::DistanceMatrix& dist, double threshold);

struct OracleResult {
    std::vector<std::size_t> assignment;
    double score;
};

// Exhaustive search over every feasible assignment (global distinctness),
// maximizing `evaluate`; ties resolved toward the lexicographically smallest
// assignment. Throws InfeasibleError when nothing is feasible and SizeError
// beyond the enumeration guard.
OracleResult oracle_search(
    const std::function<double(const std::vector<std::size_t>&)>& evaluate,
    const topo::BayesNet& bn, const topo::DistanceMatrix& dist, double threshold);

}  // namespace cgs::baseline

#endif  // CGS_BASELINES_HPP
