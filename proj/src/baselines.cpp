#include "cgs/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cgs/errors.hpp"

namespace cgs::baseline {

namespace {

// Plugin MI between a binned scalar and the label, in nats.
double binned_mi(const std::vector<std::size_t>& bins, std::size_t n_bins,
                 const std::vector<int>& y, std::size_t n_classes) {
    const double total = static_cast<double>(bins.size());
    std::vector<double> joint(n_bins * n_classes, 0.0);
    std::vector<double> pb(n_bins, 0.0), pc(n_classes, 0.0);
    for (std::size_t i = 0; i < bins.size(); ++i) {
        joint[bins[i] * n_classes + static_cast<std::size_t>(y[i])] += 1.0;
        pb[bins[i]] += 1.0;
        pc[static_cast<std::size_t>(y[i])] += 1.0;
    }
    double mi = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
        for (std::size_t c = 0; c < n_classes; ++c) {
            const double pj = joint[b * n_classes + c] / total;
            if (pj <= 0.0) continue;
            mi += pj * std::log(pj * total * total / (pb[b] * pc[c]));
        }
    }
    return mi;
}

}  // namespace

MiResult mi_ranking(const data::Dataset& ds, std::size_t n_bins) {
    if (ds.size() == 0) throw DimensionError("mi_ranking: empty dataset");
    if (n_bins < 2) throw ParameterError("mi_ranking: need at least 2 bins");
    if (ds.size() < n_bins) {
        throw ParameterError("mi_ranking: " + std::to_string(ds.size()) +
                             " samples cannot fill " + std::to_string(n_bins) + " bins");
    }
    const std::size_t S = ds.size();
    const std::size_t L = ds.n_channels;
    MiResult res;
    res.mi.resize(ds.n_nodes);

    std::vector<double> summary(S);
    std::vector<std::size_t> order(S), bins(S);
    for (std::size_t node = 0; node < ds.n_nodes; ++node) {
        for (std::size_t s = 0; s < S; ++s) {
            double mean = 0.0;
            for (std::size_t c = 0; c < L; ++c) mean += ds.x[s][node * L + c];
            mean /= static_cast<double>(L);
            double var = 0.0;
            for (std::size_t c = 0; c < L; ++c) {
                const double d = ds.x[s][node * L + c] - mean;
                var += d * d;
            }
            var /= static_cast<double>(L);
            summary[s] = std::log(var + 1e-12);
        }
        // Equal-frequency bins via ranks; ties fall to the earlier sample, so
        // the estimate is deterministic.
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return summary[a] < summary[b];
        });
        for (std::size_t pos = 0; pos < S; ++pos) {
            bins[order[pos]] = pos * n_bins / S;
        }
        res.mi[node] = binned_mi(bins, n_bins, ds.y, ds.n_classes);
    }

    res.ranking.resize(ds.n_nodes);
    std::iota(res.ranking.begin(), res.ranking.end(), std::size_t{0});
    std::stable_sort(res.ranking.begin(), res.ranking.end(),
                     [&](std::size_t a, std::size_t b) { return res.mi[a] > res.mi[b]; });
    return res;
}

namespace {

// Can the vertices at topological positions [from, m) still be assigned,
// respecting edges, the threshold and global distinctness?
bool completable(const topo::BayesNet& bn, const topo::DistanceMatrix& dist,
                 double threshold, std::vector<std::size_t>& partial,
                 std::vector<char>& used, std::size_t from) {
    if (from == bn.vertex_count()) return true;
    const std::size_t v = bn.order()[from];
    const int p = bn.parent(v);
    for (std::size_t x = 0; x < dist.size(); ++x) {
        if (used[x]) continue;
        if (p != -1) {
            const std::size_t px = partial[bn.position(static_cast<std::size_t>(p))];
            if (x == px || dist.at(px, x) > threshold) continue;
        }
        partial.push_back(x);
        used[x] = 1;
        const bool ok = completable(bn, dist, threshold, partial, used, from + 1);
        used[x] = 0;
        partial.pop_back();
        if (ok) return true;
    }
    return false;
}

}  // namespace

std::optional<std::vector<std::size_t>> greedy_constrained_select(
    const std::vector<std::size_t>& ranking, const topo::BayesNet& bn,
    const topo::DistanceMatrix& dist, double threshold) {
    const std::size_t m = bn.vertex_count();
    const std::size_t n = dist.size();
    if (ranking.size() != n) {
        throw DimensionError("greedy selection: ranking names " +
                             std::to_string(ranking.size()) + " nodes, distance matrix has " +
                             std::to_string(n));
    }
    std::vector<char> seen(n, 0);
    for (std::size_t x : ranking) {
        if (x >= n || seen[x]) {
            throw ParameterError("greedy selection: ranking must be a permutation of "
                                 "the node ids");
        }
        seen[x] = 1;
    }
    if (threshold < 0.0) {
        throw ParameterError("feasibility threshold must be non-negative, got " +
                             std::to_string(threshold));
    }
    if (m > n) return std::nullopt;

    std::vector<std::size_t> partial;
    std::vector<char> used(n, 0);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t v = bn.order()[i];
        const int p = bn.parent(v);
        bool placed = false;
        for (std::size_t x : ranking) {
            if (used[x]) continue;
            if (p != -1) {
                const std::size_t px = partial[bn.position(static_cast<std::size_t>(p))];
                if (x == px || dist.at(px, x) > threshold) continue;
            }
            // Look ahead: only commit when the rest of the tree can still be
            // completed with this pick in place.
            partial.push_back(x);
            used[x] = 1;
            if (completable(bn, dist, threshold, partial, used, i + 1)) {
                placed = true;
                break;
            }
            used[x] = 0;
            partial.pop_back();
        }
        if (!placed) return std::nullopt;  // only possible at the root
    }
    return partial;
}

OracleResult oracle_search(
    const std::function<double(const std::vector<std::size_t>&)>& evaluate,
    const topo::BayesNet& bn, const topo::DistanceMatrix& dist, double threshold) {
    const auto feasible =
        topo::enumerate_feasible(bn, dist, threshold, topo::Distinctness::kGlobal);
    if (feasible.empty()) {
        throw InfeasibleError("oracle: no feasible assignment at threshold " +
                              std::to_string(threshold));
    }
    OracleResult best;
    bool have = false;
    for (const auto& assignment : feasible) {  // lexicographic order
        const double score = evaluate(assignment);
        if (!have || score > best.score) {
            best.assignment = assignment;
            best.score = score;
            have = true;
        }
    }
    return best;
}

}  // namespace cgs::baseline
