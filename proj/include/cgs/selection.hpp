#ifndef CGS_SELECTION_HPP
#define CGS_SELECTION_HPP

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "cgs/rng.hpp"
#include "cgs/tensor.hpp"
#include "cgs/topology.hpp"

namespace cgs::sel {

// Vanilla Gumbel-Softmax selection: M slots, each with its own logit row over
// the N candidate nodes, sampled independently.
class IndependentSelection {
public:
    IndependentSelection(std::size_t m, std::size_t n);

    std::size_t slots() const { return m_; }
    std::size_t nodes() const { return n_; }

    // One soft MxN selection matrix (fresh noise), averaged over `rounds`
    // independent concrete samples per slot.
    ad::Tensor sample_matrix(ad::Tape& tape, double tau, std::size_t rounds, Rng& rng);

    // Deterministic readout: per-slot argmax of the learned logits, lowest
    // index on ties. With `distinct`, earlier slots' picks are excluded.
    std::vector<std::size_t> infer(bool distinct = true) const;

    // Stochastic hard readout, one Gumbel-max draw per slot.
    std::vector<std::size_t> hard_sample(Rng& rng) const;

    // Mean entropy (nats) of the per-slot softmax distributions.
    double mean_entropy() const;

    std::vector<ad::Param*> params();
    const ad::Matrix& logits() const { return logits_.value; }
    ad::Matrix& logits() { return logits_.value; }

    nlohmann::ordered_json to_json() const;
    static IndependentSelection from_json(const nlohmann::json& j);

private:
    std::size_t m_, n_;
    ad::Param logits_;
};

// Conditional Gumbel-Softmax selection over a Bayesian network obtained by
// transposing the communication tree. The root vertex owns a logit row; every
// other vertex owns an NxN matrix of conditional logits, row k giving the
// distribution of its pick when the parent picked node k. Infeasible entries
// are pushed to -1e9 by a constant additive offset, which zeroes both their
// probability and their gradient, so the learnable parameters underneath stay
// untouched.
class ConditionalSelection {
public:
    ConditionalSelection(topo::BayesNet bn, topo::FeasibilityMask mask);

    std::size_t slots() const { return bn_.vertex_count(); }
    std::size_t nodes() const { return mask_.n_nodes; }
    const topo::BayesNet& bayesnet() const { return bn_; }
    const topo::FeasibilityMask& mask() const { return mask_; }

    // One soft MxN selection matrix: each of the `rounds` passes samples the
    // vertices ancestrally (z_v = z_parent^T Z_v) with fresh noise, and the
    // per-vertex results are averaged across passes. Row i corresponds to the
    // i-th vertex in topological order.
    ad::Tensor sample_matrix(ad::Tape& tape, double tau, std::size_t rounds, Rng& rng);

    // Deterministic ancestral argmax readout in topological order, lowest
    // index on ties; `distinct` additionally excludes nodes taken by earlier
    // vertices and throws InfeasibleError when a vertex runs out of options.
    std::vector<std::size_t> infer(bool distinct = true) const;

    // Stochastic hard readout: ancestral Gumbel-max through the masked
    // logits. Always satisfies the edge constraints by construction.
    std::vector<std::size_t> hard_sample(Rng& rng) const;

    // Mean entropy (nats) over the root distribution and every conditional
    // row that has at least one feasible entry.
    double mean_entropy() const;

    std::vector<ad::Param*> params();

    nlohmann::ordered_json to_json() const;
    static ConditionalSelection from_json(const nlohmann::json& j);

private:
    std::vector<double> masked_root() const;
    std::vector<double> masked_row(std::size_t v, std::size_t k) const;

    topo::BayesNet bn_;
    topo::FeasibilityMask mask_;
    ad::Param root_logits_;                 // 1xN
    std::vector<ad::Param> cond_logits_;    // per vertex, NxN; unused for root
    ad::Matrix root_offset_;                // 0 or -1e9 per entry
    std::vector<ad::Matrix> cond_offset_;
};

}  // namespace cgs::sel

#endif  // CGS_SELECTION_HPP
