#include "cgs/selection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cgs/errors.hpp"
#include "cgs/gumbel.hpp"

namespace cgs::sel {

namespace {

void check_sizes(std::size_t m, std::size_t n) {
    if (m == 0) throw ParameterError("selection needs at least one slot");
    if (n < 2) throw ParameterError("selection needs at least two candidate nodes");
    if (m > n) {
        throw ParameterError("cannot select " + std::to_string(m) +
                             " distinct nodes out of " + std::to_string(n));
    }
}

// argmax with optional exclusion set; lowest index wins ties. Returns n when
// every candidate is excluded.
std::size_t masked_argmax(const std::vector<double>& vals,
                          const std::vector<char>& excluded) {
    std::size_t best = vals.size();
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (excluded[i] || vals[i] <= sampling::kMaskThreshold) continue;
        if (best == vals.size() || vals[i] > vals[best]) best = i;
    }
    return best;
}

double softmax_entropy(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double v : logits) denom += std::exp(v - mx);
    double h = 0.0;
    for (double v : logits) {
        const double p = std::exp(v - mx) / denom;
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

std::vector<double> json_to_doubles(const nlohmann::json& j, const char* what) {
    if (!j.is_array()) throw IngestError(std::string("model file: ") + what + " must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) {
            throw IngestError(std::string("model file: non-numeric entry in ") + what);
        }
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

IndependentSelection::IndependentSelection(std::size_t m, std::size_t n)
    : m_(m), n_(n), logits_("select_logits", ad::Matrix(m, n)) {
    check_sizes(m, n);
}

ad::Tensor IndependentSelection::sample_matrix(ad::Tape& tape, double tau,
                                               std::size_t rounds, Rng& rng) {
    ad::Tensor logits = tape.param(logits_);
    return sampling::concrete_sample_averaged(tape, logits, tau, rounds, rng);
}

std::vector<std::size_t> IndependentSelection::infer(bool distinct) const {
    std::vector<std::size_t> picks;
    std::vector<char> used(n_, 0);
    for (std::size_t m = 0; m < m_; ++m) {
        std::vector<double> row(logits_.value.data.begin() + m * n_,
                                logits_.value.data.begin() + (m + 1) * n_);
        std::vector<char> excl = distinct ? used : std::vector<char>(n_, 0);
        const std::size_t pick = masked_argmax(row, excl);
        if (pick == n_) {
            throw InfeasibleError("slot " + std::to_string(m) +
                                  " has no node left to select");
        }
        picks.push_back(pick);
        used[pick] = 1;
    }
    return picks;
}

std::vector<std::size_t> IndependentSelection::hard_sample(Rng& rng) const {
    std::vector<std::size_t> picks;
    for (std::size_t m = 0; m < m_; ++m) {
        std::vector<double> row(logits_.value.data.begin() + m * n_,
                                logits_.value.data.begin() + (m + 1) * n_);
        picks.push_back(sampling::gumbel_max(row, rng));
    }
    return picks;
}

double IndependentSelection::mean_entropy() const {
    double total = 0.0;
    for (std::size_t m = 0; m < m_; ++m) {
        std::vector<double> row(logits_.value.data.begin() + m * n_,
                                logits_.value.data.begin() + (m + 1) * n_);
        total += softmax_entropy(row);
    }
    return total / static_cast<double>(m_);
}

std::vector<ad::Param*> IndependentSelection::params() { return {&logits_}; }

nlohmann::ordered_json IndependentSelection::to_json() const {
    nlohmann::ordered_json j;
    j["type"] = "independent";
    j["slots"] = m_;
    j["nodes"] = n_;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t m = 0; m < m_; ++m) {
        rows.push_back(std::vector<double>(logits_.value.data.begin() + m * n_,
                                           logits_.value.data.begin() + (m + 1) * n_));
    }
    j["logits"] = std::move(rows);
    return j;
}

IndependentSelection IndependentSelection::from_json(const nlohmann::json& j) {
    if (!j.contains("slots") || !j.contains("nodes") || !j.contains("logits")) {
        throw IngestError("model file: independent selection needs slots, nodes, logits");
    }
    const std::size_t m = j.at("slots").get<std::size_t>();
    const std::size_t n = j.at("nodes").get<std::size_t>();
    IndependentSelection sel(m, n);
    const auto& rows = j.at("logits");
    if (!rows.is_array() || rows.size() != m) {
        throw IngestError("model file: logits must have one row per slot");
    }
    for (std::size_t r = 0; r < m; ++r) {
        const auto row = json_to_doubles(rows[r], "logits row");
        if (row.size() != n) {
            throw IngestError("model file: logits row " + std::to_string(r) +
                              " has " + std::to_string(row.size()) + " entries, expected " +
                              std::to_string(n));
        }
        std::copy(row.begin(), row.end(), sel.logits_.value.data.begin() + r * n);
    }
    return sel;
}

ConditionalSelection::ConditionalSelection(topo::BayesNet bn, topo::FeasibilityMask mask)
    : bn_(std::move(bn)), mask_(std::move(mask)) {
    const std::size_t m = bn_.vertex_count();
    const std::size_t n = mask_.n_nodes;
    check_sizes(m, n);
    if (mask_.root_allowed.size() != n || mask_.cond_allowed.size() != m) {
        throw DimensionError("feasibility mask does not match the topology");
    }
    root_logits_ = ad::Param("root_logits", ad::Matrix(1, n));
    root_offset_ = ad::Matrix(1, n);
    for (std::size_t x = 0; x < n; ++x) {
        root_offset_.at(0, x) = mask_.root_allowed[x] ? 0.0 : sampling::kMaskedLogit;
    }
    cond_logits_.resize(m);
    cond_offset_.resize(m);
    for (std::size_t v = 0; v < m; ++v) {
        if (v == bn_.root()) continue;
        if (mask_.cond_allowed[v].size() != n * n) {
            throw DimensionError("feasibility mask for vertex " + std::to_string(v) +
                                 " has the wrong size");
        }
        cond_logits_[v] = ad::Param("cond_logits_" + std::to_string(v), ad::Matrix(n, n));
        cond_offset_[v] = ad::Matrix(n, n);
        for (std::size_t i = 0; i < n * n; ++i) {
            cond_offset_[v].data[i] =
                mask_.cond_allowed[v][i] ? 0.0 : sampling::kMaskedLogit;
        }
    }
}

ad::Tensor ConditionalSelection::sample_matrix(ad::Tape& tape, double tau,
                                               std::size_t rounds, Rng& rng) {
    if (rounds == 0) {
        throw ParameterError("sample_matrix: rounds must be at least 1");
    }
    const std::size_t m = bn_.vertex_count();
    // Bind each parameter once per call; the masked logits are shared by all
    // rounds, only the Gumbel noise is redrawn.
    ad::Tensor root = tape.add(tape.param(root_logits_), tape.constant(root_offset_));
    std::vector<ad::Tensor> cond(m);
    for (std::size_t v = 0; v < m; ++v) {
        if (v == bn_.root()) continue;
        cond[v] = tape.add(tape.param(cond_logits_[v]), tape.constant(cond_offset_[v]));
    }

    std::vector<ad::Tensor> acc(m);  // indexed by topological position
    for (std::size_t r = 0; r < rounds; ++r) {
        std::vector<ad::Tensor> z(m);  // indexed by vertex id
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t v = bn_.order()[i];
            if (bn_.parent(v) == -1) {
                z[v] = sampling::concrete_sample(tape, root, tau, rng);
            } else {
                ad::Tensor Z = sampling::concrete_sample(tape, cond[v], tau, rng);
                z[v] = tape.matmul(z[static_cast<std::size_t>(bn_.parent(v))], Z);
            }
            acc[i] = (r == 0) ? z[v] : tape.add(acc[i], z[v]);
        }
    }
    std::vector<ad::Tensor> rows(m);
    for (std::size_t i = 0; i < m; ++i) {
        rows[i] = tape.scale(acc[i], 1.0 / static_cast<double>(rounds));
    }
    return tape.stack_rows(rows);
}

std::vector<double> ConditionalSelection::masked_root() const {
    const std::size_t n = mask_.n_nodes;
    std::vector<double> row(n);
    for (std::size_t x = 0; x < n; ++x) {
        row[x] = root_logits_.value.at(0, x) + root_offset_.at(0, x);
    }
    return row;
}

std::vector<double> ConditionalSelection::masked_row(std::size_t v, std::size_t k) const {
    const std::size_t n = mask_.n_nodes;
    std::vector<double> row(n);
    for (std::size_t x = 0; x < n; ++x) {
        row[x] = cond_logits_[v].value.at(k, x) + cond_offset_[v].at(k, x);
    }
    return row;
}

std::vector<std::size_t> ConditionalSelection::infer(bool distinct) const {
    const std::size_t m = bn_.vertex_count();
    const std::size_t n = mask_.n_nodes;
    std::vector<std::size_t> picks(m);             // by topological position
    std::vector<std::size_t> by_vertex(m);
    std::vector<char> used(n, 0);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t v = bn_.order()[i];
        std::vector<double> row =
            (bn_.parent(v) == -1)
                ? masked_root()
                : masked_row(v, by_vertex[static_cast<std::size_t>(bn_.parent(v))]);
        std::vector<char> excl = distinct ? used : std::vector<char>(n, 0);
        const std::size_t pick = masked_argmax(row, excl);
        if (pick == n) {
            throw InfeasibleError("vertex " + std::to_string(v) +
                                  " has no feasible node left to select");
        }
        picks[i] = pick;
        by_vertex[v] = pick;
        used[pick] = 1;
    }
    return picks;
}

std::vector<std::size_t> ConditionalSelection::hard_sample(Rng& rng) const {
    const std::size_t m = bn_.vertex_count();
    std::vector<std::size_t> picks(m);
    std::vector<std::size_t> by_vertex(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t v = bn_.order()[i];
        std::vector<double> row =
            (bn_.parent(v) == -1)
                ? masked_root()
                : masked_row(v, by_vertex[static_cast<std::size_t>(bn_.parent(v))]);
        const std::size_t pick = sampling::gumbel_max(row, rng);
        picks[i] = pick;
        by_vertex[v] = pick;
    }
    return picks;
}

double ConditionalSelection::mean_entropy() const {
    const std::size_t n = mask_.n_nodes;
    double total = 0.0;
    std::size_t count = 0;
    {
        std::vector<double> row = masked_root();
        total += softmax_entropy(row);
        ++count;
    }
    for (std::size_t v = 0; v < bn_.vertex_count(); ++v) {
        if (bn_.parent(v) == -1) continue;
        for (std::size_t k = 0; k < n; ++k) {
            bool any = false;
            for (std::size_t x = 0; x < n && !any; ++x) any = mask_.cond(v, k, x);
            if (!any) continue;  // unreachable row, softmax would be vacuous
            total += softmax_entropy(masked_row(v, k));
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

std::vector<ad::Param*> ConditionalSelection::params() {
    std::vector<ad::Param*> out = {&root_logits_};
    for (std::size_t v = 0; v < bn_.vertex_count(); ++v) {
        if (v == bn_.root()) continue;
        out.push_back(&cond_logits_[v]);
    }
    return out;
}

nlohmann::ordered_json ConditionalSelection::to_json() const {
    const std::size_t m = bn_.vertex_count();
    const std::size_t n = mask_.n_nodes;
    nlohmann::ordered_json j;
    j["type"] = "conditional";
    j["slots"] = m;
    j["nodes"] = n;
    std::vector<int> next(m);
    for (std::size_t v = 0; v < m; ++v) next[v] = bn_.parent(v);
    j["next_hops"] = next;
    j["root_logits"] = root_logits_.value.data;
    nlohmann::ordered_json conds = nlohmann::ordered_json::array();
    nlohmann::ordered_json masks = nlohmann::ordered_json::array();
    for (std::size_t v = 0; v < m; ++v) {
        if (v == bn_.root()) {
            conds.push_back(nlohmann::ordered_json::array());
            masks.push_back(nlohmann::ordered_json::array());
        } else {
            conds.push_back(cond_logits_[v].value.data);
            std::vector<int> bits(mask_.cond_allowed[v].begin(),
                                  mask_.cond_allowed[v].end());
            masks.push_back(bits);
        }
    }
    j["cond_logits"] = std::move(conds);
    std::vector<int> root_bits(mask_.root_allowed.begin(), mask_.root_allowed.end());
    j["root_allowed"] = root_bits;
    j["cond_allowed"] = std::move(masks);
    return j;
}

ConditionalSelection ConditionalSelection::from_json(const nlohmann::json& j) {
    for (const char* key :
         {"slots", "nodes", "next_hops", "root_logits", "cond_logits",
          "root_allowed", "cond_allowed"}) {
        if (!j.contains(key)) {
            throw IngestError(std::string("model file: conditional selection misses '") +
                              key + "'");
        }
    }
    const std::size_t m = j.at("slots").get<std::size_t>();
    const std::size_t n = j.at("nodes").get<std::size_t>();
    std::vector<int> next = j.at("next_hops").get<std::vector<int>>();
    if (next.size() != m) {
        throw IngestError("model file: next_hops length does not match slots");
    }
    topo::BayesNet bn(topo::CommGraph::from_next_hops(next));

    topo::FeasibilityMask mask;
    mask.n_nodes = n;
    const auto root_bits = j.at("root_allowed").get<std::vector<int>>();
    if (root_bits.size() != n) {
        throw IngestError("model file: root_allowed length does not match nodes");
    }
    mask.root_allowed.assign(root_bits.begin(), root_bits.end());
    mask.cond_allowed.assign(m, {});
    const auto& cond_bits = j.at("cond_allowed");
    if (!cond_bits.is_array() || cond_bits.size() != m) {
        throw IngestError("model file: cond_allowed must have one entry per vertex");
    }
    for (std::size_t v = 0; v < m; ++v) {
        if (v == bn.root()) continue;
        const auto bits = cond_bits[v].get<std::vector<int>>();
        if (bits.size() != n * n) {
            throw IngestError("model file: cond_allowed for vertex " + std::to_string(v) +
                              " has the wrong size");
        }
        mask.cond_allowed[v].assign(bits.begin(), bits.end());
    }

    ConditionalSelection sel(std::move(bn), std::move(mask));
    const auto root_vals = json_to_doubles(j.at("root_logits"), "root_logits");
    if (root_vals.size() != n) {
        throw IngestError("model file: root_logits length does not match nodes");
    }
    sel.root_logits_.value.data = root_vals;
    const auto& conds = j.at("cond_logits");
    if (!conds.is_array() || conds.size() != m) {
        throw IngestError("model file: cond_logits must have one entry per vertex");
    }
    for (std::size_t v = 0; v < m; ++v) {
        if (v == sel.bn_.root()) continue;
        const auto vals = json_to_doubles(conds[v], "cond_logits");
        if (vals.size() != n * n) {
            throw IngestError("model file: cond_logits for vertex " + std::to_string(v) +
                              " has the wrong size");
        }
        sel.cond_logits_[v].value.data = vals;
    }
    return sel;
}

}  // namespace cgs::sel
