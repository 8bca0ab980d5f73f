#include "cgs/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <optional>
#include <thread>

#include "cgs/baselines.hpp"
#include "cgs/errors.hpp"
#include "cgs/evaluate.hpp"

namespace cgs::sweep {

namespace {

void mean_std(SweepCell& cell) {
    if (cell.per_seed.empty()) return;
    const double n = static_cast<double>(cell.per_seed.size());
    double mean = 0.0;
    for (double v : cell.per_seed) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : cell.per_seed) var += (v - mean) * (v - mean);
    cell.mean_acc = mean;
    cell.std_acc = std::sqrt(var / n);
}

void validate(const data::GeneratedTask& task, const SweepConfig& cfg) {
    if (cfg.thresholds.empty()) throw ParameterError("sweep: no thresholds given");
    if (cfg.methods.empty()) throw ParameterError("sweep: no methods given");
    for (const auto& m : cfg.methods) {
        if (m != "conditional" && m != "vanilla" && m != "greedy-mi" && m != "oracle") {
            throw ParameterError("sweep: unknown method '" + m +
                                 "' (expected conditional, vanilla, greedy-mi or oracle)");
        }
    }
    const bool needs_seeds =
        std::any_of(cfg.methods.begin(), cfg.methods.end(), [](const std::string& m) {
            return m == "conditional" || m == "vanilla";
        });
    if (needs_seeds && cfg.seeds.empty()) {
        throw ParameterError("sweep: trained methods need at least one seed");
    }
    if (cfg.comm != "line" && cfg.comm != "star") {
        throw ParameterError("sweep: comm must be 'line' or 'star', got '" + cfg.comm + "'");
    }
    if (cfg.slots == 0 || cfg.slots > task.data.n_nodes) {
        throw ParameterError("sweep: slots must lie in [1, " +
                             std::to_string(task.data.n_nodes) + "]");
    }
    if (cfg.jobs == 0) throw ParameterError("sweep: jobs must be at least 1");
}

}  // namespace

const SweepCell& SweepResult::at(double threshold, const std::string& method) const {
    for (const SweepCell& c : cells) {
        if (c.method == method && c.threshold == threshold) return c;
    }
    throw ParameterError("sweep result has no cell for method '" + method +
                         "' at threshold " + std::to_string(threshold));
}

nlohmann::ordered_json SweepResult::to_json() const {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const SweepCell& c : cells) {
        nlohmann::ordered_json r;
        r["threshold"] = c.threshold;
        r["method"] = c.method;
        r["feasible"] = c.feasible;
        r["seeds"] = c.per_seed.size();
        r["per_seed"] = c.per_seed;
        r["mean_acc"] = c.mean_acc;
        r["std_acc"] = c.std_acc;
        r["first_selection"] = c.first_selection;
        rows.push_back(std::move(r));
    }
    nlohmann::ordered_json j;
    j["cells"] = std::move(rows);
    return j;
}

SweepResult run_sweep(const data::GeneratedTask& task, const SweepConfig& cfg) {
    validate(task, cfg);
    const data::Dataset& ds = task.data;
    const topo::DistanceMatrix dist = topo::DistanceMatrix::from_layout(task.layout);
    const topo::CommGraph comm = cfg.comm == "line" ? topo::CommGraph::line(cfg.slots)
                                                    : topo::CommGraph::star(cfg.slots);
    const topo::BayesNet bn(comm);
    const eval::Splits sp = train::task_splits(task);
    auto probe = [&](const std::vector<std::size_t>& sel) {
        return eval::probe_accuracy(ds, sel, sp);
    };

    // Per-threshold masks; absence means the threshold is infeasible.
    std::vector<std::optional<topo::FeasibilityMask>> masks;
    for (double t : cfg.thresholds) {
        try {
            masks.emplace_back(topo::build_masks(bn, dist, t));
        } catch (const InfeasibleError&) {
            masks.emplace_back(std::nullopt);
        }
    }

    const bool wants_greedy =
        std::find(cfg.methods.begin(), cfg.methods.end(), "greedy-mi") != cfg.methods.end();
    std::optional<baseline::MiResult> mi;
    if (wants_greedy) mi = baseline::mi_ranking(ds);

    SweepResult res;
    res.cells.reserve(cfg.thresholds.size() * cfg.methods.size());

    struct TrainUnit {
        std::size_t cell;   // index into res.cells
        std::size_t slot;   // index into per_seed
        std::uint64_t seed;
        bool conditional;
        const topo::FeasibilityMask* mask;  // null for vanilla
    };
    std::vector<TrainUnit> units;

    for (std::size_t ti = 0; ti < cfg.thresholds.size(); ++ti) {
        const double t = cfg.thresholds[ti];
        for (const std::string& method : cfg.methods) {
            SweepCell cell;
            cell.threshold = t;
            cell.method = method;
            const bool needs_mask = method != "vanilla";
            if (needs_mask && !masks[ti].has_value()) {
                cell.feasible = false;
                res.cells.push_back(std::move(cell));
                continue;
            }
            if (method == "conditional" || method == "vanilla") {
                cell.per_seed.assign(cfg.seeds.size(), 0.0);
                const std::size_t ci = res.cells.size();
                for (std::size_t k = 0; k < cfg.seeds.size(); ++k) {
                    units.push_back({ci, k, cfg.seeds[k], method == "conditional",
                                     masks[ti] ? &*masks[ti] : nullptr});
                }
            } else if (method == "greedy-mi") {
                const auto pick =
                    baseline::greedy_constrained_select(mi->ranking, bn, dist, t);
                if (!pick) {
                    cell.feasible = false;
                } else {
                    cell.first_selection = *pick;
                    cell.per_seed.push_back(probe(*pick));
                    mean_std(cell);
                }
            } else {  // oracle
                try {
                    const auto best = baseline::oracle_search(probe, bn, dist, t);
                    cell.first_selection = best.assignment;
                    cell.per_seed.push_back(best.score);
                    mean_std(cell);
                } catch (const InfeasibleError&) {
                    cell.feasible = false;
                }
            }
            res.cells.push_back(std::move(cell));
        }
    }

    // Training runs are independent given their seed, so any scheduling of
    // the units produces the same numbers; results land in fixed slots.
    std::vector<std::vector<std::size_t>> unit_selection(units.size());
    std::vector<double> unit_acc(units.size(), 0.0);
    std::vector<std::exception_ptr> unit_error(units.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= units.size()) return;
            try {
                const TrainUnit& u = units[i];
                train::TrainConfig tc = cfg.train;
                tc.seed = u.seed;
                train::TrainResult r =
                    u.conditional
                        ? train::train_conditional(ds, sp, bn, *u.mask, tc)
                        : train::train_vanilla(ds, sp, cfg.slots, tc);
                unit_acc[i] = r.probe_acc;
                unit_selection[i] = r.selection;
            } catch (...) {
                unit_error[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_workers = std::min<std::size_t>(cfg.jobs, units.size());
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (unit_error[i]) std::rethrow_exception(unit_error[i]);
    }
    for (std::size_t i = 0; i < units.size(); ++i) {
        const TrainUnit& u = units[i];
        res.cells[u.cell].per_seed[u.slot] = unit_acc[i];
        if (u.slot == 0) res.cells[u.cell].first_selection = unit_selection[i];
    }
    for (SweepCell& cell : res.cells) {
        if (cell.method == "conditional" || cell.method == "vanilla") {
            if (cell.feasible) mean_std(cell);
        }
    }
    return res;
}

}  // namespace cgs::sweep
