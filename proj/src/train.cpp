#include "cgs/train.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>

#include "cgs/adam.hpp"
#include "cgs/classifier.hpp"
#include "cgs/errors.hpp"
#include "cgs/gumbel.hpp"

namespace cgs::train {

void TrainConfig::validate() const {
    if (epochs == 0) throw ParameterError("train: epochs must be at least 1");
    if (batch_size == 0) throw ParameterError("train: batch_size must be at least 1");
    if (rounds == 0) throw ParameterError("train: rounds must be at least 1");
    if (!(lr_classifier > 0.0) || !(lr_selection > 0.0)) {
        throw ParameterError("train: learning rates must be positive");
    }
    if (!(divergence_limit > 0.0)) {
        throw ParameterError("train: divergence_limit must be positive");
    }
    // tau_start/tau_end are checked by TauSchedule.
}

eval::Splits task_splits(const data::GeneratedTask& task) {
    const std::uint64_t seed = task.meta.contains("seed")
                                   ? task.meta.at("seed").get<std::uint64_t>()
                                   : 1;
    return eval::make_splits(task.data.y, task.data.n_classes,
                             Rng::sub_seed(seed, 0x5011));
}

namespace {

// Everything the generic loop needs from a selection layer, so the
// conditional and the vanilla variant share one harness.
struct SelectorOps {
    std::function<ad::Tensor(ad::Tape&, double, std::size_t, Rng&)> sample_matrix;
    std::function<std::vector<std::size_t>(bool)> infer;
    std::function<double()> mean_entropy;
    std::function<bool(Rng&)> spot_check;  // one hard draw, true when constraints hold
    std::function<nlohmann::ordered_json()> to_json;
    std::vector<ad::Param*> sel_params;
    std::size_t slots = 0;
};

ad::Matrix node_matrix(const data::Dataset& ds, std::size_t row) {
    ad::Matrix m(ds.n_nodes, ds.n_channels);
    m.data = ds.x[row];
    return m;
}

// Mean cross-entropy of one forward pass over `rows` (soft selection, fresh
// noise). Returns the loss tensor; labels are gathered on the fly.
ad::Tensor batch_loss(ad::Tape& tape, const data::Dataset& ds,
                      const std::vector<std::size_t>& rows, SelectorOps& ops,
                      Classifier& clf, double tau, std::size_t rounds, Rng& rng) {
    std::vector<ad::Tensor> feats;
    std::vector<int> labels;
    feats.reserve(rows.size());
    for (std::size_t row : rows) {
        ad::Tensor sel = ops.sample_matrix(tape, tau, rounds, rng);
        ad::Tensor x = tape.constant(node_matrix(ds, row));
        feats.push_back(tape.reshape(tape.matmul(sel, x), 1,
                                     ops.slots * ds.n_channels));
        labels.push_back(ds.y[row]);
    }
    ad::Tensor logits = clf.forward(tape, tape.stack_rows(feats));
    return tape.cross_entropy_with_logits(logits, labels);
}

double hard_accuracy(const data::Dataset& ds, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& selection, Classifier& clf) {
    ad::Tape tape;
    std::vector<ad::Tensor> feats;
    feats.reserve(rows.size());
    for (std::size_t row : rows) {
        ad::Matrix sel(selection.size(), ds.n_nodes);
        for (std::size_t i = 0; i < selection.size(); ++i) sel.at(i, selection[i]) = 1.0;
        ad::Tensor x = tape.constant(node_matrix(ds, row));
        feats.push_back(tape.reshape(tape.matmul(tape.constant(std::move(sel)), x), 1,
                                     selection.size() * ds.n_channels));
    }
    ad::Tensor logits = clf.forward(tape, tape.stack_rows(feats));
    const ad::Matrix& lv = logits.value();
    std::size_t correct = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < lv.cols; ++c) {
            if (lv.at(r, c) > lv.at(r, best)) best = c;
        }
        if (static_cast<int>(best) == ds.y[rows[r]]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(rows.size());
}

TrainResult run_training(const data::Dataset& ds, const eval::Splits& sp,
                         SelectorOps ops, const TrainConfig& cfg) {
    cfg.validate();
    if (ds.size() == 0) throw DimensionError("train: empty dataset");
    if (sp.train.empty() || sp.val.empty() || sp.test.empty()) {
        throw DimensionError("train: all three splits must be non-empty");
    }

    Rng rng(Rng::sub_seed(cfg.seed, 0x7291));
    Classifier clf(ops.slots * ds.n_channels, cfg.hidden, ds.n_classes, rng);

    ad::Adam opt;
    opt.add_group(ops.sel_params, cfg.lr_selection);
    opt.add_group(clf.params(), cfg.lr_classifier);

    const std::size_t batches_per_epoch =
        (sp.train.size() + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t horizon_steps =
        cfg.anneal_horizon ? cfg.anneal_horizon
                           : (cfg.anneal_per_step ? cfg.epochs * batches_per_epoch
                                                  : cfg.epochs);
    const sampling::TauSchedule schedule(cfg.tau_start, cfg.tau_end, horizon_steps);

    std::vector<ad::Param*> all_params = ops.sel_params;
    for (ad::Param* p : clf.params()) all_params.push_back(p);

    TrainResult res;
    double best_val = 0.0;
    bool have_best = false;
    std::size_t stale = 0;
    std::vector<ad::Matrix> best_values;

    std::vector<std::size_t> train_rows = sp.train;
    ad::Tape tape;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Deterministic reshuffle each epoch.
        for (std::size_t i = train_rows.size(); i > 1; --i) {
            std::swap(train_rows[i - 1], train_rows[static_cast<std::size_t>(rng.below(i))]);
        }
        double epoch_tau = schedule.at(epoch);
        double loss_sum = 0.0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            const double tau = cfg.anneal_per_step ? schedule.at(step) : epoch_tau;
            const std::size_t lo = b * cfg.batch_size;
            const std::size_t hi = std::min(lo + cfg.batch_size, train_rows.size());
            std::vector<std::size_t> rows(train_rows.begin() + lo, train_rows.begin() + hi);
            tape.clear();
            ad::Tensor loss = batch_loss(tape, ds, rows, ops, clf, tau, cfg.rounds, rng);
            const double lv = loss.value().data[0];
            if (!std::isfinite(lv) || lv > cfg.divergence_limit) {
                throw TrainingDiverged("epoch " + std::to_string(epoch) + ": loss " +
                                       std::to_string(lv) + " exceeded the divergence limit");
            }
            loss_sum += lv * static_cast<double>(rows.size());
            tape.backward(loss);
            opt.step();
            ++step;
        }
        if (cfg.anneal_per_step) epoch_tau = schedule.at(step > 0 ? step - 1 : 0);

        tape.clear();
        ad::Tensor vloss = batch_loss(tape, ds, sp.val, ops, clf, epoch_tau,
                                      cfg.rounds, rng);
        const double val = vloss.value().data[0];
        if (!std::isfinite(val)) {
            throw TrainingDiverged("epoch " + std::to_string(epoch) +
                                   ": validation loss is not finite");
        }
        tape.clear();

        res.train_loss.push_back(loss_sum / static_cast<double>(train_rows.size()));
        res.val_loss.push_back(val);
        res.entropy.push_back(ops.mean_entropy());
        res.tau.push_back(epoch_tau);
        if (!ops.spot_check(rng)) ++res.hard_check_violations;

        res.epochs_run = epoch + 1;
        if (!have_best || val < best_val) {
            have_best = true;
            best_val = val;
            res.best_epoch = epoch;
            stale = 0;
            best_values.clear();
            for (ad::Param* p : all_params) best_values.push_back(p->value);
        } else if (++stale > cfg.patience) {
            res.early_stopped = true;
            break;
        }
    }

    for (std::size_t i = 0; i < all_params.size(); ++i) {
        all_params[i]->value = best_values[i];
    }

    res.selection = ops.infer(true);
    res.probe_acc = eval::probe_accuracy(ds, res.selection, sp);
    res.mlp_test_acc = hard_accuracy(ds, sp.test, res.selection, clf);
    res.model = ops.to_json();
    return res;
}

}  // namespace

TrainResult train_conditional(const data::Dataset& ds, const eval::Splits& sp,
                              const topo::BayesNet& bn,
                              const topo::FeasibilityMask& mask,
                              const TrainConfig& cfg) {
    if (mask.n_nodes != ds.n_nodes) {
        throw DimensionError("train: mask covers " + std::to_string(mask.n_nodes) +
                             " nodes, dataset has " + std::to_string(ds.n_nodes));
    }
    auto layer = std::make_shared<sel::ConditionalSelection>(bn, mask);
    SelectorOps ops;
    ops.slots = layer->slots();
    ops.sel_params = layer->params();
    ops.sample_matrix = [layer](ad::Tape& t, double tau, std::size_t r, Rng& g) {
        return layer->sample_matrix(t, tau, r, g);
    };
    ops.infer = [layer](bool distinct) { return layer->infer(distinct); };
    ops.mean_entropy = [layer] { return layer->mean_entropy(); };
    ops.spot_check = [layer](Rng& g) {
        // A hard ancestral draw must always respect the mask; anything else
        // means the sampler and the constraints disagree.
        const auto picks = layer->hard_sample(g);
        const auto& bn2 = layer->bayesnet();
        const auto& mask2 = layer->mask();
        for (std::size_t i = 0; i < picks.size(); ++i) {
            const std::size_t v = bn2.order()[i];
            if (bn2.parent(v) == -1) {
                if (!mask2.root_allowed[picks[i]]) return false;
            } else {
                const std::size_t pv = static_cast<std::size_t>(bn2.parent(v));
                const std::size_t parent_pick = picks[bn2.position(pv)];
                if (!mask2.cond(v, parent_pick, picks[i])) return false;
            }
        }
        return true;
    };
    ops.to_json = [layer] { return layer->to_json(); };
    return run_training(ds, sp, std::move(ops), cfg);
}

TrainResult train_vanilla(const data::Dataset& ds, const eval::Splits& sp,
                          std::size_t slots, const TrainConfig& cfg) {
    auto layer = std::make_shared<sel::IndependentSelection>(slots, ds.n_nodes);
    SelectorOps ops;
    ops.slots = slots;
    ops.sel_params = layer->params();
    ops.sample_matrix = [layer](ad::Tape& t, double tau, std::size_t r, Rng& g) {
        return layer->sample_matrix(t, tau, r, g);
    };
    ops.infer = [layer](bool distinct) { return layer->infer(distinct); };
    ops.mean_entropy = [layer] { return layer->mean_entropy(); };
    ops.spot_check = [layer](Rng& g) {
        // No constraints to violate; still exercise the hard path.
        return layer->hard_sample(g).size() == layer->slots();
    };
    ops.to_json = [layer] { return layer->to_json(); };
    return run_training(ds, sp, std::move(ops), cfg);
}

}  // namespace cgs::train
