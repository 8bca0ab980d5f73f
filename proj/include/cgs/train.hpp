#ifndef CGS_TRAIN_HPP
#define CGS_TRAIN_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "cgs/dataset.hpp"
#include "cgs/evaluate.hpp"
#include "cgs/selection.hpp"
#include "cgs/topology.hpp"

namespace cgs::train {

struct TrainConfig {
    std::size_t epochs = 300;
    std::size_t batch_size = 32;
    std::size_t hidden = 32;
    double lr_classifier = 1e-3;
    double lr_selection = 1e-2;
    double tau_start = 10.0;
    double tau_end = 0.1;
    std::size_t anneal_horizon = 0;  // 0: anneal across all epochs (or steps)
    bool anneal_per_step = false;    // default: one temperature per epoch
    std::size_t rounds = 5;          // concrete samples averaged per forward
    std::size_t patience = 30;       // epochs without val improvement
    double divergence_limit = 1e4;   // abort when the loss passes this
    std::uint64_t seed = 1;

    void validate() const;
};

struct TrainResult {
    std::vector<std::size_t> selection;  // distinct argmax readout, topo order
    double probe_acc = 0.0;              // shared ridge probe on `selection`
    double mlp_test_acc = 0.0;           // the trained classifier on hard-selected input
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    bool early_stopped = false;
    std::size_t hard_check_violations = 0;  // per-epoch constraint spot checks
    std::vector<double> train_loss;         // one entry per epoch
    std::vector<double> val_loss;
    std::vector<double> entropy;
    std::vector<double> tau;
    nlohmann::ordered_json model;  // trained selection layer, reloadable
};

// Trains the conditional Gumbel-Softmax selector jointly with a fresh
// classifier. The splits must come from the dataset owner so every method
// sees identical train/val/test rows. Throws TrainingDiverged when the loss
// explodes or turns non-finite.
TrainResult train_conditional(const data::Dataset& ds, const eval::Splits& sp,
                              const topo::BayesNet& bn,
                              const topo::FeasibilityMask& mask,
                              const TrainConfig& cfg);

// Same harness for the unconstrained (vanilla) selector with `slots` rows.
TrainResult train_vanilla(const data::Dataset& ds, const eval::Splits& sp,
                          std::size_t slots, const TrainConfig& cfg);

// Canonical splits for a generated task: stratified 60/15/25 keyed on the
// task's own seed, so all methods and the oracle agree on the test rows.
eval::Splits task_splits(const data::GeneratedTask& task);

}  // namespace cgs::train

#endif  // CGS_TRAIN_HPP
