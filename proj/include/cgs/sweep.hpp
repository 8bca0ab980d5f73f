#ifndef CGS_SWEEP_HPP
#define CGS_SWEEP_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cgs/dataset.hpp"
#include "cgs/train.hpp"

namespace cgs::sweep {

// Grid comparison of selection methods across distance thresholds. Methods:
//   conditional - constrained Gumbel-Softmax training, one run per seed
//   vanilla     - unconstrained Gumbel-Softmax training, one run per seed
//   greedy-mi   - MI-ranked greedy selection under the constraint
//   oracle      - exhaustive search with the shared probe
struct SweepConfig {
    std::vector<double> thresholds;
    std::vector<std::string> methods;
    std::vector<std::uint64_t> seeds;
    std::string comm = "line";  // "line" | "star"
    std::size_t slots = 3;
    train::TrainConfig train;
    std::size_t jobs = 1;
};

struct SweepCell {
    double threshold = 0.0;
    std::string method;
    bool feasible = true;       // false: threshold admits no assignment
    std::vector<double> per_seed;
    double mean_acc = 0.0;
    double std_acc = 0.0;       // population standard deviation
    std::vector<std::size_t> first_selection;  // readout of the first seed/run
};

struct SweepResult {
    std::vector<SweepCell> cells;  // threshold-major, methods in config order

    const SweepCell& at(double threshold, const std::string& method) const;
    nlohmann::ordered_json to_json() const;
};

// Runs every cell; training cells are distributed over `jobs` worker threads
// with results merged in a fixed order, so the output does not depend on
// scheduling. Infeasible thresholds yield marked rows instead of errors.
SweepResult run_sweep(const data::GeneratedTask& task, const SweepConfig& cfg);

}  // namespace cgs::sweep

#endif  // CGS_SWEEP_HPP
