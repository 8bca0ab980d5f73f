#ifndef CGS_EVALUATE_HPP
#define CGS_EVALUATE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cgs/dataset.hpp"

namespace cgs::eval {

struct Splits {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

// Deterministic stratified split, 60/15/25 per class (test and val rounded to
// the nearest count, remainder to train). Indices within each part ascending.
Splits make_splits(const std::vector<int>& y, std::size_t n_classes,
                   std::uint64_t seed);

// Linear probe shared by every method so selections are compared on equal
// footing: one-vs-all ridge regression on the concatenated channels of
// `nodes` (repeats allowed), fit on the train split, scored on the test
// split. Fully deterministic.
double probe_accuracy(const data::Dataset& ds, const std::vector<std::size_t>& nodes,
                      const Splits& sp, double ridge = 1e-3);

}  // namespace cgs::eval

#endif  // CGS_EVALUATE_HPP
