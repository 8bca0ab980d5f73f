#ifndef CGS_CLASSIFIER_HPP
#define CGS_CLASSIFIER_HPP

#include <cstddef>
#include <vector>

#include "cgs/rng.hpp"
#include "cgs/tensor.hpp"

namespace cgs::train {

// Small dense head on top of the selected features:
// (in_dim) -> hidden, tanh -> n_classes logits. Xavier-uniform init.
class Classifier {
public:
    Classifier(std::size_t in_dim, std::size_t hidden, std::size_t n_classes, Rng& rng);

    // x is B x in_dim; returns B x n_classes logits.
    ad::Tensor forward(ad::Tape& tape, ad::Tensor x);

    std::vector<ad::Param*> params();

private:
    ad::Param w1_, b1_, w2_, b2_;
};

}  // namespace cgs::train

#endif  // CGS_CLASSIFIER_HPP
