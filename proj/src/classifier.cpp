#include "cgs/classifier.hpp"

#include <cmath>

#include "cgs/errors.hpp"

namespace cgs::train {

namespace {

ad::Matrix xavier(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    ad::Matrix m(fan_in, fan_out);
    for (double& v : m.data) v = rng.uniform(-a, a);
    return m;
}

}  // namespace

Classifier::Classifier(std::size_t in_dim, std::size_t hidden, std::size_t n_classes,
                       Rng& rng) {
    if (in_dim == 0 || hidden == 0 || n_classes < 2) {
        throw ParameterError("classifier needs in_dim > 0, hidden > 0, classes >= 2");
    }
    w1_ = ad::Param("clf_w1", xavier(in_dim, hidden, rng));
    b1_ = ad::Param("clf_b1", ad::Matrix(1, hidden));
    w2_ = ad::Param("clf_w2", xavier(hidden, n_classes, rng));
    b2_ = ad::Param("clf_b2", ad::Matrix(1, n_classes));
}

ad::Tensor Classifier::forward(ad::Tape& tape, ad::Tensor x) {
    ad::Tensor h = tape.tanh(tape.add_rowvec(tape.matmul(x, tape.param(w1_)),
                                             tape.param(b1_)));
    return tape.add_rowvec(tape.matmul(h, tape.param(w2_)), tape.param(b2_));
}

std::vector<ad::Param*> Classifier::params() { return {&w1_, &b1_, &w2_, &b2_}; }

}  // namespace cgs::train
