#ifndef CGS_ADAM_HPP
#define CGS_ADAM_HPP

#include <cstddef>
#include <vector>

#include "cgs/tensor.hpp"

namespace cgs::ad {

// Adam with bias correction (Kingma & Ba). Parameters are registered in
// groups so the selection logits and the classifier weights can run at
// different learning rates within one optimizer.
class Adam {
public:
    Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    // Registers parameters; the pointers must outlive the optimizer.
    void add_group(std::vector<Param*> params, double lr);

    // One update from the gradients currently held in each Param, then
    // clears them. Throws ParameterError if a gradient shape went stale.
    void step();

    void zero_grad();
    std::size_t step_count() const { return t_; }

private:
    struct Slot {
        Param* param;
        double lr;
        Matrix m;  // first-moment estimate
        Matrix v;  // second-moment estimate
    };

    double beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::vector<Slot> slots_;
};

}  // namespace cgs::ad

#endif  // CGS_ADAM_HPP
