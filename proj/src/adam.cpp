#include "cgs/adam.hpp"

#include <cmath>

#include "cgs/errors.hpp"

namespace cgs::ad {

Adam::Adam(double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ParameterError("Adam: betas must lie in [0, 1)");
    }
    if (!(eps > 0.0)) {
        throw ParameterError("Adam: eps must be positive");
    }
}

void Adam::add_group(std::vector<Param*> params, double lr) {
    if (!(lr > 0.0)) {
        throw ParameterError("Adam: learning rate must be positive");
    }
    for (Param* p : params) {
        Slot s;
        s.param = p;
        s.lr = lr;
        s.m = Matrix(p->value.rows, p->value.cols);
        s.v = Matrix(p->value.rows, p->value.cols);
        slots_.push_back(std::move(s));
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (Slot& s : slots_) {
        Param& p = *s.param;
        if (!p.grad.same_shape(p.value)) {
            throw ParameterError("Adam: gradient shape mismatch for parameter '" +
                                 p.name + "'");
        }
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad.data[i];
            s.m.data[i] = beta1_ * s.m.data[i] + (1.0 - beta1_) * g;
            s.v.data[i] = beta2_ * s.v.data[i] + (1.0 - beta2_) * g * g;
            const double mhat = s.m.data[i] / bc1;
            const double vhat = s.v.data[i] / bc2;
            p.value.data[i] -= s.lr * mhat / (std::sqrt(vhat) + eps_);
        }
        p.zero_grad();
    }
}

void Adam::zero_grad() {
    for (Slot& s : slots_) s.param->zero_grad();
}

}  // namespace cgs::ad
