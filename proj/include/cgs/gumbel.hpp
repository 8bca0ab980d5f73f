#ifndef CGS_GUMBEL_HPP
#define CGS_GUMBEL_HPP

#include <cstddef>
#include <vector>

#include "cgs/rng.hpp"
#include "cgs/tensor.hpp"

namespace cgs::sampling {

// Logits at or below this are treated as masked-out everywhere hard sampling
// or feasibility is concerned. Soft paths get the same effect for free: after
// max subtraction exp((x - 1e9)/tau) underflows to exactly 0.
inline constexpr double kMaskedLogit = -1e9;
inline constexpr double kMaskThreshold = -1e8;

// One standard Gumbel(0,1) draw: -log(-log(u)) with u clamped away from the
// endpoints so both logs stay finite.
double gumbel_noise(Rng& rng);

// Hard argmax of logits + Gumbel noise (the Gumbel-max trick). Masked entries
// never win; throws InfeasibleError when every entry is masked.
std::size_t gumbel_max(const std::vector<double>& logits, Rng& rng);

// Value-level concrete (Gumbel-Softmax) sample: softmax((logits + g) / tau).
std::vector<double> concrete_sample_values(const std::vector<double>& logits,
                                           double tau, Rng& rng);

// On-tape concrete sample over each row of `logits`, with fresh noise per
// element. Gradients flow back to the logits through the softmax.
ad::Tensor concrete_sample(ad::Tape& tape, ad::Tensor logits, double tau, Rng& rng);

// Mean of `rounds` independent concrete samples of the same logits row(s).
ad::Tensor concrete_sample_averaged(ad::Tape& tape, ad::Tensor logits, double tau,
                                    std::size_t rounds, Rng& rng);

// Exponential temperature decay: tau(s) = start * (end/start)^(s / horizon),
// held at `end` once s reaches the horizon.
class TauSchedule {
public:
    TauSchedule(double tau_start, double tau_end, std::size_t horizon);
    double at(std::size_t step) const;
    double start() const { return tau_start_; }
    double end() const { return tau_end_; }

private:
    double tau_start_;
    double tau_end_;
    std::size_t horizon_;
};

}  // namespace cgs::sampling

#endif  // CGS_GUMBEL_HPP
