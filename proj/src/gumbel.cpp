#include "cgs/gumbel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cgs/errors.hpp"

namespace cgs::sampling {

double gumbel_noise(Rng& rng) {
    const double u = std::clamp(rng.uniform01(), 1e-12, 1.0 - 1e-12);
    return -std::log(-std::log(u));
}

std::size_t gumbel_max(const std::vector<double>& logits, Rng& rng) {
    if (logits.empty()) {
        throw DimensionError("gumbel_max: empty logit vector");
    }
    bool found = false;
    std::size_t best = 0;
    double best_val = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        // Draw noise for masked entries too, so masking a category does not
        // shift the noise stream consumed by the remaining ones.
        const double perturbed = logits[i] + gumbel_noise(rng);
        if (logits[i] <= kMaskThreshold) continue;
        if (!found || perturbed > best_val) {
            found = true;
            best = i;
            best_val = perturbed;
        }
    }
    if (!found) {
        throw InfeasibleError("gumbel_max: all " + std::to_string(logits.size()) +
                              " categories are masked");
    }
    return best;
}

std::vector<double> concrete_sample_values(const std::vector<double>& logits,
                                           double tau, Rng& rng) {
    if (logits.empty()) {
        throw DimensionError("concrete_sample_values: empty logit vector");
    }
    if (!(tau > 0.0)) {
        throw ParameterError("concrete_sample_values: temperature must be positive, got " +
                             std::to_string(tau));
    }
    std::vector<double> z(logits.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logits.size(); ++i) {
        z[i] = logits[i] + gumbel_noise(rng);
        mx = std::max(mx, z[i]);
    }
    double denom = 0.0;
    for (double& v : z) {
        v = std::exp((v - mx) / tau);
        denom += v;
    }
    for (double& v : z) v /= denom;
    return z;
}

ad::Tensor concrete_sample(ad::Tape& tape, ad::Tensor logits, double tau, Rng& rng) {
    const ad::Matrix& lv = logits.value();
    ad::Matrix noise(lv.rows, lv.cols);
    for (double& v : noise.data) v = gumbel_noise(rng);
    ad::Tensor perturbed = tape.add(logits, tape.constant(std::move(noise)));
    return tape.softmax_rows(perturbed, tau);
}

ad::Tensor concrete_sample_averaged(ad::Tape& tape, ad::Tensor logits, double tau,
                                    std::size_t rounds, Rng& rng) {
    if (rounds == 0) {
        throw ParameterError("concrete_sample_averaged: rounds must be at least 1");
    }
    ad::Tensor acc = concrete_sample(tape, logits, tau, rng);
    for (std::size_t r = 1; r < rounds; ++r) {
        acc = tape.add(acc, concrete_sample(tape, logits, tau, rng));
    }
    return tape.scale(acc, 1.0 / static_cast<double>(rounds));
}

TauSchedule::TauSchedule(double tau_start, double tau_end, std::size_t horizon)
    : tau_start_(tau_start), tau_end_(tau_end), horizon_(horizon) {
    if (!(tau_end > 0.0) || !(tau_start >= tau_end)) {
        throw ParameterError("TauSchedule: need tau_start >= tau_end > 0, got start=" +
                             std::to_string(tau_start) + " end=" + std::to_string(tau_end));
    }
    if (horizon == 0) {
        throw ParameterError("TauSchedule: horizon must be at least 1");
    }
}

double TauSchedule::at(std::size_t step) const {
    if (step >= horizon_) return tau_end_;
    const double frac = static_cast<double>(step) / static_cast<double>(horizon_);
    return tau_start_ * std::pow(tau_end_ / tau_start_, frac);
}

}  // namespace cgs::sampling
