#include "cgs/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cgs/errors.hpp"
#include "cgs/rng.hpp"

namespace cgs::eval {

Splits make_splits(const std::vector<int>& y, std::size_t n_classes,
                   std::uint64_t seed) {
    if (y.empty()) throw DimensionError("make_splits: empty label vector");
    std::vector<std::vector<std::size_t>> per_class(n_classes);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= n_classes) {
            throw ParameterError("make_splits: label " + std::to_string(y[i]) +
                                 " outside [0, " + std::to_string(n_classes) + ")");
        }
        per_class[static_cast<std::size_t>(y[i])].push_back(i);
    }
    Splits sp;
    for (std::size_t c = 0; c < n_classes; ++c) {
        auto& idx = per_class[c];
        Rng rng(Rng::sub_seed(seed, 0x517UL + c));
        // Fisher-Yates with our own RNG so the split never depends on the
        // standard library's shuffle implementation.
        for (std::size_t i = idx.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.below(i));
            std::swap(idx[i - 1], idx[j]);
        }
        const std::size_t n = idx.size();
        const std::size_t n_test = static_cast<std::size_t>(std::llround(0.25 * n));
        const std::size_t n_val = static_cast<std::size_t>(std::llround(0.15 * n));
        for (std::size_t i = 0; i < n; ++i) {
            if (i < n_test) sp.test.push_back(idx[i]);
            else if (i < n_test + n_val) sp.val.push_back(idx[i]);
            else sp.train.push_back(idx[i]);
        }
    }
    std::sort(sp.train.begin(), sp.train.end());
    std::sort(sp.val.begin(), sp.val.end());
    std::sort(sp.test.begin(), sp.test.end());
    return sp;
}

namespace {

// Solves A x = b for symmetric positive definite A, in place, via Cholesky.
void solve_spd(std::vector<double>& a, std::size_t n, std::vector<double>& b,
               std::size_t n_rhs) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (s <= 0.0) {
                    throw DegenerateGeometryError(
                        "probe: normal equations are not positive definite");
                }
                a[i * n + i] = std::sqrt(s);
            } else {
                a[i * n + j] = s / a[j * n + j];
            }
        }
    }
    // forward substitution L z = b, then back substitution L^T x = z
    for (std::size_t r = 0; r < n_rhs; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[i * n_rhs + r];
            for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k * n_rhs + r];
            b[i * n_rhs + r] = s / a[i * n + i];
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = b[i * n_rhs + r];
            for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k * n_rhs + r];
            b[i * n_rhs + r] = s / a[i * n + i];
        }
    }
}

}  // namespace

double probe_accuracy(const data::Dataset& ds, const std::vector<std::size_t>& nodes,
                      const Splits& sp, double ridge) {
    if (nodes.empty()) throw ParameterError("probe: no nodes selected");
    for (std::size_t n : nodes) {
        if (n >= ds.n_nodes) {
            throw ParameterError("probe: node " + std::to_string(n) +
                                 " outside dataset with " + std::to_string(ds.n_nodes) +
                                 " nodes");
        }
    }
    if (sp.train.empty() || sp.test.empty()) {
        throw DimensionError("probe: train and test splits must be non-empty");
    }
    const std::size_t L = ds.n_channels;
    const std::size_t d = nodes.size() * L + 1;  // +1 bias column
    const std::size_t C = ds.n_classes;

    auto features = [&](std::size_t row, std::vector<double>& f) {
        f.clear();
        for (std::size_t n : nodes) {
            for (std::size_t c = 0; c < L; ++c) f.push_back(ds.x[row][n * L + c]);
        }
        f.push_back(1.0);
    };

    // Normal equations X^T X + ridge I (bias unregularized) and X^T Y.
    std::vector<double> xtx(d * d, 0.0), xty(d * C, 0.0), f;
    for (std::size_t row : sp.train) {
        features(row, f);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j <= i; ++j) xtx[i * d + j] += f[i] * f[j];
            xty[i * C + static_cast<std::size_t>(ds.y[row])] += f[i];
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) xtx[i * d + j] = xtx[j * d + i];
    }
    for (std::size_t i = 0; i + 1 < d; ++i) xtx[i * d + i] += ridge;
    xtx[(d - 1) * d + (d - 1)] += 1e-10;  // keep the bias row definite

    solve_spd(xtx, d, xty, C);

    std::size_t correct = 0;
    for (std::size_t row : sp.test) {
        features(row, f);
        std::size_t best = 0;
        double best_score = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) s += f[i] * xty[i * C + c];
            if (c == 0 || s > best_score) {
                best = c;
                best_score = s;
            }
        }
        if (static_cast<int>(best) == ds.y[row]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(sp.test.size());
}

}  // namespace cgs::eval
