// Central-difference gradient checking against tape backward results.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <cgs/tensor.hpp>

namespace fdcheck {

// Recomputes `loss()` with one parameter entry nudged by +/-h and compares
// the central difference against the analytic gradient stored in `grads`
// (captured before calling, since loss() may rebuild tapes and re-zero).
// Returns the worst relative error over all entries of all params.
struct Report {
  double max_rel_err = 0.0;
  std::string worst_entry;
};

inline Report compare_grads(const std::function<double()>& loss,
                            const std::vector<cgs::ad::Param*>& params,
                            const std::vector<cgs::ad::Matrix>& grads,
                            double h = 1e-5) {
  Report rep;
  for (std::size_t p = 0; p < params.size(); ++p) {
    cgs::ad::Param& param = *params[p];
    for (std::size_t i = 0; i < param.value.data.size(); ++i) {
      const double saved = param.value.data[i];
      param.value.data[i] = saved + h;
      const double up = loss();
      param.value.data[i] = saved - h;
      const double down = loss();
      param.value.data[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = grads[p].data[i];
      const double scale = std::max({1.0, std::fabs(fd), std::fabs(an)});
      const double rel = std::fabs(fd - an) / scale;
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst_entry = param.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return rep;
}

}  // namespace fdcheck
