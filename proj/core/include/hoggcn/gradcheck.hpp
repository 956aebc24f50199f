#pragma once

#include <functional>
#include <vector>

#include "hoggcn/tape.hpp"

namespace hoggcn {

struct GradCheckOptions {
    int probes_per_param = 5;
    double step = 1e-5;       // central difference half-width
    std::uint64_t seed = 0;
};

/// Compares tape gradients against central finite differences.
///
/// `loss_with_grad` must rebuild the computation from the parameters'
/// current values, run backward, fill every parameter's .grad and return
/// the loss. `loss_only` must return the loss without touching gradients.
/// For each parameter, `probes_per_param` randomly chosen entries are
/// perturbed by ±step. Returns the maximum relative error with denominator
/// max(|analytic|, |numeric|, 1e-8).
double finite_diff_check(const std::vector<Parameter*>& params,
                         const std::function<double()>& loss_with_grad,
                         const std::function<double()>& loss_only,
                         const GradCheckOptions& opt = {});

}  // namespace hoggcn
