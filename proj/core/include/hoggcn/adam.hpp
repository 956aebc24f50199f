#pragma once

#include <cstdint>
#include <vector>

#include "hoggcn/tape.hpp"

namespace hoggcn {

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 5e-4;  // applied only to parameters with weight_decay=true
};

/// Adam with bias correction. Weight decay is classic L2 folded into the
/// gradient (g + wd*w), skipped for parameters that opt out.
class AdamState {
public:
    AdamState(AdamConfig cfg, const std::vector<Parameter*>& params);

    /// One update using each parameter's current .grad.
    /// Throws if any gradient is non-finite, naming the parameter.
    void step(const std::vector<Parameter*>& params);

    std::int64_t step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::int64_t t_ = 0;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
};

}  // namespace hoggcn
