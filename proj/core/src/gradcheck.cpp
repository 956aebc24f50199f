#include "hoggcn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "hoggcn/common.hpp"

namespace hoggcn {

double finite_diff_check(const std::vector<Parameter*>& params,
                         const std::function<double()>& loss_with_grad,
                         const std::function<double()>& loss_only,
                         const GradCheckOptions& opt) {
    if (params.empty()) throw Error("finite_diff_check: no parameters");
    loss_with_grad();  // analytic gradients at the base point

    Rng rng(seed_mix(opt.seed, 0x9fad));
    double max_rel = 0.0;
    for (Parameter* p : params) {
        const std::size_t count = p->value.size();
        if (count == 0) continue;
        for (int probe = 0; probe < opt.probes_per_param; ++probe) {
            const std::size_t j = static_cast<std::size_t>(rng.next_below(count));
            const double saved = p->value.data()[j];
            p->value.data()[j] = saved + opt.step;
            const double fp = loss_only();
            p->value.data()[j] = saved - opt.step;
            const double fm = loss_only();
            p->value.data()[j] = saved;
            const double numeric = (fp - fm) / (2.0 * opt.step);
            const double analytic = p->grad.data()[j];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
        }
    }
    return max_rel;
}

}  // namespace hoggcn
