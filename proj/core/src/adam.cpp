#include "hoggcn/adam.hpp"

#include <cmath>

namespace hoggcn {

AdamState::AdamState(AdamConfig cfg, const std::vector<Parameter*>& params) : cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Parameter* p : params) {
        m_.emplace_back(p->value.rows(), p->value.cols());
        v_.emplace_back(p->value.rows(), p->value.cols());
    }
}

void AdamState::step(const std::vector<Parameter*>& params) {
    if (params.size() != m_.size()) throw Error("AdamState: parameter list changed size");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Parameter& p = *params[i];
        if (!p.grad.same_shape(p.value)) throw Error("AdamState: grad shape mismatch for " + p.name);
        const double wd = p.weight_decay ? cfg_.weight_decay : 0.0;
        Matrix& m = m_[i];
        Matrix& v = v_[i];
        for (std::size_t j = 0; j < p.value.size(); ++j) {
            double g = p.grad.data()[j];
            if (!std::isfinite(g))
                throw Error("AdamState: non-finite gradient in parameter " + p.name);
            g += wd * p.value.data()[j];
            m.data()[j] = cfg_.beta1 * m.data()[j] + (1.0 - cfg_.beta1) * g;
            v.data()[j] = cfg_.beta2 * v.data()[j] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m.data()[j] / bc1;
            const double vhat = v.data()[j] / bc2;
            p.value.data()[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

}  // namespace hoggcn
