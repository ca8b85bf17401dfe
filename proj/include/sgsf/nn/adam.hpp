#pragma once

#include <cmath>
#include <vector>

#include "sgsf/kernels.hpp"
#include "sgsf/nn/layers.hpp"

namespace sgsf::nn {

// Adam with bias correction. Moment buffers are indexed by the position of
// the parameter view, so the view order must stay stable across steps and
// checkpoints.
class Adam {
public:
    explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void attach(const std::vector<Param>& params) {
        m_.clear();
        v_.clear();
        for (const auto& p : params) {
            m_.emplace_back(p.size, 0.0);
            v_.emplace_back(p.size, 0.0);
        }
        t_ = 0;
    }

    void step(const std::vector<Param>& params, double lr) {
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, t_);
        const double c2 = 1.0 - std::pow(beta2_, t_);
        const auto& kt = kernels::active();
        for (size_t i = 0; i < params.size(); ++i)
            kt.adam_step(params[i].value, params[i].grad, m_[i].data(), v_[i].data(),
                         params[i].size, lr, beta1_, beta2_, eps_, c1, c2);
    }

    int step_count() const { return t_; }
    void set_step_count(int t) { t_ = t; }
    std::vector<std::vector<double>>& first_moments() { return m_; }
    std::vector<std::vector<double>>& second_moments() { return v_; }

private:
    double beta1_, beta2_, eps_;
    int t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

} // namespace sgsf::nn
