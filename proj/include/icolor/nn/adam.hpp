#pragma once

#include <cmath>
#include <vector>

#include "icolor/nn/layers.hpp"

namespace icolor::nn {

// Adaptive-moment gradient descent over a flat parameter list.
template <class S>
class Adam {
public:
    Adam(std::vector<ParamView<S>> params, S lr, S beta1 = S(0.9), S beta2 = S(0.999), S eps = S(1e-8))
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (const auto& p : params_) {
            m_.emplace_back(Eigen::Array<S, Eigen::Dynamic, 1>::Zero(p.size));
            v_.emplace_back(Eigen::Array<S, Eigen::Dynamic, 1>::Zero(p.size));
        }
    }

    void step() {
        ++t_;
        const S bc1 = S(1) - std::pow(beta1_, S(t_));
        const S bc2 = S(1) - std::pow(beta2_, S(t_));
        for (size_t i = 0; i < params_.size(); ++i) {
            auto& p = params_[i];
            Eigen::Map<Eigen::Array<S, Eigen::Dynamic, 1>> value(p.value, p.size);
            Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>> grad(p.grad, p.size);
            m_[i] = beta1_ * m_[i] + (S(1) - beta1_) * grad;
            v_[i] = beta2_ * v_[i] + (S(1) - beta2_) * grad.square();
            value -= lr_ * (m_[i] / bc1) / ((v_[i] / bc2).sqrt() + eps_);
        }
    }

    void set_learning_rate(S lr) { lr_ = lr; }
    S learning_rate() const { return lr_; }
    long step_count() const { return t_; }

private:
    std::vector<ParamView<S>> params_;
    std::vector<Eigen::Array<S, Eigen::Dynamic, 1>> m_, v_;
    S lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

} // namespace icolor::nn
