#pragma once

#include <cmath>
#include <vector>

#include "gladformer/params.hpp"

namespace gladformer::nn {

class Adam {
  public:
    Adam(ParamStore& store, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
        : store_(store), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        m_.resize(static_cast<std::size_t>(store.size()));
        v_.resize(static_cast<std::size_t>(store.size()));
        for (int i = 0; i < store.size(); ++i) {
            const auto n = static_cast<std::size_t>(store[i].shape.size());
            m_[static_cast<std::size_t>(i)].assign(n, 0.0);
            v_[static_cast<std::size_t>(i)].assign(n, 0.0);
        }
    }

    void step(const GradBuffer& grads) {
        ++t_;
        const double corr1 = 1.0 - std::pow(beta1_, t_);
        const double corr2 = 1.0 - std::pow(beta2_, t_);
        for (int i = 0; i < store_.size(); ++i) {
            auto& value = store_[i].value;
            auto& m = m_[static_cast<std::size_t>(i)];
            auto& v = v_[static_cast<std::size_t>(i)];
            const auto& g = grads.grad(i);
            for (std::size_t k = 0; k < value.size(); ++k) {
                m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
                v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
                value[k] -= lr_ * (m[k] / corr1) / (std::sqrt(v[k] / corr2) + eps_);
            }
        }
    }

    long step_count() const { return t_; }

  private:
    ParamStore& store_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace gladformer::nn
