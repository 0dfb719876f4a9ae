// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "ad/adam.hpp"

#include "core/error.hpp"

#include <cmath>

namespace msfa::ad {

template <typename T>
Adam<T>::Adam(std::vector<Tensor<T>> params, AdamOptions options) : params_(std::move(params))
{
    require(options.learning_rate > 0.0, ErrorKind::InvalidArgument, "Adam learning rate must be positive");
    state_.options = options;
    state_.m.reserve(params_.size());
    state_.v.reserve(params_.size());
    for (const Tensor<T>& p : params_) {
        state_.m.emplace_back(p.size(), T(0));
        state_.v.emplace_back(p.size(), T(0));
    }
}

template <typename T>
void Adam<T>::set_learning_rate(double lr)
{
    require(lr > 0.0, ErrorKind::InvalidArgument, "Adam learning rate must be positive");
    state_.options.learning_rate = lr;
}

template <typename T>
void Adam<T>::zero_grad()
{
    for (Tensor<T>& p : params_)
        p.zero_grad();
}

template <typename T>
void Adam<T>::step()
{
    for (std::size_t i = 0; i < params_.size(); ++i)
        for (T g : std::as_const(params_[i]).grad())
            if (!std::isfinite(g))
                fail(ErrorKind::Numeric, "non-finite gradient in parameter tensor #" + std::to_string(i) + " " +
                                             to_string(params_[i].shape()) + " at step " +
                                             std::to_string(state_.step + 1));

    const AdamOptions& o = state_.options;
    ++state_.step;
    const double c1 = 1.0 - std::pow(o.beta1, double(state_.step));
    const double c2 = 1.0 - std::pow(o.beta2, double(state_.step));
    const T lr_t = T(o.learning_rate / c1);
    const T b1 = T(o.beta1), b2 = T(o.beta2);
    const T inv_c2 = T(1.0 / c2);
    const T eps = T(o.epsilon);

    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto w = params_[i].data();
        auto g = std::as_const(params_[i]).grad();
        std::vector<T>& m = state_.m[i];
        std::vector<T>& v = state_.v[i];
        for (std::size_t j = 0; j < w.size(); ++j) {
            m[j] = b1 * m[j] + (T(1) - b1) * g[j];
            v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
            w[j] -= lr_t * m[j] / (std::sqrt(v[j] * inv_c2) + eps);
        }
    }
}

template class Adam<float>;
template class Adam<double>;

} // namespace msfa::ad
