// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "ad/tensor.hpp"

#include <cstdint>
#include <vector>

namespace msfa::ad {

struct AdamOptions
{
    double learning_rate = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First and second moment estimates, one pair per parameter tensor.
template <typename T>
struct AdamState
{
    AdamOptions options;
    std::int64_t step = 0;
    std::vector<std::vector<T>> m;
    std::vector<std::vector<T>> v;
};

/// Adam with bias correction. Parameters are updated in place from their
/// accumulated gradients; gradients are left untouched.
template <typename T>
class Adam
{
public:
    Adam(std::vector<Tensor<T>> params, AdamOptions options = {});

    /// Throws ErrorKind::Numeric, naming the parameter, if any gradient is not finite.
    void step();
    void zero_grad();

    void set_learning_rate(double lr);
    double learning_rate() const noexcept { return state_.options.learning_rate; }

    const AdamState<T>& state() const noexcept { return state_; }
    const std::vector<Tensor<T>>& params() const noexcept { return params_; }

private:
    std::vector<Tensor<T>> params_;
    AdamState<T> state_;
};

} // namespace msfa::ad
