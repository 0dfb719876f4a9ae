// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace msfa::ad {

/// Up to five extents, ordered (batch, channel, depth, height, width). The
/// spectral axis of a cube is carried as depth.
using Shape = std::vector<std::size_t>;

inline constexpr std::size_t kMaxRank = 5;

std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);

struct Extent3
{
    std::size_t d = 1;
    std::size_t h = 1;
    std::size_t w = 1;

    friend bool operator==(const Extent3&, const Extent3&) = default;
};

/// Reference-counted handle to an n-d array and its gradient buffer.
///
/// Copies share storage, the same way activations are shared between the
/// forward graph and the tape. Use clone() for an independent copy.
template <typename T>
class Tensor
{
public:
    Tensor() = default;
    explicit Tensor(Shape shape, bool requires_grad = false);
    Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);

    static Tensor full(Shape shape, T value, bool requires_grad = false);

    bool defined() const noexcept { return impl_ != nullptr; }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t extent(std::size_t axis) const { return shape().at(axis); }
    std::size_t size() const;

    std::span<T> data();
    std::span<const T> data() const;

    /// Gradient buffer, allocated as zeros on first access.
    std::span<T> grad();
    std::span<const T> grad() const;
    bool has_grad() const;
    void zero_grad();

    bool requires_grad() const;
    void set_requires_grad(bool value);

    /// Value of a single-element tensor.
    T item() const;

    Tensor clone() const;
    bool same_storage(const Tensor& other) const noexcept { return impl_ == other.impl_; }

private:
    struct Impl
    {
        Shape shape;
        std::vector<T> data;
        std::vector<T> grad;
        bool requires_grad = false;
    };

    Impl& impl() const;

    std::shared_ptr<Impl> impl_;
};

/// Ordered record of differentiable operations.
///
/// Operations push a backward closure when they are given a tape and at least
/// one input requires a gradient. backward() runs the closures once, newest
/// first; the tape must be reset() before it can be replayed.
template <typename T>
class Tape
{
public:
    void record(std::function<void()> backward_fn);
    std::size_t size() const noexcept { return ops_.size(); }
    bool consumed() const noexcept { return consumed_; }

    void backward(const Tensor<T>& loss);
    void reset();

private:
    std::vector<std::function<void()>> ops_;
    bool consumed_ = false;
};

// A null tape runs the operation without recording it.

template <typename T>
Tensor<T> conv3d(Tape<T>* tape, const Tensor<T>& input, const Tensor<T>& kernel,
                 const Tensor<T>& bias, Extent3 padding = {0, 0, 0}, Extent3 stride = {1, 1, 1});

/// Kernel layout is [C_in, C_out, kd, kh, kw]; output extent is (n - 1) * s + k.
template <typename T>
Tensor<T> conv_transpose3d(Tape<T>* tape, const Tensor<T>& input, const Tensor<T>& kernel,
                           const Tensor<T>& bias, Extent3 stride = {1, 1, 1});

template <typename T>
Tensor<T> maxpool3d(Tape<T>* tape, const Tensor<T>& input, Extent3 window);

template <typename T>
Tensor<T> relu(Tape<T>* tape, const Tensor<T>& input);

template <typename T>
Tensor<T> add(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> sum(Tape<T>* tape, const Tensor<T>& input);

/// Removes `margin` samples from each side of the last two axes.
template <typename T>
Tensor<T> crop_border(Tape<T>* tape, const Tensor<T>& input, std::size_t margin);

/// Concatenates two rank-5 tensors along the channel axis.
template <typename T>
Tensor<T> concat_channels(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> reshape(Tape<T>* tape, const Tensor<T>& input, Shape shape);

/// Mean squared error; returns a scalar. Differentiable in both arguments.
template <typename T>
Tensor<T> mse_loss(Tape<T>* tape, const Tensor<T>& prediction, const Tensor<T>& target);

} // namespace msfa::ad
