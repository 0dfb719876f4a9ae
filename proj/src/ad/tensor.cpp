// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "ad/tensor.hpp"

#include "ad/trace.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <sstream>

namespace msfa::ad {

std::size_t element_count(const Shape& shape)
{
    std::size_t n = 1;
    for (std::size_t e : shape)
        n *= e;
    return n;
}

std::string to_string(const Shape& shape)
{
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i)
        os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

namespace {

void validate_shape(const Shape& shape)
{
    require(shape.size() <= kMaxRank, ErrorKind::InvalidArgument,
            "tensor rank " + std::to_string(shape.size()) + " exceeds " + std::to_string(kMaxRank));
    for (std::size_t e : shape)
        require(e > 0, ErrorKind::InvalidGeometry, "tensor extents must be positive, got " + to_string(shape));
}

template <typename T>
bool wants_record(const Tape<T>* tape, std::initializer_list<const Tensor<T>*> inputs)
{
    if (!tape)
        return false;
    return std::any_of(inputs.begin(), inputs.end(),
                       [](const Tensor<T>* t) { return t->defined() && t->requires_grad(); });
}

} // namespace

// ---- Tensor ---------------------------------------------------------------

template <typename T>
Tensor<T>::Tensor(Shape shape, bool requires_grad)
{
    validate_shape(shape);
    impl_ = std::make_shared<Impl>();
    impl_->data.assign(element_count(shape), T(0));
    impl_->shape = std::move(shape);
    impl_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values, bool requires_grad)
{
    validate_shape(shape);
    require(values.size() == element_count(shape), ErrorKind::ShapeMismatch,
            "tensor of shape " + to_string(shape) + " needs " + std::to_string(element_count(shape)) +
                " values, got " + std::to_string(values.size()));
    impl_ = std::make_shared<Impl>();
    impl_->shape = std::move(shape);
    impl_->data = std::move(values);
    impl_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad)
{
    Tensor t(std::move(shape), requires_grad);
    std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
    return t;
}

template <typename T>
typename Tensor<T>::Impl& Tensor<T>::impl() const
{
    require(impl_ != nullptr, ErrorKind::State, "use of an undefined tensor");
    return *impl_;
}

template <typename T>
const Shape& Tensor<T>::shape() const
{
    return impl().shape;
}

template <typename T>
std::size_t Tensor<T>::size() const
{
    return impl().data.size();
}

template <typename T>
std::span<T> Tensor<T>::data()
{
    return impl().data;
}

template <typename T>
std::span<const T> Tensor<T>::data() const
{
    return impl().data;
}

template <typename T>
std::span<T> Tensor<T>::grad()
{
    Impl& i = impl();
    if (i.grad.size() != i.data.size())
        i.grad.assign(i.data.size(), T(0));
    return i.grad;
}

template <typename T>
std::span<const T> Tensor<T>::grad() const
{
    Impl& i = impl();
    if (i.grad.size() != i.data.size())
        i.grad.assign(i.data.size(), T(0));
    return i.grad;
}

template <typename T>
bool Tensor<T>::has_grad() const
{
    return impl().grad.size() == impl().data.size();
}

template <typename T>
void Tensor<T>::zero_grad()
{
    std::vector<T>& g = impl().grad;
    std::fill(g.begin(), g.end(), T(0));
}

template <typename T>
bool Tensor<T>::requires_grad() const
{
    return impl().requires_grad;
}

template <typename T>
void Tensor<T>::set_requires_grad(bool value)
{
    impl().requires_grad = value;
}

template <typename T>
T Tensor<T>::item() const
{
    require(size() == 1, ErrorKind::ShapeMismatch, "item() on tensor of shape " + to_string(shape()));
    return impl().data[0];
}

template <typename T>
Tensor<T> Tensor<T>::clone() const
{
    return Tensor(impl().shape, impl().data, impl().requires_grad);
}

// ---- Tape -----------------------------------------------------------------

template <typename T>
void Tape<T>::record(std::function<void()> backward_fn)
{
    require(!consumed_, ErrorKind::State, "recording onto a tape that already ran backward; reset() it first");
    ops_.push_back(std::move(backward_fn));
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss)
{
    require(loss.defined() && loss.size() == 1, ErrorKind::ShapeMismatch,
            "backward() needs a scalar loss, got shape " + (loss.defined() ? to_string(loss.shape()) : "<undefined>"));
    require(!ops_.empty(), ErrorKind::State, "backward() on an empty tape");
    require(!consumed_, ErrorKind::State, "backward() called twice without reset()");
    consumed_ = true;

    Tensor<T> seed = loss;
    seed.grad()[0] = T(1);
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it)
        (*it)();
}

template <typename T>
void Tape<T>::reset()
{
    ops_.clear();
    consumed_ = false;
}

// ---- elementwise and structural ops ----------------------------------------

template <typename T>
Tensor<T> relu(Tape<T>* tape, const Tensor<T>& input)
{
    Tensor<T> out(input.shape());
    auto x = input.data();
    auto y = out.data();
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = x[i] > T(0) ? x[i] : T(0);
    if (BranchTrace* trace = BranchTrace::active()) {
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            bits = (bits << 1) | (x[i] > T(0) ? 1u : 0u);
            if (i % 64 == 63 || i + 1 == x.size()) {
                trace->mix(bits);
                bits = 0;
            }
        }
    }

    if (wants_record(tape, {&input})) {
        out.set_requires_grad(true);
        tape->record([in = input, out]() mutable {
            auto x = in.data();
            auto gy = std::as_const(out).grad();
            auto gx = in.grad();
            for (std::size_t i = 0; i < x.size(); ++i)
                if (x[i] > T(0))
                    gx[i] += gy[i];
        });
    }
    return out;
}

template <typename T>
Tensor<T> add(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b)
{
    require(a.shape() == b.shape(), ErrorKind::ShapeMismatch,
            "add: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    Tensor<T> out(a.shape());
    auto x = a.data();
    auto y = b.data();
    auto z = out.data();
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = x[i] + y[i];

    if (wants_record(tape, {&a, &b})) {
        out.set_requires_grad(true);
        tape->record([a = a, b = b, out]() mutable {
            auto gz = std::as_const(out).grad();
            for (Tensor<T>* t : {&a, &b}) {
                if (!t->requires_grad())
                    continue;
                auto g = t->grad();
                for (std::size_t i = 0; i < g.size(); ++i)
                    g[i] += gz[i];
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> mul(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b)
{
    require(a.shape() == b.shape(), ErrorKind::ShapeMismatch,
            "mul: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    Tensor<T> out(a.shape());
    auto x = a.data();
    auto y = b.data();
    auto z = out.data();
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = x[i] * y[i];

    if (wants_record(tape, {&a, &b})) {
        out.set_requires_grad(true);
        tape->record([a = a, b = b, out]() mutable {
            auto gz = std::as_const(out).grad();
            if (a.requires_grad()) {
                auto g = a.grad();
                auto y = b.data();
                for (std::size_t i = 0; i < g.size(); ++i)
                    g[i] += gz[i] * y[i];
            }
            if (b.requires_grad()) {
                auto g = b.grad();
                auto x = a.data();
                for (std::size_t i = 0; i < g.size(); ++i)
                    g[i] += gz[i] * x[i];
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> sum(Tape<T>* tape, const Tensor<T>& input)
{
    T total = T(0);
    for (T v : input.data())
        total += v;
    Tensor<T> out(Shape{}, std::vector<T>{total});

    if (wants_record(tape, {&input})) {
        out.set_requires_grad(true);
        tape->record([in = input, out]() mutable {
            const T g = std::as_const(out).grad()[0];
            for (T& gx : in.grad())
                gx += g;
        });
    }
    return out;
}

template <typename T>
Tensor<T> crop_border(Tape<T>* tape, const Tensor<T>& input, std::size_t margin)
{
    const Shape& s = input.shape();
    require(s.size() >= 2, ErrorKind::InvalidGeometry, "crop_border needs at least two axes");
    const std::size_t h = s[s.size() - 2];
    const std::size_t w = s[s.size() - 1];
    require(2 * margin < h && 2 * margin < w, ErrorKind::InvalidGeometry,
            "crop margin " + std::to_string(margin) + " too large for " + to_string(s));
    if (margin == 0)
        return input;

    const std::size_t oh = h - 2 * margin;
    const std::size_t ow = w - 2 * margin;
    Shape os = s;
    os[s.size() - 2] = oh;
    os[s.size() - 1] = ow;
    const std::size_t planes = input.size() / (h * w);

    Tensor<T> out(os);
    auto x = input.data();
    auto y = out.data();
    for (std::size_t p = 0; p < planes; ++p)
        for (std::size_t r = 0; r < oh; ++r) {
            const T* src = x.data() + p * h * w + (r + margin) * w + margin;
            std::copy(src, src + ow, y.data() + p * oh * ow + r * ow);
        }

    if (wants_record(tape, {&input})) {
        out.set_requires_grad(true);
        tape->record([in = input, out, planes, h, w, oh, ow, margin]() mutable {
            auto gy = std::as_const(out).grad();
            auto gx = in.grad();
            for (std::size_t p = 0; p < planes; ++p)
                for (std::size_t r = 0; r < oh; ++r) {
                    T* dst = gx.data() + p * h * w + (r + margin) * w + margin;
                    const T* src = gy.data() + p * oh * ow + r * ow;
                    for (std::size_t c = 0; c < ow; ++c)
                        dst[c] += src[c];
                }
        });
    }
    return out;
}

template <typename T>
Tensor<T> concat_channels(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b)
{
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    require(sa.size() == 5 && sb.size() == 5, ErrorKind::ShapeMismatch, "concat_channels needs rank-5 tensors");
    require(sa[0] == sb[0] && sa[2] == sb[2] && sa[3] == sb[3] && sa[4] == sb[4], ErrorKind::ShapeMismatch,
            "concat_channels: " + to_string(sa) + " vs " + to_string(sb));

    const std::size_t batch = sa[0];
    const std::size_t na = sa[1] * sa[2] * sa[3] * sa[4];
    const std::size_t nb = sb[1] * sb[2] * sb[3] * sb[4];
    Tensor<T> out(Shape{batch, sa[1] + sb[1], sa[2], sa[3], sa[4]});
    auto y = out.data();
    for (std::size_t n = 0; n < batch; ++n) {
        std::copy_n(a.data().data() + n * na, na, y.data() + n * (na + nb));
        std::copy_n(b.data().data() + n * nb, nb, y.data() + n * (na + nb) + na);
    }

    if (wants_record(tape, {&a, &b})) {
        out.set_requires_grad(true);
        tape->record([a = a, b = b, out, batch, na, nb]() mutable {
            auto gy = std::as_const(out).grad();
            for (std::size_t n = 0; n < batch; ++n) {
                if (a.requires_grad()) {
                    T* g = a.grad().data() + n * na;
                    const T* src = gy.data() + n * (na + nb);
                    for (std::size_t i = 0; i < na; ++i)
                        g[i] += src[i];
                }
                if (b.requires_grad()) {
                    T* g = b.grad().data() + n * nb;
                    const T* src = gy.data() + n * (na + nb) + na;
                    for (std::size_t i = 0; i < nb; ++i)
                        g[i] += src[i];
                }
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> reshape(Tape<T>* tape, const Tensor<T>& input, Shape shape)
{
    require(element_count(shape) == input.size(), ErrorKind::ShapeMismatch,
            "reshape " + to_string(input.shape()) + " to " + to_string(shape));
    Tensor<T> out(std::move(shape), std::vector<T>(input.data().begin(), input.data().end()));

    if (wants_record(tape, {&input})) {
        out.set_requires_grad(true);
        tape->record([in = input, out]() mutable {
            auto gy = std::as_const(out).grad();
            auto gx = in.grad();
            for (std::size_t i = 0; i < gx.size(); ++i)
                gx[i] += gy[i];
        });
    }
    return out;
}

template <typename T>
Tensor<T> mse_loss(Tape<T>* tape, const Tensor<T>& prediction, const Tensor<T>& target)
{
    require(prediction.shape() == target.shape(), ErrorKind::ShapeMismatch,
            "mse_loss: " + to_string(prediction.shape()) + " vs " + to_string(target.shape()));
    auto p = prediction.data();
    auto o = target.data();
    // Accumulate in double so the float loss does not drift with patch size.
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = double(p[i]) - double(o[i]);
        acc += d * d;
    }
    const std::size_t n = p.size();
    Tensor<T> out(Shape{}, std::vector<T>{T(acc / double(n))});

    if (wants_record(tape, {&prediction, &target})) {
        out.set_requires_grad(true);
        tape->record([pred = prediction, target = target, out, n]() mutable {
            const T scale = std::as_const(out).grad()[0] * T(2) / T(n);
            auto p = std::as_const(pred).data();
            auto o = std::as_const(target).data();
            if (pred.requires_grad()) {
                auto g = pred.grad();
                for (std::size_t i = 0; i < n; ++i)
                    g[i] += scale * (p[i] - o[i]);
            }
            if (target.requires_grad()) {
                auto g = target.grad();
                for (std::size_t i = 0; i < n; ++i)
                    g[i] -= scale * (p[i] - o[i]);
            }
        });
    }
    return out;
}

#define MSFA_INSTANTIATE(T)                                                                        \
    template class Tensor<T>;                                                                      \
    template class Tape<T>;                                                                        \
    template Tensor<T> relu(Tape<T>*, const Tensor<T>&);                                           \
    template Tensor<T> add(Tape<T>*, const Tensor<T>&, const Tensor<T>&);                          \
    template Tensor<T> mul(Tape<T>*, const Tensor<T>&, const Tensor<T>&);                          \
    template Tensor<T> sum(Tape<T>*, const Tensor<T>&);                                            \
    template Tensor<T> crop_border(Tape<T>*, const Tensor<T>&, std::size_t);                       \
    template Tensor<T> concat_channels(Tape<T>*, const Tensor<T>&, const Tensor<T>&);              \
    template Tensor<T> reshape(Tape<T>*, const Tensor<T>&, Shape);                                 \
    template Tensor<T> mse_loss(Tape<T>*, const Tensor<T>&, const Tensor<T>&);

MSFA_INSTANTIATE(float)
MSFA_INSTANTIATE(double)

#undef MSFA_INSTANTIATE

} // namespace msfa::ad
