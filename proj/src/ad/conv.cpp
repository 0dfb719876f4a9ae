// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

// 3D convolution, transposed convolution and max pooling.
//
// Convolutions are lowered to GEMM through im2col over a range of output
// depth slices at a time, so the column buffer stays bounded regardless of
// the volume size. Transposed convolution reuses the same lowering with the
// roles of input and output exchanged.

#include "ad/tensor.hpp"

#include "ad/trace.hpp"
#include "core/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstring>
#include <limits>

namespace msfa::ad {

namespace {

constexpr std::size_t kColumnBudgetBytes = std::size_t(24) << 20;

struct ConvDims
{
    std::size_t cin, din, hin, win;
    std::size_t cout, dout, hout, wout;
    Extent3 k, pad, stride;

    std::size_t kernel_volume() const { return k.d * k.h * k.w; }
    std::size_t rows() const { return cin * kernel_volume(); }
    std::size_t in_volume() const { return din * hin * win; }
    std::size_t out_plane() const { return hout * wout; }
    std::size_t out_volume() const { return dout * hout * wout; }

    std::size_t depth_chunk(std::size_t elem_size) const
    {
        const std::size_t per_slice = rows() * out_plane() * elem_size;
        return std::clamp<std::size_t>(kColumnBudgetBytes / std::max<std::size_t>(per_slice, 1), 1, dout);
    }
};

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;

// Valid output range [lo, hi) along one axis for kernel tap `tap`.
inline void valid_range(std::size_t out_extent, std::size_t in_extent, std::size_t stride, std::size_t pad,
                        std::size_t tap, std::size_t& lo, std::size_t& hi)
{
    // in = o * stride + tap - pad must satisfy 0 <= in < in_extent.
    const long long s = static_cast<long long>(stride);
    const long long shift = static_cast<long long>(tap) - static_cast<long long>(pad);
    long long first = shift >= 0 ? 0 : (-shift + s - 1) / s;
    long long last = (static_cast<long long>(in_extent) - 1 - shift);
    last = last < 0 ? -1 : last / s;
    first = std::min<long long>(first, static_cast<long long>(out_extent));
    last = std::min<long long>(last, static_cast<long long>(out_extent) - 1);
    lo = static_cast<std::size_t>(first);
    hi = last < first ? lo : static_cast<std::size_t>(last + 1);
}

/// cols[r, p] for rows r = (ci, kz, ky, kx) and columns p over output depth slices [od0, od1).
template <typename T>
void im2col(const T* x, const ConvDims& g, std::size_t od0, std::size_t od1, T* cols)
{
    const std::size_t plane = g.out_plane();
    const std::size_t ncols = (od1 - od0) * plane;
    std::size_t row = 0;
    for (std::size_t ci = 0; ci < g.cin; ++ci)
        for (std::size_t kz = 0; kz < g.k.d; ++kz)
            for (std::size_t ky = 0; ky < g.k.h; ++ky)
                for (std::size_t kx = 0; kx < g.k.w; ++kx, ++row) {
                    T* dst_row = cols + row * ncols;
                    std::size_t y_lo, y_hi, x_lo, x_hi;
                    valid_range(g.hout, g.hin, g.stride.h, g.pad.h, ky, y_lo, y_hi);
                    valid_range(g.wout, g.win, g.stride.w, g.pad.w, kx, x_lo, x_hi);
                    for (std::size_t od = od0; od < od1; ++od) {
                        T* dst = dst_row + (od - od0) * plane;
                        const long long iz =
                            static_cast<long long>(od * g.stride.d + kz) - static_cast<long long>(g.pad.d);
                        if (iz < 0 || iz >= static_cast<long long>(g.din)) {
                            std::fill(dst, dst + plane, T(0));
                            continue;
                        }
                        const T* src_slice = x + (ci * g.din + static_cast<std::size_t>(iz)) * g.hin * g.win;
                        std::fill(dst, dst + y_lo * g.wout, T(0));
                        for (std::size_t oy = y_lo; oy < y_hi; ++oy) {
                            T* d = dst + oy * g.wout;
                            const std::size_t iy = oy * g.stride.h + ky - g.pad.h;
                            const T* s = src_slice + iy * g.win;
                            std::fill(d, d + x_lo, T(0));
                            if (g.stride.w == 1) {
                                const std::size_t ix0 = x_lo + kx - g.pad.w;
                                std::memcpy(d + x_lo, s + ix0, (x_hi - x_lo) * sizeof(T));
                            } else {
                                for (std::size_t ox = x_lo; ox < x_hi; ++ox)
                                    d[ox] = s[ox * g.stride.w + kx - g.pad.w];
                            }
                            std::fill(d + x_hi, d + g.wout, T(0));
                        }
                        std::fill(dst + y_hi * g.wout, dst + plane, T(0));
                    }
                }
}

/// Scatter-add of a column buffer back onto the input volume (adjoint of im2col).
template <typename T>
void col2im(const T* cols, const ConvDims& g, std::size_t od0, std::size_t od1, T* x)
{
    const std::size_t plane = g.out_plane();
    const std::size_t ncols = (od1 - od0) * plane;
    std::size_t row = 0;
    for (std::size_t ci = 0; ci < g.cin; ++ci)
        for (std::size_t kz = 0; kz < g.k.d; ++kz)
            for (std::size_t ky = 0; ky < g.k.h; ++ky)
                for (std::size_t kx = 0; kx < g.k.w; ++kx, ++row) {
                    const T* src_row = cols + row * ncols;
                    std::size_t y_lo, y_hi, x_lo, x_hi;
                    valid_range(g.hout, g.hin, g.stride.h, g.pad.h, ky, y_lo, y_hi);
                    valid_range(g.wout, g.win, g.stride.w, g.pad.w, kx, x_lo, x_hi);
                    for (std::size_t od = od0; od < od1; ++od) {
                        const long long iz =
                            static_cast<long long>(od * g.stride.d + kz) - static_cast<long long>(g.pad.d);
                        if (iz < 0 || iz >= static_cast<long long>(g.din))
                            continue;
                        const T* src = src_row + (od - od0) * plane;
                        T* dst_slice = x + (ci * g.din + static_cast<std::size_t>(iz)) * g.hin * g.win;
                        for (std::size_t oy = y_lo; oy < y_hi; ++oy) {
                            const T* s = src + oy * g.wout;
                            T* d = dst_slice + (oy * g.stride.h + ky - g.pad.h) * g.win;
                            if (g.stride.w == 1) {
                                T* dd = d + kx - g.pad.w;
                                for (std::size_t ox = x_lo; ox < x_hi; ++ox)
                                    dd[ox] += s[ox];
                            } else {
                                for (std::size_t ox = x_lo; ox < x_hi; ++ox)
                                    d[ox * g.stride.w + kx - g.pad.w] += s[ox];
                            }
                        }
                    }
                }
}

// Forward convolution of one batch item: y = W * im2col(x) (+ bias).
template <typename T>
void conv_forward_item(const ConvDims& g, const T* x, const T* w, T* y, std::vector<T>& cols)
{
    const std::size_t chunk = g.depth_chunk(sizeof(T));
    const std::size_t K = g.rows();
    MatMap<T> wm(const_cast<T*>(w), static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(K));
    for (std::size_t od0 = 0; od0 < g.dout; od0 += chunk) {
        const std::size_t od1 = std::min(g.dout, od0 + chunk);
        const std::size_t P = (od1 - od0) * g.out_plane();
        cols.resize(K * P);
        im2col(x, g, od0, od1, cols.data());
        MatMap<T> cm(cols.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
        StridedMap<T> ym(y + od0 * g.out_plane(), static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(P),
                         Eigen::OuterStride<>(static_cast<Eigen::Index>(g.out_volume())));
        ym.noalias() = wm * cm;
    }
}

// Backward of conv_forward_item: accumulates into dx (if non-null) and dw (if non-null).
template <typename T>
void conv_backward_item(const ConvDims& g, const T* x, const T* w, const T* dy, T* dx, T* dw, std::vector<T>& cols)
{
    const std::size_t chunk = g.depth_chunk(sizeof(T));
    const std::size_t K = g.rows();
    MatMap<T> wm(const_cast<T*>(w), static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(K));
    for (std::size_t od0 = 0; od0 < g.dout; od0 += chunk) {
        const std::size_t od1 = std::min(g.dout, od0 + chunk);
        const std::size_t P = (od1 - od0) * g.out_plane();
        cols.resize(K * P);
        StridedMap<T> dym(const_cast<T*>(dy) + od0 * g.out_plane(), static_cast<Eigen::Index>(g.cout),
                          static_cast<Eigen::Index>(P), Eigen::OuterStride<>(static_cast<Eigen::Index>(g.out_volume())));
        MatMap<T> cm(cols.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
        if (dw) {
            im2col(x, g, od0, od1, cols.data());
            MatMap<T> dwm(dw, static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(K));
            dwm.noalias() += dym * cm.transpose();
        }
        if (dx) {
            cm.noalias() = wm.transpose() * dym;
            col2im(cols.data(), g, od0, od1, dx);
        }
    }
}

struct Rank5View
{
    std::size_t n, c, d, h, w;
};

Rank5View as_rank5(const Shape& s, const char* op)
{
    if (s.size() == 5)
        return {s[0], s[1], s[2], s[3], s[4]};
    if (s.size() == 4)
        return {1, s[0], s[1], s[2], s[3]};
    fail(ErrorKind::ShapeMismatch,
         std::string(op) + ": expected [N,C,D,H,W] or [C,D,H,W] input, got " + to_string(s));
}

Shape with_rank(const Shape& like, Rank5View v)
{
    if (like.size() == 4)
        return {v.c, v.d, v.h, v.w};
    return {v.n, v.c, v.d, v.h, v.w};
}

void require_positive(Extent3 e, const char* what)
{
    require(e.d >= 1 && e.h >= 1 && e.w >= 1, ErrorKind::InvalidGeometry, std::string(what) + " must be >= 1 per axis");
}

template <typename T>
void add_bias(T* y, const T* b, std::size_t channels, std::size_t volume)
{
    for (std::size_t c = 0; c < channels; ++c) {
        T* p = y + c * volume;
        const T v = b[c];
        for (std::size_t i = 0; i < volume; ++i)
            p[i] += v;
    }
}

template <typename T>
void accumulate_bias_grad(const T* dy, T* db, std::size_t channels, std::size_t volume)
{
    for (std::size_t c = 0; c < channels; ++c) {
        const T* p = dy + c * volume;
        T acc = T(0);
        for (std::size_t i = 0; i < volume; ++i)
            acc += p[i];
        db[c] += acc;
    }
}

} // namespace

template <typename T>
Tensor<T> conv3d(Tape<T>* tape, const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                 Extent3 padding, Extent3 stride)
{
    require_positive(stride, "conv3d stride");
    const Rank5View in = as_rank5(input.shape(), "conv3d");
    const Shape& ks = kernel.shape();
    require(ks.size() == 5, ErrorKind::ShapeMismatch, "conv3d: kernel must be [C_out,C_in,kd,kh,kw], got " + to_string(ks));
    require(ks[1] == in.c, ErrorKind::ShapeMismatch,
            "conv3d: kernel expects " + std::to_string(ks[1]) + " input channels, input " + to_string(input.shape()) +
                " has " + std::to_string(in.c));
    if (bias.defined())
        require(bias.size() == ks[0], ErrorKind::ShapeMismatch,
                "conv3d: bias has " + std::to_string(bias.size()) + " entries for " + std::to_string(ks[0]) + " filters");

    ConvDims g{};
    g.cin = in.c;
    g.din = in.d;
    g.hin = in.h;
    g.win = in.w;
    g.cout = ks[0];
    g.k = {ks[2], ks[3], ks[4]};
    g.pad = padding;
    g.stride = stride;
    const std::size_t pd = in.d + 2 * padding.d, ph = in.h + 2 * padding.h, pw = in.w + 2 * padding.w;
    require(g.k.d <= pd && g.k.h <= ph && g.k.w <= pw, ErrorKind::InvalidGeometry,
            "conv3d: kernel " + to_string(ks) + " larger than padded input " + to_string(input.shape()));
    g.dout = (pd - g.k.d) / stride.d + 1;
    g.hout = (ph - g.k.h) / stride.h + 1;
    g.wout = (pw - g.k.w) / stride.w + 1;

    Tensor<T> out(with_rank(input.shape(), {in.n, g.cout, g.dout, g.hout, g.wout}));
    {
        std::vector<T> cols;
        const T* x = input.data().data();
        const T* w = kernel.data().data();
        T* y = out.data().data();
        for (std::size_t n = 0; n < in.n; ++n) {
            T* yn = y + n * g.cout * g.out_volume();
            conv_forward_item(g, x + n * g.cin * g.in_volume(), w, yn, cols);
            if (bias.defined())
                add_bias(yn, bias.data().data(), g.cout, g.out_volume());
        }
    }

    const bool record = tape && (input.requires_grad() || kernel.requires_grad() ||
                                 (bias.defined() && bias.requires_grad()));
    if (record) {
        out.set_requires_grad(true);
        tape->record([input = input, kernel = kernel, bias = bias, out, g, batch = in.n]() mutable {
            const T* dy = std::as_const(out).grad().data();
            T* dx = input.requires_grad() ? input.grad().data() : nullptr;
            T* dw = kernel.requires_grad() ? kernel.grad().data() : nullptr;
            T* db = bias.defined() && bias.requires_grad() ? bias.grad().data() : nullptr;
            std::vector<T> cols;
            for (std::size_t n = 0; n < batch; ++n) {
                const T* dyn = dy + n * g.cout * g.out_volume();
                conv_backward_item(g, input.data().data() + n * g.cin * g.in_volume(), kernel.data().data(), dyn,
                                   dx ? dx + n * g.cin * g.in_volume() : nullptr, dw, cols);
                if (db)
                    accumulate_bias_grad(dyn, db, g.cout, g.out_volume());
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> conv_transpose3d(Tape<T>* tape, const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                           Extent3 stride)
{
    require_positive(stride, "conv_transpose3d stride");
    const Rank5View in = as_rank5(input.shape(), "conv_transpose3d");
    const Shape& ks = kernel.shape();
    require(ks.size() == 5, ErrorKind::ShapeMismatch,
            "conv_transpose3d: kernel must be [C_in,C_out,kd,kh,kw], got " + to_string(ks));
    require(ks[0] == in.c, ErrorKind::ShapeMismatch,
            "conv_transpose3d: kernel expects " + std::to_string(ks[0]) + " input channels, input " +
                to_string(input.shape()) + " has " + std::to_string(in.c));
    if (bias.defined())
        require(bias.size() == ks[1], ErrorKind::ShapeMismatch,
                "conv_transpose3d: bias has " + std::to_string(bias.size()) + " entries for " +
                    std::to_string(ks[1]) + " filters");

    // The equivalent forward convolution maps the transposed output back to
    // the transposed input; its "input" is our output.
    ConvDims g{};
    g.cin = ks[1];
    g.cout = ks[0];
    g.k = {ks[2], ks[3], ks[4]};
    g.pad = {0, 0, 0};
    g.stride = stride;
    g.dout = in.d;
    g.hout = in.h;
    g.wout = in.w;
    g.din = (in.d - 1) * stride.d + g.k.d;
    g.hin = (in.h - 1) * stride.h + g.k.h;
    g.win = (in.w - 1) * stride.w + g.k.w;

    Tensor<T> out(with_rank(input.shape(), {in.n, g.cin, g.din, g.hin, g.win}));
    const std::size_t K = g.rows();
    const std::size_t chunk = g.depth_chunk(sizeof(T));
    {
        std::vector<T> cols;
        MatMap<T> wm(const_cast<T*>(kernel.data().data()), static_cast<Eigen::Index>(g.cout),
                     static_cast<Eigen::Index>(K));
        for (std::size_t n = 0; n < in.n; ++n) {
            const T* xn = input.data().data() + n * g.cout * g.out_volume();
            T* yn = out.data().data() + n * g.cin * g.in_volume();
            for (std::size_t od0 = 0; od0 < g.dout; od0 += chunk) {
                const std::size_t od1 = std::min(g.dout, od0 + chunk);
                const std::size_t P = (od1 - od0) * g.out_plane();
                cols.resize(K * P);
                MatMap<T> cm(cols.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
                StridedMap<T> xm(const_cast<T*>(xn) + od0 * g.out_plane(), static_cast<Eigen::Index>(g.cout),
                                 static_cast<Eigen::Index>(P),
                                 Eigen::OuterStride<>(static_cast<Eigen::Index>(g.out_volume())));
                cm.noalias() = wm.transpose() * xm;
                col2im(cols.data(), g, od0, od1, yn);
            }
            if (bias.defined())
                add_bias(yn, bias.data().data(), g.cin, g.in_volume());
        }
    }

    const bool record = tape && (input.requires_grad() || kernel.requires_grad() ||
                                 (bias.defined() && bias.requires_grad()));
    if (record) {
        out.set_requires_grad(true);
        tape->record([input = input, kernel = kernel, bias = bias, out, g, batch = in.n]() mutable {
            const T* dy = std::as_const(out).grad().data();
            T* dx = input.requires_grad() ? input.grad().data() : nullptr;
            T* dw = kernel.requires_grad() ? kernel.grad().data() : nullptr;
            T* db = bias.defined() && bias.requires_grad() ? bias.grad().data() : nullptr;
            const std::size_t K = g.rows();
            const std::size_t chunk = g.depth_chunk(sizeof(T));
            MatMap<T> wm(const_cast<T*>(kernel.data().data()), static_cast<Eigen::Index>(g.cout),
                         static_cast<Eigen::Index>(K));
            std::vector<T> cols;
            for (std::size_t n = 0; n < batch; ++n) {
                const T* dyn = dy + n * g.cin * g.in_volume();
                const T* xn = input.data().data() + n * g.cout * g.out_volume();
                for (std::size_t od0 = 0; od0 < g.dout; od0 += chunk) {
                    const std::size_t od1 = std::min(g.dout, od0 + chunk);
                    const std::size_t P = (od1 - od0) * g.out_plane();
                    cols.resize(K * P);
                    im2col(dyn, g, od0, od1, cols.data());
                    MatMap<T> cm(cols.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
                    if (dx) {
                        StridedMap<T> dxm(dx + n * g.cout * g.out_volume() + od0 * g.out_plane(),
                                          static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(P),
                                          Eigen::OuterStride<>(static_cast<Eigen::Index>(g.out_volume())));
                        dxm.noalias() += wm * cm;
                    }
                    if (dw) {
                        StridedMap<T> xm(const_cast<T*>(xn) + od0 * g.out_plane(), static_cast<Eigen::Index>(g.cout),
                                         static_cast<Eigen::Index>(P),
                                         Eigen::OuterStride<>(static_cast<Eigen::Index>(g.out_volume())));
                        MatMap<T> dwm(dw, static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(K));
                        dwm.noalias() += xm * cm.transpose();
                    }
                }
                if (db)
                    accumulate_bias_grad(dyn, db, g.cin, g.in_volume());
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> maxpool3d(Tape<T>* tape, const Tensor<T>& input, Extent3 window)
{
    require_positive(window, "maxpool3d window");
    const Rank5View in = as_rank5(input.shape(), "maxpool3d");
    require(in.d % window.d == 0 && in.h % window.h == 0 && in.w % window.w == 0, ErrorKind::InvalidGeometry,
            "maxpool3d: extents " + to_string(input.shape()) + " not divisible by window (" + std::to_string(window.d) +
                "," + std::to_string(window.h) + "," + std::to_string(window.w) + ")");
    const std::size_t od = in.d / window.d, oh = in.h / window.h, ow = in.w / window.w;
    Tensor<T> out(with_rank(input.shape(), {in.n, in.c, od, oh, ow}));

    std::vector<std::size_t> argmax(out.size());
    const T* x = input.data().data();
    T* y = out.data().data();
    std::size_t o = 0;
    for (std::size_t nc = 0; nc < in.n * in.c; ++nc) {
        const std::size_t base = nc * in.d * in.h * in.w;
        for (std::size_t z = 0; z < od; ++z)
            for (std::size_t r = 0; r < oh; ++r)
                for (std::size_t c = 0; c < ow; ++c, ++o) {
                    T best = -std::numeric_limits<T>::infinity();
                    std::size_t best_idx = 0;
                    bool first = true;
                    for (std::size_t dz = 0; dz < window.d; ++dz)
                        for (std::size_t dr = 0; dr < window.h; ++dr)
                            for (std::size_t dc = 0; dc < window.w; ++dc) {
                                const std::size_t idx = base + ((z * window.d + dz) * in.h + r * window.h + dr) * in.w +
                                                        c * window.w + dc;
                                // Strict comparison keeps the first maximum in scan order.
                                if (first || x[idx] > best) {
                                    best = x[idx];
                                    best_idx = idx;
                                    first = false;
                                }
                            }
                    y[o] = best;
                    argmax[o] = best_idx;
                }
    }
    if (BranchTrace* trace = BranchTrace::active())
        for (std::size_t idx : argmax)
            trace->mix(idx);

    if (tape && input.requires_grad()) {
        out.set_requires_grad(true);
        tape->record([in = input, out, argmax = std::move(argmax)]() mutable {
            auto gy = std::as_const(out).grad();
            auto gx = in.grad();
            for (std::size_t i = 0; i < gy.size(); ++i)
                gx[argmax[i]] += gy[i];
        });
    }
    return out;
}

#define MSFA_INSTANTIATE(T)                                                                                        \
    template Tensor<T> conv3d(Tape<T>*, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Extent3, Extent3);  \
    template Tensor<T> conv_transpose3d(Tape<T>*, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Extent3); \
    template Tensor<T> maxpool3d(Tape<T>*, const Tensor<T>&, Extent3);

MSFA_INSTANTIATE(float)
MSFA_INSTANTIATE(double)

#undef MSFA_INSTANTIATE

} // namespace msfa::ad
