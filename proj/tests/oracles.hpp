// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

// Independent reference implementations used as test oracles. Nothing here
// calls into the code paths it is used to check.

#pragma once

#include "ad/tensor.hpp"
#include "ad/trace.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace msfa::testing {

using ad::Extent3;
using ad::Shape;
using ad::Tensor;

template <typename T>
Tensor<T> random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0, bool rg = false)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<T> v(ad::element_count(shape));
    for (T& x : v)
        x = T(u(rng));
    return Tensor<T>(std::move(shape), std::move(v), rg);
}

/// Six-nested-loop cross-correlation on rank-5 [N,C,D,H,W] input.
inline std::vector<double> conv3d_loops(const std::vector<double>& x, Shape xs, const std::vector<double>& k, Shape ks,
                                        const std::vector<double>* bias, Extent3 pad, Extent3 stride, Shape& out_shape)
{
    const long N = long(xs[0]), C = long(xs[1]), D = long(xs[2]), H = long(xs[3]), W = long(xs[4]);
    const long O = long(ks[0]), KD = long(ks[2]), KH = long(ks[3]), KW = long(ks[4]);
    const long OD = (D + 2 * long(pad.d) - KD) / long(stride.d) + 1;
    const long OH = (H + 2 * long(pad.h) - KH) / long(stride.h) + 1;
    const long OW = (W + 2 * long(pad.w) - KW) / long(stride.w) + 1;
    out_shape = {std::size_t(N), std::size_t(O), std::size_t(OD), std::size_t(OH), std::size_t(OW)};
    std::vector<double> y(std::size_t(N * O * OD * OH * OW), 0.0);
    for (long n = 0; n < N; ++n)
        for (long o = 0; o < O; ++o)
            for (long z = 0; z < OD; ++z)
                for (long r = 0; r < OH; ++r)
                    for (long c = 0; c < OW; ++c) {
                        double acc = bias ? (*bias)[std::size_t(o)] : 0.0;
                        for (long i = 0; i < C; ++i)
                            for (long a = 0; a < KD; ++a)
                                for (long b = 0; b < KH; ++b)
                                    for (long e = 0; e < KW; ++e) {
                                        const long iz = z * long(stride.d) + a - long(pad.d);
                                        const long iy = r * long(stride.h) + b - long(pad.h);
                                        const long ix = c * long(stride.w) + e - long(pad.w);
                                        if (iz < 0 || iz >= D || iy < 0 || iy >= H || ix < 0 || ix >= W)
                                            continue;
                                        acc += x[std::size_t((((n * C + i) * D + iz) * H + iy) * W + ix)] *
                                               k[std::size_t((((o * C + i) * KD + a) * KH + b) * KW + e)];
                                    }
                        y[std::size_t((((n * O + o) * OD + z) * OH + r) * OW + c)] = acc;
                    }
    return y;
}

/// Scatter-add transposed convolution; kernel is [C_in, C_out, kd, kh, kw].
inline std::vector<double> conv_transpose3d_loops(const std::vector<double>& x, Shape xs, const std::vector<double>& k,
                                                  Shape ks, Extent3 stride, Shape& out_shape)
{
    const long N = long(xs[0]), C = long(xs[1]), D = long(xs[2]), H = long(xs[3]), W = long(xs[4]);
    const long O = long(ks[1]), KD = long(ks[2]), KH = long(ks[3]), KW = long(ks[4]);
    const long OD = (D - 1) * long(stride.d) + KD;
    const long OH = (H - 1) * long(stride.h) + KH;
    const long OW = (W - 1) * long(stride.w) + KW;
    out_shape = {std::size_t(N), std::size_t(O), std::size_t(OD), std::size_t(OH), std::size_t(OW)};
    std::vector<double> y(std::size_t(N * O * OD * OH * OW), 0.0);
    for (long n = 0; n < N; ++n)
        for (long i = 0; i < C; ++i)
            for (long z = 0; z < D; ++z)
                for (long r = 0; r < H; ++r)
                    for (long c = 0; c < W; ++c) {
                        const double v = x[std::size_t((((n * C + i) * D + z) * H + r) * W + c)];
                        for (long o = 0; o < O; ++o)
                            for (long a = 0; a < KD; ++a)
                                for (long b = 0; b < KH; ++b)
                                    for (long e = 0; e < KW; ++e) {
                                        const long oz = z * long(stride.d) + a;
                                        const long oy = r * long(stride.h) + b;
                                        const long ox = c * long(stride.w) + e;
                                        y[std::size_t((((n * O + o) * OD + oz) * OH + oy) * OW + ox)] +=
                                            v * k[std::size_t((((i * O + o) * KD + a) * KH + b) * KW + e)];
                                    }
                    }
    return y;
}

inline std::vector<double> maxpool_loops(const std::vector<double>& x, Shape xs, Extent3 win)
{
    const std::size_t N = xs[0] * xs[1], D = xs[2], H = xs[3], W = xs[4];
    std::vector<double> y;
    for (std::size_t p = 0; p < N; ++p)
        for (std::size_t z = 0; z < D / win.d; ++z)
            for (std::size_t r = 0; r < H / win.h; ++r)
                for (std::size_t c = 0; c < W / win.w; ++c) {
                    double m = -INFINITY;
                    for (std::size_t a = 0; a < win.d; ++a)
                        for (std::size_t b = 0; b < win.h; ++b)
                            for (std::size_t e = 0; e < win.w; ++e)
                                m = std::max(m, x[((p * D + z * win.d + a) * H + r * win.h + b) * W + c * win.w + e]);
                    y.push_back(m);
                }
    return y;
}

struct GradCheckResult
{
    double max_rel_error = 0.0;
    std::size_t probes = 0;   ///< parameters compared
    std::size_t excluded = 0; ///< draws whose +-h stencil changed a ReLU sign or max-pool argmax
};

/// Central-difference gradient check. `loss_fn` builds a scalar loss and
/// records onto `tape` when it is non-null. Parameters are drawn uniformly
/// at random until `probes` of them have a stencil on which every ReLU and
/// max-pool stays on the same linear piece as the base point; only there is
/// the loss differentiable across [theta - h, theta + h]. Relative error
/// is |a - n| / max(|a|, |n|, 1e-8).
inline GradCheckResult finite_difference_check(const std::function<Tensor<double>(ad::Tape<double>*)>& loss_fn,
                                               std::vector<Tensor<double>> params, std::size_t probes,
                                               std::uint64_t seed, double h = 1e-4)
{
    for (Tensor<double>& p : params)
        p.zero_grad();
    ad::Tape<double> tape;
    std::uint64_t base_branch = 0;
    Tensor<double> loss;
    {
        ad::BranchTrace trace;
        loss = loss_fn(&tape);
        base_branch = trace.fingerprint();
    }
    tape.backward(loss);

    std::size_t total = 0;
    for (const Tensor<double>& p : params)
        total += p.size();

    const auto eval = [&](std::uint64_t& branch) {
        ad::BranchTrace trace;
        const double v = loss_fn(nullptr).item();
        branch = trace.fingerprint();
        return v;
    };

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    GradCheckResult result;
    const std::size_t max_draws = 50 * probes;
    for (std::size_t draw = 0; draw < max_draws && result.probes < probes; ++draw) {
        std::size_t flat = pick(rng);
        std::size_t which = 0;
        while (flat >= params[which].size())
            flat -= params[which++].size();
        Tensor<double>& p = params[which];
        const double analytic = std::as_const(p).grad()[flat];
        const double saved = p.data()[flat];
        std::uint64_t b_up = 0, b_down = 0;
        p.data()[flat] = saved + h;
        const double up = eval(b_up);
        p.data()[flat] = saved - h;
        const double down = eval(b_down);
        p.data()[flat] = saved;
        if (b_up != base_branch || b_down != base_branch) {
            ++result.excluded;
            continue;
        }
        const double numeric = (up - down) / (2 * h);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        result.max_rel_error = std::max(result.max_rel_error, std::abs(analytic - numeric) / denom);
        ++result.probes;
    }
    return result;
}

/// Linear interpolation through (xs, ys), written independently of SpectralCurve.
inline double pl_interp(const std::vector<double>& xs, const std::vector<double>& ys, double x)
{
    std::size_t i = 0;
    while (i + 2 < xs.size() && x > xs[i + 1])
        ++i;
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] * (1.0 - t) + ys[i + 1] * t;
}

/// Composite trapezoid rule with n equally spaced points on [lo, hi].
inline double dense_trapezoid(const std::function<double(double)>& f, double lo, double hi, std::size_t n)
{
    const double h = (hi - lo) / double(n - 1);
    double acc = 0.5 * (f(lo) + f(hi));
    for (std::size_t i = 1; i + 1 < n; ++i)
        acc += f(lo + h * double(i));
    return acc * h;
}

/// Weighted bilinear by direct summation: every pixel is the weighted mean of
/// the masked samples with |dy|, |dx| < k, weights (k - |dy|)(k - |dx|).
inline std::vector<double> wb_bruteforce(const std::vector<double>& values, const std::vector<std::uint8_t>& mask,
                                         std::size_t h, std::size_t w, std::size_t k)
{
    std::vector<double> out(h * w, 0.0);
    const long K = long(k);
    for (long y = 0; y < long(h); ++y)
        for (long x = 0; x < long(w); ++x) {
            double num = 0.0, den = 0.0;
            for (long sy = std::max(0L, y - K + 1); sy <= std::min(long(h) - 1, y + K - 1); ++sy)
                for (long sx = std::max(0L, x - K + 1); sx <= std::min(long(w) - 1, x + K - 1); ++sx) {
                    const std::size_t i = std::size_t(sy) * w + std::size_t(sx);
                    if (!mask[i])
                        continue;
                    const double wt = double(K - std::abs(sy - y)) * double(K - std::abs(sx - x));
                    num += wt * values[i];
                    den += wt;
                }
            out[std::size_t(y) * w + std::size_t(x)] = num / den;
        }
    return out;
}

/// Single-band SSIM by explicit summation over every valid 11x11 window
/// with a sigma 1.5 Gaussian, using centered second moments.
inline double ssim_direct(const std::vector<double>& a, const std::vector<double>& b, std::size_t h, std::size_t w)
{
    double g[11][11], gs = 0.0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j)
            gs += g[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2.0 * 1.5 * 1.5));
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t y = 0; y + 11 <= h; ++y)
        for (std::size_t x = 0; x + 11 <= w; ++x) {
            double m1 = 0, m2 = 0;
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    m1 += g[i][j] / gs * a[(y + std::size_t(i)) * w + x + std::size_t(j)];
                    m2 += g[i][j] / gs * b[(y + std::size_t(i)) * w + x + std::size_t(j)];
                }
            double v1 = 0, v2 = 0, cv = 0;
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    const double da = a[(y + std::size_t(i)) * w + x + std::size_t(j)] - m1;
                    const double db = b[(y + std::size_t(i)) * w + x + std::size_t(j)] - m2;
                    v1 += g[i][j] / gs * da * da;
                    v2 += g[i][j] / gs * db * db;
                    cv += g[i][j] / gs * da * db;
                }
            total += (2 * m1 * m2 + c1) * (2 * cv + c2) / ((m1 * m1 + m2 * m2 + c1) * (v1 + v2 + c2));
            ++count;
        }
    return total / double(count);
}

} // namespace msfa::testing
