// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "demosaic/classic.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <cmath>

namespace msfa {

namespace {

std::vector<double> triangle_taps(std::size_t k)
{
    std::vector<double> t(2 * k - 1);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = std::abs(double(i) - double(k - 1));
        t[i] = (double(k) - d) / double(k);
    }
    return t;
}

std::vector<double> mean_taps(std::size_t k)
{
    if (k % 2 == 1)
        return std::vector<double>(k, 1.0 / double(k));
    std::vector<double> t(k + 1, 1.0 / double(k));
    t.front() = t.back() = 0.5 / double(k);
    return t;
}

/// Zero-padded separable correlation with an odd-length symmetric kernel.
std::vector<double> separable(std::span<const double> in, std::size_t h, std::size_t w, const std::vector<double>& taps)
{
    const std::ptrdiff_t r = std::ptrdiff_t(taps.size() / 2);
    const std::ptrdiff_t H = std::ptrdiff_t(h), W = std::ptrdiff_t(w);
    std::vector<double> tmp(h * w, 0.0), out(h * w, 0.0);
    for (std::ptrdiff_t y = 0; y < H; ++y)
        for (std::ptrdiff_t x = 0; x < W; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t d = -r; d <= r; ++d)
                if (x + d >= 0 && x + d < W)
                    acc += taps[std::size_t(d + r)] * in[std::size_t(y * W + x + d)];
            tmp[std::size_t(y * W + x)] = acc;
        }
    for (std::ptrdiff_t y = 0; y < H; ++y)
        for (std::ptrdiff_t x = 0; x < W; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t d = -r; d <= r; ++d)
                if (y + d >= 0 && y + d < H)
                    acc += taps[std::size_t(d + r)] * tmp[std::size_t((y + d) * W + x)];
            out[std::size_t(y * W + x)] = acc;
        }
    return out;
}

std::vector<double> normalized_filter(std::span<const double> values, std::span<const double> weights, std::size_t h,
                                      std::size_t w, const std::vector<double>& taps)
{
    std::vector<double> num = separable(values, h, w, taps);
    const std::vector<double> den = separable(weights, h, w, taps);
    for (std::size_t i = 0; i < num.size(); ++i) {
        require(den[i] > 0.0, ErrorKind::InvalidGeometry,
                "no sample within interpolation reach of pixel " + std::to_string(i));
        num[i] /= den[i];
    }
    return num;
}

std::vector<double> weighted_bilinear_d(std::span<const double> values, std::span<const std::uint8_t> mask,
                                        std::size_t h, std::size_t w, std::size_t k)
{
    std::vector<double> v(h * w), m(h * w);
    for (std::size_t i = 0; i < v.size(); ++i) {
        m[i] = mask[i] ? 1.0 : 0.0;
        v[i] = mask[i] ? values[i] : 0.0;
    }
    return normalized_filter(v, m, h, w, triangle_taps(k));
}

} // namespace

SparseCube scatter(const MosaicImage& m)
{
    const MsfaPattern& p = m.pattern();
    SparseCube s{SpectralCube(p.band_count(), m.height(), m.width(), p.wavelengths()),
                 std::vector<std::uint8_t>(p.band_count() * m.height() * m.width(), 0), p};
    for (std::size_t y = 0; y < m.height(); ++y)
        for (std::size_t x = 0; x < m.width(); ++x) {
            const std::size_t b = std::size_t(p.band_at(y, x));
            s.values.at(b, y, x) = m.at(y, x);
            s.mask[(b * m.height() + y) * m.width() + x] = 1;
        }
    return s;
}

MosaicImage gather(const SparseCube& s)
{
    MosaicImage m(s.values.height(), s.values.width(), s.pattern);
    for (std::size_t y = 0; y < m.height(); ++y)
        for (std::size_t x = 0; x < m.width(); ++x)
            m.at(y, x) = s.values.at(std::size_t(s.pattern.band_at(y, x)), y, x);
    return m;
}

SpectralCube meanfill(const SparseCube& s)
{
    SpectralCube out = s.values;
    const std::size_t n = out.plane_size();
    for (std::size_t b = 0; b < out.bands(); ++b) {
        auto band = out.band(b);
        const std::uint8_t* mk = &s.mask[b * n];
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mk[i]) {
                sum += band[i];
                ++count;
            }
        require(count > 0, ErrorKind::InvalidArgument, "meanfill: band " + std::to_string(b) + " has no samples");
        const float fill = static_cast<float>(sum / double(count));
        for (std::size_t i = 0; i < n; ++i)
            if (!mk[i])
                band[i] = fill;
    }
    return out;
}

SpectralCube lowres_cube(const MosaicImage& m)
{
    const MsfaPattern& p = m.pattern();
    const std::size_t k = p.tile();
    SpectralCube out(p.band_count(), m.height() / k, m.width() / k, p.wavelengths());
    for (std::size_t ty = 0; ty < out.height(); ++ty)
        for (std::size_t tx = 0; tx < out.width(); ++tx)
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t c = 0; c < k; ++c)
                    out.at(std::size_t(p.layout()[r * k + c]), ty, tx) = m.at(ty * k + r, tx * k + c);
    return out;
}

std::vector<float> weighted_bilinear(std::span<const float> values, std::span<const std::uint8_t> mask,
                                     std::size_t h, std::size_t w, std::size_t k)
{
    require(values.size() == h * w && mask.size() == h * w, ErrorKind::ShapeMismatch,
            "weighted_bilinear: plane size mismatch");
    require(k >= 1, ErrorKind::InvalidArgument, "weighted_bilinear: k must be >= 1");
    const std::vector<double> v(values.begin(), values.end());
    const auto r = weighted_bilinear_d(v, mask, h, w, k);
    return {r.begin(), r.end()};
}

SpectralCube wb_demosaic(const SparseCube& s)
{
    SpectralCube out(s.values.bands(), s.values.height(), s.values.width(), s.values.wavelengths());
    const std::size_t n = out.plane_size();
    for (std::size_t b = 0; b < out.bands(); ++b) {
        const auto r = weighted_bilinear(s.values.band(b), std::span(s.mask).subspan(b * n, n), out.height(),
                                         out.width(), s.pattern.tile());
        std::copy(r.begin(), r.end(), out.band(b).begin());
    }
    return out;
}

namespace {

std::vector<double> intensity_d(const MosaicImage& m, IntensityKernel kernel)
{
    const std::size_t k = m.pattern().tile();
    const auto taps = kernel == IntensityKernel::Mean ? mean_taps(k) : triangle_taps(k);
    const std::vector<double> raw(m.data().begin(), m.data().end());
    const std::vector<double> ones(raw.size(), 1.0);
    return normalized_filter(raw, ones, m.height(), m.width(), taps);
}

} // namespace

Plane intensity_estimate(const MosaicImage& m, IntensityKernel kernel)
{
    const auto v = intensity_d(m, kernel);
    return {m.height(), m.width(), std::vector<float>(v.begin(), v.end())};
}

SpectralCube id_demosaic(const SparseCube& s, IntensityKernel kernel)
{
    const MosaicImage raw = gather(s);
    const std::vector<double> intensity = intensity_d(raw, kernel);
    SpectralCube out(s.values.bands(), s.values.height(), s.values.width(), s.values.wavelengths());
    const std::size_t n = out.plane_size();
    std::vector<double> diff(n);
    for (std::size_t b = 0; b < out.bands(); ++b) {
        const auto mask = std::span(s.mask).subspan(b * n, n);
        const auto vals = s.values.band(b);
        for (std::size_t i = 0; i < n; ++i)
            diff[i] = mask[i] ? double(vals[i]) - intensity[i] : 0.0;
        const auto d = weighted_bilinear_d(diff, mask, out.height(), out.width(), s.pattern.tile());
        auto dst = out.band(b);
        for (std::size_t i = 0; i < n; ++i)
            dst[i] = static_cast<float>(std::clamp(intensity[i] + d[i], 0.0, 1.0));
    }
    return out;
}

} // namespace msfa
