// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "hsi/render.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <cmath>

namespace msfa {

std::array<std::vector<double>, 3> rgb_weights(const std::vector<double>& wavelengths_nm)
{
    constexpr double centers[3] = {610.0, 540.0, 470.0};
    constexpr double sigma = 30.0;
    std::array<std::vector<double>, 3> weights;
    for (int c = 0; c < 3; ++c) {
        std::vector<double>& w = weights[std::size_t(c)];
        w.resize(wavelengths_nm.size());
        double total = 0.0;
        for (std::size_t b = 0; b < w.size(); ++b) {
            const double d = (wavelengths_nm[b] - centers[c]) / sigma;
            w[b] = std::exp(-0.5 * d * d);
            total += w[b];
        }
        if (total < 1e-12) {
            std::fill(w.begin(), w.end(), 0.0);
            std::size_t nearest = 0;
            for (std::size_t b = 1; b < w.size(); ++b)
                if (std::abs(wavelengths_nm[b] - centers[c]) < std::abs(wavelengths_nm[nearest] - centers[c]))
                    nearest = b;
            w[nearest] = 1.0;
        } else {
            for (double& v : w)
                v /= total;
        }
    }
    return weights;
}

RgbImage render_rgb(const SpectralCube& cube)
{
    const auto weights = rgb_weights(cube.wavelengths());
    RgbImage img{cube.height(), cube.width(), std::vector<std::uint8_t>(cube.plane_size() * 3)};
    for (std::size_t p = 0; p < cube.plane_size(); ++p)
        for (std::size_t c = 0; c < 3; ++c) {
            double v = 0.0;
            for (std::size_t b = 0; b < cube.bands(); ++b)
                v += weights[c][b] * cube.band(b)[p];
            img.rgb[p * 3 + c] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        }
    return img;
}

Plane error_map_l1(const SpectralCube& a, const SpectralCube& b)
{
    require(a.bands() == b.bands() && a.height() == b.height() && a.width() == b.width(), ErrorKind::ShapeMismatch,
            "error_map_l1: cube shapes differ");
    Plane out{a.height(), a.width(), std::vector<float>(a.plane_size())};
    for (std::size_t p = 0; p < a.plane_size(); ++p) {
        double acc = 0.0;
        for (std::size_t k = 0; k < a.bands(); ++k)
            acc += std::abs(double(a.band(k)[p]) - double(b.band(k)[p]));
        out.data[p] = static_cast<float>(acc / double(a.bands()));
    }
    return out;
}

} // namespace msfa
