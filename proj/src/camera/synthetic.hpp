// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "hsi/cube.hpp"

#include <cstdint>
#include <vector>

namespace msfa {

struct SyntheticSceneOptions
{
    std::size_t height = 100;
    std::size_t width = 100;
    std::vector<double> wavelengths_nm; ///< empty: 16 bands at 450..630 nm
    std::size_t materials = 4;
    std::size_t waves = 6;          ///< cosines per abundance field
    double max_frequency = 0.08;    ///< cycles per pixel, per axis
    std::uint64_t seed = 0;
};

/// Reflectance scene in [0, 1]: a smooth shading field times a mixture of
/// material spectra whose abundances are sums of random low-frequency
/// cosines. Material spectra are sums of broad Gaussian bumps over a
/// baseline. Output depends only on the options (bit-reproducible).
SpectralCube synthetic_scene(const SyntheticSceneOptions& options);

} // namespace msfa
