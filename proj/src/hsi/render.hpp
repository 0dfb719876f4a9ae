// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "hsi/cube.hpp"
#include "hsi/cube_io.hpp"

#include <array>

namespace msfa {

/// Per-band weights for the R, G and B channels: Gaussians (sigma 30 nm)
/// centered at 610, 540 and 470 nm, each normalized to sum to one. A channel
/// whose Gaussian misses every band falls back to the nearest band.
std::array<std::vector<double>, 3> rgb_weights(const std::vector<double>& wavelengths_nm);

RgbImage render_rgb(const SpectralCube& cube);

/// Per-pixel mean absolute difference across bands.
Plane error_map_l1(const SpectralCube& a, const SpectralCube& b);

} // namespace msfa
