// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "hsi/cube.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace msfa {

/// k*k-band cube holding each band's raw samples at its lattice sites;
/// everything else is zero and masked out.
struct SparseCube
{
    SpectralCube values;
    std::vector<std::uint8_t> mask; ///< same layout as values
    MsfaPattern pattern;

    bool valid(std::size_t b, std::size_t y, std::size_t x) const
    {
        return mask[(b * values.height() + y) * values.width() + x] != 0;
    }
};

SparseCube scatter(const MosaicImage& mosaic);

/// Inverse of scatter: the raw frame the sparse cube was built from.
MosaicImage gather(const SparseCube& sparse);

/// Fills every unsampled entry of band b with the mean of b's samples.
SpectralCube meanfill(const SparseCube& sparse);

/// One pixel per k x k tile: value (b, ty, tx) is the raw sample of band b
/// inside tile (ty, tx).
SpectralCube lowres_cube(const MosaicImage& mosaic);

/// Mask-normalized separable triangle filter, weights (k - |t|) / k for
/// |t| < k. Throws InvalidGeometry if some pixel has no sample in reach.
std::vector<float> weighted_bilinear(std::span<const float> values, std::span<const std::uint8_t> mask,
                                     std::size_t height, std::size_t width, std::size_t k);

SpectralCube wb_demosaic(const SparseCube& sparse);

enum class IntensityKernel {
    Mean,     ///< k x k box average (centered: k+1 taps with half-weight ends for even k)
    Bilinear, ///< the weighted bilinear triangle
};

/// Pan-chromatic estimate: raw frame filtered with the intensity kernel,
/// normalized by the kernel mass inside the image.
Plane intensity_estimate(const MosaicImage& mosaic, IntensityKernel kernel = IntensityKernel::Mean);

/// Intensity-difference demosaicing: intensity estimate plus weighted-bilinear
/// interpolation of each band's raw-minus-intensity differences, clamped to [0, 1].
SpectralCube id_demosaic(const SparseCube& sparse, IntensityKernel kernel = IntensityKernel::Mean);

} // namespace msfa
