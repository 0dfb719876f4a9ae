// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "camera/profile.hpp"
#include "hsi/cube.hpp"

#include <vector>

namespace msfa {

/// Integral of T * I * f_b over the profile's integration range.
double band_response(const CameraProfile& profile, std::size_t band);

/// Normalized camera response of band b to reflectance r:
///   r_b = int(T I f_b r) / int(T I f_b)  over [lambda_min, lambda_max].
/// All curves are piecewise linear, so the integrand is a polynomial of
/// degree <= 4 between consecutive knots of the merged sample grids and
/// three-point Gauss-Legendre per knot interval integrates it exactly.
double simulate_band(const SpectralCurve& reflectance, const CameraProfile& profile, std::size_t band);

/// Linear map from a cube's bands to the camera's bands. Each pixel's
/// spectrum is taken as the piecewise-linear curve through its band samples,
/// so row b holds int(T I f_b phi_j) / int(T I f_b) for the hat functions
/// phi_j on the source wavelengths. Rows are nonnegative and sum to one.
std::vector<std::vector<double>> real_band_weights(const std::vector<double>& source_wavelengths,
                                                   const CameraProfile& profile);

/// Linear interpolation of the source bands onto `targets` (default: the
/// 16-band 450..630 nm grid). Exact wavelength matches copy the band.
SpectralCube simulate_simple(const SpectralCube& cube, const std::vector<double>& targets = simple_band_grid());

/// Per-pixel camera response; output wavelengths are the pattern's band centers.
SpectralCube simulate_real(const SpectralCube& cube, const CameraProfile& profile);

/// raw(y, x) = cube[pattern.band_at(y, x)](y, x).
MosaicImage mosaic(const SpectralCube& cube, const MsfaPattern& pattern);

} // namespace msfa
