// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "camera/curve.hpp"
#include "hsi/cube.hpp"

#include <string>
#include <vector>

namespace msfa {

/// Optical transmission, illuminant and k*k filter responses of a snapshot
/// camera, plus the filter tile layout and integration range.
struct CameraProfile
{
    SpectralCurve transmission;
    SpectralCurve irradiance;
    std::vector<SpectralCurve> filters; ///< indexed by band
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    MsfaPattern pattern;

    /// Throws Profile if a curve misses the integration range, the filter
    /// count disagrees with the pattern, or a band has zero response.
    void validate() const;
};

/// 16 bands at 450, 462, ..., 630 nm.
std::vector<double> simple_band_grid();

/// Synthetic profile: Gaussian filters (FWHM 30 nm) centered on the simple
/// band grid, smooth lens transmission, 2856 K blackbody illuminant, all
/// sampled at 1 nm over 400..700 nm; integration over 420..660 nm.
CameraProfile default_profile();

/// Directory layout: transmission.csv, irradiance.csv, filter_NN.csv and
/// profile.json with lambda_min, lambda_max, tile, layout and wavelengths_nm.
CameraProfile load_profile(const std::string& dir);
void save_profile(const CameraProfile& profile, const std::string& dir);

} // namespace msfa
