// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include <string>
#include <vector>

namespace msfa {

/// Piecewise-linear curve through (wavelength, value) samples.
class SpectralCurve
{
public:
    SpectralCurve() = default;
    SpectralCurve(std::vector<double> wavelengths_nm, std::vector<double> values);

    const std::vector<double>& wavelengths() const noexcept { return wavelengths_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double min_wavelength() const { return wavelengths_.front(); }
    double max_wavelength() const { return wavelengths_.back(); }
    bool covers(double lo, double hi) const;

    /// Linear interpolation; throws Domain outside the sampled range.
    double operator()(double wavelength_nm) const;

private:
    std::vector<double> wavelengths_;
    std::vector<double> values_;
};

/// CSV with header row "wavelength_nm,value".
SpectralCurve parse_curve_csv(const std::string& text, const std::string& context);
SpectralCurve load_curve_csv(const std::string& path);
std::string curve_to_csv(const SpectralCurve& curve);
void save_curve_csv(const SpectralCurve& curve, const std::string& path);

} // namespace msfa
