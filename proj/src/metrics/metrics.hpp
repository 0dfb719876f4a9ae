// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "hsi/cube.hpp"

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace msfa {

/// Non-owning band-major cube view; lets metrics run on float or double data.
template <typename T>
struct CubeView
{
    std::size_t bands = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::span<const T> data;
};

inline CubeView<float> view(const SpectralCube& c)
{
    return {c.bands(), c.height(), c.width(), c.data()};
}

constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;
constexpr std::size_t kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

template <typename T> double mse(CubeView<T> o, CubeView<T> p);
/// +infinity when the images are identical.
template <typename T> double psnr(CubeView<T> o, CubeView<T> p, double peak = 1.0);
/// Mean over bands of the mean SSIM over all fully contained 11x11 windows.
template <typename T> double ssim(CubeView<T> o, CubeView<T> p);

struct SamResult
{
    double mean_rad = 0.0;
    std::size_t excluded = 0; ///< pixels where either spectrum is all zero
};
template <typename T> SamResult sam_detail(CubeView<T> o, CubeView<T> p);
template <typename T> double sam(CubeView<T> o, CubeView<T> p) { return sam_detail(o, p).mean_rad; }

struct MetricReport
{
    double ssim = 1.0;
    double psnr_db = std::numeric_limits<double>::infinity();
    double sam_rad = 0.0;
    double mse = 0.0;
    std::size_t sam_excluded = 0;
};

/// All metrics on the cubes with `crop_margin` pixels removed from each edge.
template <typename T> MetricReport evaluate(CubeView<T> o, CubeView<T> p, std::size_t crop_margin = 4);

inline double mse(const SpectralCube& o, const SpectralCube& p) { return mse(view(o), view(p)); }
inline double psnr(const SpectralCube& o, const SpectralCube& p, double peak = 1.0) { return psnr(view(o), view(p), peak); }
inline double ssim(const SpectralCube& o, const SpectralCube& p) { return ssim(view(o), view(p)); }
inline double sam(const SpectralCube& o, const SpectralCube& p) { return sam(view(o), view(p)); }
inline MetricReport evaluate(const SpectralCube& o, const SpectralCube& p, std::size_t crop_margin = 4)
{
    return evaluate(view(o), view(p), crop_margin);
}

/// {"ssim", "psnr_db", "sam_rad", "mse"}; infinite PSNR is written as "inf".
std::string report_to_json(const MetricReport& r);
MetricReport report_from_json(const std::string& text);

/// Field-wise arithmetic mean. Infinite PSNR entries make the mean infinite.
MetricReport mean_report(const std::vector<MetricReport>& reports);

} // namespace msfa
