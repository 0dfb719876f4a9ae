// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "camera/simulate.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <cmath>

namespace msfa {

namespace {

/// Sorted, de-duplicated interval endpoints: lo, hi and every knot strictly between.
std::vector<double> merged_knots(double lo, double hi, std::initializer_list<const std::vector<double>*> grids)
{
    std::vector<double> k{lo, hi};
    for (const auto* g : grids)
        for (double w : *g)
            if (w > lo && w < hi)
                k.push_back(w);
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
}

std::vector<double> merged_knots(const CameraProfile& p, std::size_t band, const std::vector<double>* extra)
{
    static const std::vector<double> none;
    return merged_knots(p.lambda_min, p.lambda_max,
                        {&p.transmission.wavelengths(), &p.irradiance.wavelengths(), &p.filters[band].wavelengths(),
                         extra ? extra : &none});
}

/// Calls fn(lambda, weight) at the Gauss-Legendre nodes of every knot interval.
template <typename Fn>
void for_each_node(const std::vector<double>& knots, Fn&& fn)
{
    static const double x = std::sqrt(0.6);
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double mid = 0.5 * (knots[i] + knots[i + 1]);
        const double half = 0.5 * (knots[i + 1] - knots[i]);
        fn(mid - half * x, half * (5.0 / 9.0));
        fn(mid, half * (8.0 / 9.0));
        fn(mid + half * x, half * (5.0 / 9.0));
    }
}

void check_band(const CameraProfile& p, std::size_t band)
{
    require(band < p.filters.size(), ErrorKind::InvalidArgument,
            "band " + std::to_string(band) + " out of range for a " + std::to_string(p.filters.size()) +
                "-filter profile");
}

double base_weight(const CameraProfile& p, std::size_t band, double wl)
{
    return p.transmission(wl) * p.irradiance(wl) * p.filters[band](wl);
}

} // namespace

double band_response(const CameraProfile& p, std::size_t band)
{
    check_band(p, band);
    double acc = 0.0;
    for_each_node(merged_knots(p, band, nullptr), [&](double wl, double w) { acc += w * base_weight(p, band, wl); });
    return acc;
}

double simulate_band(const SpectralCurve& r, const CameraProfile& p, std::size_t band)
{
    check_band(p, band);
    require(r.covers(p.lambda_min, p.lambda_max), ErrorKind::Domain,
            "reflectance does not cover the integration range [" + std::to_string(p.lambda_min) + ", " +
                std::to_string(p.lambda_max) + "] nm");
    double num = 0.0, den = 0.0;
    for_each_node(merged_knots(p, band, &r.wavelengths()), [&](double wl, double w) {
        const double g = w * base_weight(p, band, wl);
        num += g * r(wl);
        den += g;
    });
    require(den > 0.0, ErrorKind::Profile, "band " + std::to_string(band) + " has zero integrated response");
    return num / den;
}

std::vector<std::vector<double>> real_band_weights(const std::vector<double>& src, const CameraProfile& p)
{
    require(src.size() >= 2 && src.front() <= p.lambda_min && p.lambda_max <= src.back(), ErrorKind::Domain,
            "source cube does not cover the integration range [" + std::to_string(p.lambda_min) + ", " +
                std::to_string(p.lambda_max) + "] nm");
    std::vector<std::vector<double>> rows(p.filters.size(), std::vector<double>(src.size(), 0.0));
    for (std::size_t b = 0; b < p.filters.size(); ++b) {
        std::vector<double>& row = rows[b];
        for_each_node(merged_knots(p, b, &src), [&](double wl, double w) {
            const double g = w * base_weight(p, b, wl);
            auto it = std::upper_bound(src.begin(), src.end(), wl);
            std::size_t j = std::size_t(it - src.begin());
            j = std::clamp<std::size_t>(j, 1, src.size() - 1);
            const double t = (wl - src[j - 1]) / (src[j] - src[j - 1]);
            row[j - 1] += g * (1.0 - t);
            row[j] += g * t;
        });
        double total = 0.0;
        for (double v : row)
            total += v;
        require(total > 0.0, ErrorKind::Profile, "band " + std::to_string(b) + " has zero integrated response");
        for (double& v : row)
            v /= total;
    }
    return rows;
}

SpectralCube simulate_simple(const SpectralCube& cube, const std::vector<double>& targets)
{
    const auto& src = cube.wavelengths();
    require(!targets.empty(), ErrorKind::InvalidArgument, "no target wavelengths");
    require(targets.front() >= src.front() && targets.back() <= src.back(), ErrorKind::Domain,
            "source bands [" + std::to_string(src.front()) + ", " + std::to_string(src.back()) +
                "] nm do not cover the target range [" + std::to_string(targets.front()) + ", " +
                std::to_string(targets.back()) + "] nm");
    SpectralCube out(targets.size(), cube.height(), cube.width(), targets);
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const double wl = targets[t];
        auto dst = out.band(t);
        const auto it = std::lower_bound(src.begin(), src.end(), wl);
        const std::size_t j = std::size_t(it - src.begin());
        if (*it == wl) {
            const auto s = cube.band(j);
            std::copy(s.begin(), s.end(), dst.begin());
            continue;
        }
        const double a = (src[j] - wl) / (src[j] - src[j - 1]);
        const auto lo = cube.band(j - 1), hi = cube.band(j);
        for (std::size_t p = 0; p < dst.size(); ++p)
            dst[p] = static_cast<float>(a * double(lo[p]) + (1.0 - a) * double(hi[p]));
    }
    return out;
}

SpectralCube simulate_real(const SpectralCube& cube, const CameraProfile& profile)
{
    profile.validate();
    const auto w = real_band_weights(cube.wavelengths(), profile);
    SpectralCube out(w.size(), cube.height(), cube.width(), profile.pattern.wavelengths());
    std::vector<double> acc(cube.plane_size());
    for (std::size_t b = 0; b < w.size(); ++b) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t j = 0; j < cube.bands(); ++j) {
            if (w[b][j] == 0.0)
                continue;
            const auto src = cube.band(j);
            for (std::size_t p = 0; p < acc.size(); ++p)
                acc[p] += w[b][j] * double(src[p]);
        }
        auto dst = out.band(b);
        for (std::size_t p = 0; p < acc.size(); ++p)
            dst[p] = static_cast<float>(acc[p]);
    }
    return out;
}

MosaicImage mosaic(const SpectralCube& cube, const MsfaPattern& pattern)
{
    require(cube.bands() == pattern.band_count(), ErrorKind::ShapeMismatch,
            "mosaic: cube has " + std::to_string(cube.bands()) + " bands, pattern needs " +
                std::to_string(pattern.band_count()));
    MosaicImage m(cube.height(), cube.width(), pattern);
    for (std::size_t y = 0; y < cube.height(); ++y)
        for (std::size_t x = 0; x < cube.width(); ++x)
            m.at(y, x) = cube.at(std::size_t(pattern.band_at(y, x)), y, x);
    return m;
}

} // namespace msfa
