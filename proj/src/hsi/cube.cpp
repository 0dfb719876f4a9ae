// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "hsi/cube.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <string>

namespace msfa {

namespace {

void validate_wavelengths(const std::vector<double>& wl, std::size_t expected, const char* what)
{
    require(wl.size() == expected, ErrorKind::ShapeMismatch,
            std::string(what) + ": expected " + std::to_string(expected) + " wavelengths, got " +
                std::to_string(wl.size()));
    for (std::size_t i = 1; i < wl.size(); ++i)
        require(wl[i] > wl[i - 1], ErrorKind::InvalidArgument,
                std::string(what) + ": wavelengths must be strictly increasing (index " + std::to_string(i) + ")");
}

} // namespace

SpectralCube::SpectralCube(std::size_t bands, std::size_t height, std::size_t width, std::vector<double> wavelengths_nm)
    : SpectralCube(bands, height, width, std::move(wavelengths_nm), std::vector<float>(bands * height * width, 0.0f))
{}

SpectralCube::SpectralCube(std::size_t bands, std::size_t height, std::size_t width, std::vector<double> wavelengths_nm,
                           std::vector<float> data)
    : bands_(bands), height_(height), width_(width), wavelengths_(std::move(wavelengths_nm)), data_(std::move(data))
{
    require(bands > 0 && height > 0 && width > 0, ErrorKind::InvalidGeometry, "cube extents must be positive");
    validate_wavelengths(wavelengths_, bands, "SpectralCube");
    require(data_.size() == bands * height * width, ErrorKind::ShapeMismatch,
            "SpectralCube: payload has " + std::to_string(data_.size()) + " values, expected " +
                std::to_string(bands * height * width));
}

MsfaPattern::MsfaPattern(std::size_t tile, std::vector<int> layout, std::vector<double> wavelengths_nm)
    : tile_(tile), layout_(std::move(layout)), wavelengths_(std::move(wavelengths_nm))
{
    require(tile >= 1, ErrorKind::InvalidGeometry, "MSFA tile size must be at least 1");
    const std::size_t n = tile * tile;
    require(layout_.size() == n, ErrorKind::ShapeMismatch,
            "MSFA layout needs " + std::to_string(n) + " entries, got " + std::to_string(layout_.size()));
    std::vector<int> seen(n, 0);
    for (int b : layout_) {
        require(b >= 0 && std::size_t(b) < n, ErrorKind::InvalidArgument,
                "MSFA layout band index " + std::to_string(b) + " out of range");
        require(seen[std::size_t(b)]++ == 0, ErrorKind::InvalidArgument,
                "MSFA layout repeats band " + std::to_string(b));
    }
    // Band centers are indexed by band, not by tile position.
    validate_wavelengths(wavelengths_, n, "MsfaPattern");
}

MsfaPattern MsfaPattern::row_major(std::size_t tile, std::vector<double> wavelengths_nm)
{
    std::vector<int> layout(tile * tile);
    for (std::size_t i = 0; i < layout.size(); ++i)
        layout[i] = static_cast<int>(i);
    return MsfaPattern(tile, std::move(layout), std::move(wavelengths_nm));
}

MosaicImage::MosaicImage(std::size_t height, std::size_t width, MsfaPattern pattern)
    : MosaicImage(height, width, std::move(pattern), std::vector<float>(height * width, 0.0f))
{}

MosaicImage::MosaicImage(std::size_t height, std::size_t width, MsfaPattern pattern, std::vector<float> data)
    : height_(height), width_(width), pattern_(std::move(pattern)), data_(std::move(data))
{
    const std::size_t k = pattern_.tile();
    require(k > 0, ErrorKind::InvalidArgument, "mosaic needs a pattern");
    require(height > 0 && width > 0 && height % k == 0 && width % k == 0, ErrorKind::InvalidGeometry,
            "mosaic " + std::to_string(height) + "x" + std::to_string(width) + " is not a whole number of " +
                std::to_string(k) + "x" + std::to_string(k) + " tiles");
    require(data_.size() == height * width, ErrorKind::ShapeMismatch, "mosaic payload size mismatch");
}

float roi_max(const Plane& plane, const Roi& roi)
{
    require(roi.height > 0 && roi.width > 0 && roi.y + roi.height <= plane.height && roi.x + roi.width <= plane.width,
            ErrorKind::InvalidGeometry, "ROI outside the image");
    float m = plane.at(roi.y, roi.x);
    for (std::size_t y = roi.y; y < roi.y + roi.height; ++y)
        for (std::size_t x = roi.x; x < roi.x + roi.width; ++x)
            m = std::max(m, plane.at(y, x));
    return m;
}

SpectralCube normalize_cube(const SpectralCube& cube, ValueRange range)
{
    require(range.min >= 0.0 && range.max > range.min, ErrorKind::InvalidArgument,
            "normalization range must satisfy max > min >= 0, got " + std::to_string(range.min) + ":" +
                std::to_string(range.max));
    SpectralCube out = cube;
    const double scale = 1.0 / (range.max - range.min);
    for (float& v : out.data())
        v = static_cast<float>(std::clamp((double(v) - range.min) * scale, 0.0, 1.0));
    return out;
}

SpectralCube sub_cube(const SpectralCube& cube, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w)
{
    require(h > 0 && w > 0 && y0 + h <= cube.height() && x0 + w <= cube.width(), ErrorKind::InvalidGeometry,
            "sub-cube outside the source cube");
    std::vector<float> data(cube.bands() * h * w);
    for (std::size_t b = 0; b < cube.bands(); ++b)
        for (std::size_t y = 0; y < h; ++y) {
            const float* src = &cube.band(b)[(y0 + y) * cube.width() + x0];
            std::copy(src, src + w, data.begin() + std::ptrdiff_t((b * h + y) * w));
        }
    return SpectralCube(cube.bands(), h, w, cube.wavelengths(), std::move(data));
}

SpectralCube crop_cube(const SpectralCube& cube, std::size_t margin)
{
    require(2 * margin < cube.height() && 2 * margin < cube.width(), ErrorKind::InvalidGeometry,
            "crop margin " + std::to_string(margin) + " too large for " + std::to_string(cube.height()) + "x" +
                std::to_string(cube.width()));
    if (margin == 0)
        return cube;
    return sub_cube(cube, margin, margin, cube.height() - 2 * margin, cube.width() - 2 * margin);
}

std::vector<std::size_t> patch_offsets(std::size_t extent, std::size_t patch, std::size_t stride, std::size_t tile)
{
    require(stride >= 1 && tile >= 1, ErrorKind::InvalidArgument, "patch stride and tile must be >= 1");
    require(patch >= 1 && patch <= extent, ErrorKind::InvalidGeometry,
            "patch extent " + std::to_string(patch) + " exceeds image extent " + std::to_string(extent));
    std::vector<std::size_t> offsets;
    for (std::size_t i = 0;; ++i) {
        const std::size_t off = (i * stride / tile) * tile;
        if (off + patch > extent)
            break;
        if (!offsets.empty() && off == offsets.back())
            continue;
        offsets.push_back(off);
    }
    return offsets;
}

std::vector<CubePatch> extract_patches(const SpectralCube& cube, std::size_t patch_h, std::size_t patch_w,
                                       std::size_t stride, std::size_t tile)
{
    const auto ys = patch_offsets(cube.height(), patch_h, stride, tile);
    const auto xs = patch_offsets(cube.width(), patch_w, stride, tile);
    std::vector<CubePatch> patches;
    patches.reserve(ys.size() * xs.size());
    for (std::size_t y : ys)
        for (std::size_t x : xs)
            patches.push_back({y, x, sub_cube(cube, y, x, patch_h, patch_w)});
    return patches;
}

} // namespace msfa
