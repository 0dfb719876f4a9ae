// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace msfa {

/// Band-major reflectance cube: value (b, y, x) lives at b * H * W + y * W + x.
class SpectralCube
{
public:
    SpectralCube() = default;
    SpectralCube(std::size_t bands, std::size_t height, std::size_t width, std::vector<double> wavelengths_nm);
    SpectralCube(std::size_t bands, std::size_t height, std::size_t width, std::vector<double> wavelengths_nm,
                 std::vector<float> data);

    std::size_t bands() const noexcept { return bands_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t plane_size() const noexcept { return height_ * width_; }
    bool empty() const noexcept { return data_.empty(); }

    const std::vector<double>& wavelengths() const noexcept { return wavelengths_; }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

    std::span<float> band(std::size_t b) { return std::span<float>(data_).subspan(b * plane_size(), plane_size()); }
    std::span<const float> band(std::size_t b) const
    {
        return std::span<const float>(data_).subspan(b * plane_size(), plane_size());
    }

    float& at(std::size_t b, std::size_t y, std::size_t x) { return data_[(b * height_ + y) * width_ + x]; }
    float at(std::size_t b, std::size_t y, std::size_t x) const { return data_[(b * height_ + y) * width_ + x]; }

    friend bool operator==(const SpectralCube&, const SpectralCube&) = default;

private:
    std::size_t bands_ = 0;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> wavelengths_;
    std::vector<float> data_;
};

/// k x k filter tile; layout[r * k + c] is the band sampled at (y mod k, x mod k) = (r, c).
class MsfaPattern
{
public:
    MsfaPattern() = default;
    MsfaPattern(std::size_t tile, std::vector<int> layout, std::vector<double> wavelengths_nm);

    /// Bands 0..k^2-1 in row-major order across the tile.
    static MsfaPattern row_major(std::size_t tile, std::vector<double> wavelengths_nm);

    std::size_t tile() const noexcept { return tile_; }
    std::size_t band_count() const noexcept { return tile_ * tile_; }
    const std::vector<int>& layout() const noexcept { return layout_; }
    const std::vector<double>& wavelengths() const noexcept { return wavelengths_; }

    int band_at(std::size_t y, std::size_t x) const { return layout_[(y % tile_) * tile_ + (x % tile_)]; }

    friend bool operator==(const MsfaPattern&, const MsfaPattern&) = default;

private:
    std::size_t tile_ = 0;
    std::vector<int> layout_;
    std::vector<double> wavelengths_;
};

/// Single-plane raw sensor frame.
class MosaicImage
{
public:
    MosaicImage() = default;
    MosaicImage(std::size_t height, std::size_t width, MsfaPattern pattern);
    MosaicImage(std::size_t height, std::size_t width, MsfaPattern pattern, std::vector<float> data);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    const MsfaPattern& pattern() const noexcept { return pattern_; }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

    float& at(std::size_t y, std::size_t x) { return data_[y * width_ + x]; }
    float at(std::size_t y, std::size_t x) const { return data_[y * width_ + x]; }

    friend bool operator==(const MosaicImage&, const MosaicImage&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    MsfaPattern pattern_;
    std::vector<float> data_;
};

/// Single-channel float image (error maps, intensity estimates).
struct Plane
{
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> data;

    float at(std::size_t y, std::size_t x) const { return data[y * width + x]; }
};

struct Roi
{
    std::size_t y = 0;
    std::size_t x = 0;
    std::size_t height = 0;
    std::size_t width = 0;
};

float roi_max(const Plane& plane, const Roi& roi);

struct ValueRange
{
    double min = 0.0;
    double max = 1.0;
};

/// Affine map of [range.min, range.max] onto [0, 1], clamped.
SpectralCube normalize_cube(const SpectralCube& cube, ValueRange range);

/// Removes `margin` pixels from every spatial edge.
SpectralCube crop_cube(const SpectralCube& cube, std::size_t margin);

/// Spatial sub-cube [y, y + h) x [x, x + w).
SpectralCube sub_cube(const SpectralCube& cube, std::size_t y, std::size_t x, std::size_t h, std::size_t w);

struct CubePatch
{
    std::size_t y = 0;
    std::size_t x = 0;
    SpectralCube cube;
};

/// Patch grid with offsets floor(i * stride / tile) * tile, so every patch
/// starts on the mosaic lattice. Regions past the last full patch are dropped.
std::vector<CubePatch> extract_patches(const SpectralCube& cube, std::size_t patch_h, std::size_t patch_w,
                                       std::size_t stride, std::size_t tile = 4);

/// Offsets along one axis used by extract_patches.
std::vector<std::size_t> patch_offsets(std::size_t extent, std::size_t patch, std::size_t stride, std::size_t tile);

} // namespace msfa
