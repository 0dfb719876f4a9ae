// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "hsi/cube.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace msfa {

enum class CubeFormat {
    Auto, ///< by extension: .hdr is ENVI, anything else HSC1
    Hsc1,
    Envi,
};

// HSC1: "HSC1", u32 B, u32 H, u32 W, B x f32 wavelengths (nm), then
// B*H*W x f32 values band-major, row-major within a band. Little-endian.
std::string encode_hsc1(const SpectralCube& cube);
SpectralCube decode_hsc1(const std::vector<unsigned char>& bytes, const std::string& context);

void save_cube(const SpectralCube& cube, const std::string& path);
SpectralCube load_cube(const std::string& path, CubeFormat format = CubeFormat::Auto);

/// ENVI import: BSQ interleave, data type 4 (float32), byte order 0. The raw
/// file defaults to the header path without its .hdr extension.
SpectralCube load_envi(const std::string& header_path, const std::string& data_path = {});

// MSM1 raw mosaic: "MSM1", u32 k, u32 H, u32 W, k*k x u32 tile layout
// (row-major), k*k x f32 band centers (nm, by band index), H*W x f32 values.
std::string encode_mosaic(const MosaicImage& mosaic);
MosaicImage decode_mosaic(const std::vector<unsigned char>& bytes, const std::string& context);
void save_mosaic(const MosaicImage& mosaic, const std::string& path);
MosaicImage load_mosaic(const std::string& path);

/// {"tile": k, "layout": [[...], ...], "wavelengths_nm": [...]}
std::string pattern_to_json(const MsfaPattern& pattern);
MsfaPattern pattern_from_json(const std::string& text);
MsfaPattern load_pattern(const std::string& path);

struct RgbImage
{
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> rgb; ///< interleaved, row-major
};

void write_ppm(const RgbImage& image, const std::string& path);

/// 8-bit greyscale PGM (P5) with value / full_scale mapped to 0..255.
void write_pgm(const Plane& plane, float full_scale, const std::string& path);

} // namespace msfa
