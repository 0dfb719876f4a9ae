// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "ad/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace msfa::ad {

/// MSWT parameter checkpoint (all integers little-endian):
///
///   "MSWT"            4 bytes magic
///   version           u16 (currently 1)
///   entry count       u32
///   per entry:
///     name length     u32, then that many UTF-8 bytes
///     rank            u32
///     extents         rank x u32
///     values          prod(extents) x f32
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct CheckpointEntry
{
    std::string name;
    Shape shape;
    std::vector<float> values;
};

std::string encode_checkpoint(const std::vector<CheckpointEntry>& entries);
std::vector<CheckpointEntry> decode_checkpoint(const std::vector<unsigned char>& bytes, const std::string& context);

void save_checkpoint(const std::string& path, const std::vector<CheckpointEntry>& entries);
std::vector<CheckpointEntry> load_checkpoint(const std::string& path);

} // namespace msfa::ad
