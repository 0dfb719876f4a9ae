// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "ad/checkpoint.hpp"

#include "core/binary_io.hpp"
#include "core/error.hpp"

#include <limits>
#include <sstream>

namespace msfa::ad {

std::string encode_checkpoint(const std::vector<CheckpointEntry>& entries)
{
    std::ostringstream os(std::ios::binary);
    os.write("MSWT", 4);
    io::put_u16(os, kCheckpointVersion);
    io::put_u32(os, static_cast<std::uint32_t>(entries.size()));
    for (const CheckpointEntry& e : entries) {
        require(e.values.size() == element_count(e.shape), ErrorKind::ShapeMismatch,
                "checkpoint entry '" + e.name + "' has " + std::to_string(e.values.size()) + " values for shape " +
                    to_string(e.shape));
        io::put_u32(os, static_cast<std::uint32_t>(e.name.size()));
        os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        io::put_u32(os, static_cast<std::uint32_t>(e.shape.size()));
        for (std::size_t x : e.shape) {
            require(x <= std::numeric_limits<std::uint32_t>::max(), ErrorKind::DimensionOverflow,
                    "extent too large for checkpoint");
            io::put_u32(os, static_cast<std::uint32_t>(x));
        }
        io::put_f32_array(os, e.values);
    }
    return os.str();
}

std::vector<CheckpointEntry> decode_checkpoint(const std::vector<unsigned char>& bytes, const std::string& context)
{
    io::ByteReader r(bytes, context);
    if (r.bytes(4, "magic") != "MSWT")
        fail(ErrorKind::BadMagic, context + ": not an MSWT checkpoint");
    const std::uint16_t version = r.u16("version");
    require(version == kCheckpointVersion, ErrorKind::UnsupportedFormat,
            context + ": unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t count = r.u32("entry count");

    std::vector<CheckpointEntry> entries;
    for (std::uint32_t i = 0; i < count; ++i) {
        CheckpointEntry e;
        const std::uint32_t name_len = r.u32("name length");
        e.name = r.bytes(name_len, "name");
        const std::uint32_t rank = r.u32("rank");
        require(rank <= kMaxRank, ErrorKind::DimensionOverflow,
                context + ": entry '" + e.name + "' has rank " + std::to_string(rank));
        std::uint64_t n = 1;
        for (std::uint32_t a = 0; a < rank; ++a) {
            const std::uint32_t x = r.u32("extent");
            n *= x;
            require(n <= (std::uint64_t(1) << 40), ErrorKind::DimensionOverflow,
                    context + ": entry '" + e.name + "' is implausibly large");
            e.shape.push_back(x);
        }
        e.values.resize(static_cast<std::size_t>(n));
        r.f32_array(e.values, "values");
        entries.push_back(std::move(e));
    }
    return entries;
}

void save_checkpoint(const std::string& path, const std::vector<CheckpointEntry>& entries)
{
    io::write_file(path, encode_checkpoint(entries));
}

std::vector<CheckpointEntry> load_checkpoint(const std::string& path)
{
    return decode_checkpoint(io::read_file(path), path);
}

} // namespace msfa::ad
