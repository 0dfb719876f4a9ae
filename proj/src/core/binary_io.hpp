// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "core/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

// Little-endian encode/decode for the binary file formats.

namespace msfa::io {

inline void put_u16(std::ostream& os, std::uint16_t v)
{
    const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

inline void put_u32(std::ostream& os, std::uint32_t v)
{
    unsigned char b[4];
    for (int i = 0; i < 4; ++i)
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f32(std::ostream& os, float v)
{
    put_u32(os, std::bit_cast<std::uint32_t>(v));
}

inline void put_f32_array(std::ostream& os, std::span<const float> values)
{
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * 4));
    } else {
        for (float v : values)
            put_f32(os, v);
    }
}

/// Bounds-checked reader over an in-memory file image.
class ByteReader
{
public:
    ByteReader(std::span<const unsigned char> bytes, std::string context)
        : bytes_(bytes), context_(std::move(context))
    {}

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    std::size_t position() const noexcept { return pos_; }

    void need(std::size_t n, const char* what) const
    {
        if (remaining() < n)
            fail(ErrorKind::Truncated, context_ + ": truncated while reading " + what + " (need " + std::to_string(n) +
                                           " bytes at offset " + std::to_string(pos_) + ", have " +
                                           std::to_string(remaining()) + ")");
    }

    std::uint16_t u16(const char* what)
    {
        need(2, what);
        std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }

    std::uint32_t u32(const char* what)
    {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= std::uint32_t(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

    void f32_array(std::span<float> out, const char* what)
    {
        need(out.size() * 4, what);
        if constexpr (std::endian::native == std::endian::little) {
            std::memcpy(out.data(), bytes_.data() + pos_, out.size() * 4);
            pos_ += out.size() * 4;
        } else {
            for (float& v : out)
                v = f32(what);
        }
    }

    std::string bytes(std::size_t n, const char* what)
    {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

private:
    std::span<const unsigned char> bytes_;
    std::string context_;
    std::size_t pos_ = 0;
};

/// Reads a whole file; throws ErrorKind::Io when it cannot be opened.
std::vector<unsigned char> read_file(const std::string& path);

/// Writes via an ofstream; throws ErrorKind::Io on failure.
void write_file(const std::string& path, const std::string& contents);

} // namespace msfa::io
