// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "core/binary_io.hpp"

#include <fstream>
#include <iterator>

namespace msfa::io {

std::vector<unsigned char> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::Io, "cannot open '" + path + "' for reading");
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out)
        fail(ErrorKind::Io, "write to '" + path + "' failed");
}

} // namespace msfa::io
