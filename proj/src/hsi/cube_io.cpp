// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "hsi/cube_io.hpp"

#include "core/binary_io.hpp"
#include "core/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace msfa {

namespace {

// Upper bound on decoded element counts; anything larger is treated as a corrupt header.
constexpr std::uint64_t kMaxElements = std::uint64_t(1) << 34;

std::uint64_t checked_volume(std::initializer_list<std::uint64_t> extents, const std::string& context)
{
    std::uint64_t n = 1;
    for (std::uint64_t e : extents) {
        require(e > 0, ErrorKind::InvalidGeometry, context + ": zero extent in header");
        if (n > kMaxElements / e)
            fail(ErrorKind::DimensionOverflow, context + ": declared dimensions overflow the element limit");
        n *= e;
    }
    return n;
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> parse_envi_header(const std::string& text, const std::string& context)
{
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    require(trim(line) == "ENVI", ErrorKind::BadMagic, context + ": ENVI header must start with 'ENVI'");

    std::map<std::string, std::string> fields;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            continue;
        std::string key = lower(trim(line.substr(0, eq)));
        std::string value = trim(line.substr(eq + 1));
        if (!value.empty() && value.front() == '{') {
            while (value.find('}') == std::string::npos) {
                std::string more;
                if (!std::getline(in, more))
                    fail(ErrorKind::Truncated, context + ": unterminated '{' in field '" + key + "'");
                value += " " + trim(more);
            }
            value = trim(value.substr(1, value.find('}') - 1));
        }
        fields[key] = value;
    }
    return fields;
}

std::uint64_t envi_int(const std::map<std::string, std::string>& f, const std::string& key, const std::string& context,
                       std::optional<std::uint64_t> fallback = std::nullopt)
{
    const auto it = f.find(key);
    if (it == f.end()) {
        if (fallback)
            return *fallback;
        fail(ErrorKind::UnsupportedFormat, context + ": ENVI header lacks '" + key + "'");
    }
    try {
        std::size_t used = 0;
        const long long v = std::stoll(it->second, &used);
        require(used == it->second.size() && v >= 0, ErrorKind::UnsupportedFormat, "");
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
        fail(ErrorKind::UnsupportedFormat, context + ": ENVI field '" + key + "' is not a non-negative integer");
    }
}

} // namespace

// ---- HSC1 -------------------------------------------------------------------

std::string encode_hsc1(const SpectralCube& cube)
{
    std::ostringstream os(std::ios::binary);
    os.write("HSC1", 4);
    io::put_u32(os, static_cast<std::uint32_t>(cube.bands()));
    io::put_u32(os, static_cast<std::uint32_t>(cube.height()));
    io::put_u32(os, static_cast<std::uint32_t>(cube.width()));
    for (double wl : cube.wavelengths())
        io::put_f32(os, static_cast<float>(wl));
    io::put_f32_array(os, cube.data());
    return os.str();
}

SpectralCube decode_hsc1(const std::vector<unsigned char>& bytes, const std::string& context)
{
    io::ByteReader r(bytes, context);
    if (bytes.size() < 4 || r.bytes(4, "magic") != "HSC1")
        fail(ErrorKind::BadMagic, context + ": not an HSC1 cube");
    const std::uint32_t b = r.u32("band count");
    const std::uint32_t h = r.u32("height");
    const std::uint32_t w = r.u32("width");
    const std::uint64_t n = checked_volume({b, h, w}, context);

    std::vector<float> wl_f(b);
    r.f32_array(wl_f, "wavelengths");
    std::vector<float> data(static_cast<std::size_t>(n));
    r.f32_array(data, "cube values");
    require(r.remaining() == 0, ErrorKind::UnsupportedFormat,
            context + ": " + std::to_string(r.remaining()) + " unexpected trailing bytes");
    std::vector<double> wl(wl_f.begin(), wl_f.end());
    return SpectralCube(b, h, w, std::move(wl), std::move(data));
}

void save_cube(const SpectralCube& cube, const std::string& path)
{
    io::write_file(path, encode_hsc1(cube));
}

SpectralCube load_cube(const std::string& path, CubeFormat format)
{
    if (format == CubeFormat::Auto)
        format = lower(std::filesystem::path(path).extension().string()) == ".hdr" ? CubeFormat::Envi : CubeFormat::Hsc1;
    if (format == CubeFormat::Envi)
        return load_envi(path);
    return decode_hsc1(io::read_file(path), path);
}

// ---- ENVI -------------------------------------------------------------------

SpectralCube load_envi(const std::string& header_path, const std::string& data_path)
{
    const auto raw_header = io::read_file(header_path);
    const auto f = parse_envi_header(std::string(raw_header.begin(), raw_header.end()), header_path);

    const std::string interleave = lower(f.count("interleave") ? f.at("interleave") : "bsq");
    require(interleave == "bsq", ErrorKind::UnsupportedFormat,
            header_path + ": interleave '" + interleave + "' not supported (only bsq)");
    const std::uint64_t dtype = envi_int(f, "data type", header_path);
    require(dtype == 4, ErrorKind::UnsupportedFormat,
            header_path + ": data type " + std::to_string(dtype) + " not supported (only 4 = float32)");
    const std::uint64_t order = envi_int(f, "byte order", header_path, 0);
    require(order == 0, ErrorKind::UnsupportedFormat, header_path + ": only byte order 0 (little-endian) supported");

    const std::uint64_t w = envi_int(f, "samples", header_path);
    const std::uint64_t h = envi_int(f, "lines", header_path);
    const std::uint64_t b = envi_int(f, "bands", header_path);
    const std::uint64_t offset = envi_int(f, "header offset", header_path, 0);
    const std::uint64_t n = checked_volume({b, h, w}, header_path);

    std::vector<double> wl;
    if (auto it = f.find("wavelength"); it != f.end()) {
        std::string list = it->second;
        std::replace(list.begin(), list.end(), ',', ' ');
        std::istringstream in(list);
        double v;
        while (in >> v)
            wl.push_back(v);
    }
    require(wl.size() == b, ErrorKind::UnsupportedFormat,
            header_path + ": expected " + std::to_string(b) + " wavelengths, found " + std::to_string(wl.size()));
    const std::string units = lower(f.count("wavelength units") ? f.at("wavelength units") : "nanometers");
    if (units.rfind("micro", 0) == 0 || units == "um")
        for (double& v : wl)
            v *= 1000.0;

    std::string raw_path = data_path;
    if (raw_path.empty()) {
        std::filesystem::path p(header_path);
        p.replace_extension();
        raw_path = p.string();
        for (const char* ext : {"", ".raw", ".img", ".dat", ".bsq"})
            if (std::filesystem::exists(raw_path + ext)) {
                raw_path += ext;
                break;
            }
    }
    const auto payload = io::read_file(raw_path);
    io::ByteReader r(payload, raw_path);
    r.bytes(static_cast<std::size_t>(offset), "header offset");
    std::vector<float> data(static_cast<std::size_t>(n));
    r.f32_array(data, "ENVI values");
    return SpectralCube(b, h, w, std::move(wl), std::move(data));
}

// ---- MSM1 -------------------------------------------------------------------

std::string encode_mosaic(const MosaicImage& mosaic)
{
    const MsfaPattern& p = mosaic.pattern();
    std::ostringstream os(std::ios::binary);
    os.write("MSM1", 4);
    io::put_u32(os, static_cast<std::uint32_t>(p.tile()));
    io::put_u32(os, static_cast<std::uint32_t>(mosaic.height()));
    io::put_u32(os, static_cast<std::uint32_t>(mosaic.width()));
    for (int b : p.layout())
        io::put_u32(os, static_cast<std::uint32_t>(b));
    for (double wl : p.wavelengths())
        io::put_f32(os, static_cast<float>(wl));
    io::put_f32_array(os, mosaic.data());
    return os.str();
}

MosaicImage decode_mosaic(const std::vector<unsigned char>& bytes, const std::string& context)
{
    io::ByteReader r(bytes, context);
    if (bytes.size() < 4 || r.bytes(4, "magic") != "MSM1")
        fail(ErrorKind::BadMagic, context + ": not an MSM1 mosaic");
    const std::uint32_t k = r.u32("tile size");
    const std::uint32_t h = r.u32("height");
    const std::uint32_t w = r.u32("width");
    require(k >= 1 && k <= 64, ErrorKind::DimensionOverflow, context + ": implausible tile size " + std::to_string(k));
    const std::uint64_t n = checked_volume({h, w}, context);

    std::vector<int> layout(std::size_t(k) * k);
    for (int& b : layout)
        b = static_cast<int>(r.u32("tile layout"));
    std::vector<float> wl_f(std::size_t(k) * k);
    r.f32_array(wl_f, "band centers");
    std::vector<float> data(static_cast<std::size_t>(n));
    r.f32_array(data, "mosaic values");
    require(r.remaining() == 0, ErrorKind::UnsupportedFormat,
            context + ": " + std::to_string(r.remaining()) + " unexpected trailing bytes");
    MsfaPattern pattern(k, std::move(layout), std::vector<double>(wl_f.begin(), wl_f.end()));
    return MosaicImage(h, w, std::move(pattern), std::move(data));
}

void save_mosaic(const MosaicImage& mosaic, const std::string& path)
{
    io::write_file(path, encode_mosaic(mosaic));
}

MosaicImage load_mosaic(const std::string& path)
{
    return decode_mosaic(io::read_file(path), path);
}

// ---- pattern JSON -----------------------------------------------------------

std::string pattern_to_json(const MsfaPattern& pattern)
{
    nlohmann::ordered_json j;
    j["tile"] = pattern.tile();
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < pattern.tile(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < pattern.tile(); ++c)
            row.push_back(pattern.layout()[r * pattern.tile() + c]);
        rows.push_back(row);
    }
    j["layout"] = rows;
    j["wavelengths_nm"] = pattern.wavelengths();
    return j.dump(2) + "\n";
}

MsfaPattern pattern_from_json(const std::string& text)
{
    try {
        const auto j = nlohmann::json::parse(text);
        const std::size_t k = j.at("tile").get<std::size_t>();
        std::vector<int> layout;
        if (j.contains("layout")) {
            for (const auto& row : j.at("layout"))
                for (const auto& v : row)
                    layout.push_back(v.get<int>());
        } else {
            for (std::size_t i = 0; i < k * k; ++i)
                layout.push_back(static_cast<int>(i));
        }
        std::vector<double> wl = j.at("wavelengths_nm").get<std::vector<double>>();
        return MsfaPattern(k, std::move(layout), std::move(wl));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidArgument, std::string("bad pattern JSON: ") + e.what());
    }
}

MsfaPattern load_pattern(const std::string& path)
{
    const auto bytes = io::read_file(path);
    return pattern_from_json(std::string(bytes.begin(), bytes.end()));
}

// ---- netpbm -----------------------------------------------------------------

void write_ppm(const RgbImage& image, const std::string& path)
{
    require(image.rgb.size() == image.height * image.width * 3, ErrorKind::ShapeMismatch, "RGB buffer size mismatch");
    std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
    io::write_file(path, out);
}

void write_pgm(const Plane& plane, float full_scale, const std::string& path)
{
    require(full_scale > 0.0f, ErrorKind::InvalidArgument, "PGM full scale must be positive");
    std::string out = "P5\n" + std::to_string(plane.width) + " " + std::to_string(plane.height) + "\n255\n";
    out.reserve(out.size() + plane.data.size());
    for (float v : plane.data)
        out.push_back(static_cast<char>(std::lround(std::clamp(v / full_scale, 0.0f, 1.0f) * 255.0f)));
    io::write_file(path, out);
}

} // namespace msfa
