// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "camera/curve.hpp"

#include "core/binary_io.hpp"
#include "core/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace msfa {

SpectralCurve::SpectralCurve(std::vector<double> wavelengths_nm, std::vector<double> values)
    : wavelengths_(std::move(wavelengths_nm)), values_(std::move(values))
{
    require(wavelengths_.size() == values_.size(), ErrorKind::ShapeMismatch,
            "spectral curve: wavelength and value counts differ");
    require(wavelengths_.size() >= 2, ErrorKind::InvalidArgument, "spectral curve needs at least 2 samples");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        require(std::isfinite(wavelengths_[i]) && std::isfinite(values_[i]), ErrorKind::InvalidArgument,
                "spectral curve: non-finite sample");
        require(values_[i] >= 0.0, ErrorKind::InvalidArgument,
                "spectral curve: negative value at " + std::to_string(wavelengths_[i]) + " nm");
        if (i > 0)
            require(wavelengths_[i] > wavelengths_[i - 1], ErrorKind::InvalidArgument,
                    "spectral curve: wavelengths must be strictly increasing");
    }
}

bool SpectralCurve::covers(double lo, double hi) const
{
    return !wavelengths_.empty() && wavelengths_.front() <= lo && hi <= wavelengths_.back();
}

double SpectralCurve::operator()(double wl) const
{
    require(!wavelengths_.empty() && wl >= wavelengths_.front() && wl <= wavelengths_.back(), ErrorKind::Domain,
            "spectral curve evaluated at " + std::to_string(wl) + " nm outside its sampled range");
    auto it = std::upper_bound(wavelengths_.begin(), wavelengths_.end(), wl);
    if (it == wavelengths_.end())
        return values_.back();
    const std::size_t j = std::size_t(it - wavelengths_.begin());
    const double t = (wl - wavelengths_[j - 1]) / (wavelengths_[j] - wavelengths_[j - 1]);
    return values_[j - 1] + t * (values_[j] - values_[j - 1]);
}

SpectralCurve parse_curve_csv(const std::string& text, const std::string& context)
{
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }), line.end());
    require(line == "wavelength_nm,value", ErrorKind::UnsupportedFormat,
            context + ": expected header 'wavelength_nm,value'");
    std::vector<double> wl, val;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const auto comma = line.find(',');
        require(comma != std::string::npos, ErrorKind::UnsupportedFormat,
                context + ":" + std::to_string(row) + ": expected two comma-separated columns");
        try {
            std::size_t used_a = 0, used_b = 0;
            const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
            wl.push_back(std::stod(a, &used_a));
            val.push_back(std::stod(b, &used_b));
            require(a.find_first_not_of(" \t", used_a) == std::string::npos &&
                        b.find_first_not_of(" \t\r", used_b) == std::string::npos,
                    ErrorKind::UnsupportedFormat, "");
        } catch (const std::exception&) {
            fail(ErrorKind::UnsupportedFormat, context + ":" + std::to_string(row) + ": malformed number");
        }
    }
    try {
        return SpectralCurve(std::move(wl), std::move(val));
    } catch (const Error& e) {
        fail(e.kind(), context + ": " + e.what());
    }
}

SpectralCurve load_curve_csv(const std::string& path)
{
    const auto bytes = io::read_file(path);
    return parse_curve_csv(std::string(bytes.begin(), bytes.end()), path);
}

std::string curve_to_csv(const SpectralCurve& curve)
{
    std::string out = "wavelength_nm,value\n";
    char buf[64];
    for (std::size_t i = 0; i < curve.wavelengths().size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", curve.wavelengths()[i], curve.values()[i]);
        out += buf;
    }
    return out;
}

void save_curve_csv(const SpectralCurve& curve, const std::string& path)
{
    io::write_file(path, curve_to_csv(curve));
}

} // namespace msfa
