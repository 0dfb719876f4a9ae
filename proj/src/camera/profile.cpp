// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "camera/profile.hpp"

#include "camera/simulate.hpp"
#include "core/binary_io.hpp"
#include "core/error.hpp"
#include "hsi/cube_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

namespace msfa {

namespace {

std::string filter_name(std::size_t b)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "filter_%02zu.csv", b);
    return buf;
}

} // namespace

void CameraProfile::validate() const
{
    require(lambda_max > lambda_min, ErrorKind::Profile, "camera profile: lambda_max must exceed lambda_min");
    require(filters.size() == pattern.band_count() && !filters.empty(), ErrorKind::Profile,
            "camera profile: " + std::to_string(filters.size()) + " filters for a " +
                std::to_string(pattern.band_count()) + "-band pattern");
    const auto covered = [&](const SpectralCurve& c, const std::string& what) {
        require(c.covers(lambda_min, lambda_max), ErrorKind::Profile,
                "camera profile: " + what + " does not cover the integration range");
    };
    covered(transmission, "transmission");
    covered(irradiance, "irradiance");
    for (std::size_t b = 0; b < filters.size(); ++b)
        covered(filters[b], "filter " + std::to_string(b));
    for (std::size_t b = 0; b < filters.size(); ++b)
        require(band_response(*this, b) > 0.0, ErrorKind::Profile,
                "camera profile: band " + std::to_string(b) + " has zero integrated response");
}

std::vector<double> simple_band_grid()
{
    std::vector<double> wl(16);
    for (std::size_t i = 0; i < wl.size(); ++i)
        wl[i] = 450.0 + 12.0 * double(i);
    return wl;
}

CameraProfile default_profile()
{
    std::vector<double> grid;
    for (int nm = 400; nm <= 700; ++nm)
        grid.push_back(nm);

    std::vector<double> t(grid.size()), irr(grid.size());
    // Blackbody at 2856 K, normalized to 1 at 560 nm.
    const auto planck = [](double nm) {
        const double c2 = 1.4387769e7; // nm K
        const double l = nm;
        return 1.0 / (l * l * l * l * l * (std::exp(c2 / (l * 2856.0)) - 1.0));
    };
    const double ref = planck(560.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double l = grid[i];
        t[i] = 0.92 - 0.45 * std::exp(-(l - 400.0) / 35.0) - 0.08 * ((l - 550.0) / 150.0) * ((l - 550.0) / 150.0);
        irr[i] = planck(l) / ref;
    }

    const auto centers = simple_band_grid();
    const double sigma = 30.0 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    CameraProfile p;
    p.transmission = SpectralCurve(grid, t);
    p.irradiance = SpectralCurve(grid, irr);
    for (double c : centers) {
        std::vector<double> f(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double d = (grid[i] - c) / sigma;
            f[i] = std::exp(-0.5 * d * d);
        }
        p.filters.emplace_back(grid, std::move(f));
    }
    p.lambda_min = 420.0;
    p.lambda_max = 660.0;
    p.pattern = MsfaPattern::row_major(4, centers);
    return p;
}

CameraProfile load_profile(const std::string& dir)
{
    namespace fs = std::filesystem;
    const fs::path root(dir);
    const auto meta_bytes = io::read_file((root / "profile.json").string());
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(meta_bytes.begin(), meta_bytes.end());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::UnsupportedFormat, dir + "/profile.json: " + e.what());
    }

    CameraProfile p;
    try {
        p.lambda_min = meta.at("lambda_min").get<double>();
        p.lambda_max = meta.at("lambda_max").get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Profile, dir + "/profile.json: " + e.what());
    }
    p.pattern = pattern_from_json(meta.dump());
    p.transmission = load_curve_csv((root / "transmission.csv").string());
    p.irradiance = load_curve_csv((root / "irradiance.csv").string());
    for (std::size_t b = 0; b < p.pattern.band_count(); ++b)
        p.filters.push_back(load_curve_csv((root / filter_name(b)).string()));
    p.validate();
    return p;
}

void save_profile(const CameraProfile& profile, const std::string& dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec, ErrorKind::Io, "cannot create directory " + dir + ": " + ec.message());
    const fs::path root(dir);

    nlohmann::ordered_json meta = nlohmann::ordered_json::parse(pattern_to_json(profile.pattern));
    meta["lambda_min"] = profile.lambda_min;
    meta["lambda_max"] = profile.lambda_max;
    io::write_file((root / "profile.json").string(), meta.dump(2) + "\n");
    save_curve_csv(profile.transmission, (root / "transmission.csv").string());
    save_curve_csv(profile.irradiance, (root / "irradiance.csv").string());
    for (std::size_t b = 0; b < profile.filters.size(); ++b)
        save_curve_csv(profile.filters[b], (root / filter_name(b)).string());
}

} // namespace msfa
