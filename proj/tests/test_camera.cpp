// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "camera/curve.hpp"
#include "camera/profile.hpp"
#include "camera/simulate.hpp"
#include "camera/synthetic.hpp"
#include "hsi/cube_io.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace msfa;
using msfa::testing::dense_trapezoid;
using msfa::testing::kind_of;
using msfa::testing::pl_interp;
using msfa::testing::TempDir;

namespace {

/// Random curve on `n` knots spanning exactly [lo, hi].
SpectralCurve random_curve(std::mt19937_64& rng, double lo, double hi, std::size_t n, double vmin, double vmax)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> xs{lo, hi};
    while (xs.size() < n)
        xs.push_back(lo + (hi - lo) * u(rng));
    std::sort(xs.begin(), xs.end());
    std::vector<double> ys(n);
    for (double& y : ys)
        y = vmin + (vmax - vmin) * u(rng);
    return SpectralCurve(xs, ys);
}

CameraProfile single_band_profile(SpectralCurve t, SpectralCurve i, SpectralCurve f, double lo, double hi)
{
    CameraProfile p;
    p.transmission = std::move(t);
    p.irradiance = std::move(i);
    p.filters = {std::move(f)};
    p.lambda_min = lo;
    p.lambda_max = hi;
    p.pattern = MsfaPattern::row_major(1, {0.5 * (lo + hi)});
    return p;
}

SpectralCurve constant_curve(double lo, double hi, double v)
{
    return SpectralCurve({lo, hi}, {v, v});
}

} // namespace

TEST_CASE("spectral curve evaluation and CSV")
{
    const SpectralCurve c({400.0, 500.0, 600.0}, {0.0, 1.0, 0.5});
    CHECK(c(450.0) == doctest::Approx(0.5));
    CHECK(c(600.0) == 0.5);
    CHECK(c(550.0) == doctest::Approx(0.75));
    CHECK(kind_of([&] { c(399.0); }) == ErrorKind::Domain);
    CHECK(kind_of([] { SpectralCurve({400.0}, {1.0}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { SpectralCurve({400.0, 400.0}, {1.0, 1.0}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { SpectralCurve({400.0, 500.0}, {1.0, -1.0}); }) == ErrorKind::InvalidArgument);

    const SpectralCurve back = parse_curve_csv(curve_to_csv(c), "mem");
    CHECK(back.wavelengths() == c.wavelengths());
    CHECK(back.values() == c.values());
    CHECK(kind_of([] { parse_curve_csv("nm,v\n400,1\n500,1\n", "x"); }) == ErrorKind::UnsupportedFormat);
    CHECK(kind_of([] { parse_curve_csv("wavelength_nm,value\n400,1\n500,abc\n", "x"); }) ==
          ErrorKind::UnsupportedFormat);
}

TEST_CASE("flat reflectance reproduces the constant")
{
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = single_band_profile(random_curve(rng, 400, 700, 7, 0.1, 1.0),
                                           random_curve(rng, 400, 700, 9, 0.1, 2.0),
                                           random_curve(rng, 400, 700, 5, 0.0, 1.0), 420.0, 680.0);
        const double c = 0.1 + 0.05 * trial;
        CHECK(std::abs(simulate_band(constant_curve(400, 700, c), p, 0) - c) < 1e-12);
    }
    const auto def = default_profile();
    for (std::size_t b = 0; b < 16; ++b)
        CHECK(std::abs(simulate_band(constant_curve(400, 700, 0.37), def, b) - 0.37) < 1e-12);
}

TEST_CASE("spike filter samples the reflectance at its center")
{
    const double l0 = 533.0, eps = 1e-4;
    const SpectralCurve spike({420.0, l0 - eps, l0, l0 + eps, 660.0}, {0.0, 0.0, 1.0, 0.0, 0.0});
    const auto p = single_band_profile(SpectralCurve({400.0, 700.0}, {0.5, 1.0}), SpectralCurve({400.0, 700.0}, {2.0, 1.0}),
                                       spike, 420.0, 660.0);
    const SpectralCurve r({400.0, 520.0, 560.0, 700.0}, {0.1, 0.3, 0.9, 0.2});
    CHECK(std::abs(simulate_band(r, p, 0) - r(l0)) < 1e-6);
}

TEST_CASE("piecewise-linear curves agree with a dense trapezoid oracle")
{
    std::mt19937_64 rng(2024);
    const double lo = 420.0, hi = 660.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto t = random_curve(rng, lo, hi, 5, 0.2, 1.0);
        const auto irr = random_curve(rng, lo, hi, 5, 0.2, 1.0);
        const auto f = random_curve(rng, lo, hi, 5, 0.0, 1.0);
        const auto r = random_curve(rng, lo, hi, 5, 0.0, 1.0);
        const auto p = single_band_profile(t, irr, f, lo, hi);

        const auto g = [&](double x) {
            return pl_interp(t.wavelengths(), t.values(), x) * pl_interp(irr.wavelengths(), irr.values(), x) *
                   pl_interp(f.wavelengths(), f.values(), x);
        };
        const double num = dense_trapezoid([&](double x) { return g(x) * pl_interp(r.wavelengths(), r.values(), x); },
                                           lo, hi, 100000);
        const double den = dense_trapezoid(g, lo, hi, 100000);
        CHECK(std::abs(simulate_band(r, p, 0) - num / den) < 1e-6);
    }
}

TEST_CASE("simulate_band is convex and linear in reflectance")
{
    std::mt19937_64 rng(77);
    const auto def = default_profile();
    for (int trial = 0; trial < 10; ++trial) {
        const auto r1 = random_curve(rng, 400, 700, 12, 0.0, 1.0);
        const auto r2 = random_curve(rng, 400, 700, 12, 0.0, 1.0);
        const auto [mn, mx] = std::minmax_element(r1.values().begin(), r1.values().end());
        std::vector<double> xs = r1.wavelengths(), ys;
        xs.insert(xs.end(), r2.wavelengths().begin(), r2.wavelengths().end());
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        for (double x : xs)
            ys.push_back(2.0 * r1(x) + 3.0 * r2(x));
        const SpectralCurve mix(xs, ys);
        for (std::size_t b : {0u, 7u, 15u}) {
            const double v = simulate_band(r1, def, b);
            CHECK(v >= *mn - 1e-12);
            CHECK(v <= *mx + 1e-12);
            const double lin = 2.0 * v + 3.0 * simulate_band(r2, def, b);
            CHECK(std::abs(simulate_band(mix, def, b) - lin) < 1e-12);
        }
    }
}

TEST_CASE("simulate_band error paths")
{
    const auto def = default_profile();
    CHECK(kind_of([&] { simulate_band(SpectralCurve({430.0, 700.0}, {1.0, 1.0}), def, 0); }) == ErrorKind::Domain);
    CHECK(kind_of([&] { simulate_band(constant_curve(400, 700, 1.0), def, 16); }) == ErrorKind::InvalidArgument);
    auto bad = single_band_profile(constant_curve(400, 700, 1.0), constant_curve(400, 700, 1.0),
                                   constant_curve(400, 700, 0.0), 420, 660);
    CHECK(kind_of([&] { simulate_band(constant_curve(400, 700, 1.0), bad, 0); }) == ErrorKind::Profile);
    CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::Profile);
    auto narrow = def;
    narrow.lambda_max = 710.0;
    CHECK(kind_of([&] { narrow.validate(); }) == ErrorKind::Profile);
}

TEST_CASE("default profile round-trips through a directory")
{
    TempDir dir("profile");
    const auto p = default_profile();
    p.validate();
    save_profile(p, dir.file("cam"));
    const auto q = load_profile(dir.file("cam"));
    CHECK(q.pattern == p.pattern);
    CHECK(q.lambda_min == p.lambda_min);
    CHECK(q.filters.size() == 16);
    CHECK(q.filters[5].values() == p.filters[5].values());
    CHECK(q.irradiance.values() == p.irradiance.values());
}

TEST_CASE("simple simulation interpolates source bands")
{
    // 31 bands, 400..700 nm in 10 nm steps.
    std::vector<double> wl;
    for (int i = 0; i <= 30; ++i)
        wl.push_back(400.0 + 10.0 * i);
    SpectralCube cave(31, 3, 4, wl);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (float& v : cave.data())
        v = u(rng);

    const SpectralCube s = simulate_simple(cave);
    CHECK(s.bands() == 16);
    CHECK(s.wavelengths() == simple_band_grid());
    // 462 nm lies between 460 (index 6) and 470 (index 7).
    for (std::size_t y = 0; y < 3; ++y)
        for (std::size_t x = 0; x < 4; ++x)
            CHECK(s.at(1, y, x) ==
                  doctest::Approx(0.8 * cave.at(6, y, x) + 0.2 * cave.at(7, y, x)).epsilon(1e-6));
    // 450 and 630 nm are source bands and are copied.
    CHECK(std::equal(s.band(0).begin(), s.band(0).end(), cave.band(5).begin()));
    CHECK(std::equal(s.band(15).begin(), s.band(15).end(), cave.band(23).begin()));

    SpectralCube two(2, 1, 2, {440.0, 460.0}, {0.2f, 0.4f, 0.6f, 1.0f});
    const SpectralCube mid = simulate_simple(two, {450.0});
    CHECK(mid.at(0, 0, 0) == doctest::Approx(0.4));
    CHECK(mid.at(0, 0, 1) == doctest::Approx(0.7));

    CHECK(kind_of([&] { simulate_simple(two); }) == ErrorKind::Domain);
}

TEST_CASE("real simulation: flatness, box filters, convexity")
{
    std::vector<double> wl;
    for (int i = 0; i <= 30; ++i)
        wl.push_back(400.0 + 10.0 * i);

    SpectralCube flat(31, 4, 4, wl);
    for (float& v : flat.data())
        v = 0.625f;
    const auto def = default_profile();
    const SpectralCube out = simulate_real(flat, def);
    CHECK(out.bands() == 16);
    for (float v : out.data())
        CHECK(v == doctest::Approx(0.625).epsilon(1e-6));

    // Disjoint box filters with T = I = 1: each band is the mean of r over its box.
    CameraProfile box;
    box.transmission = constant_curve(400, 700, 1.0);
    box.irradiance = constant_curve(400, 700, 1.0);
    box.lambda_min = 420.0;
    box.lambda_max = 660.0;
    std::vector<std::pair<double, double>> boxes;
    for (int b = 0; b < 4; ++b) {
        const double a = 425.0 + 57.0 * b, e = a + 40.0, eps = 1e-7;
        boxes.emplace_back(a, e);
        box.filters.emplace_back(std::vector<double>{400.0, a - eps, a, e, e + eps, 700.0},
                                 std::vector<double>{0, 0, 1, 1, 0, 0});
    }
    box.pattern = MsfaPattern::row_major(2, {445.0, 502.0, 559.0, 616.0});

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    SpectralCube scene(31, 2, 2, wl);
    for (float& v : scene.data())
        v = u(rng);
    const SpectralCube r = simulate_real(scene, box);
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 2; ++x) {
            std::vector<double> spec;
            for (std::size_t j = 0; j < 31; ++j)
                spec.push_back(scene.at(j, y, x));
            for (std::size_t b = 0; b < 4; ++b) {
                const auto [a, e] = boxes[b];
                const double mean =
                    dense_trapezoid([&](double l) { return pl_interp(wl, spec, l); }, a, e, 100000) / (e - a);
                CHECK(std::abs(r.at(b, y, x) - mean) < 1e-6);
            }
        }

    // Overlapping Gaussians: each output lies within the pixel's spectral range.
    const SpectralCube g = simulate_real(scene, def);
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 2; ++x) {
            float mn = 1.0f, mx = 0.0f;
            for (std::size_t j = 0; j < 31; ++j) {
                mn = std::min(mn, scene.at(j, y, x));
                mx = std::max(mx, scene.at(j, y, x));
            }
            for (std::size_t b = 0; b < 16; ++b) {
                CHECK(g.at(b, y, x) >= mn - 1e-6f);
                CHECK(g.at(b, y, x) <= mx + 1e-6f);
            }
        }

    // Per-pixel result matches simulate_band on the pixel's curve.
    std::vector<double> spec;
    for (std::size_t j = 0; j < 31; ++j)
        spec.push_back(scene.at(j, 1, 0));
    const SpectralCurve pix(wl, spec);
    for (std::size_t b = 0; b < 16; ++b)
        CHECK(g.at(b, 1, 0) == doctest::Approx(simulate_band(pix, def, b)).epsilon(1e-6));

    SpectralCube narrow(2, 2, 2, {450.0, 630.0});
    CHECK(kind_of([&] { simulate_real(narrow, def); }) == ErrorKind::Domain);
}

TEST_CASE("mosaic sampling")
{
    const auto pattern = MsfaPattern::row_major(4, simple_band_grid());
    SpectralCube half(16, 8, 8, simple_band_grid());
    for (float& v : half.data())
        v = 0.5f;
    const MosaicImage flat = mosaic(half, pattern);
    for (float v : flat.data())
        CHECK(v == 0.5f);

    SpectralCube ramp(16, 8, 8, simple_band_grid());
    for (std::size_t b = 0; b < 16; ++b)
        for (float& v : ramp.band(b))
            v = float(b) / 16.0f;
    const MosaicImage m = mosaic(ramp, pattern);
    for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 0; x < 8; ++x)
            CHECK(m.at(y, x) == float((y % 4) * 4 + x % 4) / 16.0f);

    SpectralCube small(4, 4, 4, {1.0, 2.0, 3.0, 4.0});
    CHECK(kind_of([&] { mosaic(small, pattern); }) == ErrorKind::ShapeMismatch);
    SpectralCube odd(16, 6, 8, simple_band_grid());
    CHECK(kind_of([&] { mosaic(odd, pattern); }) == ErrorKind::InvalidGeometry);
}

TEST_CASE("synthetic scenes are reproducible and in range")
{
    SyntheticSceneOptions o;
    o.height = 40;
    o.width = 36;
    o.seed = 12;
    const SpectralCube a = synthetic_scene(o);
    const SpectralCube b = synthetic_scene(o);
    CHECK(encode_hsc1(a) == encode_hsc1(b));
    CHECK(a.bands() == 16);
    for (float v : a.data()) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
    o.seed = 13;
    CHECK(!(synthetic_scene(o) == a));
}
