// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "camera/synthetic.hpp"

#include "camera/profile.hpp"
#include "core/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace msfa {

namespace {

// Uniform [0, 1) from raw engine bits; avoids distribution implementation differences.
class Uniform
{
public:
    explicit Uniform(std::uint64_t seed) : rng_(seed) {}
    double operator()() { return double(rng_() >> 11) * 0x1.0p-53; }
    double operator()(double lo, double hi) { return lo + (hi - lo) * (*this)(); }

private:
    std::mt19937_64 rng_;
};

struct Wave
{
    double fy, fx, phase, amp;
};

std::vector<Wave> random_waves(Uniform& u, std::size_t n, double fmax)
{
    std::vector<Wave> w(n);
    for (auto& v : w) {
        v.fy = u(-fmax, fmax);
        v.fx = u(-fmax, fmax);
        v.phase = u(0.0, 2.0 * std::numbers::pi);
        v.amp = u(0.3, 1.0);
    }
    return w;
}

double eval_waves(const std::vector<Wave>& ws, double y, double x)
{
    double s = 0.0;
    for (const auto& w : ws)
        s += w.amp * std::cos(2.0 * std::numbers::pi * (w.fy * y + w.fx * x) + w.phase);
    return s;
}

} // namespace

SpectralCube synthetic_scene(const SyntheticSceneOptions& o)
{
    require(o.height > 0 && o.width > 0, ErrorKind::InvalidGeometry, "synthetic scene needs positive extents");
    require(o.materials >= 1 && o.waves >= 1, ErrorKind::InvalidArgument, "synthetic scene needs materials and waves");
    require(o.max_frequency > 0.0 && o.max_frequency <= 0.5, ErrorKind::InvalidArgument,
            "max_frequency must lie in (0, 0.5]");
    const std::vector<double> wl = o.wavelengths_nm.empty() ? simple_band_grid() : o.wavelengths_nm;
    const double wl_lo = wl.front(), wl_hi = wl.back();

    Uniform u(o.seed);
    std::vector<std::vector<double>> spectra(o.materials, std::vector<double>(wl.size()));
    for (auto& s : spectra) {
        const double base = u(0.05, 0.4);
        const std::size_t bumps = 1 + std::size_t(u() * 3.0);
        std::vector<double> c(bumps), width(bumps), height(bumps);
        for (std::size_t i = 0; i < bumps; ++i) {
            c[i] = u(wl_lo - 40.0, wl_hi + 40.0);
            width[i] = u(30.0, 90.0);
            height[i] = u(-0.3, 0.6);
        }
        for (std::size_t b = 0; b < wl.size(); ++b) {
            double v = base;
            for (std::size_t i = 0; i < bumps; ++i) {
                const double d = (wl[b] - c[i]) / width[i];
                v += height[i] * std::exp(-0.5 * d * d);
            }
            s[b] = std::clamp(v, 0.02, 0.95);
        }
    }

    std::vector<std::vector<Wave>> fields;
    for (std::size_t m = 0; m < o.materials; ++m)
        fields.push_back(random_waves(u, o.waves, o.max_frequency));
    const auto shading = random_waves(u, 3, o.max_frequency * 0.5);
    const double sharpness = u(1.0, 2.5);

    SpectralCube cube(wl.size(), o.height, o.width, wl);
    std::vector<double> a(o.materials);
    for (std::size_t y = 0; y < o.height; ++y)
        for (std::size_t x = 0; x < o.width; ++x) {
            // Softmax of the fields gives positive abundances that sum to one.
            double mx = -1e300;
            for (std::size_t m = 0; m < o.materials; ++m) {
                a[m] = sharpness * eval_waves(fields[m], double(y), double(x));
                mx = std::max(mx, a[m]);
            }
            double total = 0.0;
            for (double& v : a)
                total += (v = std::exp(v - mx));
            const double shade = 0.75 + 0.25 * std::tanh(eval_waves(shading, double(y), double(x)));
            for (std::size_t b = 0; b < wl.size(); ++b) {
                double v = 0.0;
                for (std::size_t m = 0; m < o.materials; ++m)
                    v += a[m] * spectra[m][b];
                cube.at(b, y, x) = static_cast<float>(std::clamp(shade * v / total, 0.0, 1.0));
            }
        }
    return cube;
}

} // namespace msfa
