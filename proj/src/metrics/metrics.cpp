// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "metrics/metrics.hpp"

#include "core/error.hpp"

#include <json.hpp>

#include <cmath>

namespace msfa {

namespace {

template <typename T>
void check_shapes(const CubeView<T>& o, const CubeView<T>& p, const char* what)
{
    require(o.bands == p.bands && o.height == p.height && o.width == p.width, ErrorKind::ShapeMismatch,
            std::string(what) + ": cube shapes differ");
    require(o.data.size() == o.bands * o.height * o.width && p.data.size() == o.data.size(), ErrorKind::ShapeMismatch,
            std::string(what) + ": view size does not match its extents");
    require(!o.data.empty(), ErrorKind::InvalidGeometry, std::string(what) + ": empty cube");
}

/// Compensated (Neumaier) summation; keeps large-cube means exact to a few ulps.
class Accumulator
{
public:
    void add(double v)
    {
        const double t = sum_ + v;
        comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0, comp_ = 0.0;
};

std::vector<double> gaussian_taps()
{
    std::vector<double> t(kSsimWindow);
    const double c = double(kSsimWindow / 2);
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = double(i) - c;
        s += t[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    }
    for (double& v : t)
        v /= s;
    return t;
}

/// Valid-mode separable filtering: output (h - n + 1) x (w - n + 1).
std::vector<double> filter_valid(const std::vector<double>& in, std::size_t h, std::size_t w,
                                 const std::vector<double>& taps)
{
    const std::size_t n = taps.size(), oh = h - n + 1, ow = w - n + 1;
    std::vector<double> tmp(h * ow), out(oh * ow);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                acc += taps[i] * in[y * w + x + i];
            tmp[y * ow + x] = acc;
        }
    for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                acc += taps[i] * tmp[(y + i) * ow + x];
            out[y * ow + x] = acc;
        }
    return out;
}

template <typename T>
std::vector<T> crop(const CubeView<T>& c, std::size_t m)
{
    const std::size_t h = c.height - 2 * m, w = c.width - 2 * m;
    std::vector<T> out;
    out.reserve(c.bands * h * w);
    for (std::size_t b = 0; b < c.bands; ++b)
        for (std::size_t y = 0; y < h; ++y) {
            const T* row = &c.data[(b * c.height + y + m) * c.width + m];
            out.insert(out.end(), row, row + w);
        }
    return out;
}

} // namespace

template <typename T>
double mse(CubeView<T> o, CubeView<T> p)
{
    check_shapes(o, p, "mse");
    Accumulator acc;
    for (std::size_t i = 0; i < o.data.size(); ++i) {
        const double d = double(o.data[i]) - double(p.data[i]);
        acc.add(d * d);
    }
    return acc.value() / double(o.data.size());
}

template <typename T>
double psnr(CubeView<T> o, CubeView<T> p, double peak)
{
    require(peak > 0.0, ErrorKind::InvalidArgument, "psnr: peak must be positive");
    const double m = mse(o, p);
    if (m == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / m);
}

template <typename T>
double ssim(CubeView<T> o, CubeView<T> p)
{
    check_shapes(o, p, "ssim");
    require(o.height >= kSsimWindow && o.width >= kSsimWindow, ErrorKind::InvalidGeometry,
            "ssim: image " + std::to_string(o.height) + "x" + std::to_string(o.width) + " is smaller than the " +
                std::to_string(kSsimWindow) + "x" + std::to_string(kSsimWindow) + " window");
    const double c1 = kSsimK1 * kSsimK1, c2 = kSsimK2 * kSsimK2;
    const auto taps = gaussian_taps();
    const std::size_t h = o.height, w = o.width, n = h * w;
    std::vector<double> a(n), b(n), aa(n), bb(n), ab(n);
    double total = 0.0;
    for (std::size_t band = 0; band < o.bands; ++band) {
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = o.data[band * n + i];
            b[i] = p.data[band * n + i];
            aa[i] = a[i] * a[i];
            bb[i] = b[i] * b[i];
            ab[i] = a[i] * b[i];
        }
        const auto mu1 = filter_valid(a, h, w, taps), mu2 = filter_valid(b, h, w, taps);
        const auto s11 = filter_valid(aa, h, w, taps), s22 = filter_valid(bb, h, w, taps),
                   s12 = filter_valid(ab, h, w, taps);
        Accumulator acc;
        for (std::size_t i = 0; i < mu1.size(); ++i) {
            const double m1 = mu1[i], m2 = mu2[i];
            const double v1 = s11[i] - m1 * m1, v2 = s22[i] - m2 * m2, cov = s12[i] - m1 * m2;
            acc.add(((2.0 * m1 * m2 + c1) * (2.0 * cov + c2)) / ((m1 * m1 + m2 * m2 + c1) * (v1 + v2 + c2)));
        }
        total += acc.value() / double(mu1.size());
    }
    return total / double(o.bands);
}

template <typename T>
SamResult sam_detail(CubeView<T> o, CubeView<T> p)
{
    check_shapes(o, p, "sam");
    const std::size_t n = o.height * o.width;
    SamResult r;
    Accumulator acc;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double no = 0.0, np = 0.0;
        for (std::size_t b = 0; b < o.bands; ++b) {
            no += double(o.data[b * n + i]) * double(o.data[b * n + i]);
            np += double(p.data[b * n + i]) * double(p.data[b * n + i]);
        }
        if (no == 0.0 || np == 0.0) {
            ++r.excluded;
            continue;
        }
        no = std::sqrt(no);
        np = std::sqrt(np);
        // Angle between unit vectors via 2 atan2(|u - v|, |u + v|); unlike
        // acos of the cosine it stays accurate for nearly parallel spectra.
        double dm = 0.0, dp = 0.0;
        for (std::size_t b = 0; b < o.bands; ++b) {
            const double u = double(o.data[b * n + i]) / no, v = double(p.data[b * n + i]) / np;
            dm += (u - v) * (u - v);
            dp += (u + v) * (u + v);
        }
        acc.add(2.0 * std::atan2(std::sqrt(dm), std::sqrt(dp)));
        ++used;
    }
    r.mean_rad = used ? acc.value() / double(used) : 0.0;
    return r;
}

template <typename T>
MetricReport evaluate(CubeView<T> o, CubeView<T> p, std::size_t m)
{
    check_shapes(o, p, "evaluate");
    require(2 * m < o.height && 2 * m < o.width, ErrorKind::InvalidGeometry,
            "evaluate: crop margin " + std::to_string(m) + " leaves no pixels");
    const std::vector<T> oc = crop(o, m), pc = crop(p, m);
    const CubeView<T> ov{o.bands, o.height - 2 * m, o.width - 2 * m, oc};
    const CubeView<T> pv{p.bands, p.height - 2 * m, p.width - 2 * m, pc};
    MetricReport r;
    r.mse = mse(ov, pv);
    r.psnr_db = psnr(ov, pv);
    r.ssim = ssim(ov, pv);
    const SamResult s = sam_detail(ov, pv);
    r.sam_rad = s.mean_rad;
    r.sam_excluded = s.excluded;
    return r;
}

#define MSFA_METRICS_INSTANTIATE(T)                                                                                    \
    template double mse<T>(CubeView<T>, CubeView<T>);                                                                  \
    template double psnr<T>(CubeView<T>, CubeView<T>, double);                                                         \
    template double ssim<T>(CubeView<T>, CubeView<T>);                                                                 \
    template SamResult sam_detail<T>(CubeView<T>, CubeView<T>);                                                        \
    template MetricReport evaluate<T>(CubeView<T>, CubeView<T>, std::size_t);

MSFA_METRICS_INSTANTIATE(float)
MSFA_METRICS_INSTANTIATE(double)

std::string report_to_json(const MetricReport& r)
{
    nlohmann::ordered_json j;
    j["ssim"] = r.ssim;
    if (std::isinf(r.psnr_db))
        j["psnr_db"] = r.psnr_db > 0 ? "inf" : "-inf";
    else
        j["psnr_db"] = r.psnr_db;
    j["sam_rad"] = r.sam_rad;
    j["mse"] = r.mse;
    return j.dump();
}

MetricReport report_from_json(const std::string& text)
{
    try {
        const auto j = nlohmann::json::parse(text);
        MetricReport r;
        r.ssim = j.at("ssim").get<double>();
        const auto& ps = j.at("psnr_db");
        if (ps.is_string()) {
            const auto s = ps.get<std::string>();
            require(s == "inf" || s == "-inf", ErrorKind::UnsupportedFormat, "psnr_db string must be \"inf\"");
            r.psnr_db = s == "inf" ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        } else {
            r.psnr_db = ps.get<double>();
        }
        r.sam_rad = j.at("sam_rad").get<double>();
        r.mse = j.at("mse").get<double>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::UnsupportedFormat, std::string("bad metric report: ") + e.what());
    }
}

MetricReport mean_report(const std::vector<MetricReport>& reports)
{
    require(!reports.empty(), ErrorKind::InvalidArgument, "mean_report: no reports");
    MetricReport m{0.0, 0.0, 0.0, 0.0, 0};
    for (const auto& r : reports) {
        m.ssim += r.ssim;
        m.psnr_db += r.psnr_db;
        m.sam_rad += r.sam_rad;
        m.mse += r.mse;
        m.sam_excluded += r.sam_excluded;
    }
    const double n = double(reports.size());
    m.ssim /= n;
    m.psnr_db /= n;
    m.sam_rad /= n;
    m.mse /= n;
    return m;
}

} // namespace msfa
