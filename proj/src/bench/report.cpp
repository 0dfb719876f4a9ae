// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "bench/report.hpp"

#include "core/binary_io.hpp"
#include "core/error.hpp"
#include "hsi/cube_io.hpp"
#include "hsi/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace msfa::bench {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* spec, double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

double parse_number(const std::string& s)
{
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    require(!s.empty() && end == s.c_str() + s.size(), ErrorKind::UnsupportedFormat,
            "metrics CSV: '" + s + "' is not a number");
    return v;
}

} // namespace

std::vector<Roi> default_rois(std::size_t height, std::size_t width)
{
    const std::size_t h = std::max<std::size_t>(1, height / 4);
    const std::size_t w = std::max<std::size_t>(1, width / 4);
    return {{height / 8, width / 8, h, w}, {std::min(height - h, 5 * height / 8), std::min(width - w, 5 * width / 8), h, w}};
}

std::vector<ReportRow> write_report(const std::vector<MethodEvaluation>& evaluations, const Dataset& dataset,
                                    const EvalOptions& eval, const std::string& out_dir,
                                    const ReportOptions& options)
{
    require(!evaluations.empty(), ErrorKind::InvalidArgument, "report needs at least one evaluated method");
    std::string scene = options.scene;
    if (scene.empty()) {
        require(!evaluations.front().scenes.empty(), ErrorKind::InvalidArgument, "evaluation has no scenes");
        scene = evaluations.front().scenes.front().scene;
    }
    const SpectralCube truth = dataset.load_truth(scene);
    const MosaicImage raw = dataset.load_mosaic(scene);
    const std::vector<Roi> rois = options.rois.empty() ? default_rois(truth.height(), truth.width()) : options.rois;

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    require(!ec, ErrorKind::Io, "cannot create " + out_dir + ": " + ec.message());
    const fs::path dir(out_dir);
    write_ppm(render_rgb(truth), (dir / "truth.ppm").string());

    std::vector<ReportRow> rows;
    std::vector<Plane> maps;
    for (const auto& e : evaluations) {
        const SpectralCube rec = make_demosaicer(e.method, eval.weights)(raw, &truth);
        write_ppm(render_rgb(rec), (dir / (method_slug(e.method) + ".ppm")).string());
        Plane map = error_map_l1(truth, rec);

        ReportRow row;
        row.method = e.method;
        row.scenes = e.scenes.size();
        row.mean = e.mean;
        row.error_max = roi_max(map, {0, 0, map.height, map.width});
        for (const Roi& roi : rois)
            row.roi_max.push_back(roi_max(map, roi));
        rows.push_back(std::move(row));
        maps.push_back(std::move(map));
    }

    float scale = 0.0f;
    for (const auto& r : rows)
        scale = std::max(scale, float(r.error_max));
    if (!(scale > 0.0f))
        scale = 1.0f;
    for (std::size_t i = 0; i < rows.size(); ++i)
        write_pgm(maps[i], scale, (dir / (method_slug(rows[i].method) + "_error.pgm")).string());

    io::write_file((dir / "metrics.csv").string(), rows_to_csv(rows));
    io::write_file((dir / "metrics.txt").string(), rows_to_text(rows, scene));
    return rows;
}

std::string rows_to_csv(const std::vector<ReportRow>& rows)
{
    const std::size_t n_roi = rows.empty() ? 0 : rows.front().roi_max.size();
    std::string out = "method,scenes,ssim,psnr_db,sam_rad,mse,error_max";
    for (std::size_t i = 0; i < n_roi; ++i)
        out += ",roi" + std::to_string(i + 1) + "_max";
    out += '\n';
    for (const auto& r : rows) {
        require(r.roi_max.size() == n_roi, ErrorKind::ShapeMismatch, "report rows disagree on ROI count");
        out += r.method + ',' + std::to_string(r.scenes);
        for (double v : {r.mean.ssim, r.mean.psnr_db, r.mean.sam_rad, r.mean.mse, r.error_max})
            out += ',' + fmt("%.17g", v);
        for (double v : r.roi_max)
            out += ',' + fmt("%.17g", v);
        out += '\n';
    }
    return out;
}

std::vector<ReportRow> rows_from_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    require(bool(std::getline(in, line)), ErrorKind::UnsupportedFormat, "metrics CSV is empty");
    const auto header = split_csv_line(line);
    require(header.size() >= 7 && header[0] == "method", ErrorKind::UnsupportedFormat, "metrics CSV: bad header");
    const std::size_t n_roi = header.size() - 7;

    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto cells = split_csv_line(line);
        require(cells.size() == header.size(), ErrorKind::UnsupportedFormat,
                "metrics CSV: row has " + std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(header.size()));
        ReportRow r;
        r.method = cells[0];
        r.scenes = static_cast<std::size_t>(parse_number(cells[1]));
        r.mean.ssim = parse_number(cells[2]);
        r.mean.psnr_db = parse_number(cells[3]);
        r.mean.sam_rad = parse_number(cells[4]);
        r.mean.mse = parse_number(cells[5]);
        r.error_max = parse_number(cells[6]);
        for (std::size_t i = 0; i < n_roi; ++i)
            r.roi_max.push_back(parse_number(cells[7 + i]));
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string rows_to_text(const std::vector<ReportRow>& rows, const std::string& scene)
{
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-22s %6s %8s %10s %9s %11s %9s", "method", "scenes", "SSIM", "PSNR[dB]",
                  "SAM[rad]", "MSE", "max l1");
    out += line;
    const std::size_t n_roi = rows.empty() ? 0 : rows.front().roi_max.size();
    for (std::size_t i = 0; i < n_roi; ++i) {
        std::snprintf(line, sizeof line, " %9s", ("ROI" + std::to_string(i + 1)).c_str());
        out += line;
    }
    out += '\n';
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-22s %6zu %8.4f %10s %9.4f %11.4e %9.4f", r.method.c_str(), r.scenes,
                      r.mean.ssim, fmt("%.4f", r.mean.psnr_db).c_str(), r.mean.sam_rad, r.mean.mse, r.error_max);
        out += line;
        for (double v : r.roi_max) {
            std::snprintf(line, sizeof line, " %9.4f", v);
            out += line;
        }
        out += '\n';
    }
    out += "error maps: l1 over bands, scene " + scene + '\n';
    return out;
}

} // namespace msfa::bench
