// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "bench/evaluate.hpp"

#include <string>
#include <vector>

namespace msfa::bench {

struct ReportOptions
{
    std::string scene;     ///< scene to render; empty picks the first of the evaluated split
    std::vector<Roi> rois; ///< empty: two quarter-size regions, upper left and lower right
};

struct ReportRow
{
    std::string method;
    std::size_t scenes = 0;
    MetricReport mean;
    double error_max = 0.0;      ///< l1 error map of the rendered scene, whole image
    std::vector<double> roi_max; ///< same map, per ROI
};

/// Default regions for an h x w image.
std::vector<Roi> default_rois(std::size_t height, std::size_t width);

/// Writes metrics.txt, metrics.csv, truth.ppm and per method <slug>.ppm and
/// <slug>_error.pgm into `out_dir`. Error maps share one grey scale.
std::vector<ReportRow> write_report(const std::vector<MethodEvaluation>& evaluations, const Dataset& dataset,
                                    const EvalOptions& eval, const std::string& out_dir,
                                    const ReportOptions& options = {});

std::string rows_to_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> rows_from_csv(const std::string& text);
std::string rows_to_text(const std::vector<ReportRow>& rows, const std::string& scene);

} // namespace msfa::bench
