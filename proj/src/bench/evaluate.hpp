// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "bench/corpus.hpp"
#include "metrics/metrics.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace msfa::bench {

/// Reconstructs a cube from a raw frame. `truth` is only read by the
/// ground-truth debug method.
using Demosaicer = std::function<SpectralCube(const MosaicImage& mosaic, const SpectralCube* truth)>;

/// Methods: "bilinear" (weighted bilinear), "id", "truth" (returns the ground
/// truth, for checking the harness) and "net:<architecture>". Net methods
/// look their weights up in `weights` by architecture name.
Demosaicer make_demosaicer(const std::string& method, const std::map<std::string, std::string>& weights = {});

/// File-name-safe form of a method name ("net:id-unet" -> "net_id-unet").
std::string method_slug(const std::string& method);

struct EvalOptions
{
    Split split = Split::Test;
    std::size_t crop_margin = 4;
    std::map<std::string, std::string> weights; ///< architecture -> MSWT checkpoint
};

struct SceneResult
{
    std::string scene;
    MetricReport report;
};

struct MethodEvaluation
{
    std::string method;
    std::vector<SceneResult> scenes; ///< in split order
    MetricReport mean;
};

MethodEvaluation evaluate_method(const std::string& method, const Dataset& dataset, const EvalOptions& options = {});

/// {"method", "split", "crop_margin", "mean": {...}, "scenes": [{"scene", ...}]}
std::string evaluation_to_json(const MethodEvaluation& evaluation, const EvalOptions& options);

} // namespace msfa::bench
