// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "bench/evaluate.hpp"

#include "core/error.hpp"
#include "demosaic/classic.hpp"
#include "nets/network.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <memory>

namespace msfa::bench {

using json = nlohmann::ordered_json;

Demosaicer make_demosaicer(const std::string& method, const std::map<std::string, std::string>& weights)
{
    if (method == "bilinear")
        return [](const MosaicImage& m, const SpectralCube*) { return wb_demosaic(scatter(m)); };
    if (method == "id")
        return [](const MosaicImage& m, const SpectralCube*) { return id_demosaic(scatter(m)); };
    if (method == "truth")
        return [](const MosaicImage&, const SpectralCube* truth) {
            require(truth != nullptr, ErrorKind::InvalidArgument, "method 'truth' needs the ground-truth cube");
            return *truth;
        };
    if (method.rfind("net:", 0) == 0) {
        const std::string arch = method.substr(4);
        const auto it = weights.find(arch);
        require(it != weights.end() && !it->second.empty(), ErrorKind::Io,
                "method " + method + " needs a checkpoint (no weights given for " + arch + ")");
        require(std::filesystem::exists(it->second), ErrorKind::Io,
                "checkpoint " + it->second + " for " + method + " does not exist");
        auto net = std::make_shared<nets::Network<float>>(nets::build_network<float>(arch));
        nets::load_weights(*net, it->second);
        return [net](const MosaicImage& m, const SpectralCube*) { return nets::forward_demosaic(*net, m); };
    }
    fail(ErrorKind::InvalidArgument, "unknown method '" + method + "' (bilinear, id, truth, net:<architecture>)");
}

std::string method_slug(const std::string& method)
{
    std::string s = method;
    std::replace(s.begin(), s.end(), ':', '_');
    return s;
}

MethodEvaluation evaluate_method(const std::string& method, const Dataset& dataset, const EvalOptions& options)
{
    const Demosaicer demosaic = make_demosaicer(method, options.weights);
    const auto& ids = dataset.split().of(options.split);
    require(!ids.empty(), ErrorKind::InvalidArgument,
            std::string("the ") + to_string(options.split) + " split is empty");

    MethodEvaluation out;
    out.method = method;
    std::vector<MetricReport> reports;
    for (const auto& id : ids) {
        const SpectralCube truth = dataset.load_truth(id);
        const MosaicImage raw = dataset.load_mosaic(id);
        require(truth.height() == raw.height() && truth.width() == raw.width(), ErrorKind::ShapeMismatch,
                "scene " + id + ": mosaic and ground truth differ in size");
        const SpectralCube rec = demosaic(raw, &truth);
        out.scenes.push_back({id, evaluate(truth, rec, options.crop_margin)});
        reports.push_back(out.scenes.back().report);
    }
    out.mean = mean_report(reports);
    return out;
}

std::string evaluation_to_json(const MethodEvaluation& e, const EvalOptions& options)
{
    json j;
    j["method"] = e.method;
    j["split"] = to_string(options.split);
    j["crop_margin"] = options.crop_margin;
    j["mean"] = json::parse(report_to_json(e.mean));
    json scenes = json::array();
    for (const auto& s : e.scenes) {
        json r = json::parse(report_to_json(s.report));
        r["scene"] = s.scene;
        scenes.push_back(std::move(r));
    }
    j["scenes"] = std::move(scenes);
    return j.dump(2) + "\n";
}

} // namespace msfa::bench
