// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "metrics/metrics.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace msfa::bench {

enum class Selection {
    BestValidation, ///< weights from the epoch with the highest validation PSNR
    Final,          ///< weights after the last epoch
};

struct TrainConfig
{
    std::string architecture = "id-resnet-s";
    std::size_t epochs = 100;
    std::size_t batch_size = 20;
    double learning_rate = 2e-4;
    double decay_factor = 0.9;
    std::size_t decay_every = 10;
    std::uint64_t seed = 0;
    std::size_t crop_margin = 4;
    std::string dataset;    ///< corpus directory
    std::string output_dir; ///< run.jsonl, best.mswt, final.mswt, summary.json
    Selection selection = Selection::BestValidation;

    /// Throws InvalidArgument on non-positive counts, lr <= 0 or decay outside (0, 1].
    void validate() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig config_from_json(const std::string& text);
std::string config_to_json(const TrainConfig& config);
TrainConfig load_config(const std::string& path);

/// lr0 * decay^floor(epoch / decay_every).
double lr_at_epoch(const TrainConfig& config, std::size_t epoch);

/// Sizes of the consecutive batches covering n samples; the last may be short.
std::vector<std::size_t> batch_sizes(std::size_t n, std::size_t batch);

/// Permutation of 0..n-1 for one epoch, from seed + epoch.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

struct EpochRecord
{
    std::size_t epoch = 0;
    double learning_rate = 0.0;
    double train_loss = 0.0; ///< mean per-scene loss over the epoch
    MetricReport validation;
};

/// One JSON object per line.
std::string epoch_to_json(const EpochRecord& record);
EpochRecord epoch_from_json(const std::string& line);
std::vector<EpochRecord> load_run_records(const std::string& path);

struct RunRecord
{
    std::string architecture;
    std::size_t parameters = 0;
    MetricReport initial_validation; ///< untrained network
    std::vector<EpochRecord> epochs;
    std::size_t selected_epoch = 0;
    std::string checkpoint;                  ///< weights of the selected epoch
    std::map<std::string, MetricReport> test; ///< net, id and bilinear on the test split
};

std::string run_summary_to_json(const RunRecord& run);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam on the mean squared error of border-cropped outputs. Writes
/// run.jsonl (appending one line per epoch), best.mswt, final.mswt,
/// hyperparameters.json and summary.json into the output directory.
/// Throws Numeric if the loss becomes non-finite.
RunRecord train(const TrainConfig& config, const EpochCallback& on_epoch = {});

} // namespace msfa::bench
