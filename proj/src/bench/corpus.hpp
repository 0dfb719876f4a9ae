// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "hsi/cube.hpp"
#include "hsi/split.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace msfa::bench {

enum class CorpusSource { Simple, Real, Synthetic };

const char* to_string(CorpusSource source) noexcept;
CorpusSource corpus_source_from_string(const std::string& name);

struct CorpusOptions
{
    CorpusSource source = CorpusSource::Synthetic;
    std::uint64_t seed = 0; ///< scene generation and split shuffle

    // synthetic
    std::size_t count = 100;
    std::size_t height = 100;
    std::size_t width = 100;

    // simple / real: source cubes (HSC1 or ENVI headers), cut into patches
    std::vector<std::string> inputs;
    std::optional<ValueRange> range; ///< default: [0, max of each cube]
    std::size_t patch = 100;
    std::size_t stride = 100;
    std::string profile_dir; ///< real only; empty selects default_profile()
};

/// On-disk corpus:
///
///   manifest.json      source, seed, pattern, scene list and split
///   truth/<id>.hsc     ground-truth cube (HSC1)
///   mosaic/<id>.msm    raw frame (MSM1)
class Dataset
{
public:
    static Dataset open(const std::string& dir);

    const std::string& root() const noexcept { return root_; }
    const std::string& source() const noexcept { return source_; }
    const MsfaPattern& pattern() const noexcept { return pattern_; }
    const std::vector<std::string>& scenes() const noexcept { return scenes_; }
    const DatasetSplit& split() const noexcept { return split_; }

    std::string truth_path(const std::string& scene) const;
    std::string mosaic_path(const std::string& scene) const;
    SpectralCube load_truth(const std::string& scene) const;
    MosaicImage load_mosaic(const std::string& scene) const;

private:
    std::string root_;
    std::string source_;
    MsfaPattern pattern_;
    std::vector<std::string> scenes_;
    DatasetSplit split_;
};

/// Writes a corpus to `out_dir` (created if needed). Output bytes depend only
/// on the options and inputs.
Dataset make_corpus(const CorpusOptions& options, const std::string& out_dir);

} // namespace msfa::bench
