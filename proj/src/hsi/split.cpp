// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "hsi/split.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace msfa {

const char* to_string(Split split) noexcept
{
    switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
    }
    return "?";
}

Split split_from_string(const std::string& name)
{
    if (name == "train")
        return Split::Train;
    if (name == "validation" || name == "val")
        return Split::Validation;
    if (name == "test")
        return Split::Test;
    fail(ErrorKind::InvalidArgument, "unknown split '" + name + "'");
}

const std::vector<std::string>& DatasetSplit::of(Split split) const
{
    switch (split) {
    case Split::Train: return train;
    case Split::Validation: return validation;
    case Split::Test: return test;
    }
    return train;
}

DatasetSplit split_dataset(const std::vector<std::string>& scene_ids, std::uint64_t seed)
{
    require(scene_ids.size() >= 3, ErrorKind::InvalidArgument,
            "need at least 3 scenes to split, got " + std::to_string(scene_ids.size()));
    require(std::set<std::string>(scene_ids.begin(), scene_ids.end()).size() == scene_ids.size(),
            ErrorKind::InvalidArgument, "scene ids must be unique");

    std::vector<std::string> ids = scene_ids;
    std::sort(ids.begin(), ids.end());
    // Fisher-Yates with raw engine output so the permutation does not depend
    // on the standard library's distribution implementation.
    std::mt19937_64 rng(seed);
    for (std::size_t i = ids.size() - 1; i > 0; --i)
        std::swap(ids[i], ids[rng() % (i + 1)]);

    const std::size_t n = ids.size();
    const std::size_t n_val = std::max<std::size_t>(1, n * 15 / 100);
    const std::size_t n_test = std::max<std::size_t>(1, n * 10 / 100);

    DatasetSplit split;
    split.validation.assign(ids.begin(), ids.begin() + std::ptrdiff_t(n_val));
    split.test.assign(ids.begin() + std::ptrdiff_t(n_val), ids.begin() + std::ptrdiff_t(n_val + n_test));
    split.train.assign(ids.begin() + std::ptrdiff_t(n_val + n_test), ids.end());
    for (auto* v : {&split.train, &split.validation, &split.test})
        std::sort(v->begin(), v->end());
    return split;
}

} // namespace msfa
