// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace msfa {

enum class Split { Train, Validation, Test };

const char* to_string(Split split) noexcept;
Split split_from_string(const std::string& name);

/// Scene-level partition. Validation and test take floor(15%) and floor(10%)
/// of the scenes (at least one each); the remainder trains.
struct DatasetSplit
{
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;

    const std::vector<std::string>& of(Split split) const;
};

DatasetSplit split_dataset(const std::vector<std::string>& scene_ids, std::uint64_t seed);

} // namespace msfa
