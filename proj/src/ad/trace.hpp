// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include <cstdint>

namespace msfa::ad {

/// Fingerprint of the linear piece selected by every ReLU (input sign) and
/// max-pool (argmax) evaluated on this thread while the trace is alive.
/// Two forward passes with equal fingerprints ran through the same
/// piecewise-linear branch. Traces do not nest.
class BranchTrace
{
public:
    BranchTrace();
    ~BranchTrace();
    BranchTrace(const BranchTrace&) = delete;
    BranchTrace& operator=(const BranchTrace&) = delete;

    std::uint64_t fingerprint() const noexcept { return hash_; }
    std::uint64_t decisions() const noexcept { return count_; }

    void mix(std::uint64_t value) noexcept;

    /// The live trace on this thread, or null.
    static BranchTrace* active() noexcept;

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ull;
    std::uint64_t count_ = 0;
    BranchTrace* previous_ = nullptr;
};

} // namespace msfa::ad
