// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "ad/trace.hpp"

namespace msfa::ad {

namespace {
thread_local BranchTrace* t_active = nullptr;
}

BranchTrace::BranchTrace() : previous_(t_active)
{
    t_active = this;
}

BranchTrace::~BranchTrace()
{
    t_active = previous_;
}

void BranchTrace::mix(std::uint64_t value) noexcept
{
    // splitmix64 finalizer folded into an order-dependent running hash.
    value += 0x9e3779b97f4a7c15ull;
    value = (value ^ (value >> 30)) * 0xbf58476d1ce4e5b9ull;
    value = (value ^ (value >> 27)) * 0x94d049bb133111ebull;
    value ^= value >> 31;
    hash_ = (hash_ ^ value) * 0x100000001b3ull;
    ++count_;
}

BranchTrace* BranchTrace::active() noexcept
{
    return t_active;
}

} // namespace msfa::ad
