#pragma once

#include <cstdint>
#include <string>

#include "deal/dataset.hpp"

namespace deal {

// Two isotropic unit-variance Gaussian classes whose means are `separation`
// apart along the first axis; classes alternate so sizes differ by at most one.
Dataset make_two_gaussians(std::size_t count, double separation, std::size_t dims, std::uint64_t seed);

// Two interleaved half circles with Gaussian jitter.
Dataset make_moons(std::size_t count, double noise, std::uint64_t seed);

// "separable", "overlapping" or "moons", with an optional ":count" suffix.
Dataset make_named_dataset(const std::string& spec, std::uint64_t seed);

}  // namespace deal
