#pragma once

#include <cstdint>
#include <string_view>

namespace omcspin {

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Independent stream seed for a labelled subcomponent. Adding new labels
/// never changes the streams of existing ones.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index);

}  // namespace omcspin
