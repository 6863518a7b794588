#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace omcspin::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
};

inline constexpr std::uint64_t kDefaultSeed = 7;

/// Runs every acceptance criterion. Stochastic checks draw from streams
/// derived from `seed`.
std::vector<CriterionResult> run_all(std::uint64_t seed = kDefaultSeed);

std::string format_line(const CriterionResult& r);
bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace omcspin::acceptance
