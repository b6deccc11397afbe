#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dyncap {

struct SelfTestItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfTestReport {
  std::vector<SelfTestItem> items;
  bool all_passed() const;
};

/// Invariant suite on the default parameter set at reduced sample counts.
/// `seed` drives every randomized check.
SelfTestReport run_selftest(std::uint64_t seed);

}  // namespace dyncap
