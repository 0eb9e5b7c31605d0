#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfgz/config.hpp"

namespace mfgz {

struct CheckLine {
  std::string property;
  std::string measured;
  bool pass = false;
};

struct CheckReport {
  std::string suite;
  std::vector<CheckLine> lines;

  bool passed() const;
  void add(std::string property, std::string measured, bool pass);
};

inline const char* const kSuites[] = {"metric", "flow",       "estimates", "isaacs",
                                      "gradient", "dpp-oracle", "comparison"};

/// W2 metric axioms, W1 <= W2 and sorted vs transport agreement on random
/// dim-1 measures (N <= 8), plus coupling cost and a few dim-2 instances.
CheckReport check_metric(std::uint64_t seed, std::size_t trials = 200);

/// Flow-property deviation at substeps 4, 8, 16, 32 with controls fixed at the
/// lower corners of the boxes; passes when k = 32 is within 1e-8 and the
/// deviation decreases with k.
CheckReport check_flow(const GameConfig& cfg);

CheckReport check_estimates_suite(const GameConfig& cfg);

/// |H+ - H-| over `samples` random (t, law, costate) draws around the
/// configured law; also reports the first-step DPP gap at S = 1.
CheckReport check_isaacs(const GameConfig& cfg, std::uint64_t seed, std::size_t samples = 50);

CheckReport check_gradient(const GameConfig& cfg, std::uint64_t seed);

/// Exact-mode DPP against full enumeration on tiny variants of the game.
CheckReport check_dpp_oracle(const GameConfig& cfg);

CheckReport check_comparison(const GameConfig& cfg);

/// Dispatch by suite name; InvalidArgument for unknown names.
CheckReport run_suite(const std::string& suite, const GameConfig& cfg, std::uint64_t seed);

}  // namespace mfgz
