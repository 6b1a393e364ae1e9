#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frugalmct/core.hpp"
#include "frugalmct/ingestion.hpp"

namespace frugalmct {

// Seeded generators for fixtures, demos and statistical tests.

struct SyntheticDatasetSpec {
  std::size_t records = 1000;
  std::size_t apis = 4;
  std::size_t categories = 8;
  std::size_t labels_per_category = 5;
};

// Multi-label records whose per-API quality depends on a hidden category that the
// first API's output reveals, so the base output is informative of every API's
// accuracy. API 0 is the weakest; later APIs are stronger on average.
Dataset synthetic_dataset(const SyntheticDatasetSpec& spec, std::uint64_t seed);

// MIC-style price list {0.01, 6, 10, 15, ...} with API 0 as base.
CostTable synthetic_costs(std::size_t apis);

// Cost table JSON in the on-disk schema.
std::string cost_table_json(const CostTable& costs, const std::vector<std::string>& api_names);

// i.i.d. accuracy rows: each input has a latent difficulty and each API a
// cost-correlated skill, plus continuous noise. Entries lie in [0,1].
AccuracyMatrix synthetic_accuracies(std::size_t rows, std::size_t apis, std::uint64_t seed);

}  // namespace frugalmct
