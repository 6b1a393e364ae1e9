#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "frugalmct/core.hpp"

namespace frugalmct {

// Malformed or inconsistent input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  std::vector<Record> records;
  std::vector<std::string> api_names;
  // Sorted distinct labels seen in the data; set when the label space is bounded.
  std::optional<std::vector<Label>> label_vocabulary;

  std::size_t size() const { return records.size(); }
  std::size_t num_apis() const { return api_names.size(); }
  // Index of an API by name; throws std::out_of_range if unknown.
  ApiIndex api_index(const std::string& name) const;
};

struct EmbeddingTable {
  std::size_t dimension = 0;
  std::unordered_map<Label, std::vector<double>> vectors;

  const std::vector<double>* find(const Label& label) const {
    auto it = vectors.find(label);
    return it == vectors.end() ? nullptr : &it->second;
  }
};

// Reads the JSON-Lines prediction log:
//   {"id": "...", "truth": [...], "predictions": {"<api>": [["label", score], ...], ...}}
// API order follows the first line. Scores are clamped into [0,1] and duplicate
// labels within one API keep the largest score.
Dataset load_records(const std::filesystem::path& path);
Dataset read_records(std::istream& in);
void write_records(std::ostream& out, const Dataset& dataset);
void save_records(const std::filesystem::path& path, const Dataset& dataset);

// Sorted union of every label in truths and predictions.
std::vector<Label> build_vocabulary(const std::vector<Record>& records);

// {"apis": {"<name>": cost}, "base": "<name>", "price_unit": "per_query"}
CostTable load_cost_table(const std::filesystem::path& path,
                          const std::vector<std::string>& api_names);
CostTable parse_cost_table(const std::string& json_text,
                           const std::vector<std::string>& api_names);
// Name of the base API in a cost table file.
std::string cost_table_base_name(const std::filesystem::path& path);

// {"label": "...", "vector": [...]} per line; the first line fixes the dimension.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable read_embeddings(std::istream& in);

struct DatasetSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
};

// Seeded shuffle, then floor(N * train_fraction) records for training and the
// remainder halved between validation and test (test takes the odd record).
DatasetSplit split(const Dataset& dataset, double train_fraction, std::uint64_t seed);

// Subset of a dataset that keeps its API names and vocabulary.
Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices);

}  // namespace frugalmct
