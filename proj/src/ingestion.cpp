#include "frugalmct/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace frugalmct {

namespace {

using ordered_json = nlohmann::ordered_json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

double clamp_score(double score) {
  if (std::isnan(score)) throw FormatError("quality score is NaN");
  return std::clamp(score, 0.0, 1.0);
}

ScoredLabelSet parse_scored_labels(const ordered_json& entries) {
  if (!entries.is_array()) throw FormatError("prediction must be an array of [label, score] pairs");
  ScoredLabelSet out;
  for (const auto& pair : entries) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_number()) {
      throw FormatError("prediction entry must be [label, score]");
    }
    const auto label = pair[0].get<std::string>();
    const double score = clamp_score(pair[1].get<double>());
    out.set(label, std::max(score, out.score(label)));
  }
  return out;
}

Record parse_record(const ordered_json& j, std::vector<std::string>& api_names) {
  if (!j.is_object()) throw FormatError("record must be a JSON object");
  Record r;
  if (j.contains("id")) {
    const auto& id = j.at("id");
    r.id = id.is_string() ? id.get<std::string>() : id.dump();
  }
  const auto& truth = j.at("truth");
  if (!truth.is_array()) throw FormatError("truth must be an array of labels");
  for (const auto& label : truth) r.truth.insert(label.get<std::string>());

  const auto& preds = j.at("predictions");
  if (!preds.is_object()) throw FormatError("predictions must be an object keyed by API name");
  if (api_names.empty()) {
    for (const auto& [name, value] : preds.items()) api_names.push_back(name);
    if (api_names.size() < 2) throw FormatError("at least two APIs are required");
  }
  if (preds.size() != api_names.size()) throw FormatError("inconsistent API set");
  r.predictions.reserve(api_names.size());
  for (const auto& name : api_names) {
    auto it = preds.find(name);
    if (it == preds.end()) throw FormatError("inconsistent API set: missing '" + name + "'");
    r.predictions.push_back(parse_scored_labels(*it));
  }
  return r;
}

}  // namespace

ApiIndex Dataset::api_index(const std::string& name) const {
  auto it = std::find(api_names.begin(), api_names.end(), name);
  if (it == api_names.end()) throw std::out_of_range("unknown API '" + name + "'");
  return static_cast<ApiIndex>(it - api_names.begin());
}

std::vector<Label> build_vocabulary(const std::vector<Record>& records) {
  std::set<Label> all;
  for (const auto& r : records) {
    all.insert(r.truth.begin(), r.truth.end());
    for (const auto& p : r.predictions) {
      for (const auto& [label, score] : p) all.insert(label);
    }
  }
  return {all.begin(), all.end()};
}

Dataset read_records(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      ds.records.push_back(parse_record(ordered_json::parse(line), ds.api_names));
    } catch (const std::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (ds.records.empty()) throw FormatError("no records found");
  ds.label_vocabulary = build_vocabulary(ds.records);
  return ds;
}

Dataset load_records(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_records(in);
}

void write_records(std::ostream& out, const Dataset& dataset) {
  for (const auto& r : dataset.records) {
    ordered_json j;
    j["id"] = r.id;
    j["truth"] = ordered_json::array();
    for (const auto& label : r.truth) j["truth"].push_back(label);
    ordered_json preds = ordered_json::object();
    for (std::size_t k = 0; k < dataset.api_names.size(); ++k) {
      ordered_json entries = ordered_json::array();
      for (const auto& [label, score] : r.predictions.at(k)) entries.push_back({label, score});
      preds[dataset.api_names[k]] = std::move(entries);
    }
    j["predictions"] = std::move(preds);
    out << j.dump() << '\n';
  }
}

void save_records(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_records(out, dataset);
}

CostTable parse_cost_table(const std::string& json_text, const std::vector<std::string>& api_names) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw FormatError(std::string("cost table: ") + e.what());
  }
  if (!j.contains("apis") || !j["apis"].is_object()) throw FormatError("cost table: missing 'apis'");
  if (!j.contains("base") || !j["base"].is_string()) throw FormatError("cost table: missing 'base'");
  if (j.contains("price_unit") && j["price_unit"] != "per_query") {
    throw FormatError("cost table: unsupported price_unit");
  }
  const auto& apis = j["apis"];
  std::vector<double> costs;
  costs.reserve(api_names.size());
  for (const auto& name : api_names) {
    auto it = apis.find(name);
    if (it == apis.end() || !it->is_number()) throw FormatError("cost table: missing API '" + name + "'");
    const double c = it->get<double>();
    if (!(c >= 0.0) || !std::isfinite(c)) throw FormatError("cost table: negative cost for '" + name + "'");
    costs.push_back(c);
  }
  const auto base_name = j["base"].get<std::string>();
  auto base_it = std::find(api_names.begin(), api_names.end(), base_name);
  if (base_it == api_names.end()) throw FormatError("cost table: unknown base '" + base_name + "'");
  return CostTable(std::move(costs), static_cast<ApiIndex>(base_it - api_names.begin()));
}

CostTable load_cost_table(const std::filesystem::path& path, const std::vector<std::string>& api_names) {
  auto in = open_input(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_cost_table(buf.str(), api_names);
}

std::string cost_table_base_name(const std::filesystem::path& path) {
  auto in = open_input(path);
  auto j = ordered_json::parse(in);
  return j.at("base").get<std::string>();
}

EmbeddingTable read_embeddings(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      auto j = ordered_json::parse(line);
      auto label = j.at("label").get<std::string>();
      auto vec = j.at("vector").get<std::vector<double>>();
      if (table.dimension == 0) {
        if (vec.empty()) throw FormatError("empty embedding vector");
        table.dimension = vec.size();
      } else if (vec.size() != table.dimension) {
        throw FormatError("embedding dimension mismatch");
      }
      table.vectors[std::move(label)] = std::move(vec);
    } catch (const std::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (table.vectors.empty()) throw FormatError("no embeddings found");
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_embeddings(in);
}

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.api_names = dataset.api_names;
  out.label_vocabulary = dataset.label_vocabulary;
  out.records.reserve(indices.size());
  for (auto i : indices) out.records.push_back(dataset.records.at(i));
  return out;
}

DatasetSplit split(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0,1)");
  }
  const std::size_t n = dataset.size();
  if (n < 3) throw std::invalid_argument("need at least 3 records to split");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
  const std::size_t n_val = (n - n_train) / 2;
  auto first = order.begin();
  DatasetSplit out;
  out.train = subset(dataset, {first, first + n_train});
  out.validation = subset(dataset, {first + n_train, first + n_train + n_val});
  out.test = subset(dataset, {first + n_train + n_val, order.end()});
  return out;
}

}  // namespace frugalmct
