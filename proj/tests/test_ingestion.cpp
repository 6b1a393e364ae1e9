#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "frugalmct/ingestion.hpp"
#include "frugalmct/synthetic.hpp"

using namespace frugalmct;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return read_records(in);
}

const char* kTwoLines =
    R"({"id":"x1","truth":["a"],"predictions":{"p":[["a",0.9]],"q":[["b",0.4]],"r":[]}})"
    "\n"
    R"({"id":"x2","truth":["b","c"],"predictions":{"p":[],"q":[["b",1.3],["c",-0.2]],"r":[["c",0.5],["c",0.7]]}})"
    "\n";

Dataset numbered(std::size_t n) {
  Dataset d;
  d.api_names = {"p", "q"};
  for (std::size_t i = 0; i < n; ++i) d.records.push_back({std::to_string(i), {{}, {}}, {}});
  return d;
}

}  // namespace

TEST_CASE("records load with API order from the first line") {
  const Dataset d = parse(kTwoLines);
  CHECK(d.size() == 2);
  CHECK(d.num_apis() == 3);
  CHECK(d.api_names == std::vector<std::string>{"p", "q", "r"});
  CHECK(d.api_index("r") == 2);
  CHECK_THROWS_AS(d.api_index("s"), std::out_of_range);
  CHECK(d.records[0].predictions[0].score("a") == 0.9);
  CHECK(d.records[1].truth == LabelSet{"b", "c"});
}

TEST_CASE("scores are clamped and duplicates keep the max") {
  const Dataset d = parse(kTwoLines);
  CHECK(d.records[1].predictions[1].score("b") == 1.0);
  CHECK(d.records[1].predictions[1].score("c") == 0.0);
  CHECK(d.records[1].predictions[1].contains("c"));
  CHECK(d.records[1].predictions[2].score("c") == 0.7);
}

TEST_CASE("malformed input") {
  SUBCASE("missing API") {
    const std::string text = R"({"id":"1","truth":[],"predictions":{"p":[],"q":[]}})"
                             "\n"
                             R"({"id":"2","truth":[],"predictions":{"p":[]}})";
    try {
      parse(text);
      FAIL("expected an error");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("inconsistent API set") != std::string::npos);
    }
  }
  SUBCASE("bad JSON names the line") {
    const std::string text = R"({"id":"1","truth":[],"predictions":{"p":[],"q":[]}})"
                             "\n{oops\n";
    try {
      parse(text);
      FAIL("expected an error");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("a single API") {
    CHECK_THROWS_AS(parse(R"({"id":"1","truth":[],"predictions":{"p":[]}})"), FormatError);
  }
}

TEST_CASE("records round-trip") {
  const Dataset d = synthetic_dataset({50, 3, 4, 3}, 5);
  std::stringstream buf;
  write_records(buf, d);
  const Dataset back = read_records(buf);
  CHECK(back.api_names == d.api_names);
  CHECK(back.records == d.records);
}

TEST_CASE("cost tables") {
  const std::vector<std::string> names{"ssd", "everypixel", "microsoft", "google"};
  const auto c = parse_cost_table(
      R"({"apis":{"ssd":0.01,"everypixel":6,"microsoft":10,"google":15},"base":"ssd","price_unit":"per_query"})",
      names);
  CHECK(std::vector<double>(c.costs().begin(), c.costs().end()) == std::vector<double>{0.01, 6, 10, 15});
  CHECK(c.base() == 0);

  CHECK_THROWS_AS(parse_cost_table(R"({"apis":{"ssd":0,"everypixel":6,"microsoft":10,"google":15},"base":"aws"})",
                                   names),
                  FormatError);
  CHECK_THROWS_AS(parse_cost_table(R"({"apis":{"ssd":0,"everypixel":6,"microsoft":10},"base":"ssd"})", names),
                  FormatError);
  CHECK_THROWS_AS(parse_cost_table(R"({"apis":{"ssd":-1,"everypixel":6,"microsoft":10,"google":15},"base":"ssd"})",
                                   names),
                  FormatError);
  const auto free_base = parse_cost_table(
      R"({"apis":{"ssd":0,"everypixel":6,"microsoft":10,"google":15},"base":"ssd"})", names);
  CHECK(free_base.base_cost() == 0.0);
}

TEST_CASE("embeddings") {
  std::istringstream in(R"({"label":"a","vector":[1,2]})"
                        "\n"
                        R"({"label":"b","vector":[0.5,0]})");
  const auto e = read_embeddings(in);
  CHECK(e.dimension == 2);
  CHECK(*e.find("b") == std::vector<double>{0.5, 0.0});
  CHECK(e.find("c") == nullptr);

  std::istringstream bad(R"({"label":"a","vector":[1,2]})"
                         "\n"
                         R"({"label":"b","vector":[1]})");
  CHECK_THROWS_AS(read_embeddings(bad), FormatError);
}

TEST_CASE("split sizes") {
  auto sizes = [](const DatasetSplit& s) {
    return std::vector<std::size_t>{s.train.size(), s.validation.size(), s.test.size()};
  };
  CHECK(sizes(split(numbered(100), 0.5, 7)) == std::vector<std::size_t>{50, 25, 25});
  CHECK(sizes(split(numbered(101), 0.5, 7)) == std::vector<std::size_t>{50, 25, 26});
  CHECK_THROWS_AS(split(numbered(2), 0.5, 7), std::invalid_argument);
  CHECK_THROWS_AS(split(numbered(10), 1.0, 7), std::invalid_argument);
}

TEST_CASE("split is deterministic and partitions the data") {
  const Dataset d = numbered(57);
  const auto a = split(d, 0.5, 9);
  const auto b = split(d, 0.5, 9);
  CHECK(a.train.records == b.train.records);
  CHECK(a.test.records == b.test.records);

  std::multiset<std::string> ids;
  for (const auto* part : {&a.train, &a.validation, &a.test}) {
    for (const auto& r : part->records) ids.insert(r.id);
  }
  CHECK(ids.size() == 57);
  CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == 57);

  const auto c = split(d, 0.5, 10);
  CHECK(c.train.records != a.train.records);
}

TEST_CASE("files on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "frugalmct_ingestion_test";
  std::filesystem::create_directories(dir);
  const Dataset d = synthetic_dataset({20, 2, 2, 2}, 1);
  save_records(dir / "r.jsonl", d);
  {
    std::ofstream out(dir / "c.json");
    out << cost_table_json(synthetic_costs(2), d.api_names);
  }
  CHECK(load_records(dir / "r.jsonl").records == d.records);
  CHECK(load_cost_table(dir / "c.json", d.api_names).cost(1) == 6.0);
  CHECK(cost_table_base_name(dir / "c.json") == d.api_names[0]);
  CHECK_THROWS(load_records(dir / "missing.jsonl"));
  std::filesystem::remove_all(dir);
}
