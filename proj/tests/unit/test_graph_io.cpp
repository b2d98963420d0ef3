#include "doctest.h"

#include <filesystem>

#include "gcattack/error.hpp"
#include "gcattack/graph_io.hpp"

using namespace gcattack;

TEST_CASE("graph text round-trips for every fixture") {
  for (const auto& g : {fixtures::object_taxonomy(), fixtures::small_tree(), fixtures::sixteen_leaves()}) {
    const std::string text = serialize_graph(g);
    const auto back = parse_graph(text);
    CHECK(back == g);
    CHECK(serialize_graph(back) == text);
    CHECK(graph_hash(back) == graph_hash(g));
  }
}

TEST_CASE("original defaults to every label") {
  const auto g = parse_graph(R"({"labels": ["R", "A"], "edges": [["R", "A"]]})");
  CHECK(g.is_original(g.id_of("R")));
  CHECK(g.is_original(g.id_of("A")));
  const auto h = parse_graph(R"({"labels": ["R", "A"], "edges": [["R", "A"]], "original": ["A"]})");
  CHECK_FALSE(h.is_original(h.id_of("R")));
  CHECK(h.is_original(h.id_of("A")));
}

TEST_CASE("malformed graph JSON reports a location") {
  try {
    parse_graph("{\"labels\": [\"a\",\n  \"b\"");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_graph(R"({"labels": ["a"]})"), Error);
  CHECK_THROWS_AS(parse_graph(R"({"labels": ["a"], "edges": [["a"]]})"), Error);
}

TEST_CASE("cyclic graph file is rejected") {
  try {
    parse_graph(R"({"labels": ["a", "b"], "edges": [["a", "b"], ["b", "a"]]})");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CycleDetected);
  }
}

TEST_CASE("candidates round-trip") {
  const std::vector<TaxonomyCandidate> cands{{"dog", {"mammal", "pet"}}, {"mammal", {"animal"}}};
  const auto text = serialize_candidates(cands);
  const auto back = parse_candidates(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].child == "dog");
  CHECK(back[0].parents == std::vector<std::string>{"mammal", "pet"});
  CHECK(serialize_candidates(back) == text);
}

TEST_CASE("graph file save and load") {
  const auto path = std::filesystem::temp_directory_path() / "gcattack_graph_io_test.json";
  save_graph(path, fixtures::small_tree());
  CHECK(load_graph(path) == fixtures::small_tree());
  std::filesystem::remove(path);
  try {
    load_graph(path);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}
