#include <catch_amalgamated.hpp>

#include "moljson/config.hpp"
#include "moljson/runner/runner.hpp"

using namespace moljson;

namespace {
std::string error_of(const std::string &text) {
  try {
    Config::parse(text, "t.toml");
  } catch (const Error &e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST_CASE("tables, dotted keys and scalars") {
  Config c = Config::parse(R"(# top
seed = 20_251_015
name = "a \"b\"\tc"
raw = 'C:\path'
ratio = 0.25
on = true

[corpus]
heavy_max = 30   # trailing comment
limits.low = 1

[constrained.spiro]
ring_min = 3
)");
  CHECK(c.get<long long>("seed", 0) == 20251015);
  CHECK(c.get<std::string>("name", "") == "a \"b\"\tc");
  CHECK(c.get<std::string>("raw", "") == "C:\\path");
  CHECK(c.get<double>("ratio", 0) == 0.25);
  CHECK(c.get<bool>("on", false));
  CHECK(c.get<int>("corpus.heavy_max", 0) == 30);
  CHECK(c.get<int>("corpus.limits.low", 0) == 1);
  CHECK(c.get<int>("constrained.spiro.ring_min", 0) == 3);
  CHECK(c.get<int>("constrained.spiro.ring_max", 7) == 7);
  CHECK(c.find("nope.deeper") == nullptr);
}

TEST_CASE("arrays span lines") {
  Config c = Config::parse("formats = [\n  \"smiles\",  # one\n  \"moljson\",\n]\nempty = []\nnested = [[1, 2], [3]]\n");
  CHECK(c.root()["formats"] == Json::array({"smiles", "moljson"}));
  CHECK(c.root()["empty"].empty());
  CHECK(c.root()["nested"][1][0] == 3);
}

TEST_CASE("errors carry the line") {
  CHECK(error_of("a = 1\nb = 2\na = 3\n").find("t.toml:3: duplicate key a") != std::string::npos);
  CHECK(error_of("a = 1 2\n").find("t.toml:1") != std::string::npos);
  CHECK(error_of("\n\nx = \"open\n").find("t.toml:3: unterminated") != std::string::npos);
  CHECK(error_of("x = nope\n").find("cannot read value") != std::string::npos);
  CHECK(error_of("x = 1\n[x]\n").find("redefines") != std::string::npos);
  CHECK(error_of("= 1\n").find("expected a key") != std::string::npos);
  CHECK(error_of("x = [1, 2\n").find("expected ']'") != std::string::npos);
}

TEST_CASE("wrong type is a schema violation") {
  Config c = Config::parse("n = \"ten\"\n");
  try {
    (void)c.get<int>("n", 0);
    FAIL("expected SchemaViolation");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::SchemaViolation);
  }
}

TEST_CASE("shipped configs load") {
  for (const char *name : {"benchmark.toml", "table1.toml"}) {
    Config c = Config::load(std::string(MOLJSON_CONFIG_DIR) + "/" + name);
    CHECK(c.get<long long>("seed", 0) == 20251015);
    CHECK(c.get<int>("constrained.per_subset_total", 0) == 100);
    CHECK(c.find("constrained.spiro") != nullptr);
  }
  Config full = Config::load(std::string(MOLJSON_CONFIG_DIR) + "/benchmark.toml");
  CHECK(full.get<std::string>("provider.kind", "") == "replay");
  CHECK(full.get<int>("shortest_path.length_max", 0) == 18);
  CHECK_THROWS_AS(Config::load("/nonexistent.toml"), Error);
}
