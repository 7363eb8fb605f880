#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include "moljson/moljson.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using moljson::Json;

namespace {

struct Result {
  int rc;
  std::string out;
};

Result cli(const std::string &args, const std::string &stdin_text = "") {
  std::string cmd = std::string(MOLJSON_CLI) + " " + args + " 2>/dev/null";
  fs::path in = fs::temp_directory_path() / "moljson-cli-stdin";
  {
    std::ofstream f(in);
    f << stdin_text;
  }
  cmd += " < " + in.string();
  FILE *p = ::popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  int st = ::pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

struct TempDir {
  fs::path path = fs::temp_directory_path() / ("moljson-cli-" + std::to_string(std::random_device{}()));
  TempDir() { fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string &name) const { return (path / name).string(); }
};

std::string data(const std::string &name) { return testing::data_path(name); }

}  // namespace

TEST_CASE("convert single molecules") {
  Result r = cli("convert smiles moljson --input " + data("acetic_acid.smi"));
  CHECK(r.rc == 0);
  CHECK(r.out == testing::fixture("acetic_acid.json"));
  Result back = cli("convert moljson smiles", testing::fixture("acetic_acid.json"));
  CHECK(back.out == "CC(=O)O\n");
  Result mol = cli("convert molv2000 smiles --input " + data("acetic_acid.mol"));
  CHECK(mol.out == "CC(=O)O\n");
  CHECK(cli("convert smiles moljson", "C1CC").rc == 1);
}

TEST_CASE("convert streams keep going past bad rows") {
  Result r = cli("convert smiles smiles --stream",
                 "{\"id\": \"a\", \"smiles\": \"OC(C)=O\"}\n{\"id\": \"b\", \"smiles\": \"C(\"}\n");
  CHECK(r.rc == 1);
  std::istringstream lines(r.out);
  std::string l1, l2;
  std::getline(lines, l1);
  std::getline(lines, l2);
  CHECK(Json::parse(l1) == Json{{"id", "a"}, {"smiles", "CC(=O)O"}});
  CHECK(Json::parse(l2)["error"] == "UnclosedBranch");
}

TEST_CASE("validate exit codes") {
  CHECK(cli("validate moljson", testing::fixture("acetic_acid.json")).rc == 0);
  Json dup = Json::parse(testing::fixture("acetic_acid.json"));
  dup["atoms"][1]["id"] = "C1";
  Result r = cli("validate moljson", dup.dump());
  CHECK(r.rc == 1);
  CHECK(Json::parse(r.out)["valid"] == false);
}

TEST_CASE("usage errors exit 2") {
  CHECK(cli("convert").rc == 2);
  CHECK(cli("convert smiles klingon", "C").rc == 2);
  CHECK(cli("frobnicate").rc == 2);
  CHECK(cli("run --tasks x --out y --provider carrier-pigeon").rc == 2);
}

TEST_CASE("constrained generation writes a manifest") {
  TempDir dir;
  Result r = cli("--config " + std::string(MOLJSON_CONFIG_DIR) + "/table1.toml gen constrained --out " + (dir / "cg.jsonl") +
                 " --sets-out " + (dir / "sets.jsonl"));
  REQUIRE(r.rc == 0);
  CHECK(testing::read_jsonl(dir / "sets.jsonl").size() == 495);
  CHECK(testing::read_jsonl(dir / "cg.jsonl").size() == 1485);
  Json m = Json::parse(testing::read_file(dir / "manifest.json"));
  CHECK(m["seed"] == 20251015);
  CHECK(m["stages"][0]["stage"] == "gen constrained");
}

TEST_CASE("replayed pipeline is byte-identical across runs") {
  TempDir dir;
  REQUIRE(cli("--seed 7 gen shortest-path --formats smiles,moljson --cap 3 --corpus " + data("corpus_1000.jsonl") +
              " --out " + (dir / "tasks.jsonl"))
              .rc == 0);
  auto tasks = testing::read_jsonl(dir / "tasks.jsonl");
  REQUIRE(!tasks.empty());
  {
    std::ofstream fx(dir / "fx.jsonl");
    int i = 0;
    for (const Json &t : tasks) {
      Json truth = t["ground_truth"];
      std::string text = i % 4 == 3 ? "I cannot answer." : Json{{"answer", i % 5 == 0 ? truth.get<int>() + 1 : truth.get<int>()}}.dump();
      fx << Json{{"task_id", t["task_id"]}, {"model", "fx"}, {"raw_text", text}, {"output_tokens", 10 + i}}.dump() << '\n';
      ++i;
    }
  }
  std::string prev_grades, prev_report;
  for (int round = 0; round < 2; ++round) {
    const std::string tag = std::to_string(round);
    REQUIRE(cli("run --provider replay --fixtures " + (dir / "fx.jsonl") + " --tasks " + (dir / "tasks.jsonl") + " --out " +
                (dir / ("resp" + tag + ".jsonl")) + " --parallelism " + std::to_string(1 + 3 * round))
                .rc == 0);
    REQUIRE(cli("grade --tasks " + (dir / "tasks.jsonl") + " --responses " + (dir / ("resp" + tag + ".jsonl")) + " --out " +
                (dir / ("grades" + tag + ".jsonl")))
                .rc == 0);
    REQUIRE(cli("report --tasks " + (dir / "tasks.jsonl") + " --responses " + (dir / ("resp" + tag + ".jsonl")) +
                " --grades " + (dir / ("grades" + tag + ".jsonl")) + " --out " + (dir / ("report" + tag + ".json")))
                .rc == 0);
    std::string g = testing::read_file(dir / ("grades" + tag + ".jsonl"));
    std::string rep = testing::read_file(dir / ("report" + tag + ".json"));
    if (round == 1) {
      CHECK(g == prev_grades);
      CHECK(rep == prev_report);
    }
    prev_grades = g;
    prev_report = rep;
  }
  Json report = Json::parse(prev_report);
  REQUIRE(report.size() == 2);
  for (const Json &row : report) CHECK(row["n"].get<int>() > 0);
}

TEST_CASE("schema emit") {
  Result r = cli("schema emit --variant enum-ranges");
  CHECK(r.rc == 0);
  CHECK(Json::parse(r.out)["properties"].contains("atoms"));
  Result k = cli("schema emit --key answer --type integer");
  CHECK(Json::parse(k.out)["properties"]["answer"]["type"] == "integer");
}
