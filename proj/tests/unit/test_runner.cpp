#include <catch_amalgamated.hpp>

#include <filesystem>
#include <thread>

#include "moljson/eval.hpp"
#include "moljson/runner/live.hpp"
#include "moljson/runner/runner.hpp"
#include "support.hpp"

using namespace moljson;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("moljson-runner-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string &name) const { return (path / name).string(); }
};

std::vector<Task> make_tasks(int n) {
  std::vector<Task> out;
  for (int i = 0; i < n; ++i) {
    Task t;
    t.task_id = "sp-" + std::to_string(100 + i);
    t.type = TaskType::ShortestPath;
    t.input_format = Format::Smiles;
    t.prompt = "prompt " + std::to_string(i);
    t.output_schema = single_key_schema("answer", "integer");
    t.ground_truth = i % 7;
    out.push_back(t);
  }
  return out;
}

std::vector<ModelResponse> make_fixtures(const std::vector<Task> &tasks) {
  std::vector<ModelResponse> out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    ModelResponse r;
    r.task_id = tasks[i].task_id;
    r.model = "replay";
    r.raw_text = i % 3 ? Json{{"answer", tasks[i].ground_truth}}.dump() : std::string("{\"answer\": 99}");
    r.output_tokens = 10 + static_cast<long long>(i);
    r.latency_ms = 5;
    r.attempts = 1;
    out.push_back(r);
  }
  return out;
}

ProviderConfig replay_config(const std::string &fixtures, int parallelism = 4) {
  ProviderConfig cfg;
  cfg.kind = ProviderKind::Replay;
  cfg.model = "replay";
  cfg.fixtures_path = fixtures;
  cfg.parallelism = parallelism;
  return cfg;
}

/// Answers a fixed number of requests, then fails hard.
class CrashingProvider : public Provider {
 public:
  CrashingProvider(Provider &inner, int budget) : inner_(inner), budget_(budget) {}
  ProviderReply complete(const ProviderRequest &req) override {
    if (budget_-- <= 0) throw std::runtime_error("killed");
    return inner_.complete(req);
  }

 private:
  Provider &inner_;
  std::atomic<int> budget_;
};

/// Fails with a transient provider error a fixed number of times first.
class FlakyProvider : public Provider {
 public:
  explicit FlakyProvider(int failures) : failures_(failures) {}
  ProviderReply complete(const ProviderRequest &) override {
    ++calls;
    if (failures_-- > 0) throw Error(ErrorKind::ProviderError, "HTTP 529");
    ProviderReply r;
    r.text = "{\"answer\": 1}";
    r.output_tokens = 3;
    return r;
  }
  std::atomic<int> calls{0};

 private:
  std::atomic<int> failures_;
};

}  // namespace

TEST_CASE("replay reproduces fixtures byte for byte") {
  TempDir dir;
  auto tasks = make_tasks(10);
  record_fixture(dir.file("fx.jsonl"), make_fixtures(tasks));
  ReplayProvider replay(dir.file("fx.jsonl"));
  auto out = run_tasks(tasks, replay, replay_config(dir.file("fx.jsonl")), dir.file("out.jsonl"));
  CHECK(out.size() == 10);
  CHECK(testing::read_file(dir.file("out.jsonl")) == testing::read_file(dir.file("fx.jsonl")));
}

TEST_CASE("output order does not depend on parallelism") {
  TempDir dir;
  auto tasks = make_tasks(40);
  std::reverse(tasks.begin(), tasks.end());
  ReplayProvider replay(make_fixtures(tasks));
  run_tasks(tasks, replay, replay_config("x", 1), dir.file("a.jsonl"));
  run_tasks(tasks, replay, replay_config("x", 8), dir.file("b.jsonl"));
  CHECK(testing::read_file(dir.file("a.jsonl")) == testing::read_file(dir.file("b.jsonl")));
}

TEST_CASE("resume after a crash answers each task once") {
  TempDir dir;
  auto tasks = make_tasks(25);
  ReplayProvider replay(make_fixtures(tasks));
  CrashingProvider crash(replay, 9);
  CHECK_THROWS(run_tasks(tasks, crash, replay_config("x", 3), dir.file("out.jsonl")));
  auto partial = read_responses(dir.file("out.jsonl"), true);
  CHECK(partial.size() == 9);

  {
    std::ofstream torn(dir.file("out.jsonl"), std::ios::app);
    torn << "{\"task_id\": \"sp-1";
  }
  RunStats st;
  auto out = run_tasks(tasks, replay, replay_config("x", 3), dir.file("out.jsonl"), &st);
  CHECK(st.resumed == 9);
  CHECK(st.requested == 16);
  CHECK(out.size() == 25);
  auto lines = read_responses(dir.file("out.jsonl"));
  std::set<std::string> ids;
  for (const auto &r : lines) ids.insert(r.task_id);
  CHECK(ids.size() == lines.size());
  CHECK(lines.size() == 25);
}

TEST_CASE("missing fixture affects only its task") {
  TempDir dir;
  auto tasks = make_tasks(6);
  auto fixtures = make_fixtures(tasks);
  fixtures.erase(fixtures.begin() + 2);
  ReplayProvider replay(fixtures);
  try {
    replay.complete({tasks[2].task_id, "", Json()});
    FAIL("expected MissingFixture");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::MissingFixture);
  }
  RunStats st;
  auto out = run_tasks(tasks, replay, replay_config("x"), dir.file("out.jsonl"), &st);
  CHECK(st.failed == 1);
  for (const auto &r : out) {
    if (r.task_id == tasks[2].task_id) {
      CHECK(r.error.find("MissingFixture") != std::string::npos);
      CHECK(r.raw_text.empty());
      CHECK(grade_task(tasks[2], r).status == GradeStatus::Empty);
    } else {
      CHECK(r.error.empty());
    }
  }
}

TEST_CASE("transient provider errors are retried") {
  TempDir dir;
  auto tasks = make_tasks(1);
  ProviderConfig cfg = replay_config("x", 1);
  cfg.backoff_ms = 1;
  FlakyProvider twice(2);
  auto out = run_tasks(tasks, twice, cfg, dir.file("a.jsonl"));
  CHECK(out[0].attempts == 3);
  CHECK(out[0].error.empty());
  FlakyProvider always(10);
  auto failed = run_tasks(tasks, always, cfg, dir.file("b.jsonl"));
  CHECK(always.calls == 3);
  CHECK(!failed[0].error.empty());
}

TEST_CASE("record then replay gives identical grades") {
  TempDir dir;
  auto tasks = make_tasks(12);
  ReplayProvider source(make_fixtures(tasks));
  auto first = run_tasks(tasks, source, replay_config("x"), dir.file("live.jsonl"));
  record_fixture(dir.file("fx.jsonl"), first);
  ReplayProvider replay(dir.file("fx.jsonl"));
  auto second = run_tasks(tasks, replay, replay_config(dir.file("fx.jsonl")), dir.file("again.jsonl"));
  REQUIRE(first.size() == second.size());
  std::map<std::string, const Task *> by_id;
  for (const Task &t : tasks) by_id[t.task_id] = &t;
  for (std::size_t i = 0; i < first.size(); ++i)
    CHECK(grade_task(*by_id[first[i].task_id], first[i]).label() ==
          grade_task(*by_id[second[i].task_id], second[i]).label());
}

TEST_CASE("config validation") {
  ProviderConfig cfg;
  CHECK_THROWS(cfg.validate());
  cfg.fixtures_path = "f";
  cfg.validate();
  cfg.parallelism = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("live wire formats against a local server") {
  httplib::Server svr;
  Json seen;
  std::string seen_path;
  httplib::Headers seen_headers;
  svr.Post(R"(/v1/.*)", [&](const httplib::Request &req, httplib::Response &res) {
    seen = Json::parse(req.body);
    seen_path = req.path;
    seen_headers = req.headers;
    Json reply;
    if (req.path == "/v1/responses")
      reply = Json{{"id", "resp_1"},
                   {"status", "completed"},
                   {"output", Json::array({Json{{"type", "reasoning"}},
                                           Json{{"type", "message"},
                                                {"content", Json::array({Json{{"type", "output_text"},
                                                                              {"text", "{\"answer\": 4}"}}})}}})},
                   {"usage", Json{{"output_tokens", 321}}}};
    else
      reply = Json{{"id", "msg_1"},
                   {"stop_reason", "end_turn"},
                   {"content", Json::array({Json{{"type", "thinking"}, {"thinking", "..."}},
                                            Json{{"type", "text"}, {"text", "{\"answer\": 4}"}}})},
                   {"usage", Json{{"output_tokens", 55}}}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = svr.bind_to_any_port("127.0.0.1");
  std::thread th([&] { svr.listen_after_bind(); });
  svr.wait_until_ready();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  setenv("MOLJSON_TEST_KEY", "secret", 1);

  ProviderConfig cfg;
  cfg.kind = ProviderKind::Live;
  cfg.model = "gpt-test";
  cfg.api_key_env = "MOLJSON_TEST_KEY";
  cfg.endpoint = base + "/v1/responses";
  OpenAIResponsesProvider openai(cfg);
  ProviderReply r = openai.complete({"sp-1", "count bonds", single_key_schema("answer", "integer")});
  CHECK(r.text == "{\"answer\": 4}");
  CHECK(r.output_tokens == 321);
  CHECK(seen_path == "/v1/responses");
  CHECK(seen["model"] == "gpt-test");
  CHECK(seen["input"][0]["role"] == "user");
  CHECK(seen["input"][0]["content"] == "count bonds");
  CHECK(seen["reasoning"]["effort"] == "low");
  CHECK(seen["text"]["format"]["type"] == "json_schema");
  CHECK(seen["text"]["format"]["schema"] == single_key_schema("answer", "integer"));
  CHECK(seen_headers.find("Authorization")->second == "Bearer secret");

  cfg.provider = "anthropic";
  cfg.endpoint = base + "/v1/messages";
  AnthropicMessagesProvider claude(cfg);
  ProviderReply c = claude.complete({"tr-1", "convert", emit_schema(SchemaVariant::Standard)});
  CHECK(c.text == "{\"answer\": 4}");
  CHECK(c.output_tokens == 55);
  CHECK(seen["output_format"]["schema"] == emit_schema(SchemaVariant::EnumRanges));
  CHECK(seen["thinking"]["budget_tokens"] == 1024);
  CHECK(seen_headers.find("x-api-key")->second == "secret");

  cfg.endpoint = base + "/nowhere";
  OpenAIResponsesProvider broken(cfg);
  try {
    broken.complete({"sp-1", "x", Json::object()});
    FAIL("expected ProviderError");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::ProviderError);
  }
  svr.stop();
  th.join();
}
