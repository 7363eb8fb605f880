#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "moljson/error.hpp"
#include "moljson/runner/response.hpp"
#include "moljson/taskgen/tasks.hpp"

namespace moljson {

enum class ProviderKind { Live, Replay };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::Replay;
  std::string provider = "openai";  // live wire format: openai | anthropic
  std::string model;
  std::string reasoning_effort = "low";
  int thinking_budget = 1024;
  int max_output_tokens = 16000;
  int parallelism = 4;
  int max_attempts = 3;
  int backoff_ms = 500;
  std::string fixtures_path;
  std::string endpoint;
  std::string api_key_env;

  void validate() const {
    if (parallelism < 1) throw Error(ErrorKind::SchemaViolation, "parallelism must be >= 1");
    if (max_attempts < 1) throw Error(ErrorKind::SchemaViolation, "max_attempts must be >= 1");
    if (kind == ProviderKind::Replay && fixtures_path.empty())
      throw Error(ErrorKind::SchemaViolation, "replay provider needs a fixtures path");
  }
};

struct ProviderRequest {
  std::string task_id;
  std::string prompt;
  Json schema;
};

struct ProviderReply {
  std::string text;
  long long output_tokens = 0;
  std::optional<long long> latency_ms;  // recorded value, replay only
  std::optional<int> attempts;
  Json meta = Json::object();
};

/// Prompt plus schema in, text plus token count out. Implementations
/// throw ProviderError for retryable failures.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual ProviderReply complete(const ProviderRequest &req) = 0;
};

inline std::vector<ModelResponse> read_responses(const std::string &path, bool tolerate_torn_tail = false) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::vector<ModelResponse> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("task_id")) {
      if (tolerate_torn_tail && in.peek() == EOF) break;
      throw Error(ErrorKind::MalformedJson, "bad response line in " + path);
    }
    out.push_back(response_from_json(j));
  }
  return out;
}

inline void write_responses(const std::string &path, const std::vector<ModelResponse> &responses) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp);
    for (const ModelResponse &r : responses) out << response_to_json(r).dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

/// Fixture files share the response line format.
inline void record_fixture(const std::string &path, std::vector<ModelResponse> responses) {
  std::sort(responses.begin(), responses.end(),
            [](const ModelResponse &a, const ModelResponse &b) { return a.task_id < b.task_id; });
  write_responses(path, responses);
}

class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(std::vector<ModelResponse> fixtures) {
    for (ModelResponse &r : fixtures) by_id_.emplace(r.task_id, std::move(r));
  }
  explicit ReplayProvider(const std::string &path) : ReplayProvider(read_responses(path)) {}

  ProviderReply complete(const ProviderRequest &req) override {
    auto it = by_id_.find(req.task_id);
    if (it == by_id_.end()) throw Error(ErrorKind::MissingFixture, req.task_id);
    const ModelResponse &r = it->second;
    ProviderReply rep;
    rep.text = r.raw_text;
    rep.output_tokens = r.output_tokens;
    rep.latency_ms = r.latency_ms;
    rep.attempts = r.attempts;
    rep.meta = r.provider_meta;
    return rep;
  }

 private:
  std::map<std::string, ModelResponse> by_id_;
};

struct RunStats {
  std::size_t resumed = 0, requested = 0, failed = 0;
};

/// Answers every task exactly once. Lines are appended to `out_path` as
/// they complete; on return the file is rewritten sorted by task_id.
/// Task ids already present in the file are skipped.
inline std::vector<ModelResponse> run_tasks(const std::vector<Task> &tasks, Provider &provider,
                                            const ProviderConfig &cfg, const std::string &out_path,
                                            RunStats *stats = nullptr) {
  if (cfg.parallelism < 1) throw Error(ErrorKind::SchemaViolation, "parallelism must be >= 1");
  std::map<std::string, ModelResponse> done;
  if (std::filesystem::exists(out_path))
    for (ModelResponse &r : read_responses(out_path, true)) done.emplace(r.task_id, std::move(r));

  std::set<std::string> wanted;
  for (const Task &t : tasks) wanted.insert(t.task_id);
  for (auto it = done.begin(); it != done.end();) it = wanted.count(it->first) ? std::next(it) : done.erase(it);

  std::vector<const Task *> pending;
  std::set<std::string> queued;
  for (const Task &t : tasks)
    if (!done.count(t.task_id) && queued.insert(t.task_id).second) pending.push_back(&t);
  std::sort(pending.begin(), pending.end(), [](const Task *a, const Task *b) { return a->task_id < b->task_id; });
  RunStats local;
  local.resumed = done.size();
  local.requested = pending.size();

  // Rewrite what survived so a torn tail line does not linger.
  {
    std::vector<ModelResponse> kept;
    for (auto &[id, r] : done) kept.push_back(r);
    write_responses(out_path, kept);
  }
  std::ofstream sink(out_path, std::ios::app);
  if (!sink) throw Error(ErrorKind::Io, "cannot append to " + out_path);
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;

  auto answer = [&](const Task &t) {
    ModelResponse r;
    r.task_id = t.task_id;
    r.model = cfg.model;
    ProviderRequest req{t.task_id, t.prompt, t.output_schema};
    auto start = std::chrono::steady_clock::now();
    for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
      r.attempts = attempt;
      try {
        ProviderReply rep = provider.complete(req);
        r.raw_text = rep.text;
        r.output_tokens = std::max(0LL, rep.output_tokens);
        r.provider_meta = rep.meta;
        if (rep.attempts) r.attempts = *rep.attempts;
        r.error.clear();
        r.latency_ms = rep.latency_ms ? *rep.latency_ms
                                      : std::chrono::duration_cast<std::chrono::milliseconds>(
                                            std::chrono::steady_clock::now() - start)
                                            .count();
        return r;
      } catch (const Error &e) {
        r.error = e.what();
        if (e.kind() != ErrorKind::ProviderError) break;
        if (attempt < cfg.max_attempts)
          std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(cfg.backoff_ms) << (attempt - 1)));
      }
    }
    r.raw_text.clear();
    r.output_tokens = 0;
    r.latency_ms = 0;
    return r;
  };

  auto worker = [&] {
    for (;;) {
      std::size_t i = next++;
      if (i >= pending.size()) return;
      try {
        ModelResponse r = answer(*pending[i]);
        std::lock_guard lock(mu);
        if (!r.error.empty()) ++local.failed;
        sink << response_to_json(r).dump() << '\n';
        sink.flush();
        done.emplace(r.task_id, std::move(r));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!fatal) fatal = std::current_exception();
        next = pending.size();
        return;
      }
    }
  };
  const int n = std::min<int>(cfg.parallelism, static_cast<int>(std::max<std::size_t>(pending.size(), 1)));
  std::vector<std::thread> pool;
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (std::thread &th : pool) th.join();
  sink.close();
  if (fatal) std::rethrow_exception(fatal);

  std::vector<ModelResponse> out;
  for (auto &[id, r] : done) out.push_back(r);
  write_responses(out_path, out);
  if (stats) *stats = local;
  return out;
}

}  // namespace moljson
