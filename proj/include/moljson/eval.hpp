#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <regex>
#include <tuple>
#include <set>
#include <string>
#include <vector>

#include "moljson/canon.hpp"
#include "moljson/convert.hpp"
#include "moljson/graph.hpp"
#include "moljson/molfile.hpp"
#include "moljson/moljson.hpp"
#include "moljson/runner/response.hpp"
#include "moljson/taskgen/constraints.hpp"
#include "moljson/taskgen/tasks.hpp"

namespace moljson {

enum class GradeStatus { Correct, WrongMolecule, Invalid, Empty, Ungradable };

inline std::string_view to_string(GradeStatus s) {
  switch (s) {
    case GradeStatus::Correct: return "correct";
    case GradeStatus::WrongMolecule: return "wrong_molecule";
    case GradeStatus::Invalid: return "invalid";
    case GradeStatus::Empty: return "empty";
    case GradeStatus::Ungradable: return "ungradable";
  }
  return "?";
}

inline std::optional<GradeStatus> grade_status_from_string(std::string_view s) {
  for (GradeStatus g : {GradeStatus::Correct, GradeStatus::WrongMolecule, GradeStatus::Invalid, GradeStatus::Empty,
                        GradeStatus::Ungradable})
    if (to_string(g) == s) return g;
  if (s == "wrong_answer") return GradeStatus::WrongMolecule;
  return std::nullopt;
}

struct ConstraintViolation {
  std::string name;    // e.g. "ring_count", "path:F-Cl"
  std::string detail;
};

struct EvalRecord {
  std::string task_id;
  std::string model;
  GradeStatus status = GradeStatus::Empty;
  std::string alias;  // "wrong_answer" for shortest-path misses
  std::optional<std::string> parsed_canonical;
  std::optional<long long> parsed_answer;
  std::optional<std::vector<ConstraintViolation>> violations;
  std::string diagnostics;

  std::string label() const { return alias.empty() ? std::string(to_string(status)) : alias; }
};

inline Json eval_record_to_json(const EvalRecord &r) {
  Json j = Json::object();
  j["task_id"] = r.task_id;
  if (!r.model.empty()) j["model"] = r.model;
  j["status"] = std::string(to_string(r.status));
  if (!r.alias.empty()) j["alias"] = r.alias;
  if (r.parsed_canonical) j["parsed_canonical"] = *r.parsed_canonical;
  if (r.parsed_answer) j["parsed_answer"] = *r.parsed_answer;
  if (r.violations) {
    Json v = Json::array();
    for (const ConstraintViolation &c : *r.violations) v.push_back(Json{{"name", c.name}, {"detail", c.detail}});
    j["violations"] = v;
  }
  j["diagnostics"] = r.diagnostics;
  return j;
}

inline EvalRecord eval_record_from_json(const Json &j) {
  EvalRecord r;
  r.task_id = j.at("task_id").get<std::string>();
  r.model = j.value("model", std::string());
  auto st = grade_status_from_string(j.at("status").get<std::string>());
  if (!st) throw Error(ErrorKind::SchemaViolation, "unknown status for " + r.task_id);
  r.status = *st;
  r.alias = j.value("alias", std::string());
  if (j.contains("parsed_canonical")) r.parsed_canonical = j["parsed_canonical"].get<std::string>();
  if (j.contains("parsed_answer")) r.parsed_answer = j["parsed_answer"].get<long long>();
  if (j.contains("violations")) {
    std::vector<ConstraintViolation> v;
    for (const Json &c : j["violations"]) v.push_back({c.at("name").get<std::string>(), c.value("detail", std::string())});
    r.violations = std::move(v);
  }
  r.diagnostics = j.value("diagnostics", std::string());
  return r;
}

struct GradeOptions {
  AdapterTable adapters;
  bool rescue_mol = true;  // MOL answers go through rescue_parse
};

namespace detail {

inline std::string trim(std::string_view s) {
  const char *ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

struct Staged {
  std::optional<GradeStatus> status;  // set when staging stopped early
  std::optional<Molecule> mol;
  std::string diagnostics;
};

/// Pulls the answer string out of a single-key response. Plain text that
/// is not JSON is taken as the answer itself.
inline std::optional<std::string> single_key_payload(const std::string &text, const std::string &key,
                                                     std::string &why) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) return text;
  if (j.is_string()) return j.get<std::string>();
  if (!j.is_object()) {
    why = "response is JSON but not an object";
    return std::nullopt;
  }
  auto it = j.find(key);
  if (it == j.end()) {
    why = "missing key \"" + key + "\"";
    return std::nullopt;
  }
  if (!it->is_string()) {
    why = "\"" + key + "\" is not a string";
    return std::nullopt;
  }
  return it->get<std::string>();
}

/// Empty check, then parse. Leaves `mol` set when the response is valid.
inline Staged stage_molecule(std::string_view response, Format fmt, const GradeOptions &opt) {
  Staged s;
  const std::string text = trim(response);
  if (text.empty()) {
    s.status = GradeStatus::Empty;
    s.diagnostics = "empty response";
    return s;
  }
  if (fmt == Format::MolJson) {
    try {
      s.mol = parse_moljson(text);
    } catch (const Error &e) {
      s.status = e.kind() == ErrorKind::EmptyMolecule ? GradeStatus::Empty : GradeStatus::Invalid;
      s.diagnostics = e.what();
    }
    return s;
  }
  std::string why;
  auto payload = single_key_payload(text, std::string(to_string(fmt)), why);
  if (!payload) {
    s.status = GradeStatus::Invalid;
    s.diagnostics = why;
    return s;
  }
  if (trim(*payload).empty()) {
    s.status = GradeStatus::Empty;
    s.diagnostics = "empty answer";
    return s;
  }
  if (!is_native(fmt) && !opt.adapters.count(fmt)) {
    s.status = GradeStatus::Ungradable;
    s.diagnostics = "no adapter for " + std::string(to_string(fmt));
    return s;
  }
  try {
    if (fmt == Format::MolV2000 && opt.rescue_mol)
      s.mol = rescue_parse(*payload);
    else if (fmt == Format::Smiles)
      s.mol = parse_smiles(trim(*payload));
    else
      s.mol = read_molecule(*payload, fmt, opt.adapters);
  } catch (const Error &e) {
    s.status = GradeStatus::Invalid;
    s.diagnostics = e.what();
  }
  return s;
}

}  // namespace detail

/// Stages a translation answer: empty, invalid, wrong molecule or correct.
inline EvalRecord grade_translation(std::string_view response, Format output_format, const CanonicalForm &truth,
                                    const GradeOptions &opt = {}) {
  EvalRecord r;
  detail::Staged s = detail::stage_molecule(response, output_format, opt);
  r.diagnostics = s.diagnostics;
  if (s.status) {
    r.status = *s.status;
    return r;
  }
  try {
    r.parsed_canonical = canonical_form(*s.mol).text;
  } catch (const Error &e) {
    r.status = GradeStatus::Invalid;
    r.diagnostics = e.what();
    return r;
  }
  r.status = *r.parsed_canonical == truth.text ? GradeStatus::Correct : GradeStatus::WrongMolecule;
  if (r.status == GradeStatus::WrongMolecule) r.diagnostics = "canonical form differs from ground truth";
  return r;
}

inline EvalRecord grade_shortest_path(std::string_view response, long long truth) {
  EvalRecord r;
  const std::string text = detail::trim(response);
  if (text.empty()) {
    r.status = GradeStatus::Empty;
    r.diagnostics = "empty response";
    return r;
  }
  Json j = Json::parse(text, nullptr, false);
  Json value;
  if (!j.is_discarded() && j.is_object()) {
    if (!j.contains("answer")) {
      r.status = GradeStatus::Invalid;
      r.diagnostics = "missing key \"answer\"";
      return r;
    }
    value = j["answer"];
  } else if (!j.is_discarded()) {
    value = j;
  }
  if (!value.is_number_integer() && !value.is_number_unsigned()) {
    r.status = GradeStatus::Invalid;
    r.diagnostics = "answer is not an integer";
    return r;
  }
  r.parsed_answer = value.get<long long>();
  if (*r.parsed_answer == truth) {
    r.status = GradeStatus::Correct;
  } else {
    r.status = GradeStatus::WrongMolecule;
    r.alias = "wrong_answer";
    r.diagnostics = "expected " + std::to_string(truth) + ", got " + std::to_string(*r.parsed_answer);
  }
  return r;
}

/// Every constraint the molecule fails. Empty means accepted.
inline std::vector<ConstraintViolation> check_constraints(const Molecule &mol, const ConstraintSet &cs) {
  std::vector<ConstraintViolation> out;
  auto fail = [&](std::string name, std::string detail) { out.push_back({std::move(name), std::move(detail)}); };

  const int frags = fragment_count(mol);
  if (frags != 1) fail("connectivity", std::to_string(frags) + " components");

  std::map<int, std::vector<int>> hal;
  for (int i = 0; i < static_cast<int>(mol.atom_count()); ++i) {
    int z = mol.atom(i).element;
    if (z == element::F || z == element::Cl || z == element::Br) hal[z].push_back(i);
  }
  bool counts_ok = true;
  for (auto [z, sym] : {std::pair{element::F, "F"}, std::pair{element::Cl, "Cl"}, std::pair{element::Br, "Br"}}) {
    std::size_t n = hal[z].size();
    if (n != 1) {
      counts_ok = false;
      fail(std::string("halogen_count:") + sym, std::to_string(n) + " atoms");
    }
  }

  if (counts_ok) {
    const int f = hal[element::F][0], cl = hal[element::Cl][0], br = hal[element::Br][0];
    auto check_path = [&](const char *name, int a, int b, int want) {
      const auto d = bond_distances(mol, a);
      const int got = d[static_cast<std::size_t>(b)];
      if (got != want)
        fail(std::string("path:") + name, "want " + std::to_string(want) + ", got " + (got < 0 ? std::string("none") : std::to_string(got)));
    };
    check_path("F-Cl", f, cl, cs.path_fcl);
    check_path("F-Br", f, br, cs.path_fbr);
    check_path("Cl-Br", cl, br, cs.path_clbr);
  }

  const auto rings = sssr_rings(mol);
  const int rc = static_cast<int>(rings.size());
  if (rc != cs.ring_count) fail("ring_count", "want " + std::to_string(cs.ring_count) + ", got " + std::to_string(rc));
  std::vector<int> sizes = ring_sizes(rings);
  std::vector<int> want_sizes = cs.ring_sizes;
  std::sort(want_sizes.begin(), want_sizes.end());
  if (sizes != want_sizes) {
    std::string got;
    for (std::size_t i = 0; i < sizes.size(); ++i) got += (i ? "," : "") + std::to_string(sizes[i]);
    fail("ring_sizes", "got {" + got + "}");
  }
  Topology topo = classify_topology(rings);
  if (topo != cs.topology)
    fail("topology", "want " + std::string(to_string(cs.topology)) + ", got " + std::string(to_string(topo)));

  if (cs.halogen_on_ring) {
    auto on_ring = ring_atom_flags(mol, rings);
    for (auto &[z, idx] : hal)
      for (int h : idx) {
        bool ok = false;
        for (const Neighbor &nb : mol.neighbors(h))
          if (mol.bond(nb.bond).order != BondOrder::Zero && on_ring[static_cast<std::size_t>(nb.atom)]) ok = true;
        if (!ok) fail("halogen_placement", std::string(mol.atom(h).symbol()) + " not bonded to a ring atom");
      }
  }
  return out;
}

inline EvalRecord grade_constrained(std::string_view response, Format output_format, const ConstraintSet &cs,
                                    const GradeOptions &opt = {}) {
  EvalRecord r;
  detail::Staged s = detail::stage_molecule(response, output_format, opt);
  r.diagnostics = s.diagnostics;
  if (s.status) {
    r.status = *s.status;
    return r;
  }
  try {
    r.parsed_canonical = canonical_form(*s.mol).text;
  } catch (const Error &e) {
    r.status = GradeStatus::Invalid;
    r.diagnostics = e.what();
    return r;
  }
  r.violations = check_constraints(*s.mol, cs);
  r.status = r.violations->empty() ? GradeStatus::Correct : GradeStatus::WrongMolecule;
  if (!r.violations->empty()) {
    r.diagnostics.clear();
    for (const ConstraintViolation &v : *r.violations) r.diagnostics += (r.diagnostics.empty() ? "" : "; ") + v.name;
  }
  return r;
}

/// Grades one response against its task.
inline EvalRecord grade_task(const Task &task, const ModelResponse &resp, const GradeOptions &opt = {}) {
  EvalRecord r;
  switch (task.type) {
    case TaskType::Translation:
      r = grade_translation(resp.raw_text, task.output_format.value_or(Format::Smiles),
                            CanonicalForm{task.ground_truth.at("canonical").get<std::string>()}, opt);
      break;
    case TaskType::ShortestPath:
      r = grade_shortest_path(resp.raw_text, task.ground_truth.get<long long>());
      break;
    case TaskType::ConstrainedGeneration:
      r = grade_constrained(resp.raw_text, task.output_format.value_or(Format::Smiles),
                            constraint_set_from_json(task.ground_truth), opt);
      break;
  }
  r.task_id = task.task_id;
  r.model = resp.model;
  if (!resp.error.empty() && r.status == GradeStatus::Empty) r.diagnostics = "provider error: " + resp.error;
  return r;
}

struct Interval {
  double low = 0, high = 0;
};

/// Wilson score interval for k successes in n trials.
inline Interval wilson_interval(long long k, long long n, double z = 1.96) {
  if (n <= 0) throw Error(ErrorKind::ZeroTrials, "wilson_interval needs n >= 1");
  if (k < 0 || k > n) throw Error(ErrorKind::SchemaViolation, "k outside [0, n]");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2 * nn)) / denom;
  const double hw = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
  Interval iv{std::clamp(center - hw, 0.0, 1.0), std::clamp(center + hw, 0.0, 1.0)};
  if (k == 0) iv.low = 0.0;
  if (k == n) iv.high = 1.0;
  iv.low = std::min(iv.low, p);
  iv.high = std::max(iv.high, p);
  return iv;
}

/// Atom-identifier buckets: a#, el#, @#, #, other.
inline std::string classify_atom_id(std::string_view id) {
  static const std::regex kA("^a[0-9]+$");
  static const std::regex kEl([] {
    std::string alt;
    for (std::string_view s : kElementSymbols) {
      if (s == "*") continue;
      alt += (alt.empty() ? "" : "|") + std::string(s);
    }
    return "^(" + alt + ")[0-9]+$";
  }());
  static const std::regex kLetter("^[A-Za-z][0-9]+$");
  static const std::regex kNum("^[0-9]+$");
  const std::string s(id);
  if (std::regex_match(s, kA)) return "a#";
  if (std::regex_match(s, kEl)) return "el#";
  if (std::regex_match(s, kLetter)) return "@#";
  if (std::regex_match(s, kNum)) return "#";
  return "other";
}

/// Bucket counts over the atom ids of a MolJSON response; empty when the
/// text carries no atoms array.
inline std::map<std::string, int> atom_id_histogram(std::string_view response) {
  std::map<std::string, int> out;
  Json j = Json::parse(response, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("atoms") || !j["atoms"].is_array()) return out;
  for (const Json &a : j["atoms"])
    if (a.is_object() && a.contains("id") && a["id"].is_string()) ++out[classify_atom_id(a["id"].get<std::string>())];
  return out;
}

struct ReportRow {
  std::vector<std::pair<std::string, std::string>> group;
  long long n = 0, k = 0;
  double accuracy = 0, wilson_low = 0, wilson_high = 0;
  double mean_output_tokens = 0, tokens_ci_low = 0, tokens_ci_high = 0;
  std::map<std::string, long long> status_counts;  // includes ungradable
};

inline Json report_row_to_json(const ReportRow &r) {
  Json j = Json::object();
  Json g = Json::object();
  for (const auto &[k, v] : r.group) g[k] = v;
  j["group"] = g;
  j["n"] = r.n;
  j["k"] = r.k;
  j["accuracy"] = r.accuracy;
  j["wilson_low"] = r.wilson_low;
  j["wilson_high"] = r.wilson_high;
  j["mean_output_tokens"] = r.mean_output_tokens;
  j["output_tokens_ci"] = Json::array({r.tokens_ci_low, r.tokens_ci_high});
  Json sc = Json::object();
  for (const auto &[k, v] : r.status_counts) sc[k] = v;
  j["status_counts"] = sc;
  return j;
}

/// CSV projection of report rows; group columns first.
inline std::string report_csv(const std::vector<ReportRow> &rows) {
  std::string out;
  if (rows.empty()) return out;
  for (const auto &[k, v] : rows.front().group) out += k + ",";
  out += "n,k,accuracy,wilson_low,wilson_high,mean_output_tokens,tokens_ci_low,tokens_ci_high\n";
  char buf[256];
  for (const ReportRow &r : rows) {
    for (const auto &[k, v] : r.group) out += v + ",";
    std::snprintf(buf, sizeof buf, "%lld,%lld,%.6f,%.6f,%.6f,%.3f,%.3f,%.3f\n", r.n, r.k, r.accuracy, r.wilson_low,
                  r.wilson_high, r.mean_output_tokens, r.tokens_ci_low, r.tokens_ci_high);
    out += buf;
  }
  return out;
}

namespace detail {

inline std::string group_value(const std::string &field, const Task &t, const EvalRecord &rec) {
  auto fmt = [](const std::optional<Format> &f) { return f ? std::string(to_string(*f)) : std::string("-"); };
  if (field == "model") return rec.model;
  if (field == "task_type") return std::string(to_string(t.type));
  if (field == "input_format") return fmt(t.input_format);
  if (field == "output_format") return fmt(t.output_format);
  if (field == "format_pair") return fmt(t.input_format) + "->" + fmt(t.output_format);
  std::string key = field.rfind("meta.", 0) == 0 ? field.substr(5) : field;
  if (key == "stratum" && !t.meta.contains("stratum")) {
    if (t.meta.contains("path_length")) return "length=" + t.meta["path_length"].dump();
    if (t.meta.contains("heavy_atoms"))
      return "heavy=" + t.meta["heavy_atoms"].dump() + ",rings=" + t.meta.value("rings", Json(0)).dump();
  }
  if (!t.meta.contains(key)) return "-";
  const Json &v = t.meta[key];
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace detail

/// Accuracy per group with Wilson bounds and mean output tokens.
/// Ungradable records are counted but excluded from n.
inline std::vector<ReportRow> aggregate_report(const std::vector<EvalRecord> &records,
                                               const std::vector<ModelResponse> &responses,
                                               const std::vector<Task> &tasks,
                                               const std::vector<std::string> &group_by) {
  std::map<std::string, const Task *> task_by_id;
  for (const Task &t : tasks) task_by_id[t.task_id] = &t;
  std::map<std::pair<std::string, std::string>, const ModelResponse *> resp_by_key;
  for (const ModelResponse &r : responses) resp_by_key[{r.model, r.task_id}] = &r;

  std::set<std::pair<std::string, std::string>> used;
  struct Acc {
    ReportRow row;
    std::vector<double> tokens;
  };
  std::map<std::vector<std::string>, Acc> groups;

  std::vector<const EvalRecord *> sorted;
  for (const EvalRecord &r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const EvalRecord *a, const EvalRecord *b) {
    return std::tie(a->model, a->task_id) < std::tie(b->model, b->task_id);
  });

  for (const EvalRecord *rec : sorted) {
    auto t = task_by_id.find(rec->task_id);
    if (t == task_by_id.end()) throw Error(ErrorKind::JoinMismatch, "no task for record " + rec->task_id);
    auto rs = resp_by_key.find({rec->model, rec->task_id});
    if (rs == resp_by_key.end()) throw Error(ErrorKind::JoinMismatch, "no response for record " + rec->task_id);
    used.insert(rs->first);
    std::vector<std::string> key;
    for (const std::string &f : group_by) key.push_back(detail::group_value(f, *t->second, *rec));
    Acc &acc = groups[key];
    if (acc.row.group.empty())
      for (std::size_t i = 0; i < group_by.size(); ++i) acc.row.group.emplace_back(group_by[i], key[i]);
    ++acc.row.status_counts[rec->label()];
    if (rec->status == GradeStatus::Ungradable) continue;
    ++acc.row.n;
    if (rec->status == GradeStatus::Correct) ++acc.row.k;
    acc.tokens.push_back(static_cast<double>(rs->second->output_tokens));
  }
  for (const auto &[k, r] : resp_by_key)
    if (!used.count(k)) throw Error(ErrorKind::JoinMismatch, "no record for response " + k.second);

  std::vector<ReportRow> out;
  for (auto &[key, acc] : groups) {
    ReportRow &row = acc.row;
    if (row.n == 0) continue;
    row.accuracy = static_cast<double>(row.k) / static_cast<double>(row.n);
    Interval iv = wilson_interval(row.k, row.n);
    row.wilson_low = iv.low;
    row.wilson_high = iv.high;
    const double n = static_cast<double>(acc.tokens.size());
    double sum = 0;
    for (double x : acc.tokens) sum += x;
    row.mean_output_tokens = sum / n;
    double sem = 0;
    if (acc.tokens.size() > 1) {
      double ss = 0;
      for (double x : acc.tokens) ss += (x - row.mean_output_tokens) * (x - row.mean_output_tokens);
      sem = std::sqrt(ss / (n - 1)) / std::sqrt(n);
    }
    row.tokens_ci_low = row.mean_output_tokens - 1.96 * sem;
    row.tokens_ci_high = row.mean_output_tokens + 1.96 * sem;
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace moljson
