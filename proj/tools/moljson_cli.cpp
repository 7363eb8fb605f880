// moljson: command-line front end for the benchmark pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "moljson/config.hpp"
#include "moljson/convert.hpp"
#include "moljson/eval.hpp"
#include "moljson/runner/live.hpp"
#include "moljson/runner/runner.hpp"
#include "moljson/taskgen/constraints.hpp"
#include "moljson/taskgen/corpus.hpp"
#include "moljson/taskgen/tasks.hpp"

namespace fs = std::filesystem;
using namespace moljson;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string &path) {
  if (path == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Json> read_jsonl(const std::string &path) {
  std::istringstream in(read_text(path));
  std::vector<Json> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::MalformedJson, path + ":" + std::to_string(n));
    out.push_back(std::move(j));
  }
  return out;
}

class Sink {
 public:
  explicit Sink(const std::string &path) : path_(path) {
    if (path != "-") {
      if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error(ErrorKind::Io, "cannot write " + path);
    }
  }
  std::ostream &os() { return path_ == "-" ? std::cout : file_; }
  void line(const Json &j) { os() << j.dump() << '\n'; }

 private:
  std::string path_;
  std::ofstream file_;
};

void write_jsonl(const std::string &path, const std::vector<Json> &rows) {
  Sink s(path);
  for (const Json &j : rows) s.line(j);
}

std::vector<std::string> split_csv(const std::string &s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Format parse_format(const std::string &s, const std::string &flag) {
  auto f = format_from_string(s);
  if (!f) throw UsageError(flag + ": unknown format '" + s + "'");
  return *f;
}

std::vector<Format> parse_formats(const std::vector<std::string> &names, const std::string &flag) {
  std::vector<Format> out;
  for (const std::string &n : names) out.push_back(parse_format(n, flag));
  if (out.empty()) throw UsageError(flag + ": no formats given");
  return out;
}

/// Shared state: config file, seed and argv for the manifest.
struct Context {
  std::string config_path;
  Config cfg;
  std::optional<std::uint64_t> seed_flag;
  std::string out_dir;
  std::vector<std::string> argv;

  std::uint64_t seed() const { return seed_flag ? *seed_flag : cfg.get<std::uint64_t>("seed", 0); }

  std::vector<std::string> strings(const std::string &key, std::vector<std::string> fallback) const {
    return cfg.get<std::vector<std::string>>(key, std::move(fallback));
  }
};

/// Records a stage in manifest.json next to the outputs. Re-running a stage
/// replaces its entry.
void update_manifest(const Context &ctx, const std::string &stage, const std::string &primary_output,
                     const Json &inputs) {
  if (primary_output.empty() || primary_output == "-") return;
  fs::path dir = ctx.out_dir.empty() ? fs::path(primary_output).parent_path() : fs::path(ctx.out_dir);
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  fs::path mpath = dir / "manifest.json";
  Json m = Json::object();
  if (fs::exists(mpath)) {
    Json old = Json::parse(read_text(mpath.string()), nullptr, false);
    if (old.is_object()) m = old;
  }
  m["config"] = ctx.config_path;
  m["seed"] = ctx.seed();
  if (inputs.contains("corpus")) m["corpus"] = inputs["corpus"];
  m["output_dir"] = dir.string();
  Json stages = m.contains("stages") && m["stages"].is_array() ? m["stages"] : Json::array();
  Json entry = Json{{"stage", stage}, {"argv", ctx.argv}, {"inputs", inputs}, {"output", primary_output}};
  bool replaced = false;
  for (Json &s : stages)
    if (s.value("stage", "") == stage && s.value("output", "") == primary_output) {
      s = entry;
      replaced = true;
    }
  if (!replaced) stages.push_back(entry);
  m["stages"] = stages;
  std::ofstream out(mpath, std::ios::trunc);
  out << m.dump(2) << '\n';
}

// ---- adapters ----------------------------------------------------------

std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

ExternalAdapter command_adapter(const std::string &command) {
  return [command](std::string_view text) -> std::optional<std::string> {
    std::string cmd = "printf '%s' " + shell_quote(text) + " | " + command;
    FILE *p = ::popen(cmd.c_str(), "r");
    if (!p) return std::nullopt;
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    int rc = ::pclose(p);
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
    if (rc != 0 || out.empty()) return std::nullopt;
    return out;
  };
}

ExternalAdapter table_adapter(const std::string &path) {
  auto table = std::make_shared<std::map<std::string, std::string>>();
  for (const Json &j : read_jsonl(path)) (*table)[j.at("text").get<std::string>()] = j.at("smiles").get<std::string>();
  return [table](std::string_view text) -> std::optional<std::string> {
    auto it = table->find(detail::trim(text));
    if (it == table->end()) return std::nullopt;
    return it->second;
  };
}

/// FORMAT=table:PATH or FORMAT=cmd:COMMAND
AdapterTable build_adapters(const Context &ctx, const std::vector<std::string> &specs) {
  std::vector<std::string> all = ctx.strings("grade.adapters", {});
  all.insert(all.end(), specs.begin(), specs.end());
  AdapterTable t;
  for (const std::string &spec : all) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) throw UsageError("--adapter: expected FORMAT=table:PATH or FORMAT=cmd:COMMAND");
    Format f = parse_format(spec.substr(0, eq), "--adapter");
    std::string rest = spec.substr(eq + 1);
    if (rest.rfind("table:", 0) == 0)
      t[f] = table_adapter(rest.substr(6));
    else if (rest.rfind("cmd:", 0) == 0)
      t[f] = command_adapter(rest.substr(4));
    else
      throw UsageError("--adapter: unknown adapter kind in '" + spec + "'");
  }
  return t;
}

// ---- corpus helpers ----------------------------------------------------

std::set<int> allowed_from(const Context &ctx) {
  const Json *v = ctx.cfg.find("corpus.elements");
  if (!v) return allowed_elements();
  std::set<int> out;
  for (const Json &e : *v) {
    auto z = atomic_number(e.get<std::string>());
    if (!z) throw Error(ErrorKind::UnknownElement, "corpus.elements: " + e.get<std::string>());
    out.insert(*z);
  }
  return out;
}

std::vector<RawRecord> load_corpus(const std::string &path) {
  std::vector<RawRecord> out;
  for (const Json &j : read_jsonl(path)) out.push_back(raw_record_from_json(j));
  return out;
}

/// Accepted records that carry every non-native rendering requested.
std::vector<CorpusRecord> renderable(std::vector<CorpusRecord> recs, const std::vector<Format> &formats) {
  std::vector<CorpusRecord> out;
  for (CorpusRecord &r : recs) {
    if (!r.accepted) continue;
    bool ok = true;
    for (Format f : formats)
      if (!is_native(f) && !r.renderings.count(f)) ok = false;
    if (ok) out.push_back(std::move(r));
  }
  return out;
}

std::vector<Json> tasks_to_jsonl(const std::vector<Task> &tasks) {
  std::vector<Json> out;
  for (const Task &t : tasks) out.push_back(task_to_json(t));
  return out;
}

std::vector<Task> load_tasks(const std::string &path) {
  std::vector<Task> out;
  for (const Json &j : read_jsonl(path)) out.push_back(task_from_json(j));
  return out;
}

std::vector<ModelResponse> load_responses(const std::string &path) {
  std::vector<ModelResponse> out;
  for (const Json &j : read_jsonl(path)) out.push_back(response_from_json(j));
  return out;
}

Json analysis(const Molecule &mol) {
  Json j = Json::object();
  auto rings = sssr_rings(mol);
  j["canonical"] = canonical_form(mol).text;
  j["smiles"] = write_smiles(mol);
  j["heavy_atoms"] = heavy_atom_count(mol);
  j["fragments"] = fragment_count(mol);
  j["rings"] = ring_count(mol);
  j["ring_sizes"] = ring_sizes(rings);
  j["topology"] = std::string(to_string(classify_topology(rings)));
  auto hal = halogen_atoms(mol);
  if (hal.size() == 2) j["halogen_path"] = shortest_path_bonds(mol, hal[0], hal[1]);
  return j;
}

}  // namespace

int main(int argc, char **argv) {
  Context ctx;
  for (int i = 1; i < argc; ++i) ctx.argv.emplace_back(argv[i]);

  CLI::App app{"MolJSON toolkit: formats, task generation, grading and reporting"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--config", ctx.config_path, "TOML-style config file")->check(CLI::ExistingFile);
  auto *seed_opt = app.add_option("--seed", seed, "Sampling seed (overrides config)");
  app.add_option("--out-dir", ctx.out_dir, "Directory for manifest.json (default: next to outputs)");

  // ingest
  auto *ingest = app.add_subcommand("ingest", "Filter a corpus into accepted and rejected records");
  std::string corpus, out = "-", rejects;
  bool allow_charged = false;
  ingest->add_option("--corpus", corpus, "Corpus JSONL {id, smiles, iupac?}")->required();
  ingest->add_option("--out", out, "Accepted records JSONL");
  ingest->add_option("--rejects", rejects, "Rejected records JSONL");
  ingest->add_flag("--allow-charged", allow_charged, "Keep charged molecules");

  // gen
  auto *gen = app.add_subcommand("gen", "Generate benchmark tasks");
  gen->require_subcommand(1);
  std::string formats_csv;
  int per_stratum = -1, per_stratum_charged = -1, cap = -1, per_subset = -1;
  std::string sets_out;
  auto *gen_tr = gen->add_subcommand("translation", "Translation tasks over a stratified sample");
  gen_tr->add_option("--corpus", corpus)->required();
  gen_tr->add_option("--out", out);
  gen_tr->add_option("--formats", formats_csv, "Comma-separated formats");
  gen_tr->add_option("--per-stratum", per_stratum, "Neutral molecules per (heavy atoms, rings) cell");
  gen_tr->add_option("--per-stratum-charged", per_stratum_charged, "Charged molecules per cell");
  gen_tr->add_flag("--allow-charged", allow_charged);
  auto *gen_sp = gen->add_subcommand("shortest-path", "Halogen shortest-path tasks");
  gen_sp->add_option("--corpus", corpus)->required();
  gen_sp->add_option("--out", out);
  gen_sp->add_option("--formats", formats_csv);
  gen_sp->add_option("--cap", cap, "Molecules per path length");
  gen_sp->add_flag("--allow-charged", allow_charged);
  auto *gen_cg = gen->add_subcommand("constrained", "Constrained-generation tasks");
  gen_cg->add_option("--out", out);
  gen_cg->add_option("--formats", formats_csv);
  gen_cg->add_option("--per-subset", per_subset, "Constraint sets per subset");
  gen_cg->add_option("--per-stratum-cap", cap, "Constraint sets per stratum");
  gen_cg->add_option("--sets-out", sets_out, "Also write the sampled constraint sets");

  // convert
  auto *convert = app.add_subcommand("convert", "Convert one molecule, or a JSONL stream");
  std::string in_fmt_s, out_fmt_s, input = "-";
  bool stream = false;
  std::vector<std::string> adapter_specs;
  convert->add_option("in_format", in_fmt_s)->required();
  convert->add_option("out_format", out_fmt_s)->required();
  convert->add_option("--input", input, "Input file, - for stdin");
  convert->add_option("--out", out);
  convert->add_flag("--stream", stream, "JSONL {id, <in_format>} per line");
  convert->add_option("--adapter", adapter_specs, "FORMAT=table:PATH or FORMAT=cmd:COMMAND");

  // validate
  auto *validate = app.add_subcommand("validate", "Validate documents");
  std::string what;
  validate->add_option("kind", what, "Only 'moljson'")->required()->check(CLI::IsMember({"moljson"}));
  validate->add_option("--input", input);
  validate->add_flag("--stream", stream, "One document per line");

  // rescue-mol
  auto *rescue = app.add_subcommand("rescue-mol", "Recover a molecule from a damaged MOL V2000 block");
  std::string to = "moljson";
  rescue->add_option("--input", input);
  rescue->add_option("--to", to, "smiles | moljson | molv2000");
  rescue->add_flag("--stream", stream, "JSONL {id, molv2000} per line");

  // analyze
  auto *analyze = app.add_subcommand("analyze", "Graph facts for a JSONL stream of {id, smiles}");
  analyze->add_option("--input", input);
  analyze->add_option("--out", out);

  // run
  auto *run = app.add_subcommand("run", "Answer tasks with a provider");
  std::string tasks_path, provider, fixtures, model, effort, endpoint;
  int parallelism = -1, max_attempts = -1, thinking = -1, max_tokens = -1;
  run->add_option("--tasks", tasks_path)->required();
  run->add_option("--out", out)->required();
  run->add_option("--provider", provider, "replay | openai | anthropic");
  run->add_option("--fixtures", fixtures, "Fixture JSONL for replay");
  run->add_option("--model", model);
  run->add_option("--parallelism", parallelism);
  run->add_option("--max-attempts", max_attempts);
  run->add_option("--reasoning-effort", effort);
  run->add_option("--thinking-budget", thinking);
  run->add_option("--max-output-tokens", max_tokens);
  run->add_option("--endpoint", endpoint);

  // grade
  auto *grade = app.add_subcommand("grade", "Grade responses against tasks");
  std::string responses_path;
  grade->add_option("--tasks", tasks_path)->required();
  grade->add_option("--responses", responses_path)->required();
  grade->add_option("--out", out);
  grade->add_option("--adapter", adapter_specs, "FORMAT=table:PATH or FORMAT=cmd:COMMAND");

  // report
  auto *report = app.add_subcommand("report", "Aggregate grades into accuracy rows");
  std::string grades_path, group_by, csv_path;
  report->add_option("--tasks", tasks_path)->required();
  report->add_option("--responses", responses_path)->required();
  report->add_option("--grades", grades_path)->required();
  report->add_option("--out", out);
  report->add_option("--group-by", group_by, "model,task_type,input_format,output_format,format_pair,stratum,meta.<key>");
  report->add_option("--csv", csv_path, "Also write a CSV projection");

  // schema
  auto *schema = app.add_subcommand("schema", "Schema documents");
  schema->require_subcommand(1);
  auto *emit = schema->add_subcommand("emit", "Print a response schema");
  std::string variant = "standard", key, type = "string";
  emit->add_option("--variant", variant, "standard | enum-ranges")->check(CLI::IsMember({"standard", "enum-ranges"}));
  emit->add_option("--key", key, "Emit a single-key schema for this key instead");
  emit->add_option("--type", type, "Value type for --key")->check(CLI::IsMember({"string", "integer"}));
  emit->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (*seed_opt) ctx.seed_flag = seed;

  try {
    if (!ctx.config_path.empty()) ctx.cfg = Config::load(ctx.config_path);

    if (*ingest) {
      bool charged = allow_charged || ctx.cfg.get<bool>("corpus.allow_charged", false);
      auto recs = filter_corpus(load_corpus(corpus), charged, allowed_from(ctx));
      std::vector<Json> ok, bad;
      std::map<std::string, int> reasons;
      for (const CorpusRecord &r : recs) {
        if (r.accepted) {
          Json j = Json{{"id", r.external_id}, {"smiles", r.smiles}};
          for (const auto &[f, s] : r.renderings) j[std::string(to_string(f))] = s;
          j["heavy_atoms"] = heavy_atom_count(*r.mol);
          j["rings"] = ring_count(*r.mol);
          j["charged"] = r.charged();
          ok.push_back(j);
        } else {
          std::string why(to_string(*r.rejection_reason));
          ++reasons[why];
          bad.push_back(Json{{"id", r.external_id}, {"smiles", r.smiles}, {"reason", why}, {"diagnostics", r.diagnostics}});
        }
      }
      write_jsonl(out, ok);
      if (!rejects.empty()) write_jsonl(rejects, bad);
      Json summary = Json{{"records", recs.size()}, {"accepted", ok.size()}, {"rejected", reasons}};
      std::cerr << summary.dump() << '\n';
      update_manifest(ctx, "ingest", out, Json{{"corpus", corpus}});
      return 0;
    }

    if (*gen_tr) {
      auto formats = parse_formats(formats_csv.empty() ? ctx.strings("translation.formats", {"smiles", "iupac", "moljson"})
                                                       : split_csv(formats_csv), "--formats");
      bool charged = allow_charged || ctx.cfg.get<bool>("corpus.allow_charged", false);
      auto recs = renderable(filter_corpus(load_corpus(corpus), charged, allowed_from(ctx)), formats);
      SampleParams p;
      p.heavy_min = ctx.cfg.get("corpus.heavy_min", p.heavy_min);
      p.heavy_max = ctx.cfg.get("corpus.heavy_max", p.heavy_max);
      p.ring_min = ctx.cfg.get("corpus.ring_min", p.ring_min);
      p.ring_max = ctx.cfg.get("corpus.ring_max", p.ring_max);
      p.per_stratum_neutral = per_stratum >= 0 ? per_stratum : ctx.cfg.get("corpus.per_stratum_neutral", p.per_stratum_neutral);
      p.per_stratum_charged = per_stratum_charged >= 0 ? per_stratum_charged
                                                       : ctx.cfg.get("corpus.per_stratum_charged", p.per_stratum_charged);
      p.seed = ctx.seed();
      auto sample = stratified_sample(recs, p);
      auto tasks = gen_translation_tasks(sources_from_sample(sample), formats);
      write_jsonl(out, tasks_to_jsonl(tasks));
      std::cerr << Json{{"molecules", sample.size()}, {"tasks", tasks.size()}}.dump() << '\n';
      update_manifest(ctx, "gen translation", out, Json{{"corpus", corpus}});
      return 0;
    }

    if (*gen_sp) {
      ShortestPathParams p;
      p.formats = parse_formats(formats_csv.empty() ? ctx.strings("shortest_path.formats", {"smiles", "iupac", "moljson"})
                                                    : split_csv(formats_csv), "--formats");
      p.per_length_cap = cap >= 0 ? cap : ctx.cfg.get("shortest_path.per_length_cap", p.per_length_cap);
      p.length_min = ctx.cfg.get("shortest_path.length_min", p.length_min);
      p.length_max = ctx.cfg.get("shortest_path.length_max", p.length_max);
      p.seed = ctx.seed();
      bool charged = allow_charged || ctx.cfg.get<bool>("corpus.allow_charged", false);
      auto recs = renderable(filter_corpus(load_corpus(corpus), charged, allowed_from(ctx)), p.formats);
      auto picks = select_shortest_path_molecules(recs, p);
      auto tasks = gen_shortest_path_tasks(picks, p.formats);
      write_jsonl(out, tasks_to_jsonl(tasks));
      std::cerr << Json{{"molecules", picks.size()}, {"tasks", tasks.size()}}.dump() << '\n';
      update_manifest(ctx, "gen shortest-path", out, Json{{"corpus", corpus}});
      return 0;
    }

    if (*gen_cg) {
      auto formats = parse_formats(formats_csv.empty() ? ctx.strings("constrained.formats", {"smiles", "iupac", "moljson"})
                                                       : split_csv(formats_csv), "--formats");
      ConstraintSampling cs;
      cs.per_subset_total = per_subset >= 0 ? per_subset : ctx.cfg.get("constrained.per_subset_total", cs.per_subset_total);
      cs.per_stratum_cap = cap >= 0 ? cap : ctx.cfg.get("constrained.per_stratum_cap", cs.per_stratum_cap);
      cs.seed = ctx.seed();
      std::vector<ConstraintSet> all;
      for (Topology t : constraint_subsets()) {
        std::string sec = "constrained." + std::string(to_string(t)) + ".";
        SubsetLimits lim = default_limits(t);
        lim.path_min = ctx.cfg.get(sec + "path_min", lim.path_min);
        lim.path_max = ctx.cfg.get(sec + "path_max", lim.path_max);
        lim.ring_min = ctx.cfg.get(sec + "ring_min", lim.ring_min);
        lim.ring_max = ctx.cfg.get(sec + "ring_max", lim.ring_max);
        lim.max_heavy = ctx.cfg.get(sec + "max_heavy", lim.max_heavy);
        lim.linker_max = ctx.cfg.get(sec + "linker_max", lim.linker_max);
        auto sets = enumerate_constraint_sets(t, lim);
        all.insert(all.end(), std::make_move_iterator(sets.begin()), std::make_move_iterator(sets.end()));
      }
      auto sets = sample_constraint_sets(std::move(all), cs);
      auto tasks = gen_constrained_tasks(sets, formats);
      write_jsonl(out, tasks_to_jsonl(tasks));
      if (!sets_out.empty()) {
        std::vector<Json> rows;
        for (const ConstraintSet &s : sets) rows.push_back(constraint_set_to_json(s));
        write_jsonl(sets_out, rows);
      }
      std::map<std::string, int> per;
      for (const ConstraintSet &s : sets) ++per[std::string(to_string(s.subset))];
      std::cerr << Json{{"sets", sets.size()}, {"per_subset", per}, {"tasks", tasks.size()}}.dump() << '\n';
      update_manifest(ctx, "gen constrained", out, Json::object());
      return 0;
    }

    if (*convert) {
      Format from = parse_format(in_fmt_s, "in_format"), into = parse_format(out_fmt_s, "out_format");
      AdapterTable adapters = build_adapters(ctx, adapter_specs);
      if (!stream) {
        Molecule mol = read_molecule(read_text(input), from, adapters);
        Sink s(out);
        std::string text = write_molecule(mol, into);
        s.os() << text;
        if (text.empty() || text.back() != '\n') s.os() << '\n';
        return 0;
      }
      Sink s(out);
      bool failed = false;
      const std::string in_key(to_string(from)), out_key(to_string(into));
      std::istringstream in(read_text(input));
      std::string line;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json row = Json::parse(line, nullptr, false);
        Json res = Json::object();
        try {
          if (row.is_discarded() || !row.is_object()) throw Error(ErrorKind::MalformedJson, "bad input line");
          if (row.contains("id")) res["id"] = row["id"];
          if (!row.contains(in_key)) throw Error(ErrorKind::SchemaViolation, "missing key " + in_key);
          const Json &v = row[in_key];
          std::string text = v.is_string() ? v.get<std::string>() : v.dump();
          Molecule mol = read_molecule(text, from, adapters);
          if (into == Format::MolJson)
            res[out_key] = to_moljson(mol);
          else
            res[out_key] = write_molecule(mol, into);
        } catch (const Error &e) {
          failed = true;
          res["error"] = std::string(to_string(e.kind()));
          res["detail"] = e.what();
        }
        s.line(res);
      }
      return failed ? 1 : 0;
    }

    if (*validate) {
      std::vector<std::string> docs;
      if (stream) {
        std::istringstream in(read_text(input));
        std::string line;
        while (std::getline(in, line))
          if (line.find_first_not_of(" \t\r") != std::string::npos) docs.push_back(line);
      } else {
        docs.push_back(read_text(input));
      }
      bool any = false;
      for (std::size_t i = 0; i < docs.size(); ++i) {
        auto v = validate_document(docs[i]);
        Json rows = Json::array();
        for (const Violation &x : v) rows.push_back(Json{{"path", x.path}, {"reason", x.reason}, {"kind", std::string(to_string(x.kind))}});
        if (v.empty()) {
          try {
            (void)parse_moljson(docs[i]);
          } catch (const Error &e) {
            rows.push_back(Json{{"path", ""}, {"reason", e.what()}, {"kind", std::string(to_string(e.kind()))}});
          }
        }
        if (!rows.empty()) any = true;
        Json res = Json{{"valid", rows.empty()}, {"violations", rows}};
        if (stream) res = Json{{"line", i + 1}, {"valid", rows.empty()}, {"violations", rows}};
        std::cout << res.dump() << '\n';
      }
      return any ? 1 : 0;
    }

    if (*rescue) {
      Format into = parse_format(to, "--to");
      if (!stream) {
        Molecule mol = rescue_parse(read_text(input));
        std::string text = write_molecule(mol, into);
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << '\n';
        return 0;
      }
      bool failed = false;
      for (const Json &row : read_jsonl(input)) {
        Json res = Json::object();
        if (row.contains("id")) res["id"] = row["id"];
        try {
          Molecule mol = rescue_parse(row.at("molv2000").get<std::string>());
          res["smiles"] = write_smiles(mol);
          if (into == Format::MolJson) res["moljson"] = to_moljson(mol);
          else if (into != Format::Smiles) res[std::string(to_string(into))] = write_molecule(mol, into);
        } catch (const Error &e) {
          failed = true;
          res["error"] = std::string(to_string(e.kind()));
          res["detail"] = e.what();
        }
        std::cout << res.dump() << '\n';
      }
      return failed ? 1 : 0;
    }

    if (*analyze) {
      Sink s(out);
      bool failed = false;
      for (const Json &row : read_jsonl(input)) {
        Json res = Json::object();
        if (row.contains("id")) res["id"] = row["id"];
        try {
          Json a = analysis(parse_smiles(row.at("smiles").get<std::string>()));
          for (auto it = a.begin(); it != a.end(); ++it) res[it.key()] = it.value();
        } catch (const Error &e) {
          failed = true;
          res["error"] = std::string(to_string(e.kind()));
          res["detail"] = e.what();
        }
        s.line(res);
      }
      return failed ? 1 : 0;
    }

    if (*run) {
      ProviderConfig pc;
      std::string kind = provider.empty() ? ctx.cfg.get<std::string>("provider.kind", "replay") : provider;
      if (kind == "replay") {
        pc.kind = ProviderKind::Replay;
      } else if (kind == "openai" || kind == "anthropic") {
        pc.kind = ProviderKind::Live;
        pc.provider = kind;
      } else {
        throw UsageError("--provider: unknown provider '" + kind + "'");
      }
      pc.model = !model.empty() ? model : ctx.cfg.get<std::string>("provider.model", kind == "replay" ? "replay" : "");
      if (pc.model.empty()) throw UsageError("--model: required for live providers");
      pc.fixtures_path = !fixtures.empty() ? fixtures : ctx.cfg.get<std::string>("provider.fixtures", "");
      pc.reasoning_effort = !effort.empty() ? effort : ctx.cfg.get<std::string>("provider.reasoning_effort", pc.reasoning_effort);
      pc.thinking_budget = thinking >= 0 ? thinking : ctx.cfg.get("provider.thinking_budget", pc.thinking_budget);
      pc.max_output_tokens = max_tokens >= 0 ? max_tokens : ctx.cfg.get("provider.max_output_tokens", pc.max_output_tokens);
      pc.parallelism = parallelism >= 0 ? parallelism : ctx.cfg.get("provider.parallelism", pc.parallelism);
      pc.max_attempts = max_attempts >= 0 ? max_attempts : ctx.cfg.get("provider.max_attempts", pc.max_attempts);
      pc.backoff_ms = ctx.cfg.get("provider.backoff_ms", pc.backoff_ms);
      pc.endpoint = !endpoint.empty() ? endpoint : ctx.cfg.get<std::string>("provider.endpoint", "");
      pc.api_key_env = ctx.cfg.get<std::string>("provider.api_key_env", "");
      if (pc.kind == ProviderKind::Replay && pc.fixtures_path.empty()) throw UsageError("--fixtures: required for replay");
      if (pc.parallelism < 1) throw UsageError("--parallelism: must be >= 1");
      auto tasks = load_tasks(tasks_path);
      auto prov = make_provider(pc);
      if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
      RunStats st;
      auto responses = run_tasks(tasks, *prov, pc, out, &st);
      std::cerr << Json{{"responses", responses.size()}, {"resumed", st.resumed}, {"requested", st.requested},
                        {"failed", st.failed}}.dump()
                << '\n';
      update_manifest(ctx, "run", out, Json{{"tasks", tasks_path}, {"provider", kind}, {"model", pc.model}});
      return 0;
    }

    if (*grade) {
      auto tasks = load_tasks(tasks_path);
      std::map<std::string, const Task *> by_id;
      for (const Task &t : tasks) by_id[t.task_id] = &t;
      auto responses = load_responses(responses_path);
      std::sort(responses.begin(), responses.end(), [](const ModelResponse &a, const ModelResponse &b) {
        return std::tie(a.model, a.task_id) < std::tie(b.model, b.task_id);
      });
      GradeOptions opt;
      opt.adapters = build_adapters(ctx, adapter_specs);
      std::vector<Json> rows;
      std::map<std::string, int> counts;
      for (const ModelResponse &r : responses) {
        auto it = by_id.find(r.task_id);
        if (it == by_id.end()) throw Error(ErrorKind::JoinMismatch, "response for unknown task " + r.task_id);
        EvalRecord rec = grade_task(*it->second, r, opt);
        ++counts[rec.label()];
        rows.push_back(eval_record_to_json(rec));
      }
      write_jsonl(out, rows);
      std::cerr << Json{{"graded", rows.size()}, {"status", counts}}.dump() << '\n';
      update_manifest(ctx, "grade", out, Json{{"tasks", tasks_path}, {"responses", responses_path}});
      return 0;
    }

    if (*report) {
      auto tasks = load_tasks(tasks_path);
      auto responses = load_responses(responses_path);
      std::vector<EvalRecord> records;
      for (const Json &j : read_jsonl(grades_path)) records.push_back(eval_record_from_json(j));
      auto keys = group_by.empty() ? ctx.strings("report.group_by", {"model", "task_type", "format_pair"}) : split_csv(group_by);
      auto rows = aggregate_report(records, responses, tasks, keys);
      Json arr = Json::array();
      for (const ReportRow &r : rows) arr.push_back(report_row_to_json(r));
      Sink s(out);
      s.os() << arr.dump(2) << '\n';
      if (!csv_path.empty()) {
        Sink c(csv_path);
        c.os() << report_csv(rows);
      }
      update_manifest(ctx, "report", out, Json{{"tasks", tasks_path}, {"responses", responses_path}, {"grades", grades_path}});
      return 0;
    }

    if (*emit) {
      Json doc = key.empty() ? emit_schema(variant == "enum-ranges" ? SchemaVariant::EnumRanges : SchemaVariant::Standard)
                             : single_key_schema(key, type);
      Sink s(out);
      s.os() << doc.dump(2) << '\n';
      update_manifest(ctx, "schema emit", out, Json::object());
      return 0;
    }
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Json::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
