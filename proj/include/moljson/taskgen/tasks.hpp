#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moljson/canon.hpp"
#include "moljson/convert.hpp"
#include "moljson/graph.hpp"
#include "moljson/moljson.hpp"
#include "moljson/taskgen/constraints.hpp"
#include "moljson/taskgen/corpus.hpp"
#include "moljson/taskgen/random.hpp"

namespace moljson {

enum class TaskType { Translation, ShortestPath, ConstrainedGeneration };

inline std::string_view to_string(TaskType t) {
  switch (t) {
    case TaskType::Translation: return "translation";
    case TaskType::ShortestPath: return "shortest_path";
    case TaskType::ConstrainedGeneration: return "constrained_generation";
  }
  return "?";
}

inline std::optional<TaskType> task_type_from_string(std::string_view s) {
  for (TaskType t : {TaskType::Translation, TaskType::ShortestPath, TaskType::ConstrainedGeneration})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

struct Task {
  std::string task_id;
  TaskType type = TaskType::Translation;
  std::optional<Format> input_format;
  std::optional<Format> output_format;
  std::string prompt;
  Json output_schema;
  Json ground_truth;
  Json meta = Json::object();
};

inline Json task_to_json(const Task &t) {
  Json j = Json::object();
  j["task_id"] = t.task_id;
  j["task_type"] = std::string(to_string(t.type));
  j["input_format"] = t.input_format ? Json(std::string(to_string(*t.input_format))) : Json(nullptr);
  j["output_format"] = t.output_format ? Json(std::string(to_string(*t.output_format))) : Json(nullptr);
  j["prompt"] = t.prompt;
  j["output_schema"] = t.output_schema;
  j["ground_truth"] = t.ground_truth;
  j["meta"] = t.meta;
  return j;
}

inline Task task_from_json(const Json &j) {
  Task t;
  t.task_id = j.at("task_id").get<std::string>();
  auto type = task_type_from_string(j.at("task_type").get<std::string>());
  if (!type) throw Error(ErrorKind::SchemaViolation, "unknown task_type in " + t.task_id);
  t.type = *type;
  auto fmt = [&](const char *key) -> std::optional<Format> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    auto f = format_from_string(j[key].get<std::string>());
    if (!f) throw Error(ErrorKind::SchemaViolation, std::string("unknown ") + key + " in " + t.task_id);
    return f;
  };
  t.input_format = fmt("input_format");
  t.output_format = fmt("output_format");
  t.prompt = j.at("prompt").get<std::string>();
  t.output_schema = j.at("output_schema");
  t.ground_truth = j.at("ground_truth");
  if (j.contains("meta")) t.meta = j["meta"];
  return t;
}

/// Schema attached to a prompt whose answer is in `f`.
inline Json output_schema_for(Format f, SchemaVariant variant = SchemaVariant::Standard) {
  if (f == Format::MolJson) return emit_schema(variant);
  return single_key_schema(std::string(to_string(f)));
}

inline Json shortest_path_schema() { return single_key_schema("answer", "integer"); }

/// A molecule with whatever source strings the corpus supplied.
struct SourceMolecule {
  std::string id;
  std::string smiles;
  Molecule mol;
  std::map<Format, std::string> renderings;
  Json meta = Json::object();
};

inline SourceMolecule source_from(const CorpusRecord &r) {
  return SourceMolecule{r.external_id, r.smiles, *r.mol, r.renderings, Json::object()};
}

/// Text of the molecule in format `f`, as it appears inside a prompt.
inline std::string render_source(const SourceMolecule &m, Format f) {
  switch (f) {
    case Format::Smiles: return m.smiles.empty() ? write_smiles(m.mol) : m.smiles;
    case Format::MolJson: return write_moljson(m.mol);
    case Format::MolV2000: return write_molv2000(m.mol);
    default: break;
  }
  auto it = m.renderings.find(f);
  if (it == m.renderings.end() || it->second.empty())
    throw Error(ErrorKind::MissingSourceRendering, "molecule " + m.id + " has no " + std::string(to_string(f)));
  return it->second;
}

inline std::string translation_prompt(Format from, Format to, const std::string &source) {
  std::string p = "Convert the following molecule from " + std::string(display_name(from)) + " to " +
                  std::string(display_name(to)) + ".\n";
  p += std::string(display_name(from)) + ":\n" + source;
  if (p.back() != '\n') p += '\n';
  p += "Return only the molecule in the requested output format.";
  return p;
}

inline std::string shortest_path_prompt(Format from, const std::string &source) {
  std::string p =
      "How many bonds are on the shortest path between the two halogen atoms in the molecule below? "
      "Count all bonds on the path, including the bond to each halogen.\n";
  p += std::string(display_name(from)) + ":\n" + source;
  if (p.back() != '\n') p += '\n';
  p += "Return only the integer number of bonds.";
  return p;
}

namespace detail {

inline const char *count_word(int n) {
  static const char *kWords[] = {"zero", "one", "two", "three"};
  return n >= 0 && n <= 3 ? kWords[n] : nullptr;
}

inline std::string ring_sizes_line(const std::vector<int> &sizes) {
  std::map<int, int> count;
  for (int s : sizes) ++count[s];
  std::string out = "exactly ";
  bool first = true;
  for (auto [size, n] : count) {
    if (!first) out += " and ";
    const char *w = count_word(n);
    out += (w ? std::string(w) : std::to_string(n)) + " " + std::to_string(size) + "-membered ring";
    if (n > 1) out += "s";
    first = false;
  }
  return out + ".";
}

inline std::string path_line(const char *a, const char *b, int n) {
  return "- Shortest path between " + std::string(a) + " and " + std::string(b) + ": exactly " +
         std::to_string(n) + " bonds (count all bonds on the path, including the bond to each halogen).\n";
}

}  // namespace detail

/// Constrained-generation prompt. The output format travels in the schema.
inline std::string constrained_prompt(const ConstraintSet &cs) {
  std::string p = "Generate one valid molecule that satisfies all constraints below.\n";
  p += "- Connectivity: exactly 1 connected component (single connected molecule).\n";
  p += "- Number of F atoms: exactly 1.\n";
  p += "- Number of Cl atoms: exactly 1.\n";
  p += "- Number of Br atoms: exactly 1.\n";
  p += detail::path_line("F", "Cl", cs.path_fcl);
  p += detail::path_line("F", "Br", cs.path_fbr);
  p += detail::path_line("Cl", "Br", cs.path_clbr);
  p += "- Number of rings: exactly " + std::to_string(cs.ring_count) + ".\n";
  if (cs.ring_count > 0) p += "- Ring sizes: " + detail::ring_sizes_line(cs.ring_sizes) + "\n";
  switch (cs.topology) {
    case Topology::Spiro: p += "- Ring topology: exactly one spiro center.\n"; break;
    case Topology::Fused: p += "- Ring topology: the two rings are fused (they share at least one bond).\n"; break;
    case Topology::Separate: p += "- Ring topology: the two rings are not fused and share no atoms.\n"; break;
    default: break;
  }
  if (cs.halogen_on_ring) p += "- Halogen placement: each halogen must be directly bonded to a ring atom.\n";
  p += "Return only the molecule in the requested output format.";
  return p;
}

inline Json constraint_set_to_json(const ConstraintSet &cs) {
  Json j = Json::object();
  j["subset"] = std::string(to_string(cs.subset));
  j["path_FCl"] = cs.path_fcl;
  j["path_FBr"] = cs.path_fbr;
  j["path_ClBr"] = cs.path_clbr;
  j["ring_count"] = cs.ring_count;
  j["ring_sizes"] = cs.ring_sizes;
  j["topology"] = std::string(to_string(cs.topology));
  j["halogen_on_ring"] = cs.halogen_on_ring;
  j["witness"] = write_smiles(cs.witness);
  return j;
}

inline ConstraintSet constraint_set_from_json(const Json &j) {
  ConstraintSet cs;
  auto topo = [&](const char *key) {
    auto t = topology_from_string(j.at(key).get<std::string>());
    if (!t) throw Error(ErrorKind::SchemaViolation, std::string("bad ") + key);
    return *t;
  };
  cs.subset = topo("subset");
  cs.path_fcl = j.at("path_FCl").get<int>();
  cs.path_fbr = j.at("path_FBr").get<int>();
  cs.path_clbr = j.at("path_ClBr").get<int>();
  cs.ring_count = j.at("ring_count").get<int>();
  cs.ring_sizes = j.at("ring_sizes").get<std::vector<int>>();
  cs.topology = topo("topology");
  cs.halogen_on_ring = j.at("halogen_on_ring").get<bool>();
  if (j.contains("witness") && j["witness"].is_string()) cs.witness = parse_smiles(j["witness"].get<std::string>());
  return cs;
}

inline void sort_tasks(std::vector<Task> &tasks) {
  std::sort(tasks.begin(), tasks.end(), [](const Task &a, const Task &b) { return a.task_id < b.task_id; });
}

/// One task per ordered pair of distinct formats per molecule.
inline std::vector<Task> gen_translation_tasks(const std::vector<SourceMolecule> &mols, const std::vector<Format> &formats) {
  std::vector<Task> out;
  for (const SourceMolecule &m : mols) {
    const std::string canonical = canonical_form(m.mol).text;
    const std::string truth_smiles = write_smiles(m.mol);
    std::map<Format, std::string> source;
    for (Format f : formats) source[f] = render_source(m, f);
    for (Format from : formats)
      for (Format to : formats) {
        if (from == to) continue;
        Task t;
        t.type = TaskType::Translation;
        t.input_format = from;
        t.output_format = to;
        t.task_id = "tr-" + hex16(fnv1a("translation|" + std::string(to_string(from)) + "|" +
                                        std::string(to_string(to)) + "|" + canonical));
        t.prompt = translation_prompt(from, to, source[from]);
        t.output_schema = output_schema_for(to);
        t.ground_truth = Json{{"canonical", canonical}, {"smiles", truth_smiles}};
        t.meta = m.meta;
        t.meta["molecule_id"] = m.id;
        out.push_back(std::move(t));
      }
  }
  sort_tasks(out);
  return out;
}

inline std::vector<SourceMolecule> sources_from_sample(const std::vector<SampledMolecule> &sample) {
  std::vector<SourceMolecule> out;
  for (const SampledMolecule &s : sample) {
    SourceMolecule m = source_from(*s.record);
    m.meta["heavy_atoms"] = s.heavy_atoms;
    m.meta["rings"] = s.rings;
    m.meta["charged"] = s.charged;
    m.meta["fused_or_spiro"] = has_fused_or_spiro(sssr_rings(m.mol));
    out.push_back(std::move(m));
  }
  return out;
}

struct ShortestPathParams {
  int per_length_cap = 200;
  int length_min = 2, length_max = 18;
  std::uint64_t seed = 0;
  std::vector<Format> formats = {Format::Smiles, Format::Iupac, Format::MolJson};
};

struct ShortestPathPick {
  SourceMolecule mol;
  int length = 0;
  bool fused = false;
};

/// Molecules with exactly two halogens, up to the cap per path length.
inline std::vector<ShortestPathPick> select_shortest_path_molecules(const std::vector<CorpusRecord> &records,
                                                                    const ShortestPathParams &p) {
  std::vector<const CorpusRecord *> pool;
  for (const CorpusRecord &r : records)
    if (r.accepted && r.mol) pool.push_back(&r);
  std::sort(pool.begin(), pool.end(),
            [](const CorpusRecord *a, const CorpusRecord *b) { return a->external_id < b->external_id; });
  std::set<std::string> seen;
  std::map<int, std::vector<ShortestPathPick>> by_length;
  for (const CorpusRecord *r : pool) {
    auto hal = halogen_atoms(*r->mol);
    if (hal.size() != 2) continue;
    if (fragment_count(*r->mol) != 1) continue;
    const int d = shortest_path_bonds(*r->mol, hal[0], hal[1]);
    if (d < p.length_min || d > p.length_max) continue;
    if (!seen.insert(canonical_form(*r->mol).text).second) continue;
    ShortestPathPick pick{source_from(*r), d, has_fused_ring_system(sssr_rings(*r->mol))};
    by_length[d].push_back(std::move(pick));
  }
  std::vector<ShortestPathPick> out;
  for (auto &[d, picks] : by_length) {
    seeded_shuffle(picks, derive_seed(p.seed, "length/" + std::to_string(d)));
    for (int i = 0; i < p.per_length_cap && i < static_cast<int>(picks.size()); ++i)
      out.push_back(picks[static_cast<std::size_t>(i)]);
  }
  return out;
}

inline std::vector<Task> gen_shortest_path_tasks(const std::vector<ShortestPathPick> &picks,
                                                 const std::vector<Format> &formats) {
  std::vector<Task> out;
  for (const ShortestPathPick &pk : picks) {
    const std::string canonical = canonical_form(pk.mol.mol).text;
    for (Format f : formats) {
      Task t;
      t.type = TaskType::ShortestPath;
      t.input_format = f;
      t.task_id = "sp-" + hex16(fnv1a("shortest_path|" + std::string(to_string(f)) + "|" + canonical));
      t.prompt = shortest_path_prompt(f, render_source(pk.mol, f));
      t.output_schema = shortest_path_schema();
      t.ground_truth = pk.length;
      t.meta = Json{{"molecule_id", pk.mol.id}, {"path_length", pk.length}, {"fused", pk.fused}};
      out.push_back(std::move(t));
    }
  }
  sort_tasks(out);
  return out;
}

inline std::vector<Task> gen_shortest_path_tasks(const std::vector<CorpusRecord> &records, const ShortestPathParams &p) {
  return gen_shortest_path_tasks(select_shortest_path_molecules(records, p), p.formats);
}

/// One task per constraint set per output format.
inline std::vector<Task> gen_constrained_tasks(const std::vector<ConstraintSet> &sets, const std::vector<Format> &formats) {
  std::vector<Task> out;
  for (const ConstraintSet &cs : sets) {
    const std::string prompt = constrained_prompt(cs);
    const Json truth = constraint_set_to_json(cs);
    for (Format f : formats) {
      Task t;
      t.type = TaskType::ConstrainedGeneration;
      t.output_format = f;
      t.task_id = "cg-" + hex16(fnv1a("constrained_generation|" + std::string(to_string(f)) + "|" + cs.key()));
      t.prompt = prompt;
      t.output_schema = output_schema_for(f);
      t.ground_truth = truth;
      t.meta = Json{{"subset", std::string(to_string(cs.subset))}, {"stratum", cs.stratum()}};
      out.push_back(std::move(t));
    }
  }
  sort_tasks(out);
  return out;
}

}  // namespace moljson
