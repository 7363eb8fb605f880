// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>

#include "moljson/canon.hpp"
#include "moljson/config.hpp"
#include "moljson/eval.hpp"
#include "moljson/molfile.hpp"
#include "moljson/runner/runner.hpp"
#include "moljson/smiles.hpp"
#include "oracles/brute_iso.hpp"
#include "oracles/graphs.hpp"
#include "oracles/synthetic_corpus.hpp"
#include "oracles/wilson.hpp"
#include "support.hpp"

using namespace moljson;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  void fail(const std::string &why) {
    if (ok) detail = why;
    ok = false;
  }
};

int failures = 0;

void criterion(const std::string &name, const std::function<void(Outcome &)> &body) {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception &e) {
    o.fail(std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char timing[32];
  std::snprintf(timing, sizeof timing, "%.2fs", secs);
  if (o.ok) {
    std::cout << "PASS " << name << " (" << timing << (o.detail.empty() ? "" : ", " + o.detail) << ")\n";
  } else {
    ++failures;
    std::cout << "FAIL " << name << ": " << o.detail << " (" << timing << ")\n";
  }
}

std::vector<std::string> lines_of(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string l;
  while (std::getline(ss, l)) out.push_back(l);
  return out;
}

std::string join(const std::vector<std::string> &lines) {
  std::string s;
  for (const auto &l : lines) s += l + "\n";
  return s;
}

std::string pad3(int v) {
  std::string s = std::to_string(v);
  return std::string(s.size() < 3 ? 3 - s.size() : 0, ' ') + s;
}

/// Damages a MOL block in one of the three ways seen in model output.
std::string corrupt(const std::string &block, int kind, std::mt19937_64 &rng) {
  auto lines = lines_of(block);
  switch (kind % 3) {
    case 0: {
      std::string counts = lines[3];
      lines.erase(lines.begin() + 3);
      const auto where = static_cast<long>(rng() % 3);
      lines.insert(lines.begin() + where, counts);
      break;
    }
    case 1: {
      std::string c = lines[3];
      const int da = 1 + static_cast<int>(rng() % 5), db = static_cast<int>(rng() % 5) - 2;
      const int atoms = std::stoi(c.substr(0, 3)), bonds = std::stoi(c.substr(3, 3));
      lines[3] = pad3(rng() % 2 ? atoms + da : std::max(1, atoms - da)) + pad3(std::max(0, bonds + db)) + c.substr(6);
      break;
    }
    default: {
      const auto drop = static_cast<long>(1 + rng() % 3);
      lines.erase(lines.begin(), lines.begin() + drop);
      break;
    }
  }
  return join(lines);
}

std::string dump_lines(const std::vector<Json> &rows) {
  std::string s;
  for (const Json &j : rows) s += j.dump() + "\n";
  return s;
}

struct PipelineOutput {
  std::string grades, report;
};

PipelineOutput offline_pipeline(const fs::path &dir, int parallelism) {
  std::vector<RawRecord> raw;
  for (const auto &row : testing::corpus()) raw.push_back(RawRecord{row.id, row.smiles, {}});
  auto records = filter_corpus(raw, true);
  SampleParams sp;
  sp.per_stratum_neutral = 1;
  sp.per_stratum_charged = 1;
  sp.seed = 4242;
  auto sample = stratified_sample(records, sp);
  auto tasks = gen_translation_tasks(sources_from_sample(sample), {Format::Smiles, Format::MolJson});
  ShortestPathParams pp;
  pp.formats = {Format::Smiles, Format::MolJson};
  pp.per_length_cap = 2;
  pp.seed = 4242;
  auto sp_tasks = gen_shortest_path_tasks(select_shortest_path_molecules(records, pp), pp.formats);
  tasks.insert(tasks.end(), sp_tasks.begin(), sp_tasks.end());

  std::vector<ModelResponse> fixtures;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task &t = tasks[i];
    ModelResponse r;
    r.task_id = t.task_id;
    r.model = "fixture-model";
    r.output_tokens = 100 + static_cast<long long>(i % 37);
    if (i % 5 == 4) {
      r.raw_text = "I am unable to help with that.";
    } else if (t.type == TaskType::ShortestPath) {
      r.raw_text = Json{{"answer", t.ground_truth.get<int>() + static_cast<int>(i % 3 == 0)}}.dump();
    } else {
      Molecule m = parse_smiles(t.ground_truth["smiles"].get<std::string>());
      if (i % 3 == 0) m = parse_smiles("C." + write_smiles(m));
      const std::string key(to_string(*t.output_format));
      r.raw_text = Json{{key, *t.output_format == Format::MolJson ? to_moljson(m) : Json(write_molecule(m, *t.output_format))}}.dump();
    }
    fixtures.push_back(r);
  }
  ReplayProvider replay(fixtures);
  ProviderConfig cfg;
  cfg.model = "fixture-model";
  cfg.fixtures_path = "in-memory";
  cfg.parallelism = parallelism;
  const fs::path out = dir / ("responses-" + std::to_string(parallelism) + ".jsonl");
  run_tasks(tasks, replay, cfg, out.string());
  auto responses = read_responses(out.string());

  std::map<std::string, const Task *> by_id;
  for (const Task &t : tasks) by_id[t.task_id] = &t;
  std::vector<EvalRecord> records_out;
  std::vector<Json> grade_rows;
  for (const ModelResponse &r : responses) {
    records_out.push_back(grade_task(*by_id.at(r.task_id), r));
    grade_rows.push_back(eval_record_to_json(records_out.back()));
  }
  Json rep = Json::array();
  for (const ReportRow &row : aggregate_report(records_out, responses, tasks, {"model", "task_type", "format_pair"}))
    rep.push_back(report_row_to_json(row));
  return {dump_lines(grade_rows), rep.dump(2)};
}

}  // namespace

int main() {
  criterion("fixture closure: acetic acid SMILES, MOL and MolJSON panels agree", [](Outcome &o) {
    Molecule smi = read_molecule(testing::fixture("acetic_acid.smi"), Format::Smiles);
    Molecule mol = parse_molv2000(testing::fixture("acetic_acid.mol"));
    Molecule mj = parse_moljson(testing::fixture("acetic_acid.json"));
    if (!same_molecule(smi, mol) || !same_molecule(mol, mj) || !same_molecule(smi, mj)) o.fail("panels differ");
    Json doc = to_moljson(smi);
    std::vector<std::string> ids;
    for (const Json &a : doc["atoms"]) ids.push_back(a["id"]);
    std::vector<int> orders;
    for (const Json &b : doc["bonds"]) orders.push_back(b["order"]);
    if (ids != std::vector<std::string>{"C1", "C2", "O1", "O2"}) o.fail("atom ids " + Json(ids).dump());
    if (orders != std::vector<int>{1, 2, 1}) o.fail("bond orders " + Json(orders).dump());
    if (write_moljson(smi) != testing::fixture("acetic_acid.json")) o.fail("document text differs");
  });

  criterion("round trip through SMILES, MOL V2000 and MolJSON on the 1,000-molecule corpus", [](Outcome &o) {
    int n = 0;
    for (const auto &row : testing::corpus()) {
      Molecule m = parse_smiles(row.smiles);
      if (!same_molecule(m, parse_smiles(write_smiles(m)))) o.fail(row.id + " via SMILES");
      if (!same_molecule(m, parse_molv2000(write_molv2000(m)))) o.fail(row.id + " via MOL");
      if (!same_molecule(m, parse_moljson(write_moljson(m)))) o.fail(row.id + " via MolJSON");
      ++n;
    }
    if (n != 1000) o.fail("corpus has " + std::to_string(n) + " rows");
    if (o.ok) o.detail = "3000/3000";
  });

  criterion("canonical form invariant under 100 relabellings of 200 corpus molecules", [](Outcome &o) {
    std::mt19937_64 rng(200100);
    const auto &rows = testing::corpus();
    int failures_seen = 0;
    for (std::size_t i = 0; i < 200; ++i) {
      Molecule m = parse_smiles(rows[i * rows.size() / 200].smiles);
      const CanonicalForm ref = canonical_form(m);
      for (int k = 0; k < 100; ++k)
        if (!(canonical_form(testing::scramble(m, rng)) == ref)) ++failures_seen;
    }
    if (failures_seen) o.fail(std::to_string(failures_seen) + " of 20000 permutations changed the form");
  });

  criterion("same_molecule agrees with exhaustive isomorphism up to 7 heavy atoms", [](Outcome &o) {
    auto mols = oracle::small_molecules(240, 7, 7007);
    for (const char *smi : {"CCCCCCC", "CC(C)CCCC", "CCC(C)CCC", "CC(C)(C)CCC", "CC(C)C(C)CC", "CCC(CC)CC", "c1ccccc1C",
                            "c1ccncc1C", "Cc1ccncc1", "OCC(=O)N", "NCC(=O)O", "C1CC1C1CC1", "C1CCC2CC2C1", "[NH4+].[Cl-]",
                            "C[N+](C)(C)C", "OC1=CC=CC=C1", "Oc1ccccc1"})
      mols.push_back(parse_smiles(smi));
    std::vector<std::string> brute;
    for (const Molecule &m : mols) brute.push_back(oracle::brute_canonical(m));
    std::size_t pairs = 0, iso = 0, disagree = 0;
    for (std::size_t i = 0; i < mols.size(); ++i)
      for (std::size_t j = i + 1; j < mols.size(); ++j) {
        const bool b = brute[i] == brute[j];
        iso += b;
        ++pairs;
        if (same_molecule(mols[i], mols[j]) != b) ++disagree;
      }
    if (disagree) o.fail(std::to_string(disagree) + " disagreements");
    if (iso < 100) o.fail("only " + std::to_string(iso) + " isomorphic pairs");
    if (o.ok) o.detail = std::to_string(pairs) + " pairs, " + std::to_string(iso) + " isomorphic";
  });

  criterion("cyclomatic identity on 10,000 random graphs and Floyd-Warshall distances", [](Outcome &o) {
    std::mt19937_64 rng(10000);
    for (int t = 0; t < 10000; ++t) {
      auto g = oracle::random_graph(rng);
      const int n = static_cast<int>(g.mol.atom_count());
      const int comps = oracle::union_find_components(n, g.edges);
      if (ring_count(g.mol) != static_cast<int>(g.edges.size()) - n + comps) o.fail("graph " + std::to_string(t));
    }
    int mols = 0;
    for (const auto &row : testing::corpus()) {
      if (row.heavy_atoms > 12) continue;
      Molecule m = parse_smiles(row.smiles);
      auto d = oracle::floyd_warshall(m);
      for (std::size_t a = 0; a < m.atom_count(); ++a)
        for (std::size_t b = 0; b < m.atom_count(); ++b) {
          if (d[a][b] < 0) continue;
          if (shortest_path_bonds(m, static_cast<int>(a), static_cast<int>(b)) != d[a][b]) o.fail(row.id);
        }
      ++mols;
    }
    if (mols == 0) o.fail("no corpus molecules at or under 12 heavy atoms");
    if (o.ok) o.detail = std::to_string(mols) + " corpus molecules";
  });

  criterion("every enumerated constraint witness passes its own checks", [](Outcome &o) {
    Config cfg = Config::load(std::string(MOLJSON_CONFIG_DIR) + "/table1.toml");
    std::vector<ConstraintSet> all;
    for (Topology t : constraint_subsets()) {
      const std::string sec = "constrained." + std::string(to_string(t)) + ".";
      SubsetLimits lim = default_limits(t);
      lim.path_min = cfg.get(sec + "path_min", lim.path_min);
      lim.path_max = cfg.get(sec + "path_max", lim.path_max);
      lim.ring_min = cfg.get(sec + "ring_min", lim.ring_min);
      lim.ring_max = cfg.get(sec + "ring_max", lim.ring_max);
      lim.max_heavy = cfg.get(sec + "max_heavy", lim.max_heavy);
      lim.linker_max = cfg.get(sec + "linker_max", lim.linker_max);
      for (ConstraintSet &s : enumerate_constraint_sets(t, lim)) {
        auto v = check_constraints(s.witness, s);
        if (!v.empty()) o.fail(s.key() + " violates " + v.front().name);
        all.push_back(std::move(s));
      }
    }
    bool tuple_seen = false;
    for (const ConstraintSet &s : all)
      if (s.subset == Topology::Spiro && s.path_fcl == 5 && s.path_clbr == 5 && s.path_fbr == 6 &&
          s.ring_sizes == std::vector<int>{5, 6})
        tuple_seen = check_constraints(s.witness, s).empty();
    if (!tuple_seen) o.fail("spiro tuple (5,6,5) with rings {5,6} missing or rejected");
    if (o.ok) o.detail = std::to_string(all.size()) + " sets";
  });

  criterion("task count arithmetic", [](Outcome &o) {
    auto records = filter_corpus(oracle::full_grid(5, 0), false);
    auto sample = stratified_sample(records, SampleParams{});
    auto sources = sources_from_sample(sample);
    const std::vector<Format> three = {Format::Smiles, Format::Iupac, Format::MolJson};
    const std::vector<Format> six = {Format::Smiles, Format::Iupac, Format::MolJson,
                                     Format::Selfies, Format::Inchi, Format::MolV2000};
    if (sample.size() != 420) o.fail("sample " + std::to_string(sample.size()));
    if (gen_translation_tasks(sources, three).size() != 2520) o.fail("3 formats");
    if (gen_translation_tasks(sources, six).size() != 12600) o.fail("6 formats");
    std::vector<ConstraintSet> all;
    for (Topology t : constraint_subsets()) {
      auto sets = enumerate_constraint_sets(t);
      all.insert(all.end(), sets.begin(), sets.end());
    }
    ConstraintSampling cs;
    cs.seed = 20251015;
    auto sets = sample_constraint_sets(all, cs);
    std::map<std::string, int> per_subset, per_stratum;
    for (const ConstraintSet &s : sets) {
      ++per_subset[std::string(to_string(s.subset))];
      ++per_stratum[std::string(to_string(s.subset)) + "/" + s.stratum()];
    }
    for (const auto &[k, n] : per_subset)
      if (n > cs.per_subset_total) o.fail(k + " has " + std::to_string(n));
    for (const auto &[k, n] : per_stratum)
      if (n > cs.per_stratum_cap) o.fail(k + " has " + std::to_string(n));
    if (gen_constrained_tasks(sets, three).size() != sets.size() * 3) o.fail("constrained tasks");
    if (o.ok) o.detail = std::to_string(sets.size()) + " sets";
  });

  criterion("Wilson interval edges and high-precision agreement", [](Outcome &o) {
    if (wilson_interval(0, 100).low != 0.0) o.fail("k=0 low");
    if (wilson_interval(100, 100).high != 1.0) o.fail("k=n high");
    auto w = wilson_interval(50, 100, 1.96);
    auto [lo, hi] = oracle::wilson(50, 100, oracle::Big("1.96"));
    if (std::abs(w.low - lo.convert_to<double>()) > 1e-9 || std::abs(w.high - hi.convert_to<double>()) > 1e-9)
      o.fail("(50,100) differs from the oracle");
  });

  criterion("rescue parser on 500 corrupted and all clean MOL blocks", [](Outcome &o) {
    std::mt19937_64 rng(500);
    const auto &rows = testing::corpus();
    int recovered = 0, strict_rejects = 0;
    for (int i = 0; i < 500; ++i) {
      Molecule m = parse_smiles(rows[static_cast<std::size_t>(i) * 2].smiles);
      const std::string damaged = corrupt(write_molv2000(m), i, rng);
      try {
        if (!same_molecule(parse_molv2000(damaged), m)) ++strict_rejects;
      } catch (const Error &) {
        ++strict_rejects;
      }
      try {
        if (same_molecule(rescue_parse(damaged), m)) ++recovered;
      } catch (const Error &) {
      }
    }
    for (const auto &row : rows) {
      std::string block = write_molv2000(parse_smiles(row.smiles));
      if (!same_molecule(rescue_parse(block), parse_molv2000(block))) o.fail(row.id + " clean block");
    }
    if (recovered < 475) o.fail(std::to_string(recovered) + "/500 recovered");
    if (o.ok)
      o.detail = std::to_string(recovered) + "/500 recovered, strict parser lost " + std::to_string(strict_rejects);
  });

  criterion("staging fixtures land in their intended stage", [](Outcome &o) {
    int n = 0;
    std::set<std::string> stages;
    for (const Json &j : testing::read_jsonl(testing::data_path("staging_fixtures.jsonl"))) {
      Format f = *format_from_string(j["output_format"].get<std::string>());
      EvalRecord r = grade_translation(j["response"].get<std::string>(), f,
                                       canonical_form(parse_smiles(j["truth_smiles"].get<std::string>())));
      if (r.label() != j["expected"]) o.fail(j["name"].get<std::string>() + " graded " + r.label());
      stages.insert(j["expected"].get<std::string>());
      ++n;
    }
    if (stages.size() != 5) o.fail("fixtures cover " + std::to_string(stages.size()) + " stages");
    if (o.ok) o.detail = std::to_string(n) + " fixtures";
  });

  criterion("offline replay gives byte-identical grades and report", [](Outcome &o) {
    fs::path dir = fs::temp_directory_path() / ("moljson-acceptance-" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    PipelineOutput a = offline_pipeline(dir, 1);
    PipelineOutput b = offline_pipeline(dir, 4);
    fs::remove_all(dir);
    if (a.grades != b.grades) o.fail("grades differ");
    if (a.report != b.report) o.fail("report differs");
    if (a.grades.empty()) o.fail("nothing graded");
  });

  return failures;
}
