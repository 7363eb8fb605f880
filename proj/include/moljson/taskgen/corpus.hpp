#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "moljson/canon.hpp"
#include "moljson/convert.hpp"
#include "moljson/graph.hpp"
#include "moljson/smiles.hpp"
#include "moljson/taskgen/random.hpp"

namespace moljson {

enum class Rejection { Stereo, SaltOrMultifragment, Isotope, Radical, InorganicElement, ChargedWhenExcluded, ParseFailure };

inline std::string_view to_string(Rejection r) {
  switch (r) {
    case Rejection::Stereo: return "stereo";
    case Rejection::SaltOrMultifragment: return "salt/multifragment";
    case Rejection::Isotope: return "isotope";
    case Rejection::Radical: return "radical";
    case Rejection::InorganicElement: return "inorganic-element";
    case Rejection::ChargedWhenExcluded: return "charged-when-excluded";
    case Rejection::ParseFailure: return "parse-failure";
  }
  return "?";
}

/// One corpus line: {"id", "smiles", optional "iupac", "selfies", "inchi"}.
struct RawRecord {
  std::string id;
  std::string smiles;
  std::map<Format, std::string> renderings;  // non-SMILES source strings
};

struct CorpusRecord {
  std::string external_id;
  std::string smiles;
  std::map<Format, std::string> renderings;
  bool accepted = false;
  std::optional<Rejection> rejection_reason;
  std::optional<Molecule> mol;
  std::string diagnostics;

  bool charged() const {
    if (!mol) return false;
    return std::any_of(mol->atoms().begin(), mol->atoms().end(),
                       [](const Atom &a) { return a.formal_charge != 0; });
  }
};

inline const std::set<int> &allowed_elements() {
  static const std::set<int> kAllowed = {element::H, element::B,  element::C, element::N,
                                         element::O, element::F,  element::Si, element::P,
                                         element::S, element::Cl, element::Br, element::I};
  return kAllowed;
}

inline RawRecord raw_record_from_json(const Json &j) {
  RawRecord r;
  r.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
  r.smiles = j.at("smiles").get<std::string>();
  for (Format f : {Format::Iupac, Format::Selfies, Format::Inchi, Format::MolJson, Format::MolV2000}) {
    std::string key(to_string(f));
    if (j.contains(key) && j[key].is_string()) r.renderings[f] = j[key].get<std::string>();
  }
  return r;
}

namespace detail {

// Element symbols written inside brackets, for records that fail to parse.
inline bool brackets_name_other_elements(const std::string &smiles, const std::set<int> &allowed) {
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    if (smiles[i] != '[') continue;
    std::size_t j = i + 1;
    while (j < smiles.size() && std::isdigit(static_cast<unsigned char>(smiles[j]))) ++j;
    if (j >= smiles.size()) break;
    std::string sym;
    if (std::isupper(static_cast<unsigned char>(smiles[j]))) {
      sym = smiles.substr(j, 1);
      if (j + 1 < smiles.size() && std::islower(static_cast<unsigned char>(smiles[j + 1])) &&
          atomic_number(smiles.substr(j, 2)))
        sym = smiles.substr(j, 2);
    } else if (smiles[j] == '*') {
      sym = "*";
    } else {
      continue;
    }
    auto z = atomic_number(sym);
    if (!z || !allowed.count(*z)) return true;
  }
  return false;
}

}  // namespace detail

/// Parses and classifies one record. The first matching reason wins, in
/// the order of the Rejection enum.
inline CorpusRecord classify_record(const RawRecord &raw, bool charged_allowed,
                                    const std::set<int> &allowed = allowed_elements()) {
  CorpusRecord rec;
  rec.external_id = raw.id;
  rec.smiles = raw.smiles;
  rec.renderings = raw.renderings;
  const std::string &s = raw.smiles;
  auto reject = [&](Rejection r, std::string why = {}) {
    rec.accepted = false;
    rec.rejection_reason = r;
    rec.diagnostics = std::move(why);
    return rec;
  };
  if (s.find_first_of("@/\\") != std::string::npos) return reject(Rejection::Stereo);
  if (s.find('.') != std::string::npos) return reject(Rejection::SaltOrMultifragment);
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    if (s[i] == '[' && std::isdigit(static_cast<unsigned char>(s[i + 1]))) return reject(Rejection::Isotope);
  Molecule mol;
  try {
    mol = parse_smiles(s);
  } catch (const Error &e) {
    std::string what = e.what();
    if (e.kind() == ErrorKind::UnsupportedFeature && what.find("radical") != std::string::npos)
      return reject(Rejection::Radical, what);
    if (detail::brackets_name_other_elements(s, allowed)) return reject(Rejection::InorganicElement, what);
    return reject(Rejection::ParseFailure, what);
  }
  if (fragment_count(mol) != 1) return reject(Rejection::SaltOrMultifragment);
  for (const Atom &a : mol.atoms())
    if (!allowed.count(a.element))
      return reject(Rejection::InorganicElement, std::string(a.symbol()));
  rec.mol = mol;
  if (!charged_allowed && rec.charged()) return reject(Rejection::ChargedWhenExcluded);
  rec.accepted = true;
  return rec;
}

inline std::vector<CorpusRecord> filter_corpus(const std::vector<RawRecord> &records, bool charged_allowed,
                                               const std::set<int> &allowed = allowed_elements()) {
  std::vector<CorpusRecord> out;
  out.reserve(records.size());
  for (const RawRecord &r : records) out.push_back(classify_record(r, charged_allowed, allowed));
  return out;
}

struct SampleParams {
  int heavy_min = 10, heavy_max = 30;
  int ring_min = 0, ring_max = 3;
  int per_stratum_neutral = 5;
  int per_stratum_charged = 0;
  std::uint64_t seed = 0;
};

struct SampledMolecule {
  const CorpusRecord *record = nullptr;
  int heavy_atoms = 0;
  int rings = 0;
  bool charged = false;
  std::string canonical;
};

/// Per (heavy atoms, rings) cell, draws up to n neutral and m charged
/// molecules without replacement. Records are sorted by id and
/// deduplicated by canonical form first, so input order never matters.
inline std::vector<SampledMolecule> stratified_sample(const std::vector<CorpusRecord> &records,
                                                      const SampleParams &p) {
  std::vector<const CorpusRecord *> pool;
  for (const CorpusRecord &r : records)
    if (r.accepted && r.mol) pool.push_back(&r);
  std::sort(pool.begin(), pool.end(),
            [](const CorpusRecord *a, const CorpusRecord *b) { return a->external_id < b->external_id; });

  std::set<std::string> seen;
  std::map<std::tuple<int, int, bool>, std::vector<SampledMolecule>> cells;
  for (const CorpusRecord *r : pool) {
    SampledMolecule m;
    m.record = r;
    m.heavy_atoms = heavy_atom_count(*r->mol);
    m.rings = ring_count(*r->mol);
    m.charged = r->charged();
    if (m.heavy_atoms < p.heavy_min || m.heavy_atoms > p.heavy_max) continue;
    if (m.rings < p.ring_min || m.rings > p.ring_max) continue;
    m.canonical = canonical_form(*r->mol).text;
    if (!seen.insert(m.canonical).second) continue;
    cells[{m.heavy_atoms, m.rings, m.charged}].push_back(std::move(m));
  }

  std::vector<SampledMolecule> out;
  for (auto &[key, members] : cells) {
    auto [heavy, rings, charged] = key;
    const int cap = charged ? p.per_stratum_charged : p.per_stratum_neutral;
    std::string label = std::to_string(heavy) + "/" + std::to_string(rings) + (charged ? "/charged" : "/neutral");
    seeded_shuffle(members, derive_seed(p.seed, label));
    for (int i = 0; i < cap && i < static_cast<int>(members.size()); ++i)
      out.push_back(members[static_cast<std::size_t>(i)]);
  }
  std::sort(out.begin(), out.end(), [](const SampledMolecule &a, const SampledMolecule &b) {
    return a.record->external_id < b.record->external_id;
  });
  return out;
}

}  // namespace moljson
