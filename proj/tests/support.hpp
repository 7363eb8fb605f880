#pragma once

#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "moljson/canon.hpp"
#include "moljson/moljson.hpp"

namespace testing {

inline std::string data_path(const std::string &name) { return std::string(MOLJSON_TEST_DATA) + "/" + name; }

inline std::string read_file(const std::string &path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture(const std::string &name) { return read_file(data_path(name)); }

inline std::vector<moljson::Json> read_jsonl(const std::string &path) {
  std::vector<moljson::Json> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(moljson::Json::parse(line));
  return out;
}

struct CorpusRow {
  std::string id;
  std::string smiles;
  int heavy_atoms = 0;
  int rings = 0;
  std::string formula;
};

inline const std::vector<CorpusRow> &corpus() {
  static const std::vector<CorpusRow> rows = [] {
    std::vector<CorpusRow> out;
    std::ifstream in(data_path("corpus_1000.jsonl"));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = moljson::Json::parse(line);
      out.push_back({j["id"], j["smiles"], j["heavy_atoms"], j["rings"], j["formula"]});
    }
    return out;
  }();
  return rows;
}

inline std::vector<int> random_permutation(std::size_t n, std::mt19937_64 &rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

/// Same molecule, atoms relabelled and bonds listed in random order.
inline moljson::Molecule scramble(const moljson::Molecule &mol, std::mt19937_64 &rng) {
  auto p = random_permutation(mol.atom_count(), rng);
  std::vector<moljson::Atom> atoms(mol.atom_count());
  for (std::size_t i = 0; i < mol.atom_count(); ++i) atoms[static_cast<std::size_t>(p[i])] = mol.atom(static_cast<int>(i));
  std::vector<moljson::Bond> bonds;
  for (const moljson::Bond &b : mol.bonds()) {
    int x = p[static_cast<std::size_t>(b.a)], y = p[static_cast<std::size_t>(b.b)];
    if (rng() & 1) std::swap(x, y);
    bonds.push_back({x, y, b.order});
  }
  std::shuffle(bonds.begin(), bonds.end(), rng);
  return moljson::build_molecule(std::move(atoms), std::move(bonds));
}

}  // namespace testing
