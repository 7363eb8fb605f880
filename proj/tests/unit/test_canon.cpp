#include <catch_amalgamated.hpp>

#include <set>

#include "moljson/canon.hpp"
#include "moljson/smiles.hpp"
#include "oracles/brute_iso.hpp"
#include "support.hpp"

using namespace moljson;

TEST_CASE("benzene relabellings share one form") {
  Molecule b = parse_smiles("c1ccccc1");
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) CHECK(canonical_form(testing::scramble(b, rng)) == canonical_form(b));
  auto ranks = canonical_ranks(b);
  CHECK(std::set<int>(ranks.begin(), ranks.end()).size() == 6);
}

TEST_CASE("acetic acid atoms are all distinguishable") {
  Molecule m = parse_smiles("CC(=O)O");
  auto ranks = canonical_ranks(m);
  CHECK(std::set<int>(ranks.begin(), ranks.end()).size() == 4);
  std::vector<int> p = {0, 1, 2, 3};
  const CanonicalForm ref = canonical_form(m);
  do {
    CHECK(canonical_form(permute_atoms(m, p)) == ref);
  } while (std::next_permutation(p.begin(), p.end()));
}

TEST_CASE("equivalence examples") {
  CHECK(!same_molecule(parse_smiles("CCO"), parse_smiles("COC")));
  CHECK(same_molecule(parse_smiles("CC(=O)O"), parse_moljson(testing::fixture("acetic_acid.json"))));
  CHECK(same_molecule(parse_smiles("C1=CC=CC=C1"), parse_smiles("c1ccccc1")));
  CHECK(!same_molecule(parse_smiles("CC(=O)O"), parse_smiles("COC=O")));
  CHECK(same_molecule(parse_smiles("[H]OC([H])([H])[H]"), parse_smiles("CO")));
  CHECK(!same_molecule(parse_smiles("C[NH3+]"), parse_smiles("CN")));
  CHECK(same_molecule(parse_smiles("Cc1ccccn1"), parse_smiles("CC1=NC=CC=C1")));
  CHECK(!same_molecule(parse_smiles("CC.C"), parse_smiles("CCC")));
}

TEST_CASE("canonical form survives random relabelling on corpus molecules") {
  std::mt19937_64 rng(42);
  const auto &rows = testing::corpus();
  for (std::size_t i = 0; i < rows.size(); i += 20) {
    INFO(rows[i].id);
    Molecule m = parse_smiles(rows[i].smiles);
    const CanonicalForm ref = canonical_form(m);
    for (int k = 0; k < 10; ++k) CHECK(canonical_form(testing::scramble(m, rng)) == ref);
  }
}

TEST_CASE("same_molecule agrees with exhaustive isomorphism on small molecules") {
  auto mols = oracle::small_molecules(160, 6, 2024);
  std::vector<std::string> brute;
  std::vector<CanonicalForm> forms;
  for (const Molecule &m : mols) {
    brute.push_back(oracle::brute_canonical(m));
    forms.push_back(canonical_form(m));
  }
  int equal_pairs = 0;
  for (std::size_t i = 0; i < mols.size(); ++i)
    for (std::size_t j = i + 1; j < mols.size(); ++j) {
      bool iso = brute[i] == brute[j];
      equal_pairs += iso;
      CHECK((forms[i] == forms[j]) == iso);
    }
  CHECK(equal_pairs >= 80);
}

TEST_CASE("permute_atoms by canonical ranks is a fixed point of the form") {
  Molecule m = parse_smiles("OC(=O)c1ccc(Cl)cc1");
  Molecule p = permute_atoms(m, canonical_ranks(m));
  CHECK(canonical_form(p) == canonical_form(m));
}
