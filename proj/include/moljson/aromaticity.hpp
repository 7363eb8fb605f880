#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "moljson/graph.hpp"
#include "moljson/matching.hpp"
#include "moljson/molecule.hpp"

namespace moljson {

namespace detail {

/// Bonds lying on some cycle.
inline std::vector<bool> ring_bond_flags(const Molecule &mol, const std::vector<Ring> &rings) {
  std::vector<bool> flags(mol.bond_count(), false);
  for (const Ring &r : rings)
    for (std::size_t i = 0; i < r.size(); ++i)
      flags[static_cast<std::size_t>(mol.bond_between(r[i], r[(i + 1) % r.size()]))] = true;
  return flags;
}

/// Whether an aromatic atom still owes one double bond to its ring system.
inline bool needs_double_bond(const Molecule &mol, int i) {
  const Atom &a = mol.atom(i);
  const auto allowed = allowed_valences(a.element, a.formal_charge);
  if (allowed.empty()) return false;
  BondSums s = bond_sums(mol.bonds(), mol.neighbors(i));
  const int total = s.non_aromatic / 2 + s.aromatic_count + a.explicit_h + mol.implicit_hydrogens(i);
  auto it = std::lower_bound(allowed.begin(), allowed.end(), total);
  return it != allowed.end() && *it - total >= 1;
}

}  // namespace detail

/// Replaces every aromatic bond by a single or double bond using a perfect
/// matching over the aromatic atoms that still need a double bond.
inline Molecule kekulize(const Molecule &mol) {
  if (!mol.has_aromatic_bonds()) return mol;
  const auto rings = sssr_rings(mol);
  const auto in_ring = detail::ring_bond_flags(mol, rings);
  const int n = static_cast<int>(mol.atom_count());

  std::vector<bool> needs(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i)
    if (mol.is_aromatic_atom(i)) needs[static_cast<std::size_t>(i)] = detail::needs_double_bond(mol, i);

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (std::size_t bi = 0; bi < mol.bond_count(); ++bi) {
    const Bond &b = mol.bond(static_cast<int>(bi));
    if (b.order != BondOrder::Aromatic) continue;
    if (!in_ring[bi])
      throw Error(ErrorKind::KekulizationFailure,
                  "aromatic bond " + std::to_string(b.a) + "-" + std::to_string(b.b) +
                      " is not in a ring");
    if (needs[static_cast<std::size_t>(b.a)] && needs[static_cast<std::size_t>(b.b)]) {
      adj[static_cast<std::size_t>(b.a)].push_back(b.b);
      adj[static_cast<std::size_t>(b.b)].push_back(b.a);
    }
  }
  for (auto &v : adj) std::sort(v.begin(), v.end());
  detail::BlossomMatcher matcher(std::move(adj));
  const std::vector<int> &mate = matcher.solve();
  for (int i = 0; i < n; ++i)
    if (needs[static_cast<std::size_t>(i)] && mate[static_cast<std::size_t>(i)] < 0)
      throw Error(ErrorKind::KekulizationFailure,
                  "no alternating bond assignment reaches atom " + std::to_string(i));

  std::vector<Bond> bonds(mol.bonds().begin(), mol.bonds().end());
  for (Bond &b : bonds) {
    if (b.order != BondOrder::Aromatic) continue;
    b.order = mate[static_cast<std::size_t>(b.a)] == b.b ? BondOrder::Double : BondOrder::Single;
  }
  return detail::assemble(std::vector<Atom>(mol.atoms().begin(), mol.atoms().end()),
                          std::move(bonds));
}

namespace detail {

inline constexpr int kNotAromatic = -1;

inline bool electronegative(int z) {
  return z == element::O || z == element::N || z == element::S || z == element::Se;
}

/// Pi electrons an atom donates to the ring system described by
/// `system_bonds`, or kNotAromatic if it cannot be part of it.
inline int pi_electrons(const Molecule &mol, int i, const std::vector<bool> &system_bonds) {
  const Atom &a = mol.atom(i);
  int doubles_in = 0, doubles_out = 0, exo_to_electronegative = 0;
  for (const Neighbor &nb : mol.neighbors(i)) {
    BondOrder o = mol.bond(nb.bond).order;
    if (o == BondOrder::Triple || o == BondOrder::Aromatic) return kNotAromatic;
    if (o != BondOrder::Double) continue;
    if (system_bonds[static_cast<std::size_t>(nb.bond)]) {
      ++doubles_in;
    } else {
      ++doubles_out;
      if (electronegative(mol.atom(nb.atom).element)) ++exo_to_electronegative;
    }
  }
  if (doubles_in + doubles_out > 1) return kNotAromatic;
  const int q = a.formal_charge;
  const int connections = mol.degree(i) + mol.total_hydrogens(i);
  switch (a.element) {
    case element::C:
    case element::Si:
      if (doubles_in) return 1;
      if (doubles_out) return (exo_to_electronegative && q == 0) ? 0 : kNotAromatic;
      if (q == -1) return 2;
      if (q == 1) return 0;
      return kNotAromatic;
    case element::B:
      if (doubles_in || doubles_out) return kNotAromatic;
      return q == 0 ? 0 : kNotAromatic;
    case element::N:
    case element::P:
    case element::As:
      if (doubles_in) return (q == 0 || q == 1) ? 1 : kNotAromatic;
      if (doubles_out) return kNotAromatic;
      if (q == 0 && connections == 3) return 2;
      if (q == -1) return 2;
      return kNotAromatic;
    case element::O:
    case element::S:
    case element::Se:
      if (doubles_in) return q == 1 ? 1 : kNotAromatic;
      if (doubles_out) return kNotAromatic;
      if (q == 0 && connections == 2) return 2;
      return kNotAromatic;
    default:
      return kNotAromatic;
  }
}

inline bool huckel(int electrons) { return electrons >= 2 && (electrons - 2) % 4 == 0; }

/// Bond flags for a group of rings.
inline std::vector<bool> bonds_of(const Molecule &mol, const std::vector<Ring> &rings,
                                  const std::vector<int> &members) {
  std::vector<bool> flags(mol.bond_count(), false);
  for (int r : members) {
    const Ring &ring = rings[static_cast<std::size_t>(r)];
    for (std::size_t i = 0; i < ring.size(); ++i)
      flags[static_cast<std::size_t>(mol.bond_between(ring[i], ring[(i + 1) % ring.size()]))] = true;
  }
  return flags;
}

inline bool group_is_aromatic(const Molecule &mol, const std::vector<Ring> &rings,
                              const std::vector<int> &members) {
  const auto sys = bonds_of(mol, rings, members);
  std::set<int> atoms;
  for (int r : members)
    for (int a : rings[static_cast<std::size_t>(r)]) atoms.insert(a);
  int electrons = 0;
  for (int a : atoms) {
    int e = pi_electrons(mol, a, sys);
    if (e == kNotAromatic) return false;
    electrons += e;
  }
  return huckel(electrons);
}

/// Connected subsets of rings fused through exactly one bond, singletons
/// first. Bridged pairs never combine.
inline std::vector<std::vector<int>> ring_groups(const std::vector<Ring> &rings) {
  const int n = static_cast<int>(rings.size());
  std::vector<std::vector<bool>> fused(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (shared_edges(rings[static_cast<std::size_t>(i)], rings[static_cast<std::size_t>(j)]) == 1)
        fused[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = fused[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = true;

  // Fused systems.
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> systems;
  for (int i = 0; i < n; ++i) {
    if (comp[static_cast<std::size_t>(i)] >= 0) continue;
    std::vector<int> sys{i};
    comp[static_cast<std::size_t>(i)] = static_cast<int>(systems.size());
    for (std::size_t k = 0; k < sys.size(); ++k)
      for (int j = 0; j < n; ++j)
        if (fused[static_cast<std::size_t>(sys[k])][static_cast<std::size_t>(j)] && comp[static_cast<std::size_t>(j)] < 0) {
          comp[static_cast<std::size_t>(j)] = comp[static_cast<std::size_t>(i)];
          sys.push_back(j);
        }
    std::sort(sys.begin(), sys.end());
    systems.push_back(sys);
  }

  std::vector<std::vector<int>> groups;
  for (const auto &sys : systems) {
    const std::size_t k = sys.size();
    if (k > 8) {
      // Large systems: singletons and fused pairs only.
      for (int r : sys) groups.push_back({r});
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b)
          if (fused[static_cast<std::size_t>(sys[a])][static_cast<std::size_t>(sys[b])]) groups.push_back({sys[a], sys[b]});
      continue;
    }
    std::vector<std::vector<int>> subsets;
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
      std::vector<int> members;
      for (std::size_t b = 0; b < k; ++b)
        if (mask & (1u << b)) members.push_back(sys[b]);
      // connected?
      std::vector<int> seen{members[0]};
      for (std::size_t s = 0; s < seen.size(); ++s)
        for (int m : members)
          if (std::find(seen.begin(), seen.end(), m) == seen.end() &&
              fused[static_cast<std::size_t>(seen[s])][static_cast<std::size_t>(m)])
            seen.push_back(m);
      if (seen.size() == members.size()) subsets.push_back(std::move(members));
    }
    std::stable_sort(subsets.begin(), subsets.end(),
                     [](const auto &l, const auto &r) { return l.size() < r.size(); });
    for (auto &s : subsets) groups.push_back(std::move(s));
  }
  return groups;
}

}  // namespace detail

/// Perceives aromatic rings (Hückel 4n+2 over a fixed contribution table,
/// including fused envelopes) and rewrites their bonds to order 1.5.
/// Hydrogen totals are preserved by pinning them where the aromatic
/// valence rule would otherwise drop them.
inline Molecule aromatize(const Molecule &mol) {
  Molecule kek;
  try {
    kek = kekulize(mol);
  } catch (const Error &) {
    return mol;
  }
  const auto rings = relevant_rings(kek);
  if (rings.empty()) return kek;

  const auto groups = detail::ring_groups(rings);
  std::vector<bool> ring_allowed(rings.size(), true);

  for (int attempt = 0; attempt <= static_cast<int>(rings.size()); ++attempt) {
    std::vector<bool> aromatic_bond(kek.bond_count(), false);
    for (const auto &g : groups) {
      bool allowed = std::all_of(g.begin(), g.end(), [&](int r) { return ring_allowed[static_cast<std::size_t>(r)]; });
      if (!allowed || !detail::group_is_aromatic(kek, rings, g)) continue;
      // Interior bonds of a fused group are left to the groups they bound.
      std::vector<int> uses(kek.bond_count(), 0);
      for (int r : g) {
        const Ring &ring = rings[static_cast<std::size_t>(r)];
        for (std::size_t i = 0; i < ring.size(); ++i)
          ++uses[static_cast<std::size_t>(kek.bond_between(ring[i], ring[(i + 1) % ring.size()]))];
      }
      for (std::size_t b = 0; b < uses.size(); ++b)
        if (uses[b] == 1) aromatic_bond[b] = true;
    }
    std::vector<Bond> bonds(kek.bonds().begin(), kek.bonds().end());
    for (std::size_t b = 0; b < bonds.size(); ++b)
      if (aromatic_bond[b]) bonds[b].order = BondOrder::Aromatic;
    std::vector<Atom> atoms(kek.atoms().begin(), kek.atoms().end());
    Molecule trial = detail::assemble(atoms, bonds);

    int failed_atom = -1;
    for (std::size_t i = 0; i < atoms.size() && failed_atom < 0; ++i) {
      const int ii = static_cast<int>(i);
      const int want = kek.total_hydrogens(ii);
      if (trial.total_hydrogens(ii) == want) continue;
      // Pin all hydrogens on the atom and re-check.
      Atom pinned = atoms[i];
      pinned.explicit_h = want;
      auto st = detail::valence_state(pinned, detail::bond_sums(trial.bonds(), trial.neighbors(ii)));
      if (st.implicit_h == 0 && !st.overflow)
        atoms[i] = pinned;
      else
        failed_atom = ii;
    }
    if (failed_atom < 0) return detail::assemble(std::move(atoms), std::move(bonds));
    for (std::size_t r = 0; r < rings.size(); ++r)
      if (std::find(rings[r].begin(), rings[r].end(), failed_atom) != rings[r].end())
        ring_allowed[r] = false;
  }
  return kek;
}

}  // namespace moljson
