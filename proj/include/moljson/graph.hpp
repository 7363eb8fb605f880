#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <queue>
#include <string_view>
#include <vector>

#include "moljson/molecule.hpp"

namespace moljson {

// Graph analyses. Zero-order bonds are ignored throughout.

inline bool is_connecting(const Bond &b) { return b.order != BondOrder::Zero; }

/// Fragment id per atom, numbered in order of first appearance.
inline std::vector<int> fragment_ids(const Molecule &mol) {
  const int n = static_cast<int>(mol.atom_count());
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const Bond &b : mol.bonds()) {
    if (!is_connecting(b)) continue;
    int ra = find(b.a), rb = find(b.b);
    if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
  }
  std::vector<int> ids(static_cast<std::size_t>(n), -1);
  std::vector<int> root_id(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    int r = find(i);
    if (root_id[static_cast<std::size_t>(r)] < 0) root_id[static_cast<std::size_t>(r)] = next++;
    ids[static_cast<std::size_t>(i)] = root_id[static_cast<std::size_t>(r)];
  }
  return ids;
}

inline int fragment_count(const Molecule &mol) {
  auto ids = fragment_ids(mol);
  return ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;
}

inline int connecting_bond_count(const Molecule &mol) {
  return static_cast<int>(std::count_if(mol.bonds().begin(), mol.bonds().end(),
                                        is_connecting));
}

/// Cyclomatic number: bonds - atoms + components.
inline int ring_count(const Molecule &mol) {
  return connecting_bond_count(mol) - static_cast<int>(mol.atom_count()) +
         fragment_count(mol);
}

/// Halogen (F, Cl, Br, I) atom indices in order.
inline std::vector<int> halogen_atoms(const Molecule &mol) {
  std::vector<int> out;
  for (std::size_t i = 0; i < mol.atom_count(); ++i)
    if (is_halogen(mol.atom(static_cast<int>(i)).element))
      out.push_back(static_cast<int>(i));
  return out;
}

/// BFS bond distances from `source`; -1 where unreachable.
inline std::vector<int> bond_distances(const Molecule &mol, int source) {
  std::vector<int> dist(mol.atom_count(), -1);
  std::queue<int> q;
  dist[static_cast<std::size_t>(source)] = 0;
  q.push(source);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (const Neighbor &nb : mol.neighbors(u)) {
      if (!is_connecting(mol.bond(nb.bond))) continue;
      if (dist[static_cast<std::size_t>(nb.atom)] >= 0) continue;
      dist[static_cast<std::size_t>(nb.atom)] = dist[static_cast<std::size_t>(u)] + 1;
      q.push(nb.atom);
    }
  }
  return dist;
}

/// Number of bonds on the shortest path between two atoms.
inline int shortest_path_bonds(const Molecule &mol, int a, int b) {
  const int n = static_cast<int>(mol.atom_count());
  if (a < 0 || a >= n || b < 0 || b >= n)
    throw Error(ErrorKind::BadAtomIndex, "atom index out of range");
  int d = bond_distances(mol, a)[static_cast<std::size_t>(b)];
  if (d < 0)
    throw Error(ErrorKind::Unreachable, "atoms " + std::to_string(a) + " and " +
                                            std::to_string(b) +
                                            " are in different fragments");
  return d;
}

/// A ring as an ordered cycle of atom indices.
using Ring = std::vector<int>;

namespace detail {

class EdgeBits {
 public:
  explicit EdgeBits(std::size_t n) : words_((n + 63) / 64, 0) {}
  void flip(std::size_t i) { words_[i / 64] ^= (std::uint64_t{1} << (i % 64)); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  bool none() const {
    return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
  }
  void xor_with(const EdgeBits &o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
  }
  int lowest() const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i]) return static_cast<int>(i * 64 + static_cast<std::size_t>(__builtin_ctzll(words_[i])));
    return -1;
  }
  friend bool operator==(const EdgeBits &, const EdgeBits &) = default;
  friend auto operator<=>(const EdgeBits &, const EdgeBits &) = default;

 private:
  std::vector<std::uint64_t> words_;
};

struct CandidateCycle {
  Ring atoms;
  EdgeBits edges;
};

}  // namespace detail

/// Smallest set of smallest rings, via Horton candidates reduced to an
/// independent set over GF(2). Rings are sorted by size.
inline std::vector<Ring> sssr_rings(const Molecule &mol) {
  const int target = ring_count(mol);
  if (target <= 0) return {};
  const int n = static_cast<int>(mol.atom_count());
  const std::size_t m = mol.bond_count();

  std::vector<detail::CandidateCycle> candidates;
  for (int v = 0; v < n; ++v) {
    // BFS tree rooted at v.
    std::vector<int> dist(static_cast<std::size_t>(n), -1), parent(static_cast<std::size_t>(n), -1),
        parent_bond(static_cast<std::size_t>(n), -1);
    std::queue<int> q;
    dist[static_cast<std::size_t>(v)] = 0;
    q.push(v);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (const Neighbor &nb : mol.neighbors(u)) {
        if (!is_connecting(mol.bond(nb.bond)) || dist[static_cast<std::size_t>(nb.atom)] >= 0) continue;
        dist[static_cast<std::size_t>(nb.atom)] = dist[static_cast<std::size_t>(u)] + 1;
        parent[static_cast<std::size_t>(nb.atom)] = u;
        parent_bond[static_cast<std::size_t>(nb.atom)] = nb.bond;
        q.push(nb.atom);
      }
    }
    auto path_to_root = [&](int x) {
      std::vector<int> p;
      for (int c = x; c != -1; c = parent[static_cast<std::size_t>(c)]) p.push_back(c);
      return p;  // x ... v
    };
    for (std::size_t e = 0; e < m; ++e) {
      const Bond &b = mol.bond(static_cast<int>(e));
      if (!is_connecting(b)) continue;
      int x = b.a, y = b.b;
      if (dist[static_cast<std::size_t>(x)] < 0 || dist[static_cast<std::size_t>(y)] < 0) continue;
      if (parent_bond[static_cast<std::size_t>(x)] == static_cast<int>(e) ||
          parent_bond[static_cast<std::size_t>(y)] == static_cast<int>(e))
        continue;
      std::vector<int> px = path_to_root(x), py = path_to_root(y);
      // Paths must only meet at the root.
      std::vector<int> sx(px.begin(), px.end() - 1), sy(py.begin(), py.end() - 1);
      std::sort(sx.begin(), sx.end());
      std::sort(sy.begin(), sy.end());
      std::vector<int> common;
      std::set_intersection(sx.begin(), sx.end(), sy.begin(), sy.end(), std::back_inserter(common));
      if (!common.empty()) continue;
      detail::CandidateCycle c{{}, detail::EdgeBits(m)};
      // v ... x, then y ... (excluding v)
      for (auto it = px.rbegin(); it != px.rend(); ++it) c.atoms.push_back(*it);
      for (std::size_t i = 0; i + 1 < py.size(); ++i) c.atoms.push_back(py[i]);
      const std::size_t len = c.atoms.size();
      if (len < 3) continue;
      for (std::size_t i = 0; i < len; ++i) {
        int bi = mol.bond_between(c.atoms[i], c.atoms[(i + 1) % len]);
        c.edges.flip(static_cast<std::size_t>(bi));
      }
      candidates.push_back(std::move(c));
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto &l, const auto &r) {
    if (l.atoms.size() != r.atoms.size()) return l.atoms.size() < r.atoms.size();
    return l.edges < r.edges;
  });

  std::vector<Ring> rings;
  std::vector<detail::EdgeBits> basis;  // reduced, keyed by lowest bit
  std::vector<int> pivots;
  for (auto &c : candidates) {
    if (static_cast<int>(rings.size()) == target) break;
    detail::EdgeBits r = c.edges;
    bool changed = true;
    while (changed && !r.none()) {
      changed = false;
      int low = r.lowest();
      for (std::size_t i = 0; i < pivots.size(); ++i) {
        if (pivots[i] == low) {
          r.xor_with(basis[i]);
          changed = true;
          break;
        }
      }
    }
    if (r.none()) continue;
    basis.push_back(r);
    pivots.push_back(r.lowest());
    rings.push_back(c.atoms);
  }
  return rings;
}

/// Every cycle that is not a sum of strictly shorter cycles. Unlike the
/// SSSR this set does not depend on atom order. Falls back to the SSSR when
/// the cycle space is too large to enumerate.
inline std::vector<Ring> relevant_rings(const Molecule &mol) {
  std::vector<Ring> sssr = sssr_rings(mol);
  const std::size_t r = sssr.size();
  if (r < 2 || r > 12) return sssr;
  const std::size_t m = mol.bond_count();
  std::vector<detail::EdgeBits> basis;
  for (const Ring &ring : sssr) {
    detail::EdgeBits e(m);
    for (std::size_t i = 0; i < ring.size(); ++i)
      e.flip(static_cast<std::size_t>(mol.bond_between(ring[i], ring[(i + 1) % ring.size()])));
    basis.push_back(e);
  }

  std::vector<detail::CandidateCycle> cycles;
  for (unsigned mask = 1; mask < (1u << r); ++mask) {
    detail::EdgeBits e(m);
    for (std::size_t k = 0; k < r; ++k)
      if (mask & (1u << k)) e.xor_with(basis[k]);
    std::vector<int> degree(mol.atom_count(), 0);
    int start = -1, edges = 0;
    for (std::size_t b = 0; b < m; ++b)
      if (e.test(b)) {
        ++degree[static_cast<std::size_t>(mol.bond(static_cast<int>(b)).a)];
        ++degree[static_cast<std::size_t>(mol.bond(static_cast<int>(b)).b)];
        if (start < 0) start = mol.bond(static_cast<int>(b)).a;
        ++edges;
      }
    if (std::any_of(degree.begin(), degree.end(), [](int d) { return d != 0 && d != 2; })) continue;
    Ring ring{start};
    int prev = -1, cur = start;
    for (;;) {
      int next = -1;
      for (const Neighbor &nb : mol.neighbors(cur))
        if (e.test(static_cast<std::size_t>(nb.bond)) && nb.atom != prev) {
          next = nb.atom;
          break;
        }
      if (next == start || next < 0) break;
      ring.push_back(next);
      prev = cur;
      cur = next;
    }
    if (static_cast<int>(ring.size()) != edges) continue;  // several disjoint cycles
    cycles.push_back({std::move(ring), std::move(e)});
  }
  std::sort(cycles.begin(), cycles.end(), [](const auto &l, const auto &rr) {
    if (l.atoms.size() != rr.atoms.size()) return l.atoms.size() < rr.atoms.size();
    return l.edges < rr.edges;
  });

  std::vector<Ring> out;
  std::vector<detail::EdgeBits> reduced;
  std::vector<int> pivots;
  auto reduce = [&](detail::EdgeBits v) {
    bool changed = true;
    while (changed && !v.none()) {
      changed = false;
      for (std::size_t i = 0; i < pivots.size(); ++i)
        if (v.test(static_cast<std::size_t>(pivots[i]))) {
          v.xor_with(reduced[i]);
          changed = true;
        }
    }
    return v;
  };
  for (std::size_t i = 0; i < cycles.size();) {
    std::size_t j = i;
    while (j < cycles.size() && cycles[j].atoms.size() == cycles[i].atoms.size()) ++j;
    for (std::size_t k = i; k < j; ++k)
      if (!reduce(cycles[k].edges).none()) out.push_back(cycles[k].atoms);
    for (std::size_t k = i; k < j; ++k) {
      detail::EdgeBits v = reduce(cycles[k].edges);
      if (v.none()) continue;
      pivots.push_back(v.lowest());
      reduced.push_back(std::move(v));
    }
    i = j;
  }
  return out;
}

inline std::vector<int> ring_sizes(const std::vector<Ring> &rings) {
  std::vector<int> out;
  for (const Ring &r : rings) out.push_back(static_cast<int>(r.size()));
  std::sort(out.begin(), out.end());
  return out;
}

/// True for atoms lying on at least one cycle.
inline std::vector<bool> ring_atom_flags(const Molecule &mol, const std::vector<Ring> &rings) {
  std::vector<bool> flags(mol.atom_count(), false);
  for (const Ring &r : rings)
    for (int a : r) flags[static_cast<std::size_t>(a)] = true;
  return flags;
}

inline std::vector<bool> ring_atom_flags(const Molecule &mol) {
  return ring_atom_flags(mol, sssr_rings(mol));
}

enum class Topology { Acyclic, Monocyclic, Separate, Fused, Spiro, Other };

inline std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::Acyclic: return "acyclic";
    case Topology::Monocyclic: return "monocyclic";
    case Topology::Separate: return "separate";
    case Topology::Fused: return "fused";
    case Topology::Spiro: return "spiro";
    case Topology::Other: return "other";
  }
  return "other";
}

inline std::optional<Topology> topology_from_string(std::string_view s) {
  for (Topology t : {Topology::Acyclic, Topology::Monocyclic, Topology::Separate,
                     Topology::Fused, Topology::Spiro, Topology::Other})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

namespace detail {

inline int shared_atoms(const Ring &a, const Ring &b) {
  int c = 0;
  for (int x : a)
    if (std::find(b.begin(), b.end(), x) != b.end()) ++c;
  return c;
}

inline std::vector<std::pair<int, int>> ring_edges(const Ring &r) {
  std::vector<std::pair<int, int>> e;
  for (std::size_t i = 0; i < r.size(); ++i) {
    int u = r[i], v = r[(i + 1) % r.size()];
    e.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(e.begin(), e.end());
  return e;
}

inline int shared_edges(const Ring &a, const Ring &b) {
  auto ea = ring_edges(a), eb = ring_edges(b);
  std::vector<std::pair<int, int>> common;
  std::set_intersection(ea.begin(), ea.end(), eb.begin(), eb.end(), std::back_inserter(common));
  return static_cast<int>(common.size());
}

}  // namespace detail

inline Topology classify_topology(const std::vector<Ring> &rings) {
  switch (rings.size()) {
    case 0: return Topology::Acyclic;
    case 1: return Topology::Monocyclic;
    case 2: {
      if (detail::shared_edges(rings[0], rings[1]) >= 1) return Topology::Fused;
      int atoms = detail::shared_atoms(rings[0], rings[1]);
      if (atoms == 0) return Topology::Separate;
      if (atoms == 1) return Topology::Spiro;
      return Topology::Other;
    }
    default: return Topology::Other;
  }
}

inline Topology classify_topology(const Molecule &mol) {
  return classify_topology(sssr_rings(mol));
}

/// Any two rings sharing a bond.
inline bool has_fused_ring_system(const std::vector<Ring> &rings) {
  for (std::size_t i = 0; i < rings.size(); ++i)
    for (std::size_t j = i + 1; j < rings.size(); ++j)
      if (detail::shared_edges(rings[i], rings[j]) > 0) return true;
  return false;
}

/// Any two rings sharing at least one atom (fused or spiro junction).
inline bool has_fused_or_spiro(const std::vector<Ring> &rings) {
  for (std::size_t i = 0; i < rings.size(); ++i)
    for (std::size_t j = i + 1; j < rings.size(); ++j)
      if (detail::shared_atoms(rings[i], rings[j]) > 0) return true;
  return false;
}

}  // namespace moljson
