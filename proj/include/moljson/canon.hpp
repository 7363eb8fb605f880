#pragma once

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "moljson/aromaticity.hpp"
#include "moljson/molecule.hpp"

namespace moljson {

/// Relabeling-invariant serialization of an aromaticity-normalized graph
/// with hydrogens folded into per-atom counts.
struct CanonicalForm {
  std::string text;
  friend bool operator==(const CanonicalForm &, const CanonicalForm &) = default;
};

/// Removes neutral hydrogen atoms bonded by one single bond to a non-hydrogen
/// atom and pins them on that atom instead.
inline Molecule fold_hydrogens(const Molecule &mol) {
  const int n = static_cast<int>(mol.atom_count());
  std::vector<bool> drop(static_cast<std::size_t>(n), false);
  std::vector<Atom> atoms(mol.atoms().begin(), mol.atoms().end());
  for (int i = 0; i < n; ++i) {
    const Atom &a = mol.atom(i);
    if (a.element != element::H || a.formal_charge != 0 || a.explicit_h != 0) continue;
    auto nbrs = mol.neighbors(i);
    if (nbrs.size() != 1 || mol.bond(nbrs[0].bond).order != BondOrder::Single) continue;
    int heavy = nbrs[0].atom;
    if (mol.atom(heavy).element == element::H) continue;
    drop[static_cast<std::size_t>(i)] = true;
    ++atoms[static_cast<std::size_t>(heavy)].explicit_h;
  }
  if (std::none_of(drop.begin(), drop.end(), [](bool b) { return b; })) return mol;
  std::vector<int> remap(static_cast<std::size_t>(n), -1);
  std::vector<Atom> kept;
  for (int i = 0; i < n; ++i) {
    if (drop[static_cast<std::size_t>(i)]) continue;
    remap[static_cast<std::size_t>(i)] = static_cast<int>(kept.size());
    kept.push_back(atoms[static_cast<std::size_t>(i)]);
  }
  // Pinned hydrogens must not change the implicit count of the heavy atom.
  std::vector<Bond> bonds;
  for (const Bond &b : mol.bonds()) {
    if (drop[static_cast<std::size_t>(b.a)] || drop[static_cast<std::size_t>(b.b)]) continue;
    bonds.push_back({remap[static_cast<std::size_t>(b.a)], remap[static_cast<std::size_t>(b.b)], b.order});
  }
  Molecule folded = detail::assemble(std::move(kept), std::move(bonds));
  return folded;
}

namespace detail {

struct LabelGraph {
  int n = 0;
  std::vector<std::string> atom_label;                   // per atom
  std::vector<std::vector<std::pair<int, int>>> adj;     // (neighbor, bond label)
};

inline LabelGraph label_graph(const Molecule &mol) {
  LabelGraph g;
  g.n = static_cast<int>(mol.atom_count());
  g.atom_label.resize(static_cast<std::size_t>(g.n));
  g.adj.resize(static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i) {
    const Atom &a = mol.atom(i);
    std::string s(a.symbol());
    s += ',';
    s += std::to_string(a.formal_charge);
    s += ",H";
    s += std::to_string(mol.total_hydrogens(i));
    if (mol.is_aromatic_atom(i)) s += ",a";
    g.atom_label[static_cast<std::size_t>(i)] = std::move(s);
    for (const Neighbor &nb : mol.neighbors(i))
      g.adj[static_cast<std::size_t>(i)].emplace_back(nb.atom, half_units(mol.bond(nb.bond).order));
  }
  return g;
}

class Canonicalizer {
 public:
  explicit Canonicalizer(const LabelGraph &g) : g_(g) {}

  /// Rank per atom of the lexicographically smallest serialization.
  std::vector<int> run() {
    const std::size_t n = static_cast<std::size_t>(g_.n);
    if (n == 0) return {};
    // Seed: atom label plus degree.
    std::vector<std::pair<std::string, int>> seed(n);
    for (std::size_t i = 0; i < n; ++i)
      seed[i] = {g_.atom_label[i], static_cast<int>(g_.adj[i].size())};
    auto sorted = seed;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> colors(n);
    for (std::size_t i = 0; i < n; ++i)
      colors[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), seed[i]) - sorted.begin());
    search(std::move(colors));
    return best_rank_;
  }

  const std::string &best_text() const { return best_text_; }

 private:
  static int count_distinct(const std::vector<int> &c) {
    std::vector<int> s = c;
    std::sort(s.begin(), s.end());
    return static_cast<int>(std::unique(s.begin(), s.end()) - s.begin());
  }

  void refine(std::vector<int> &colors) const {
    const std::size_t n = colors.size();
    int classes = count_distinct(colors);
    for (;;) {
      using Sig = std::pair<int, std::vector<std::pair<int, int>>>;
      std::vector<Sig> sig(n);
      for (std::size_t i = 0; i < n; ++i) {
        sig[i].first = colors[i];
        for (auto [nb, lab] : g_.adj[i]) sig[i].second.emplace_back(lab, colors[static_cast<std::size_t>(nb)]);
        std::sort(sig[i].second.begin(), sig[i].second.end());
      }
      std::vector<Sig> uniq = sig;
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      for (std::size_t i = 0; i < n; ++i)
        colors[i] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), sig[i]) - uniq.begin());
      int now = static_cast<int>(uniq.size());
      if (now == classes) return;
      classes = now;
    }
  }

  bool twins(int u, int v) const {
    auto strip = [&](int x, int other) {
      std::vector<std::pair<int, int>> s;
      for (auto p : g_.adj[static_cast<std::size_t>(x)])
        if (p.first != other) s.push_back(p);
      std::sort(s.begin(), s.end());
      return s;
    };
    return strip(u, v) == strip(v, u);
  }

  std::string serialize(const std::vector<int> &rank) const {
    const std::size_t n = rank.size();
    std::vector<int> at(n);
    for (std::size_t i = 0; i < n; ++i) at[static_cast<std::size_t>(rank[i])] = static_cast<int>(i);
    std::string out;
    out += std::to_string(n);
    out += ';';
    for (std::size_t p = 0; p < n; ++p) {
      out += g_.atom_label[static_cast<std::size_t>(at[p])];
      out += '|';
    }
    std::vector<std::tuple<int, int, int>> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (auto [nb, lab] : g_.adj[i]) {
        int a = rank[i], b = rank[static_cast<std::size_t>(nb)];
        if (a < b) edges.emplace_back(a, b, lab);
      }
    std::sort(edges.begin(), edges.end());
    for (auto [a, b, lab] : edges) {
      out += std::to_string(a);
      out += '-';
      out += std::to_string(b);
      out += ':';
      out += std::to_string(lab);
      out += ';';
    }
    return out;
  }

  void search(std::vector<int> colors) {
    refine(colors);
    const std::size_t n = colors.size();
    if (count_distinct(colors) == static_cast<int>(n)) {
      std::string text = serialize(colors);
      if (best_rank_.empty() || text < best_text_) {
        best_text_ = std::move(text);
        best_rank_ = colors;
      }
      return;
    }
    // Lowest colour shared by more than one atom.
    std::vector<int> counts(n, 0);
    for (int c : colors) ++counts[static_cast<std::size_t>(c)];
    int target = 0;
    while (counts[static_cast<std::size_t>(target)] < 2) ++target;
    std::vector<int> cell;
    for (std::size_t i = 0; i < n; ++i)
      if (colors[i] == target) cell.push_back(static_cast<int>(i));

    std::vector<int> reps;
    for (int v : cell) {
      bool covered = std::any_of(reps.begin(), reps.end(), [&](int r) { return twins(r, v); });
      if (!covered) reps.push_back(v);
    }
    for (int v : reps) {
      std::vector<int> next(n);
      for (std::size_t i = 0; i < n; ++i)
        next[i] = 2 * colors[i] + ((colors[i] == target && static_cast<int>(i) != v) ? 1 : 0);
      search(std::move(next));
    }
  }

  const LabelGraph &g_;
  std::vector<int> best_rank_;
  std::string best_text_;
};

}  // namespace detail

/// Hydrogen folding followed by aromaticity normalization.
inline Molecule normalize_for_comparison(const Molecule &mol) {
  return aromatize(fold_hydrogens(mol));
}

/// Canonical rank per atom (a permutation of 0..n-1), computed on the
/// aromaticity-normalized graph with every atom kept.
inline std::vector<int> canonical_ranks(const Molecule &mol) {
  Molecule norm = aromatize(mol);
  detail::LabelGraph g = detail::label_graph(norm);
  return detail::Canonicalizer(g).run();
}

inline CanonicalForm canonical_form(const Molecule &mol) {
  Molecule norm = normalize_for_comparison(mol);
  detail::LabelGraph g = detail::label_graph(norm);
  detail::Canonicalizer c(g);
  c.run();
  return CanonicalForm{c.best_text()};
}

inline bool same_molecule(const Molecule &a, const Molecule &b) {
  return canonical_form(a) == canonical_form(b);
}

/// Renumbers atoms so that atom i of the result is the atom with rank i.
inline Molecule permute_atoms(const Molecule &mol, const std::vector<int> &rank) {
  std::vector<Atom> atoms(mol.atom_count());
  for (std::size_t i = 0; i < mol.atom_count(); ++i)
    atoms[static_cast<std::size_t>(rank[i])] = mol.atom(static_cast<int>(i));
  std::vector<Bond> bonds;
  for (const Bond &b : mol.bonds()) {
    int a = rank[static_cast<std::size_t>(b.a)], c = rank[static_cast<std::size_t>(b.b)];
    bonds.push_back({std::min(a, c), std::max(a, c), b.order});
  }
  std::sort(bonds.begin(), bonds.end(), [](const Bond &l, const Bond &r) {
    return std::tie(l.a, l.b) < std::tie(r.a, r.b);
  });
  return detail::assemble(std::move(atoms), std::move(bonds));
}

}  // namespace moljson
