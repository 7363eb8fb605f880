#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "moljson/elements.hpp"
#include "moljson/error.hpp"

namespace moljson {

/// Bond orders allowed by MolJSON. The underlying value is twice the
/// numeric order so aromatic bonds stay integral.
enum class BondOrder : std::uint8_t {
  Zero = 0,
  Single = 2,
  Aromatic = 3,
  Double = 4,
  Triple = 6,
};

inline int half_units(BondOrder o) { return static_cast<int>(o); }
inline double as_number(BondOrder o) { return half_units(o) / 2.0; }

inline std::optional<BondOrder> bond_order_from_number(double v) {
  if (v == 0.0) return BondOrder::Zero;
  if (v == 1.0) return BondOrder::Single;
  if (v == 1.5) return BondOrder::Aromatic;
  if (v == 2.0) return BondOrder::Double;
  if (v == 3.0) return BondOrder::Triple;
  return std::nullopt;
}

struct Atom {
  int element = element::C;  // atomic number, 0 for "*"
  int formal_charge = 0;
  int explicit_h = 0;

  std::string_view symbol() const { return element_symbol(element); }
  friend bool operator==(const Atom &, const Atom &) = default;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;

  int other(int atom) const { return atom == a ? b : a; }
  friend bool operator==(const Bond &, const Bond &) = default;
};

struct Neighbor {
  int atom;
  int bond;
};

class Molecule;
Molecule build_molecule(std::vector<Atom> atoms, std::vector<Bond> bonds);

namespace detail {
Molecule assemble(std::vector<Atom> atoms, std::vector<Bond> bonds);
}

/// Immutable molecular graph. Hydrogens are either implicit (derived from
/// the valence model), pinned on an atom through `explicit_h`, or present
/// as ordinary "H" atoms.
class Molecule {
 public:
  Molecule() = default;

  std::size_t atom_count() const { return atoms_.size(); }
  std::size_t bond_count() const { return bonds_.size(); }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }
  const Atom &atom(int i) const { return atoms_.at(static_cast<std::size_t>(i)); }
  const Bond &bond(int i) const { return bonds_.at(static_cast<std::size_t>(i)); }

  /// All neighbours, including through zero-order bonds.
  std::span<const Neighbor> neighbors(int i) const {
    return adjacency_.at(static_cast<std::size_t>(i));
  }

  /// Bond index joining a and b, or -1.
  int bond_between(int a, int b) const {
    for (const Neighbor &n : neighbors(a))
      if (n.atom == b) return n.bond;
    return -1;
  }

  /// Number of bonds of order >= 1.
  int degree(int i) const {
    int d = 0;
    for (const Neighbor &n : neighbors(i))
      if (bonds_[n.bond].order != BondOrder::Zero) ++d;
    return d;
  }

  bool is_aromatic_atom(int i) const {
    for (const Neighbor &n : neighbors(i))
      if (bonds_[n.bond].order == BondOrder::Aromatic) return true;
    return false;
  }

  bool has_aromatic_bonds() const {
    return std::any_of(bonds_.begin(), bonds_.end(), [](const Bond &b) {
      return b.order == BondOrder::Aromatic;
    });
  }

  int implicit_hydrogens(int i) const {
    return implicit_h_.at(static_cast<std::size_t>(i));
  }
  int total_hydrogens(int i) const {
    return implicit_hydrogens(i) + atom(i).explicit_h;
  }

  bool sanitized() const { return sanitized_; }

 private:
  friend Molecule build_molecule(std::vector<Atom>, std::vector<Bond>);
  friend Molecule detail::assemble(std::vector<Atom>, std::vector<Bond>);

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<int> implicit_h_;
  bool sanitized_ = false;
};

namespace detail {

struct ValenceState {
  int implicit_h = 0;
  bool overflow = false;
  int valence = 0;      // lower-bound valence used for the overflow check
  int allowed_max = 0;
};

/// Bond-order bookkeeping for one atom, in half units.
struct BondSums {
  int non_aromatic = 0;  // half units over non-aromatic bonds of order >= 1
  int aromatic_count = 0;
};

inline BondSums bond_sums(std::span<const Bond> bonds,
                          std::span<const Neighbor> nbrs) {
  BondSums s;
  for (const Neighbor &n : nbrs) {
    BondOrder o = bonds[static_cast<std::size_t>(n.bond)].order;
    if (o == BondOrder::Aromatic)
      ++s.aromatic_count;
    else
      s.non_aromatic += half_units(o);
  }
  return s;
}

// Implicit hydrogens follow the floored bond-order sum. Aromatic atoms other
// than carbon take no implicit hydrogens; their H must be explicit.
inline ValenceState valence_state(const Atom &atom, const BondSums &s) {
  ValenceState st;
  if (atom.element == element::Dummy) return st;
  const std::vector<int> allowed =
      allowed_valences(atom.element, atom.formal_charge);
  if (allowed.empty()) return st;
  st.allowed_max = allowed.back();

  const int floored = (s.non_aromatic + 3 * s.aromatic_count) / 2;
  if (s.aromatic_count > 0) {
    // Each aromatic bond is at least single.
    const int lower = s.non_aromatic / 2 + s.aromatic_count + atom.explicit_h;
    st.valence = lower;
    if (lower > st.allowed_max) {
      st.overflow = true;
      return st;
    }
    if (atom.element == element::C || atom.element == element::B) {
      const int need = floored + atom.explicit_h;
      st.implicit_h = std::max(0, allowed.front() - need);
    }
    return st;
  }
  const int need = floored + atom.explicit_h;
  st.valence = need;
  auto it = std::lower_bound(allowed.begin(), allowed.end(), need);
  if (it == allowed.end()) {
    st.overflow = true;
    return st;
  }
  st.implicit_h = *it - need;
  return st;
}

inline Molecule assemble(std::vector<Atom> atoms, std::vector<Bond> bonds) {
  Molecule m;
  m.atoms_ = std::move(atoms);
  m.bonds_ = std::move(bonds);
  m.adjacency_.assign(m.atoms_.size(), {});
  for (std::size_t i = 0; i < m.bonds_.size(); ++i) {
    const Bond &b = m.bonds_[i];
    m.adjacency_[static_cast<std::size_t>(b.a)].push_back({b.b, static_cast<int>(i)});
    m.adjacency_[static_cast<std::size_t>(b.b)].push_back({b.a, static_cast<int>(i)});
  }
  m.implicit_h_.assign(m.atoms_.size(), 0);
  bool ok = true;
  for (std::size_t i = 0; i < m.atoms_.size(); ++i) {
    ValenceState st = valence_state(m.atoms_[i], bond_sums(m.bonds_, m.adjacency_[i]));
    m.implicit_h_[i] = st.implicit_h;
    if (st.overflow) ok = false;
  }
  m.sanitized_ = ok;
  return m;
}

}  // namespace detail

/// Validates raw atoms and bonds and returns a sanitized molecule.
/// Atom order is preserved; bond endpoints are stored with a < b.
inline Molecule build_molecule(std::vector<Atom> atoms, std::vector<Bond> bonds) {
  const int n = static_cast<int>(atoms.size());
  for (int i = 0; i < n; ++i) {
    const Atom &a = atoms[static_cast<std::size_t>(i)];
    if (a.element < 0 || a.element >= static_cast<int>(kElementSymbols.size()))
      throw Error(ErrorKind::UnknownElement,
                  "atom " + std::to_string(i) + " has atomic number " +
                      std::to_string(a.element));
    if (a.formal_charge < -5 || a.formal_charge > 5)
      throw Error(ErrorKind::SchemaViolation,
                  "atom " + std::to_string(i) + " formal charge out of range");
    if (a.explicit_h < 0)
      throw Error(ErrorKind::SchemaViolation,
                  "atom " + std::to_string(i) + " negative hydrogen count");
  }
  std::map<std::pair<int, int>, int> seen;
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    Bond &b = bonds[i];
    if (b.a < 0 || b.a >= n || b.b < 0 || b.b >= n)
      throw Error(ErrorKind::BadAtomIndex,
                  "bond " + std::to_string(i) + " references a missing atom");
    if (b.a == b.b)
      throw Error(ErrorKind::SelfLoop, "bond " + std::to_string(i) +
                                           " joins atom " + std::to_string(b.a) +
                                           " to itself");
    if (b.a > b.b) std::swap(b.a, b.b);
    if (!seen.emplace(std::make_pair(b.a, b.b), static_cast<int>(i)).second)
      throw Error(ErrorKind::DuplicateBond, "atoms " + std::to_string(b.a) +
                                                " and " + std::to_string(b.b) +
                                                " bonded twice");
  }
  Molecule m = detail::assemble(std::move(atoms), std::move(bonds));
  if (!m.sanitized()) {
    for (int i = 0; i < n; ++i) {
      auto st = detail::valence_state(m.atom(i), detail::bond_sums(m.bonds(), m.neighbors(i)));
      if (st.overflow) throw ValenceError(i, st.valence, st.allowed_max);
    }
  }
  return m;
}

/// Free-function form of Molecule::implicit_hydrogens.
inline int implicit_hydrogens(const Molecule &mol, int atom) {
  return mol.implicit_hydrogens(atom);
}

/// Atoms other than hydrogen and the dummy atom.
inline int heavy_atom_count(const Molecule &mol) {
  int n = 0;
  for (const Atom &a : mol.atoms())
    if (a.element != element::H && a.element != element::Dummy) ++n;
  return n;
}

/// Hill-order formula including every hydrogen (implicit, pinned, atom).
inline std::string molecular_formula(const Molecule &mol) {
  std::map<std::string, int> counts;
  int hydrogens = 0;
  bool has_carbon = false;
  for (std::size_t i = 0; i < mol.atom_count(); ++i) {
    const Atom &a = mol.atom(static_cast<int>(i));
    hydrogens += mol.total_hydrogens(static_cast<int>(i));
    if (a.element == element::Dummy) continue;
    if (a.element == element::H) {
      ++hydrogens;
      continue;
    }
    if (a.element == element::C) has_carbon = true;
    ++counts[std::string(a.symbol())];
  }
  if (hydrogens > 0) counts["H"] += hydrogens;
  std::string out;
  auto emit = [&out](const std::string &sym, int c) {
    out += sym;
    if (c > 1) out += std::to_string(c);
  };
  if (has_carbon) {
    emit("C", counts["C"]);
    counts.erase("C");
    if (auto it = counts.find("H"); it != counts.end()) {
      emit("H", it->second);
      counts.erase(it);
    }
  }
  for (const auto &[sym, c] : counts) emit(sym, c);
  return out;
}

/// Rewrites hydrogen counts for a format that can pin `carried(i)` hydrogens
/// on atom i. Whatever valence inference cannot recover is added back as
/// explicit "H" atoms so the total per atom is unchanged.
template <class Carried>
Molecule express_hydrogens(const Molecule &mol, Carried carried) {
  std::vector<Atom> atoms(mol.atoms().begin(), mol.atoms().end());
  std::vector<Bond> bonds(mol.bonds().begin(), mol.bonds().end());
  const int n = static_cast<int>(mol.atom_count());
  for (int i = 0; i < n; ++i) {
    const int total = mol.total_hydrogens(i);
    const int pinned = std::min(total, static_cast<int>(carried(mol, i)));
    Atom probe = mol.atom(i);
    probe.explicit_h = pinned;
    detail::BondSums sums = detail::bond_sums(mol.bonds(), mol.neighbors(i));
    int extra = 0;
    for (; extra <= total - pinned; ++extra) {
      detail::BondSums with = sums;
      with.non_aromatic += 2 * extra;
      if (pinned + extra + detail::valence_state(probe, with).implicit_h == total) break;
    }
    if (extra > total - pinned) extra = total - pinned;
    atoms[static_cast<std::size_t>(i)].explicit_h = pinned;
    for (int k = 0; k < extra; ++k) {
      const int h = static_cast<int>(atoms.size());
      atoms.push_back(Atom{element::H, 0, 0});
      bonds.push_back(Bond{i, h, BondOrder::Single});
    }
  }
  return detail::assemble(std::move(atoms), std::move(bonds));
}

}  // namespace moljson
