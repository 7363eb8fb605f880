#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moljson/aromaticity.hpp"
#include "moljson/canon.hpp"
#include "moljson/graph.hpp"
#include "moljson/molecule.hpp"

namespace moljson {

enum class SmilesOrdering { InputOrder, Canonical };

namespace detail {

inline bool is_organic_subset(int z) {
  switch (z) {
    case element::B: case element::C: case element::N: case element::O:
    case element::P: case element::S: case element::F: case element::Cl:
    case element::Br: case element::I:
      return true;
    default:
      return false;
  }
}

class SmilesParser {
 public:
  explicit SmilesParser(std::string_view text) : s_(text) {}

  Molecule parse() {
    if (s_.empty()) throw ParseError(ErrorKind::SyntaxError, 0, "empty SMILES");
    while (pos_ < s_.size()) step();
    if (!branches_.empty()) throw ParseError(ErrorKind::UnclosedBranch, pos_, "unclosed branch");
    if (!open_rings_.empty())
      throw Error(ErrorKind::UnclosedRing, "ring bond " + std::to_string(open_rings_.begin()->first) +
                                               " never closed");
    if (pending_bond_ || prev_ < 0)
      throw ParseError(ErrorKind::SyntaxError, pos_, "SMILES ends with a bond or separator");
    return finish();
  }

 private:
  struct RawBond {
    int a, b;
    BondOrder order;
    bool defaulted_aromatic;
  };
  struct OpenRing {
    int atom;
    std::optional<BondOrder> order;
  };

  [[noreturn]] void fail(const std::string &what) const {
    throw ParseError(ErrorKind::SyntaxError, pos_, what);
  }
  [[noreturn]] void unsupported(const std::string &what) const {
    throw ParseError(ErrorKind::UnsupportedFeature, pos_, what);
  }

  void step() {
    const char c = s_[pos_];
    switch (c) {
      case '(':
        if (prev_ < 0) fail("branch without preceding atom");
        if (pending_bond_) fail("bond before branch");
        branches_.push_back(prev_);
        ++pos_;
        return;
      case ')':
        if (branches_.empty()) fail("unbalanced ')'");
        if (pending_bond_) fail("bond before ')'");
        prev_ = branches_.back();
        branches_.pop_back();
        ++pos_;
        return;
      case '.':
        if (pending_bond_ || prev_ < 0) fail("misplaced '.'");
        if (!branches_.empty()) fail("'.' inside branch");
        prev_ = -1;
        ++pos_;
        return;
      case '-': set_bond(BondOrder::Single); return;
      case '=': set_bond(BondOrder::Double); return;
      case '#': set_bond(BondOrder::Triple); return;
      case ':': set_bond(BondOrder::Aromatic); return;
      case '$': unsupported("quadruple bond");
      case '/':
      case '\\': unsupported("stereo bond marker");
      case '%': {
        if (pos_ + 2 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
            !std::isdigit(static_cast<unsigned char>(s_[pos_ + 2])))
          fail("malformed %nn ring bond");
        int idx = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
        pos_ += 3;
        ring_bond(idx);
        return;
      }
      case '[': bracket_atom(); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      ++pos_;
      ring_bond(c - '0');
      return;
    }
    organic_atom();
  }

  void set_bond(BondOrder o) {
    if (pending_bond_) fail("two consecutive bond symbols");
    if (prev_ < 0) fail("bond without preceding atom");
    pending_bond_ = o;
    ++pos_;
  }

  void ring_bond(int idx) {
    if (prev_ < 0) fail("ring bond without atom");
    auto it = open_rings_.find(idx);
    if (it == open_rings_.end()) {
      open_rings_[idx] = OpenRing{prev_, pending_bond_};
      pending_bond_.reset();
      return;
    }
    OpenRing open = it->second;
    open_rings_.erase(it);
    std::optional<BondOrder> here = pending_bond_;
    pending_bond_.reset();
    if (open.order && here && *open.order != *here) fail("conflicting ring bond orders");
    std::optional<BondOrder> o = open.order ? open.order : here;
    add_bond(open.atom, prev_, o);
  }

  void add_bond(int a, int b, std::optional<BondOrder> explicit_order) {
    if (explicit_order) {
      bonds_.push_back({a, b, *explicit_order, false});
      return;
    }
    bool both_aromatic = aromatic_[static_cast<std::size_t>(a)] && aromatic_[static_cast<std::size_t>(b)];
    bonds_.push_back({a, b, both_aromatic ? BondOrder::Aromatic : BondOrder::Single, both_aromatic});
  }

  int push_atom(Atom atom, bool aromatic, bool bracket) {
    const int idx = static_cast<int>(atoms_.size());
    atoms_.push_back(atom);
    aromatic_.push_back(aromatic);
    bracket_.push_back(bracket);
    if (prev_ >= 0) {
      add_bond(prev_, idx, pending_bond_);
    } else if (pending_bond_) {
      fail("bond without preceding atom");
    }
    pending_bond_.reset();
    prev_ = idx;
    return idx;
  }

  void organic_atom() {
    const char c = s_[pos_];
    auto two = [&](char next) { return pos_ + 1 < s_.size() && s_[pos_ + 1] == next; };
    int z = -1;
    bool aromatic = false;
    std::size_t len = 1;
    switch (c) {
      case 'B': if (two('r')) { z = element::Br; len = 2; } else z = element::B; break;
      case 'C': if (two('l')) { z = element::Cl; len = 2; } else z = element::C; break;
      case 'N': z = element::N; break;
      case 'O': z = element::O; break;
      case 'P': z = element::P; break;
      case 'S': z = element::S; break;
      case 'F': z = element::F; break;
      case 'I': z = element::I; break;
      case '*': z = element::Dummy; break;
      case 'b': z = element::B; aromatic = true; break;
      case 'c': z = element::C; aromatic = true; break;
      case 'n': z = element::N; aromatic = true; break;
      case 'o': z = element::O; aromatic = true; break;
      case 'p': z = element::P; aromatic = true; break;
      case 's': z = element::S; aromatic = true; break;
      default: fail(std::string("unexpected character '") + c + "'");
    }
    pos_ += len;
    push_atom(Atom{z, 0, 0}, aromatic, false);
  }

  int read_int() {
    int v = 0;
    bool any = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_] - '0');
      ++pos_;
      any = true;
      if (v > 1000) fail("number too large");
    }
    return any ? v : -1;
  }

  void bracket_atom() {
    ++pos_;  // '['
    if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
      unsupported("isotope label");
    if (pos_ >= s_.size()) fail("unterminated bracket atom");
    int z = -1;
    bool aromatic = false;
    const char c = s_[pos_];
    if (c == '*') {
      z = element::Dummy;
      ++pos_;
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      if (pos_ + 1 < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_ + 1]))) {
        if (auto two = atomic_number(s_.substr(pos_, 2))) {
          z = *two;
          pos_ += 2;
        }
      }
      if (z < 0) {
        auto one = atomic_number(s_.substr(pos_, 1));
        if (!one) fail("unknown element");
        z = *one;
        pos_ += 1;
      }
    } else if (std::islower(static_cast<unsigned char>(c))) {
      static const std::pair<std::string_view, int> kAromatic[] = {
          {"se", element::Se}, {"as", element::As}, {"si", element::Si}, {"b", element::B}, {"c", element::C},
          {"n", element::N},   {"o", element::O},   {"p", element::P}, {"s", element::S}};
      for (auto [sym, num] : kAromatic) {
        if (s_.substr(pos_, sym.size()) == sym) {
          z = num;
          pos_ += sym.size();
          aromatic = true;
          break;
        }
      }
      if (z < 0) fail("unknown aromatic element");
    } else {
      fail("expected element symbol");
    }
    if (pos_ < s_.size() && s_[pos_] == '@') unsupported("chirality marker");
    int hcount = 0;
    if (pos_ < s_.size() && s_[pos_] == 'H') {
      ++pos_;
      int v = read_int();
      hcount = v < 0 ? 1 : v;
    }
    int charge = 0;
    if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
      const char sign = s_[pos_++];
      int v = read_int();
      if (v >= 0) {
        charge = v;
      } else {
        charge = 1;
        while (pos_ < s_.size() && s_[pos_] == sign) {
          ++charge;
          ++pos_;
        }
      }
      if (sign == '-') charge = -charge;
    }
    if (pos_ < s_.size() && s_[pos_] == ':') {
      ++pos_;
      if (read_int() < 0) fail("missing atom class");
    }
    if (pos_ >= s_.size() || s_[pos_] != ']') fail("expected ']'");
    ++pos_;
    if (charge < -5 || charge > 5) fail("charge out of range");
    push_atom(Atom{z, charge, hcount}, aromatic, true);
  }

  Molecule finish() {
    // Aromatic defaults only hold inside rings.
    {
      std::vector<Bond> tmp;
      for (const RawBond &b : bonds_) tmp.push_back({std::min(b.a, b.b), std::max(b.a, b.b), b.order});
      bool cyclic = false;
      for (std::size_t i = 0; i < tmp.size() && !cyclic; ++i)
        if (tmp[i].a == tmp[i].b) cyclic = true;
      if (!cyclic) {
        Molecule probe = detail::assemble(std::vector<Atom>(atoms_), tmp);
        auto rings = sssr_rings(probe);
        std::vector<bool> ring_bond(tmp.size(), false);
        for (const Ring &r : rings)
          for (std::size_t i = 0; i < r.size(); ++i) {
            int bi = probe.bond_between(r[i], r[(i + 1) % r.size()]);
            ring_bond[static_cast<std::size_t>(bi)] = true;
          }
        for (std::size_t i = 0; i < bonds_.size(); ++i)
          if (bonds_[i].defaulted_aromatic && !ring_bond[i]) bonds_[i].order = BondOrder::Single;
      }
    }
    std::vector<Bond> bonds;
    for (const RawBond &b : bonds_) bonds.push_back({b.a, b.b, b.order});
    Molecule mol = build_molecule(atoms_, std::move(bonds));
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const int ii = static_cast<int>(i);
      if (aromatic_[i] && !mol.is_aromatic_atom(ii))
        throw Error(ErrorKind::SyntaxError, "aromatic atom " + std::to_string(i) + " is not in an aromatic ring");
      if (bracket_[i] && mol.implicit_hydrogens(ii) > 0)
        throw Error(ErrorKind::UnsupportedFeature,
                    "radical: bracket atom " + std::to_string(i) + " has unfilled valence");
    }
    kekulize(mol);  // throws when the aromatic system is inconsistent
    return mol;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int prev_ = -1;
  std::optional<BondOrder> pending_bond_;
  std::vector<int> branches_;
  std::map<int, OpenRing> open_rings_;
  std::vector<Atom> atoms_;
  std::vector<bool> aromatic_;
  std::vector<bool> bracket_;
  std::vector<RawBond> bonds_;
};

inline std::string atom_token(const Molecule &mol, int i) {
  const Atom &a = mol.atom(i);
  const int total_h = mol.total_hydrogens(i);
  const int default_h =
      valence_state(Atom{a.element, 0, 0}, bond_sums(mol.bonds(), mol.neighbors(i))).implicit_h;
  const bool plain = a.formal_charge == 0 && total_h == default_h &&
                     (is_organic_subset(a.element) || a.element == element::Dummy);
  if (plain) return std::string(a.symbol());
  std::string out = "[";
  out += a.symbol();
  if (total_h == 1) out += "H";
  if (total_h > 1) out += "H" + std::to_string(total_h);
  if (a.formal_charge > 0) out += "+";
  if (a.formal_charge < 0) out += "-";
  if (std::abs(a.formal_charge) > 1) out += std::to_string(std::abs(a.formal_charge));
  out += "]";
  return out;
}

inline std::string_view bond_token(BondOrder o) {
  switch (o) {
    case BondOrder::Double: return "=";
    case BondOrder::Triple: return "#";
    case BondOrder::Aromatic: return ":";
    default: return "";
  }
}

class SmilesWriter {
 public:
  explicit SmilesWriter(const Molecule &mol) : mol_(mol) {}

  std::string write() {
    const std::size_t n = mol_.atom_count();
    visited_.assign(n, false);
    closures_.assign(n, {});
    children_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
      if (visited_[i]) continue;
      int root = terminal_root(static_cast<int>(i));
      roots_.push_back(root);
      plan(root, -1);
    }
    std::string out;
    for (std::size_t r = 0; r < roots_.size(); ++r) {
      if (r) out += '.';
      emit(roots_[r], out);
    }
    return out;
  }

 private:
  // Lowest-index atom with at most one neighbour in the component of `seed`.
  int terminal_root(int seed) const {
    std::vector<int> stack{seed}, comp;
    std::vector<bool> seen(mol_.atom_count(), false);
    seen[static_cast<std::size_t>(seed)] = true;
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      comp.push_back(a);
      for (const Neighbor &nb : mol_.neighbors(a))
        if (!seen[static_cast<std::size_t>(nb.atom)]) {
          seen[static_cast<std::size_t>(nb.atom)] = true;
          stack.push_back(nb.atom);
        }
    }
    std::sort(comp.begin(), comp.end());
    for (int a : comp)
      if (mol_.neighbors(a).size() <= 1) return a;
    return seed;
  }

  struct Closure {
    int partner;
    int bond;
  };

  void plan(int u, int parent_bond) {
    visited_[static_cast<std::size_t>(u)] = true;
    std::vector<Neighbor> nbrs(mol_.neighbors(u).begin(), mol_.neighbors(u).end());
    std::sort(nbrs.begin(), nbrs.end(), [](const Neighbor &l, const Neighbor &r) { return l.atom < r.atom; });
    for (const Neighbor &nb : nbrs) {
      if (nb.bond == parent_bond || mol_.bond(nb.bond).order == BondOrder::Zero) continue;
      if (visited_[static_cast<std::size_t>(nb.atom)]) {
        if (!used_closure(nb.bond)) {
          closure_bonds_.push_back(nb.bond);
          closures_[static_cast<std::size_t>(nb.atom)].push_back({u, nb.bond});
          closures_[static_cast<std::size_t>(u)].push_back({nb.atom, nb.bond});
        }
        continue;
      }
      children_[static_cast<std::size_t>(u)].push_back({nb.atom, nb.bond});
      plan(nb.atom, nb.bond);
    }
  }

  bool used_closure(int bond) const {
    return std::find(closure_bonds_.begin(), closure_bonds_.end(), bond) != closure_bonds_.end();
  }

  int take_digit() {
    for (int d = 1; d < 100; ++d)
      if (!digit_in_use_[static_cast<std::size_t>(d)]) {
        digit_in_use_[static_cast<std::size_t>(d)] = true;
        return d;
      }
    throw Error(ErrorKind::UnsupportedFeature, "more than 99 simultaneous ring bonds");
  }

  static std::string digit_token(int d) {
    if (d < 10) return std::string(1, static_cast<char>('0' + d));
    return "%" + std::to_string(d);
  }

  void emit(int u, std::string &out) {
    out += atom_token(mol_, u);
    for (const Closure &c : closures_[static_cast<std::size_t>(u)]) {
      auto it = open_digit_.find(c.bond);
      if (it == open_digit_.end()) {
        int d = take_digit();
        open_digit_[c.bond] = d;
        out += bond_token(mol_.bond(c.bond).order);
        out += digit_token(d);
      } else {
        out += digit_token(it->second);
        digit_in_use_[static_cast<std::size_t>(it->second)] = false;
        open_digit_.erase(it);
      }
    }
    const auto &kids = children_[static_cast<std::size_t>(u)];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const bool last = k + 1 == kids.size();
      if (!last) out += '(';
      out += bond_token(mol_.bond(kids[k].bond).order);
      emit(kids[k].partner, out);
      if (!last) out += ')';
    }
  }

  const Molecule &mol_;
  std::vector<bool> visited_;
  std::vector<int> roots_;
  std::vector<int> closure_bonds_;
  std::vector<std::vector<Closure>> closures_;
  std::vector<std::vector<Closure>> children_;
  std::map<int, int> open_digit_;
  std::vector<bool> digit_in_use_ = std::vector<bool>(100, false);
};

}  // namespace detail

/// Parses a SMILES string into a sanitized molecule. Aromatic input keeps
/// its 1.5-order bonds; stereo, isotopes and radicals are rejected.
inline Molecule parse_smiles(std::string_view text) {
  return detail::SmilesParser(text).parse();
}

/// Writes kekulized SMILES. Canonical ordering depends only on the
/// equivalence class of the molecule.
inline std::string write_smiles(const Molecule &mol,
                                SmilesOrdering ordering = SmilesOrdering::Canonical) {
  Molecule work;
  if (ordering == SmilesOrdering::Canonical) {
    Molecule norm = normalize_for_comparison(mol);
    detail::LabelGraph g = detail::label_graph(norm);
    std::vector<int> rank = detail::Canonicalizer(g).run();
    work = kekulize(permute_atoms(norm, rank));
  } else {
    work = kekulize(mol);
  }
  return detail::SmilesWriter(work).write();
}

}  // namespace moljson
