#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "moljson/aromaticity.hpp"
#include "moljson/molecule.hpp"

namespace moljson {

namespace detail {

inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

inline std::vector<std::string> tokens(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

inline std::optional<int> to_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline bool is_decimal(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  bool digits = false, dot = false;
  for (; i < s.size(); ++i) {
    if (s[i] >= '0' && s[i] <= '9') {
      digits = true;
    } else if (s[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits && dot;
}

inline std::optional<int> fixed_int(std::string_view line, std::size_t col, std::size_t width) {
  if (line.size() < col) return std::nullopt;
  std::string field(line.substr(col, width));
  auto t = tokens(field);
  if (t.size() != 1) return std::nullopt;
  return to_int(t[0]);
}

// Legacy atom-block charge codes.
inline int charge_from_code(int code) {
  switch (code) {
    case 1: return 3;
    case 2: return 2;
    case 3: return 1;
    case 5: return -1;
    case 6: return -2;
    case 7: return -3;
    default: return 0;
  }
}

inline std::optional<BondOrder> bond_from_code(int code) {
  switch (code) {
    case 0: return BondOrder::Zero;
    case 1: return BondOrder::Single;
    case 2: return BondOrder::Double;
    case 3: return BondOrder::Triple;
    case 4: return BondOrder::Aromatic;
    default: return std::nullopt;
  }
}

struct AtomRow {
  int element;
  int legacy_charge;
};

inline std::optional<AtomRow> atom_row(std::string_view line) {
  auto t = tokens(line);
  if (t.size() < 4) return std::nullopt;
  for (int k = 0; k < 3; ++k)
    if (!is_decimal(t[static_cast<std::size_t>(k)])) return std::nullopt;
  auto z = atomic_number(t[3]);
  if (!z) return std::nullopt;
  int charge = 0;
  if (t.size() > 5)
    if (auto code = to_int(t[5])) charge = charge_from_code(*code);
  return AtomRow{*z, charge};
}

inline std::optional<std::vector<int>> bond_row(std::string_view line) {
  std::vector<int> fields;
  if (line.size() >= 9) {
    bool fixed = true;
    for (std::size_t col = 0; col < 9; col += 3) {
      auto v = fixed_int(line, col, 3);
      if (!v) {
        fixed = false;
        break;
      }
      fields.push_back(*v);
    }
    if (fixed) return fields;
    fields.clear();
  }
  for (const std::string &t : tokens(line)) {
    auto v = to_int(t);
    if (!v) return std::nullopt;
    fields.push_back(*v);
  }
  return fields;
}

/// Applies "M  CHG" property lines; returns false on a malformed line.
inline bool apply_charge_line(std::string_view line, std::vector<Atom> &atoms) {
  auto t = tokens(line);
  if (t.size() < 3) return false;
  auto count = to_int(t[2]);
  if (!count || t.size() < 3 + 2 * static_cast<std::size_t>(std::max(0, *count))) return false;
  for (int k = 0; k < *count; ++k) {
    auto idx = to_int(t[3 + 2 * static_cast<std::size_t>(k)]);
    auto q = to_int(t[4 + 2 * static_cast<std::size_t>(k)]);
    if (!idx || !q || *idx < 1 || *idx > static_cast<int>(atoms.size())) return false;
    atoms[static_cast<std::size_t>(*idx - 1)].formal_charge = *q;
  }
  return true;
}

inline bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

inline Molecule finish_molfile(std::vector<Atom> atoms, std::vector<Bond> bonds) {
  Molecule mol = build_molecule(std::move(atoms), std::move(bonds));
  if (mol.has_aromatic_bonds()) kekulize(mol);
  return mol;
}

}  // namespace detail

/// Strict V2000 reader. The counts line is the first line ending in
/// "V2000" and must follow at most three header lines.
inline Molecule parse_molv2000(std::string_view text) {
  using namespace detail;
  const std::vector<std::string> lines = split_lines(text);
  std::size_t counts_at = lines.size();
  for (std::size_t i = 0; i < lines.size() && i <= 3; ++i) {
    auto t = tokens(lines[i]);
    if (!t.empty() && t.back().size() >= 5 && t.back().substr(t.back().size() - 5) == "V2000") {
      counts_at = i;
      break;
    }
  }
  if (counts_at == lines.size()) throw Error(ErrorKind::BadCountsLine, "no V2000 counts line in the header");
  const std::string &counts = lines[counts_at];
  auto na = fixed_int(counts, 0, 3);
  auto nb = fixed_int(counts, 3, 3);
  if (!na || !nb) {
    auto t = tokens(counts);
    if (t.size() >= 2) {
      na = to_int(t[0]);
      nb = to_int(t[1]);
    }
  }
  if (!na || !nb || *na < 0 || *nb < 0) throw Error(ErrorKind::BadCountsLine, "unreadable atom/bond counts");

  std::size_t row = counts_at + 1;
  std::vector<Atom> atoms;
  for (int i = 0; i < *na; ++i, ++row) {
    if (row >= lines.size()) throw Error(ErrorKind::TruncatedBlock, "atom block ends early");
    auto r = atom_row(lines[row]);
    if (!r) throw Error(ErrorKind::TruncatedBlock, "line " + std::to_string(row + 1) + " is not an atom row");
    atoms.push_back(Atom{r->element, r->legacy_charge, 0});
  }
  std::vector<Bond> bonds;
  for (int i = 0; i < *nb; ++i, ++row) {
    if (row >= lines.size()) throw Error(ErrorKind::TruncatedBlock, "bond block ends early");
    auto f = bond_row(lines[row]);
    if (!f || f->size() < 3) throw Error(ErrorKind::TruncatedBlock, "line " + std::to_string(row + 1) + " is not a bond row");
    const int a = (*f)[0], b = (*f)[1];
    if (a < 1 || b < 1 || a > *na || b > *na)
      throw Error(ErrorKind::BadBondIndex, "bond " + std::to_string(i + 1) + " references atom outside 1.." +
                                               std::to_string(*na));
    auto order = bond_from_code((*f)[2]);
    if (!order) throw Error(ErrorKind::UnsupportedFeature, "bond type " + std::to_string((*f)[2]));
    bonds.push_back(Bond{a - 1, b - 1, *order});
  }
  bool charges_reset = false;
  for (; row < lines.size(); ++row) {
    const std::string &line = lines[row];
    if (starts_with(line, "M  END")) return finish_molfile(std::move(atoms), std::move(bonds));
    if (starts_with(line, "M  CHG")) {
      if (!charges_reset) {
        for (Atom &a : atoms) a.formal_charge = 0;
        charges_reset = true;
      }
      if (!apply_charge_line(line, atoms)) throw Error(ErrorKind::TruncatedBlock, "malformed M  CHG line");
    } else if (starts_with(line, "M  ISO")) {
      throw Error(ErrorKind::UnsupportedFeature, "isotope property");
    } else if (starts_with(line, "M  RAD")) {
      throw Error(ErrorKind::UnsupportedFeature, "radical property");
    }
  }
  throw Error(ErrorKind::MissingTerminator, "no \"M  END\" line");
}

/// V2000 writer with zeroed 2D coordinates and kekulized bonds. Hydrogen
/// counts that valence inference would not reproduce become "H" atoms.
inline std::string write_molv2000(const Molecule &mol) {
  Molecule work = kekulize(mol);
  work = express_hydrogens(work, [](const Molecule &, int) { return 0; });
  std::string out;
  char buf[128];
  out += "\n     moljson        2D\n\n";
  std::snprintf(buf, sizeof buf, "%3d%3d  0  0  0  0  0  0  0  0999 V2000\n",
                static_cast<int>(work.atom_count()), static_cast<int>(work.bond_count()));
  out += buf;
  for (const Atom &a : work.atoms()) {
    std::snprintf(buf, sizeof buf, "%10.4f%10.4f%10.4f %-3s 0  0  0  0  0  0  0  0  0  0  0  0\n", 0.0, 0.0, 0.0,
                  std::string(a.symbol()).c_str());
    out += buf;
  }
  for (const Bond &b : work.bonds()) {
    int code = 1;
    switch (b.order) {
      case BondOrder::Zero: code = 0; break;
      case BondOrder::Double: code = 2; break;
      case BondOrder::Triple: code = 3; break;
      case BondOrder::Aromatic: code = 4; break;
      default: break;
    }
    std::snprintf(buf, sizeof buf, "%3d%3d%3d  0\n", b.a + 1, b.b + 1, code);
    out += buf;
  }
  std::vector<std::pair<int, int>> charged;
  for (std::size_t i = 0; i < work.atom_count(); ++i)
    if (int q = work.atom(static_cast<int>(i)).formal_charge; q != 0) charged.emplace_back(static_cast<int>(i) + 1, q);
  for (std::size_t k = 0; k < charged.size(); k += 8) {
    const std::size_t m = std::min<std::size_t>(8, charged.size() - k);
    std::snprintf(buf, sizeof buf, "M  CHG%3d", static_cast<int>(m));
    out += buf;
    for (std::size_t j = 0; j < m; ++j) {
      std::snprintf(buf, sizeof buf, " %3d %3d", charged[k + j].first, charged[k + j].second);
      out += buf;
    }
    out += '\n';
  }
  out += "M  END\n";
  return out;
}

/// Shape-based reader for damaged MOL text: the longest run of atom rows
/// is the atom block, the longest following run of in-range bond rows is
/// the bond block. Falls back to nothing when the strict reader succeeds.
inline Molecule rescue_parse(std::string_view text) {
  try {
    return parse_molv2000(text);
  } catch (const Error &) {
  }
  using namespace detail;
  const std::vector<std::string> lines = split_lines(text);
  std::vector<std::optional<AtomRow>> arow(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) arow[i] = atom_row(lines[i]);

  std::size_t best_start = 0, best_len = 0;
  bool tie = false;
  for (std::size_t i = 0; i < lines.size();) {
    if (!arow[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < lines.size() && arow[j]) ++j;
    if (j - i > best_len) {
      best_start = i;
      best_len = j - i;
      tie = false;
    } else if (j - i == best_len) {
      tie = true;
    }
    i = j;
  }
  if (best_len == 0) throw Error(ErrorKind::NoAtomBlockFound, "no line looks like an atom row");
  if (tie) throw Error(ErrorKind::AmbiguousBlocks, "two atom blocks of length " + std::to_string(best_len));

  std::vector<Atom> atoms;
  for (std::size_t i = best_start; i < best_start + best_len; ++i)
    atoms.push_back(Atom{arow[i]->element, arow[i]->legacy_charge, 0});
  const int n = static_cast<int>(atoms.size());

  auto bond_fields = [&](std::size_t i) -> std::optional<std::vector<int>> {
    if (arow[i]) return std::nullopt;
    auto f = bond_row(lines[i]);
    if (!f || f->size() < 2 || f->size() > 7) return std::nullopt;
    const int a = (*f)[0], b = (*f)[1];
    if (a < 1 || b < 1 || a > n || b > n) return std::nullopt;
    if (f->size() >= 3 && !bond_from_code((*f)[2])) return std::nullopt;
    return f;
  };
  std::size_t bstart = 0, blen = 0;
  for (std::size_t i = best_start + best_len; i < lines.size();) {
    if (!bond_fields(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < lines.size() && bond_fields(j)) ++j;
    if (j - i > blen) {
      bstart = i;
      blen = j - i;
    }
    i = j;
  }
  std::vector<Bond> bonds;
  for (std::size_t i = bstart; i < bstart + blen; ++i) {
    auto f = *bond_fields(i);
    BondOrder order = f.size() >= 3 ? *bond_from_code(f[2]) : BondOrder::Single;
    bonds.push_back(Bond{f[0] - 1, f[1] - 1, order});
  }
  bool charges_reset = false;
  for (const std::string &line : lines) {
    if (!starts_with(line, "M  CHG")) continue;
    if (!charges_reset) {
      for (Atom &a : atoms) a.formal_charge = 0;
      charges_reset = true;
    }
    apply_charge_line(line, atoms);
  }
  return finish_molfile(std::move(atoms), std::move(bonds));
}

}  // namespace moljson
