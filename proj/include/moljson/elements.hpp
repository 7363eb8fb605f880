#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <optional>
#include <string_view>
#include <vector>

namespace moljson {

// Element enumeration accepted by the MolJSON schema, in schema order.
// Index 0 is the dummy atom; every other index equals the atomic number.
inline constexpr std::array<std::string_view, 119> kElementSymbols = {
    "*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
    "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
    "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
    "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
    "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
    "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
    "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
    "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

/// Atomic number for a schema symbol (0 for "*"), or nullopt.
inline std::optional<int> atomic_number(std::string_view symbol) {
  for (std::size_t i = 0; i < kElementSymbols.size(); ++i)
    if (kElementSymbols[i] == symbol) return static_cast<int>(i);
  return std::nullopt;
}

inline std::string_view element_symbol(int z) {
  return kElementSymbols.at(static_cast<std::size_t>(z));
}

namespace element {
inline constexpr int Dummy = 0;
inline constexpr int H = 1;
inline constexpr int B = 5;
inline constexpr int C = 6;
inline constexpr int N = 7;
inline constexpr int O = 8;
inline constexpr int F = 9;
inline constexpr int Si = 14;
inline constexpr int P = 15;
inline constexpr int S = 16;
inline constexpr int Cl = 17;
inline constexpr int As = 33;
inline constexpr int Se = 34;
inline constexpr int Br = 35;
inline constexpr int I = 53;
}  // namespace element

inline bool is_halogen(int z) {
  return z == element::F || z == element::Cl || z == element::Br ||
         z == element::I;
}

/// Allowed total valences (bond order sum + hydrogens) for an element in a
/// given formal charge, ascending. Empty means no valence model is defined
/// and the atom is exempt from valence checks.
inline std::vector<int> allowed_valences(int z, int charge) {
  std::vector<int> base;
  enum class Rule { AddCharge, SubAbs, SubCharge } rule = Rule::AddCharge;
  switch (z) {
    case element::H: base = {1}; rule = Rule::SubAbs; break;
    case element::B: base = {3}; rule = Rule::SubCharge; break;
    case element::C: base = {4}; rule = Rule::SubAbs; break;
    case element::Si: base = {4}; rule = Rule::SubAbs; break;
    case element::N: base = {3}; break;
    case element::P: base = {3, 5}; break;
    case element::As: base = {3, 5}; break;
    case element::O: base = {2}; break;
    case element::S: base = {2, 4, 6}; break;
    case element::Se: base = {2, 4, 6}; break;
    case element::F:
    case element::Cl:
    case element::Br:
    case element::I: base = {1}; break;
    default: return {};
  }
  std::vector<int> out;
  for (int v : base) {
    int adjusted = v;
    switch (rule) {
      case Rule::AddCharge: adjusted = v + charge; break;
      case Rule::SubAbs: adjusted = v - std::abs(charge); break;
      case Rule::SubCharge: adjusted = v - charge; break;
    }
    if (adjusted >= 0 &&
        std::find(out.begin(), out.end(), adjusted) == out.end())
      out.push_back(adjusted);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace moljson
