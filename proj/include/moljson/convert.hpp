#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "moljson/molfile.hpp"
#include "moljson/moljson.hpp"
#include "moljson/smiles.hpp"

namespace moljson {

enum class Format { Smiles, Iupac, MolJson, MolV2000, Selfies, Inchi };

inline constexpr Format kAllFormats[] = {Format::Smiles, Format::Iupac, Format::MolJson,
                                         Format::MolV2000, Format::Selfies, Format::Inchi};

/// Key used in files, schemas and on the command line.
inline std::string_view to_string(Format f) {
  switch (f) {
    case Format::Smiles: return "smiles";
    case Format::Iupac: return "iupac";
    case Format::MolJson: return "moljson";
    case Format::MolV2000: return "molv2000";
    case Format::Selfies: return "selfies";
    case Format::Inchi: return "inchi";
  }
  return "?";
}

inline std::string_view display_name(Format f) {
  switch (f) {
    case Format::Smiles: return "SMILES";
    case Format::Iupac: return "IUPAC name";
    case Format::MolJson: return "MolJSON";
    case Format::MolV2000: return "MOL V2000";
    case Format::Selfies: return "SELFIES";
    case Format::Inchi: return "InChI";
  }
  return "?";
}

inline std::optional<Format> format_from_string(std::string_view s) {
  for (Format f : kAllFormats)
    if (to_string(f) == s) return f;
  return std::nullopt;
}

/// Formats this library reads and writes itself.
inline bool is_native(Format f) {
  return f == Format::Smiles || f == Format::MolJson || f == Format::MolV2000;
}

/// Maps text in a non-native format to SMILES; nullopt when the tool
/// cannot interpret it.
using ExternalAdapter = std::function<std::optional<std::string>(std::string_view)>;
using AdapterTable = std::map<Format, ExternalAdapter>;

inline Molecule read_molecule(std::string_view text, Format f, const AdapterTable &adapters = {}) {
  switch (f) {
    case Format::Smiles: {
      auto b = text.find_first_not_of(" \t\r\n");
      auto e = text.find_last_not_of(" \t\r\n");
      return parse_smiles(b == std::string_view::npos ? std::string_view{} : text.substr(b, e - b + 1));
    }
    case Format::MolJson: return parse_moljson(text);
    case Format::MolV2000: return parse_molv2000(text);
    default: break;
  }
  auto it = adapters.find(f);
  if (it == adapters.end() || !it->second)
    throw Error(ErrorKind::UnsupportedFeature, std::string("no adapter configured for ") + std::string(to_string(f)));
  std::optional<std::string> smiles = it->second(text);
  if (!smiles) throw Error(ErrorKind::SyntaxError, std::string(to_string(f)) + " adapter could not interpret input");
  return parse_smiles(*smiles);
}

inline std::string write_molecule(const Molecule &mol, Format f) {
  switch (f) {
    case Format::Smiles: return write_smiles(mol);
    case Format::MolJson: return write_moljson(mol);
    case Format::MolV2000: return write_molv2000(mol);
    default: break;
  }
  throw Error(ErrorKind::UnsupportedFeature, std::string("cannot write ") + std::string(to_string(f)));
}

}  // namespace moljson
