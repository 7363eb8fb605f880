#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "moljson/aromaticity.hpp"
#include "moljson/molecule.hpp"

namespace moljson {

using Json = nlohmann::ordered_json;

enum class IdStyle { ElementNumbered, ANumbered };
enum class SchemaVariant { Standard, EnumRanges };

struct Violation {
  std::string path;
  std::string reason;
  ErrorKind kind = ErrorKind::SchemaViolation;
};

/// A parsed document plus the atom ids in array order.
struct MolJsonParse {
  Molecule mol;
  std::vector<std::string> ids;
};

namespace detail {

inline bool json_integer(const Json &v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return true;
  if (v.is_number_float()) {
    double d = v.get<double>();
    return std::isfinite(d) && std::floor(d) == d;
  }
  return false;
}

inline long long json_int(const Json &v) {
  if (v.is_number_float()) return static_cast<long long>(v.get<double>());
  return v.get<long long>();
}

class DocumentChecker {
 public:
  explicit DocumentChecker(const Json &doc) : doc_(doc) {}

  std::vector<Violation> run() {
    if (!doc_.is_object()) {
      add("", "document must be an object");
      return out_;
    }
    if (doc_.contains("atoms") && doc_["atoms"].is_array() && doc_["atoms"].empty())
      add("atoms", "molecule has no atoms", ErrorKind::EmptyMolecule);
    keys(doc_, "", {"atoms", "bonds", "charges", "aromatic_n_h"});
    if (doc_.contains("atoms")) atoms(doc_["atoms"]);
    if (doc_.contains("bonds")) bonds(doc_["bonds"]);
    if (doc_.contains("charges")) charges(doc_["charges"]);
    if (doc_.contains("aromatic_n_h")) aromatic_n_h(doc_["aromatic_n_h"]);
    return out_;
  }

 private:
  void add(std::string path, std::string reason, ErrorKind kind = ErrorKind::SchemaViolation) {
    out_.push_back({std::move(path), std::move(reason), kind});
  }

  static std::string at(const std::string &base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }
  static std::string dot(const std::string &base, const std::string &key) {
    return base.empty() ? key : base + "." + key;
  }

  // Required keys and additionalProperties: false.
  bool keys(const Json &obj, const std::string &path, std::initializer_list<std::string_view> required) {
    if (!obj.is_object()) {
      add(path, "must be an object");
      return false;
    }
    for (std::string_view k : required)
      if (!obj.contains(std::string(k))) add(dot(path, std::string(k)), "required property missing");
    for (const auto &[k, v] : obj.items()) {
      (void)v;
      if (std::find(required.begin(), required.end(), k) == required.end())
        add(dot(path, k), "additional property not allowed");
    }
    return true;
  }

  void atoms(const Json &arr) {
    if (!arr.is_array()) {
      add("atoms", "must be an array");
      return;
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = at("atoms", i);
      const Json &a = arr[i];
      if (!keys(a, p, {"id", "element"})) continue;
      if (a.contains("id")) {
        if (!a["id"].is_string()) {
          add(p + ".id", "must be a string");
        } else {
          const std::string id = a["id"].get<std::string>();
          if (!ids_.insert(id).second) add(p + ".id", "duplicate atom id \"" + id + "\"", ErrorKind::DuplicateAtomId);
          if (a.contains("element") && a["element"].is_string()) element_of_[id] = a["element"].get<std::string>();
        }
      }
      if (a.contains("element")) {
        if (!a["element"].is_string() || !atomic_number(a["element"].get<std::string>()))
          add(p + ".element", "not a schema element symbol");
      }
    }
  }

  void reference(const Json &v, const std::string &path) {
    if (!v.is_string()) {
      add(path, "must be a string");
      return;
    }
    if (!ids_.count(v.get<std::string>()))
      add(path, "unknown atom id \"" + v.get<std::string>() + "\"", ErrorKind::DanglingReference);
  }

  void bonds(const Json &arr) {
    if (!arr.is_array()) {
      add("bonds", "must be an array");
      return;
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = at("bonds", i);
      const Json &b = arr[i];
      if (!keys(b, p, {"source", "target", "order"})) continue;
      if (b.contains("source")) reference(b["source"], p + ".source");
      if (b.contains("target")) reference(b["target"], p + ".target");
      if (b.contains("order")) {
        if (!b["order"].is_number() || !bond_order_from_number(b["order"].get<double>()))
          add(p + ".order", "must be one of 0, 1, 1.5, 2, 3");
        else if (b.contains("source") && b.contains("target") && b["source"].is_string() &&
                 b["target"].is_string() && bond_order_from_number(b["order"].get<double>()) == BondOrder::Aromatic) {
          aromatic_.insert(b["source"].get<std::string>());
          aromatic_.insert(b["target"].get<std::string>());
        }
      }
    }
  }

  void charges(const Json &arr) {
    if (arr.is_null()) return;
    if (!arr.is_array()) {
      add("charges", "must be an array or null");
      return;
    }
    std::set<std::string> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = at("charges", i);
      const Json &c = arr[i];
      if (!keys(c, p, {"atom_id", "formal_charge"})) continue;
      if (c.contains("atom_id")) {
        reference(c["atom_id"], p + ".atom_id");
        if (c["atom_id"].is_string() && !seen.insert(c["atom_id"].get<std::string>()).second)
          add(p + ".atom_id", "atom listed twice");
      }
      if (c.contains("formal_charge")) {
        const Json &q = c["formal_charge"];
        if (!json_integer(q))
          add(p + ".formal_charge", "must be an integer");
        else if (json_int(q) < -5 || json_int(q) > 5)
          add(p + ".formal_charge", "must be within -5..5");
        else if (json_int(q) == 0)
          add(p + ".formal_charge", "zero charge in sparse list");
      }
    }
  }

  void aromatic_n_h(const Json &arr) {
    if (arr.is_null()) return;
    if (!arr.is_array()) {
      add("aromatic_n_h", "must be an array or null");
      return;
    }
    std::set<std::string> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = at("aromatic_n_h", i);
      const Json &e = arr[i];
      if (!keys(e, p, {"atom_id", "hcount"})) continue;
      if (e.contains("atom_id")) {
        reference(e["atom_id"], p + ".atom_id");
        if (e["atom_id"].is_string()) {
          const std::string id = e["atom_id"].get<std::string>();
          if (!seen.insert(id).second) add(p + ".atom_id", "atom listed twice");
          if (ids_.count(id)) {
            auto el = element_of_.find(id);
            if (el == element_of_.end() || el->second != "N" || !aromatic_.count(id))
              add(p + ".atom_id", "not an aromatic nitrogen");
          }
        }
      }
      if (e.contains("hcount")) {
        const Json &h = e["hcount"];
        if (!json_integer(h))
          add(p + ".hcount", "must be an integer");
        else if (json_int(h) < 1 || json_int(h) > 2)
          add(p + ".hcount", "must be 1 or 2");
      }
    }
  }

  const Json &doc_;
  std::vector<Violation> out_;
  std::set<std::string> ids_;
  std::map<std::string, std::string> element_of_;
  std::set<std::string> aromatic_;
};

inline Json parse_json_text(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::exception &e) {
    throw Error(ErrorKind::MalformedJson, e.what());
  }
}

}  // namespace detail

/// Schema and reference violations of an already-parsed JSON value.
inline std::vector<Violation> validate_json(const Json &doc) {
  return detail::DocumentChecker(doc).run();
}

/// Violations of a document; valence problems are not reported here.
inline std::vector<Violation> validate_document(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::exception &e) {
    return {Violation{"", e.what(), ErrorKind::MalformedJson}};
  }
  return validate_json(doc);
}

inline MolJsonParse parse_moljson_json(const Json &doc) {
  std::vector<Violation> v = validate_json(doc);
  if (!v.empty()) {
    // An empty atom list outranks anything else wrong with the document.
    const Violation *first = &v.front();
    for (const Violation &x : v)
      if (x.kind == ErrorKind::EmptyMolecule) first = &x;
    std::string where = first->path.empty() ? "" : first->path + ": ";
    throw Error(first->kind, where + first->reason);
  }
  MolJsonParse out;
  std::map<std::string, int> index;
  std::vector<Atom> atoms;
  for (const Json &a : doc["atoms"]) {
    std::string id = a["id"].get<std::string>();
    index[id] = static_cast<int>(atoms.size());
    out.ids.push_back(id);
    atoms.push_back(Atom{*atomic_number(a["element"].get<std::string>()), 0, 0});
  }
  std::vector<Bond> bonds;
  for (const Json &b : doc["bonds"])
    bonds.push_back(Bond{index.at(b["source"].get<std::string>()), index.at(b["target"].get<std::string>()),
                         *bond_order_from_number(b["order"].get<double>())});
  if (doc["charges"].is_array())
    for (const Json &c : doc["charges"])
      atoms[static_cast<std::size_t>(index.at(c["atom_id"].get<std::string>()))].formal_charge =
          static_cast<int>(detail::json_int(c["formal_charge"]));
  if (doc["aromatic_n_h"].is_array())
    for (const Json &e : doc["aromatic_n_h"])
      atoms[static_cast<std::size_t>(index.at(e["atom_id"].get<std::string>()))].explicit_h =
          static_cast<int>(detail::json_int(e["hcount"]));
  out.mol = build_molecule(std::move(atoms), std::move(bonds));
  if (out.mol.has_aromatic_bonds()) kekulize(out.mol);
  return out;
}

inline MolJsonParse parse_moljson_document(std::string_view text) {
  return parse_moljson_json(detail::parse_json_text(text));
}

inline Molecule parse_moljson(std::string_view text) { return parse_moljson_document(text).mol; }

/// Document model of a molecule. Aromatic nitrogens keep their hydrogens
/// in aromatic_n_h; other unrecoverable counts become "H" atoms.
inline Json to_moljson(const Molecule &mol, IdStyle style = IdStyle::ElementNumbered) {
  Molecule work = express_hydrogens(mol, [](const Molecule &m, int i) {
    if (m.atom(i).element == element::N && m.is_aromatic_atom(i)) return std::min(2, m.total_hydrogens(i));
    return 0;
  });
  std::vector<std::string> ids;
  std::map<std::string, int> counters;
  for (std::size_t i = 0; i < work.atom_count(); ++i) {
    if (style == IdStyle::ANumbered) {
      ids.push_back("a" + std::to_string(i + 1));
      continue;
    }
    std::string sym(work.atom(static_cast<int>(i)).symbol());
    if (sym == "*") sym = "X";
    ids.push_back(sym + std::to_string(++counters[sym]));
  }
  Json doc = Json::object();
  doc["atoms"] = Json::array();
  for (std::size_t i = 0; i < work.atom_count(); ++i)
    doc["atoms"].push_back({{"id", ids[i]}, {"element", std::string(work.atom(static_cast<int>(i)).symbol())}});
  doc["bonds"] = Json::array();
  for (const Bond &b : work.bonds()) {
    Json order = b.order == BondOrder::Aromatic ? Json(1.5) : Json(half_units(b.order) / 2);
    doc["bonds"].push_back({{"source", ids[static_cast<std::size_t>(b.a)]},
                            {"target", ids[static_cast<std::size_t>(b.b)]},
                            {"order", order}});
  }
  Json charges = Json::array();
  Json nh = Json::array();
  for (std::size_t i = 0; i < work.atom_count(); ++i) {
    const Atom &a = work.atom(static_cast<int>(i));
    if (a.formal_charge != 0) charges.push_back({{"atom_id", ids[i]}, {"formal_charge", a.formal_charge}});
    if (a.explicit_h > 0) nh.push_back({{"atom_id", ids[i]}, {"hcount", a.explicit_h}});
  }
  doc["charges"] = charges.empty() ? Json(nullptr) : charges;
  doc["aromatic_n_h"] = nh.empty() ? Json(nullptr) : nh;
  return doc;
}

namespace detail {

// {"k": v, "k2": v2} with a space after each separator.
inline std::string inline_object(const Json &obj) {
  std::string out = "{";
  bool first = true;
  for (const auto &[k, v] : obj.items()) {
    if (!first) out += ", ";
    first = false;
    out += Json(k).dump() + ": " + v.dump();
  }
  return out + "}";
}

inline std::string block_array(const Json &arr) {
  if (arr.is_null()) return "null";
  if (arr.empty()) return "[]";
  std::string out = "[\n";
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out += "    " + inline_object(arr[i]);
    out += i + 1 < arr.size() ? ",\n" : "\n";
  }
  return out + "  ]";
}

}  // namespace detail

/// Serializes with one atom or bond object per line.
inline std::string write_moljson(const Molecule &mol, IdStyle style = IdStyle::ElementNumbered) {
  Json doc = to_moljson(mol, style);
  std::string out = "{\n";
  out += "  \"atoms\": " + detail::block_array(doc["atoms"]) + ",\n";
  out += "  \"bonds\": " + detail::block_array(doc["bonds"]) + ",\n";
  out += "  \"charges\": " + detail::block_array(doc["charges"]) + ",\n";
  out += "  \"aromatic_n_h\": " + detail::block_array(doc["aromatic_n_h"]) + "\n";
  return out + "}\n";
}

/// Structured-output schema for MolJSON answers. The enum-ranges variant
/// spells integer ranges out as enumerations.
inline Json emit_schema(SchemaVariant variant = SchemaVariant::Standard) {
  Json elements = Json::array();
  for (std::string_view s : kElementSymbols) elements.push_back(std::string(s));

  Json charge = {{"type", "integer"}};
  Json hcount = {{"type", "integer"}};
  if (variant == SchemaVariant::Standard) {
    charge["minimum"] = -5;
    charge["maximum"] = 5;
    hcount["minimum"] = 1;
    hcount["maximum"] = 2;
  } else {
    charge["enum"] = {-5, -4, -3, -2, -1, 1, 2, 3, 4, 5};
    hcount["enum"] = {1, 2};
  }

  Json atom_props = Json::object();
  atom_props["id"] = {{"type", "string"}, {"description", "Unique atom id."}};
  atom_props["element"] = {{"type", "string"},
                           {"enum", elements},
                           {"description", "Element symbol like 'C' or 'Cl', or '*' dummy atom."}};
  Json bond_props = Json::object();
  bond_props["source"] = {{"type", "string"}};
  bond_props["target"] = {{"type", "string"}};
  bond_props["order"] = {{"type", "number"},
                         {"enum", {0, 1, 1.5, 2, 3}},
                         {"description", "Bond order. Aromatic bonds are 1.5. ZERO bonds are 0."}};

  auto object = [](Json props, std::vector<std::string> required) {
    Json o = Json::object();
    o["type"] = "object";
    o["additionalProperties"] = false;
    o["properties"] = std::move(props);
    o["required"] = std::move(required);
    return o;
  };

  Json props = Json::object();
  props["atoms"] = {{"type", "array"}, {"items", object(atom_props, {"id", "element"})}};
  props["bonds"] = {{"type", "array"}, {"items", object(bond_props, {"source", "target", "order"})}};
  props["charges"] = {{"type", {"array", "null"}},
                      {"description", "Sparse list of NON-ZERO formal charges. Null means none."},
                      {"items", object({{"atom_id", {{"type", "string"}}}, {"formal_charge", charge}},
                                       {"atom_id", "formal_charge"})}};
  props["aromatic_n_h"] = {
      {"type", {"array", "null"}},
      {"description", "Sparse list of aromatic nitrogens with explicit hydrogen count. Null means none."},
      {"items", object({{"atom_id", {{"type", "string"}}}, {"hcount", hcount}}, {"atom_id", "hcount"})}};

  Json schema = Json::object();
  schema["type"] = "object";
  schema["additionalProperties"] = false;
  schema["required"] = {"atoms", "bonds", "charges", "aromatic_n_h"};
  schema["properties"] = std::move(props);
  return schema;
}

/// {"<key>": <type>} schema used for every non-MolJSON answer.
inline Json single_key_schema(const std::string &key, const std::string &type = "string") {
  Json schema = Json::object();
  schema["type"] = "object";
  schema["additionalProperties"] = false;
  schema["required"] = {key};
  schema["properties"] = Json::object();
  schema["properties"][key] = {{"type", type}};
  return schema;
}

}  // namespace moljson
