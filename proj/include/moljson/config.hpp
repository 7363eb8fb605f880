#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "moljson/error.hpp"
#include "moljson/moljson.hpp"

namespace moljson {

/// TOML-style key/value configuration: [tables], dotted tables, strings,
/// integers, floats, booleans and (possibly multi-line) arrays.
class Config {
 public:
  Config() = default;
  explicit Config(Json root) : root_(std::move(root)) {}

  static Config parse(std::string_view text, const std::string &origin = "<config>");
  static Config load(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  const Json *find(std::string_view dotted) const {
    const Json *cur = &root_;
    std::size_t start = 0;
    while (start <= dotted.size()) {
      auto dot = dotted.find('.', start);
      std::string part(dotted.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
      if (!cur->is_object()) return nullptr;
      auto it = cur->find(part);
      if (it == cur->end()) return nullptr;
      cur = &*it;
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
    return cur;
  }

  template <class T>
  T get(std::string_view dotted, T fallback) const {
    const Json *v = find(dotted);
    if (!v) return fallback;
    try {
      return v->get<T>();
    } catch (const std::exception &) {
      throw Error(ErrorKind::SchemaViolation, "config key " + std::string(dotted) + " has the wrong type");
    }
  }

  const Json &root() const { return root_; }

 private:
  Json root_ = Json::object();
};

namespace detail {

class ConfigParser {
 public:
  ConfigParser(std::string_view text, std::string origin) : s_(text), origin_(std::move(origin)) {}

  Json run() {
    Json root = Json::object();
    Json *table = &root;
    while (pos_ < s_.size()) {
      skip_blank_and_comments();
      if (pos_ >= s_.size()) break;
      if (s_[pos_] == '[') {
        ++pos_;
        std::vector<std::string> path = key_path();
        expect(']');
        table = &root;
        for (const std::string &p : path) {
          Json &next = (*table)[p];
          if (next.is_null()) next = Json::object();
          if (!next.is_object()) fail("table " + p + " redefines a value");
          table = &next;
        }
        end_of_line();
        continue;
      }
      std::vector<std::string> path = key_path();
      skip_ws();
      expect('=');
      skip_ws();
      Json v = value();
      Json *t = table;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        Json &next = (*t)[path[i]];
        if (next.is_null()) next = Json::object();
        t = &next;
      }
      if (t->contains(path.back())) fail("duplicate key " + path.back());
      (*t)[path.back()] = std::move(v);
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string &why) const {
    int line = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i)
      if (s_[i] == '\n') ++line;
    throw Error(ErrorKind::SyntaxError, origin_ + ":" + std::to_string(line) + ": " + why);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  void skip_blank_and_comments() {
    for (;;) {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '#')
      while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '\r') ++pos_;
    if (pos_ < s_.size() && s_[pos_] != '\n') fail("unexpected text after value");
  }

  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::vector<std::string> key_path() {
    std::vector<std::string> out;
    for (;;) {
      skip_ws();
      if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'')) {
        out.push_back(string_value());
      } else {
        std::size_t b = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-'))
          ++pos_;
        if (b == pos_) fail("expected a key");
        out.emplace_back(s_.substr(b, pos_ - b));
      }
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == '.') {
        ++pos_;
        continue;
      }
      return out;
    }
  }

  std::string string_value() {
    const char q = s_[pos_++];
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != q) {
      if (s_[pos_] == '\n') fail("unterminated string");
      char c = s_[pos_++];
      if (q == '"' && c == '\\' && pos_ < s_.size()) {
        char e = s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
        continue;
      }
      out += c;
    }
    expect(q);
    return out;
  }

  Json value() {
    if (pos_ >= s_.size()) fail("missing value");
    char c = s_[pos_];
    if (c == '"' || c == '\'') return string_value();
    if (c == '[') {
      ++pos_;
      Json arr = Json::array();
      for (;;) {
        skip_blank_and_comments();
        if (pos_ < s_.size() && s_[pos_] == ']') {
          ++pos_;
          return arr;
        }
        arr.push_back(value());
        skip_blank_and_comments();
        if (pos_ < s_.size() && s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        skip_blank_and_comments();
        expect(']');
        return arr;
      }
    }
    std::size_t b = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != ',' &&
           s_[pos_] != ']' && s_[pos_] != '#')
      ++pos_;
    std::string tok(s_.substr(b, pos_ - b));
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::string digits;
    for (char d : tok)
      if (d != '_') digits += d;
    try {
      std::size_t used = 0;
      if (digits.find_first_of(".eE") == std::string::npos) {
        long long v = std::stoll(digits, &used);
        if (used == digits.size()) return v;
      } else {
        double v = std::stod(digits, &used);
        if (used == digits.size()) return v;
      }
    } catch (const std::exception &) {
    }
    fail("cannot read value '" + tok + "'");
  }

  std::string_view s_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Config Config::parse(std::string_view text, const std::string &origin) {
  return Config(detail::ConfigParser(text, origin).run());
}

}  // namespace moljson
