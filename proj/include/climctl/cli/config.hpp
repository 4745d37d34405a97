#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "climctl/core/error.hpp"

namespace climctl::cli {

using nlohmann::json;

/// Malformed or invalid scenario document. Maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable input or unwritable output. Maps to exit code 1.
class IoError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kSchemaVersion = 1;

/// A parsed scenario document: the value tree, the source line of every
/// node (keyed by JSON pointer), and the set of pointers a command consumed.
struct Document {
  json root;
  std::map<std::string, int> lines;
  std::string source = "<config>";
  std::filesystem::path base_dir;

  std::set<std::string> used;
  std::set<std::string> opaque;  // consumed wholesale, children not checked

  int line_of(std::string ptr) const {
    while (true) {
      auto it = lines.find(ptr);
      if (it != lines.end()) return it->second;
      if (ptr.empty()) return 0;
      ptr.erase(ptr.rfind('/'));
    }
  }

  /// "/a/0/b" -> "a[0].b"
  static std::string dotted(const std::string& ptr) {
    std::string out;
    std::size_t pos = 1;
    while (pos <= ptr.size() && !ptr.empty()) {
      const std::size_t next = ptr.find('/', pos);
      std::string tok = json::json_pointer("/" + ptr.substr(pos, next - pos)).back();
      if (!tok.empty() && tok.find_first_not_of("0123456789") == std::string::npos) out += "[" + tok + "]";
      else out += (out.empty() ? "" : ".") + tok;
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& ptr, const std::string& message) const {
    std::ostringstream m;
    m << source;
    if (const int line = line_of(ptr)) m << ':' << line;
    m << ": " << (ptr.empty() ? std::string("document") : dotted(ptr)) << ": " << message;
    throw ConfigError(m.str());
  }

  /// Rejects keys below `ptr` that no command read, catching typos.
  void check_unused(const std::string& ptr = "") const {
    const json& node = root.at(json::json_pointer(ptr));
    if (opaque.count(ptr)) return;
    if (node.is_object()) {
      for (const auto& [key, value] : node.items()) {
        const std::string child = ptr + "/" + escape(key);
        if (!used.count(child)) fail(child, "unknown field");
        check_unused(child);
      }
    } else if (node.is_array()) {
      for (std::size_t i = 0; i < node.size(); ++i) check_unused(ptr + "/" + std::to_string(i));
    }
  }

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }
};

namespace detail {

inline json yaml_scalar(const YAML::Node& n) {
  const std::string& s = n.Scalar();
  if (n.Tag() == "!") return s;  // quoted: always a string
  if (s.empty() || s == "~" || s == "null") return nullptr;
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  std::int64_t i = 0;
  const char* end = s.data() + s.size();
  if (auto r = std::from_chars(s.data(), end, i); r.ec == std::errc() && r.ptr == end) return i;
  double d = 0.0;
  if (auto r = std::from_chars(s.data(), end, d); r.ec == std::errc() && r.ptr == end) return d;
  return s;
}

inline json yaml_to_json(const YAML::Node& n, const std::string& ptr, Document& doc) {
  doc.lines.emplace(ptr, n.Mark().line + 1);
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : n) {
        const std::string key = kv.first.Scalar();
        const std::string child = ptr + "/" + Document::escape(key);
        doc.lines[child] = kv.first.Mark().line + 1;
        if (obj.contains(key)) doc.fail(child, "duplicate key");
        obj[key] = yaml_to_json(kv.second, child, doc);
      }
      return obj;
    }
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (std::size_t i = 0; i < n.size(); ++i) arr.push_back(yaml_to_json(n[i], ptr + "/" + std::to_string(i), doc));
      return arr;
    }
    case YAML::NodeType::Scalar:
      return yaml_scalar(n);
    default:
      return nullptr;
  }
}

}  // namespace detail

/// Parses YAML-style text. JSON is accepted too, being valid flow-style YAML.
inline Document parse_document(const std::string& text, const std::string& source = "<config>",
                               const std::filesystem::path& base_dir = {}) {
  Document doc;
  doc.source = source;
  doc.base_dir = base_dir;
  YAML::Node node;
  try {
    node = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": parse error: " + e.msg);
  }
  doc.root = detail::yaml_to_json(node, "", doc);
  if (!doc.root.is_object()) doc.fail("", "expected a mapping at top level");
  return doc;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Document load_document(const std::filesystem::path& path) {
  return parse_document(read_text_file(path), path.filename().string(), path.parent_path());
}

/// Typed, validating view of one mapping in a Document. Every value read is
/// recorded, defaults included, under the same path in `resolved`.
class Reader {
 public:
  Reader(Document& doc, std::string ptr, json& resolved) : doc_(&doc), ptr_(std::move(ptr)), out_(&resolved) {
    if (!node().is_object()) doc.fail(ptr_, "expected a mapping");
    if (!out_->is_object()) *out_ = json::object();
  }

  bool has(const std::string& key) const { return node().contains(key) && !node()[key].is_null(); }
  const std::string& pointer() const { return ptr_; }
  std::string path(const std::string& key) const { return ptr_ + "/" + Document::escape(key); }
  Document& document() const { return *doc_; }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    doc_->fail(path(key), message);
  }

  double number(const std::string& key) const { return get_number(key, std::nullopt); }
  double number(const std::string& key, double fallback) const { return get_number(key, fallback); }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    const double v = get_number(key, fallback);
    if (!(v > 0.0)) fail(key, "must be > 0 (got " + fmt(v) + ")");
    return v;
  }

  double nonnegative(const std::string& key, double fallback) const {
    const double v = get_number(key, fallback);
    if (!(v >= 0.0)) fail(key, "must be >= 0 (got " + fmt(v) + ")");
    return v;
  }

  double in_range(const std::string& key, double lo, double hi, std::optional<double> fallback = std::nullopt) const {
    const double v = get_number(key, fallback);
    if (!(v >= lo && v <= hi)) fail(key, "must lie in [" + fmt(lo) + ", " + fmt(hi) + "] (got " + fmt(v) + ")");
    return v;
  }

  std::uint64_t count(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt,
                      std::uint64_t min = 1) const {
    std::uint64_t v = 0;
    if (!has(key)) {
      if (!fallback) fail(key, "required field is missing");
      v = *fallback;
    } else {
      const json& j = mark(key);
      if (!j.is_number_integer() || j.get<std::int64_t>() < 0) fail(key, "must be a non-negative integer");
      v = j.get<std::uint64_t>();
    }
    if (v < min) fail(key, "must be >= " + std::to_string(min));
    (*out_)[key] = v;
    return v;
  }

  bool flag(const std::string& key, bool fallback) const {
    bool v = fallback;
    if (has(key)) {
      const json& j = mark(key);
      if (!j.is_boolean()) fail(key, "must be true or false");
      v = j.get<bool>();
    }
    (*out_)[key] = v;
    return v;
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
    std::string v;
    if (!has(key)) {
      if (!fallback) fail(key, "required field is missing");
      v = *fallback;
    } else {
      const json& j = mark(key);
      if (!j.is_string()) fail(key, "must be a string");
      v = j.get<std::string>();
    }
    (*out_)[key] = v;
    return v;
  }

  std::string choice(const std::string& key, const std::vector<std::string>& options,
                     std::optional<std::string> fallback = std::nullopt) const {
    const std::string v = text(key, std::move(fallback));
    for (const auto& o : options)
      if (o == v) return v;
    std::string all;
    for (const auto& o : options) all += (all.empty() ? "" : ", ") + o;
    fail(key, "must be one of {" + all + "} (got '" + v + "')");
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) const {
    std::vector<double> v;
    if (!has(key)) {
      if (!fallback) fail(key, "required field is missing");
      v = *fallback;
    } else {
      const json& j = mark(key);
      if (!j.is_array()) fail(key, "must be a list of numbers");
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) doc_->fail(path(key) + "/" + std::to_string(i), "must be a number");
        v.push_back(j[i].get<double>());
      }
    }
    (*out_)[key] = v;
    return v;
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) const {
    std::vector<std::string> v = std::move(fallback);
    if (has(key)) {
      const json& j = mark(key);
      if (!j.is_array()) fail(key, "must be a list of strings");
      v.clear();
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string()) doc_->fail(path(key) + "/" + std::to_string(i), "must be a string");
        v.push_back(j[i].get<std::string>());
      }
    }
    (*out_)[key] = v;
    return v;
  }

  /// Nested mapping; an absent optional section reads as empty so its
  /// defaults still land in the resolved config.
  Reader section(const std::string& key, bool required = true) const {
    if (!has(key)) {
      if (required) fail(key, "required section is missing");
      doc_->root[json::json_pointer(ptr_)][key] = json::object();
    }
    mark(key);
    return Reader(*doc_, path(key), (*out_)[key]);
  }

  std::vector<Reader> list(const std::string& key) const {
    if (!has(key)) fail(key, "required list is missing");
    const json& j = mark(key);
    if (!j.is_array() || j.empty()) fail(key, "must be a non-empty list");
    json& arr = (*out_)[key] = json::array();
    for (std::size_t i = 0; i < j.size(); ++i) arr.push_back(json::object());
    std::vector<Reader> out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.emplace_back(*doc_, path(key) + "/" + std::to_string(i), arr[i]);
    return out;
  }

  /// Raw subtree, consumed as a whole.
  const json& raw(const std::string& key) const {
    if (!has(key)) fail(key, "required field is missing");
    const json& j = mark(key);
    doc_->opaque.insert(path(key));
    (*out_)[key] = j;
    return j;
  }

  /// Overrides what the resolved config records for `key`.
  void record(const std::string& key, json value) const { (*out_)[key] = std::move(value); }

  static std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  }

 private:
  const json& node() const { return doc_->root.at(json::json_pointer(ptr_)); }

  const json& mark(const std::string& key) const {
    doc_->used.insert(path(key));
    return node()[key];
  }

  double get_number(const std::string& key, std::optional<double> fallback) const {
    double v = 0.0;
    if (!has(key)) {
      if (!fallback) fail(key, "required field is missing");
      v = *fallback;
    } else {
      const json& j = mark(key);
      if (!j.is_number()) fail(key, "must be a number");
      v = j.get<double>();
      if (!std::isfinite(v)) fail(key, "must be finite");
    }
    (*out_)[key] = v;
    return v;
  }

  Document* doc_;
  std::string ptr_;
  json* out_;
};

}  // namespace climctl::cli
