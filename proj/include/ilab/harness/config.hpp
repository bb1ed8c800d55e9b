#pragma once

// TOML experiment configuration with environment overrides.
//
// Every key may be overridden by ISAACS_LAB_<SECTION>_<KEY> (upper case,
// non-alphanumerics replaced by '_'). The override text is parsed as a TOML
// value, so `ISAACS_LAB_FREEZE_AMPLITUDES="[0.5, 0.25]"` works as expected;
// text that is not a valid TOML value is taken as a bare string.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>

#include "ilab/core.hpp"

namespace ilab::harness {

/// Malformed, missing or out-of-range configuration. The CLI maps it to exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

inline constexpr std::string_view kEnvPrefix = "ISAACS_LAB_";

inline std::string env_name(std::string_view section, std::string_view key) {
  std::string out(kEnvPrefix);
  auto add = [&out](std::string_view s) {
    for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c)) : '_');
  };
  if (!section.empty()) {
    add(section);
    out.push_back('_');
  }
  add(key);
  return out;
}

class Config {
 public:
  Config() = default;

  static Config parse(std::string_view text, std::string source = "<string>") {
    Config c;
    c.source_ = std::move(source);
    try {
      c.root_ = toml::parse(text, c.source_);
    } catch (const toml::parse_error& e) {
      std::ostringstream os;
      os << c.source_ << ":" << e.source().begin.line << ": " << e.description();
      throw ConfigError(os.str());
    }
    return c;
  }

  static Config load(const std::string& path) {
    Config c;
    c.source_ = path;
    try {
      c.root_ = toml::parse_file(path);
    } catch (const toml::parse_error& e) {
      std::ostringstream os;
      os << path << ":" << e.source().begin.line << ": " << e.description();
      throw ConfigError(os.str());
    }
    return c;
  }

  const std::string& source() const { return source_; }

  bool has_section(std::string_view section) const { return root_[section].is_table(); }

  /// Rejects keys of `section` outside `allowed`, so typos do not silently fall back to defaults.
  void check_keys(std::string_view section, const std::vector<std::string_view>& allowed) const {
    const auto* tbl = root_[section].as_table();
    if (!tbl) return;
    for (const auto& [k, v] : *tbl) {
      (void)v;
      if (std::find(allowed.begin(), allowed.end(), k.str()) == allowed.end())
        throw ConfigError(source_ + ": unknown key " + std::string(section) + "." + std::string(k.str()));
    }
  }

  /// Disable environment overrides (tests use this for hermetic runs).
  void set_env_overrides(bool on) { env_ = on; }

  double number(std::string_view section, std::string_view key, std::optional<double> fallback = {}) const {
    const auto n = lookup(section, key);
    if (!n) return fallback ? *fallback : missing<double>(section, key);
    if (auto v = n->value<double>()) return *v;
    throw type_error(section, key, "a number");
  }

  std::int64_t integer(std::string_view section, std::string_view key,
                       std::optional<std::int64_t> fallback = {}) const {
    const auto n = lookup(section, key);
    if (!n) return fallback ? *fallback : missing<std::int64_t>(section, key);
    if (n->is_integer()) return *n->value<std::int64_t>();
    throw type_error(section, key, "an integer");
  }

  bool boolean(std::string_view section, std::string_view key, std::optional<bool> fallback = {}) const {
    const auto n = lookup(section, key);
    if (!n) return fallback ? *fallback : missing<bool>(section, key);
    if (n->is_boolean()) return *n->value<bool>();
    throw type_error(section, key, "a boolean");
  }

  std::string string(std::string_view section, std::string_view key,
                     std::optional<std::string> fallback = {}) const {
    const auto n = lookup(section, key);
    if (!n) return fallback ? *fallback : missing<std::string>(section, key);
    if (n->is_string()) return *n->value<std::string>();
    throw type_error(section, key, "a string");
  }

  std::vector<double> numbers(std::string_view section, std::string_view key,
                              std::optional<std::vector<double>> fallback = {}) const {
    const auto n = lookup(section, key);
    if (!n) return fallback ? *fallback : missing<std::vector<double>>(section, key);
    const auto* arr = n->as_array();
    if (!arr) throw type_error(section, key, "an array of numbers");
    std::vector<double> out;
    for (const auto& e : *arr) {
      auto v = e.value<double>();
      if (!v) throw type_error(section, key, "an array of numbers");
      out.push_back(*v);
    }
    return out;
  }

  std::vector<std::string> strings(std::string_view section, std::string_view key,
                                   std::optional<std::vector<std::string>> fallback = {}) const {
    const auto n = lookup(section, key);
    if (!n) return fallback ? *fallback : missing<std::vector<std::string>>(section, key);
    const auto* arr = n->as_array();
    if (!arr) throw type_error(section, key, "an array of strings");
    std::vector<std::string> out;
    for (const auto& e : *arr) {
      auto v = e.value<std::string>();
      if (!v) throw type_error(section, key, "an array of strings");
      out.push_back(*v);
    }
    return out;
  }

  /// Range helpers: throw ConfigError naming the key.
  static void require(bool ok, std::string_view section, std::string_view key, std::string_view what) {
    if (!ok) throw ConfigError(std::string(section) + "." + std::string(key) + ": " + std::string(what));
  }

 private:
  /// Env override first, then the file. Returns an owned node so env values
  /// and file values are handled alike.
  std::optional<toml::node_view<const toml::node>> file_node(std::string_view section, std::string_view key) const {
    auto v = section.empty() ? root_[key] : root_[section][key];
    if (!v) return std::nullopt;
    return v;
  }

  struct Lookup {
    std::optional<toml::table> env_table;  // holds the parsed override
    toml::node_view<const toml::node> view;
    explicit operator bool() const { return static_cast<bool>(view); }
    const toml::node* operator->() const { return view.node(); }
  };

  Lookup lookup(std::string_view section, std::string_view key) const {
    Lookup out;
    if (env_) {
      if (const char* text = std::getenv(env_name(section, key).c_str())) {
        toml::table t;
        try {
          t = toml::parse("v = " + std::string(text));
        } catch (const toml::parse_error&) {
          t.insert("v", std::string(text));
        }
        out.env_table = std::move(t);
        out.view = toml::node_view<const toml::node>(out.env_table->get("v"));
        return out;
      }
    }
    if (auto n = file_node(section, key)) out.view = *n;
    return out;
  }

  template <class T>
  T missing(std::string_view section, std::string_view key) const {
    throw ConfigError(source_ + ": missing required key " + std::string(section) + "." + std::string(key));
  }

  ConfigError type_error(std::string_view section, std::string_view key, std::string_view want) const {
    return ConfigError(source_ + ": " + std::string(section) + "." + std::string(key) + " must be " +
                       std::string(want));
  }

  toml::table root_;
  std::string source_ = "<empty>";
  bool env_ = true;
};

}  // namespace ilab::harness
