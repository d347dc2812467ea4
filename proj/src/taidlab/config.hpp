// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace taidlab {

/// Flat `key = value` document. `#` starts a comment; blank lines are ignored.
class ConfigDocument {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  /// Throws Error(kConfig) with "<source>:<line>: ..." on malformed lines or
  /// duplicate keys.
  static ConfigDocument parse(std::string_view text, std::string source_name = "<config>");
  static ConfigDocument load(const std::string& path);

  const std::string& source_name() const noexcept { return source_; }
  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }
  const Entry* find(const std::string& key) const;
  bool contains(const std::string& key) const { return find(key) != nullptr; }

  void set(const std::string& key, std::string value);
  void erase(const std::string& key) { entries_.erase(key); }

  /// Sorted `key = value` lines; the input to the manifest config hash.
  std::string canonical_text() const;

 private:
  std::string source_;
  std::map<std::string, Entry> entries_;
};

enum class ValueType { kInt, kReal, kBool, kString, kChoice, kRealList };

struct KeySpec {
  std::string_view key;
  ValueType type;
  std::string_view default_value;
  std::vector<std::string_view> choices;  // kChoice only
};

/// Every key an experiment config may set.
const std::vector<KeySpec>& experiment_schema();
const KeySpec* find_key_spec(std::string_view key);

/// Checks one value against its key's type; returns a diagnostic or nullopt.
std::optional<std::string> check_value(const KeySpec& spec, std::string_view value);

/// One sweep axis: keys that vary together, each with the same number of values.
struct SweepAxis {
  std::string name;
  std::vector<std::string> keys;
  std::vector<std::vector<std::string>> values;  // values[k][i] for keys[k]
  std::size_t size() const { return values.empty() ? 0 : values.front().size(); }
};

/// A document checked against the schema, with sweep axes split out.
class ValidatedConfig {
 public:
  /// Validates every key, value and sweep axis; throws Error(kConfig) naming
  /// the offending line and key.
  explicit ValidatedConfig(ConfigDocument doc);

  const ConfigDocument& document() const noexcept { return doc_; }
  const std::vector<SweepAxis>& axes() const noexcept { return axes_; }

  /// Cartesian product of the axes in first-appearance order; the last axis
  /// varies fastest. No axes gives one empty override set; an axis with no
  /// values gives none.
  std::vector<std::map<std::string, std::string>> expand() const;

  /// Typed view of base values with `overrides` applied.
  class View {
   public:
    View(const ValidatedConfig& config, const std::map<std::string, std::string>* overrides)
        : config_(config), overrides_(overrides) {}

    std::string raw(std::string_view key) const;
    bool is_set(std::string_view key) const;
    std::int64_t integer(std::string_view key) const;
    double real(std::string_view key) const;
    bool boolean(std::string_view key) const;
    std::string string(std::string_view key) const { return raw(key); }
    std::vector<double> real_list(std::string_view key) const;

    /// Diagnostic prefix naming where `key` came from.
    std::string where(std::string_view key) const;

   private:
    const ValidatedConfig& config_;
    const std::map<std::string, std::string>* overrides_;
  };

  View view(const std::map<std::string, std::string>* overrides = nullptr) const {
    return View(*this, overrides);
  }

 private:
  ConfigDocument doc_;
  std::vector<SweepAxis> axes_;
};

}  // namespace taidlab
