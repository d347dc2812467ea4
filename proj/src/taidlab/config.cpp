// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include "taidlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "taidlab/error.hpp"
#include "taidlab/text.hpp"

namespace taidlab {

namespace {

std::string at_line(const std::string& source, int line) {
  return source + ":" + std::to_string(line) + ": ";
}

bool valid_key(std::string_view key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  return std::all_of(key.begin(), key.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_';
  });
}

std::optional<bool> parse_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  return std::nullopt;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ',')) out.emplace_back(trim(part));
  return out;
}

}  // namespace

ConfigDocument ConfigDocument::parse(std::string_view text, std::string source_name) {
  ConfigDocument doc;
  doc.source_ = std::move(source_name);
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    require(eq != std::string_view::npos, ErrorCode::kConfig,
            at_line(doc.source_, line_no) + "expected 'key = value'");
    const std::string key(trim(body.substr(0, eq)));
    require(valid_key(key), ErrorCode::kConfig,
            at_line(doc.source_, line_no) + "invalid key '" + key + "'");
    const auto [it, inserted] =
        doc.entries_.emplace(key, Entry{std::string(trim(body.substr(eq + 1))), line_no});
    require(inserted, ErrorCode::kConfig,
            at_line(doc.source_, line_no) + "duplicate key '" + key + "' (first set on line " +
                std::to_string(it->second.line) + ")");
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kConfig, "cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path);
}

const ConfigDocument::Entry* ConfigDocument::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void ConfigDocument::set(const std::string& key, std::string value) {
  auto& entry = entries_[key];
  entry.value = std::move(value);
}

std::string ConfigDocument::canonical_text() const {
  std::string out;
  for (const auto& [key, entry] : entries_) out += key + " = " + entry.value + "\n";
  return out;
}

const std::vector<KeySpec>& experiment_schema() {
  using enum ValueType;
  static const std::vector<KeySpec> schema = {
      {"experiment.name", kString, "experiment", {}},
      {"experiment.kind", kChoice, "distill", {"distill", "theory"}},
      {"seed", kInt, "0", {}},
      {"output.dir", kString, "taidlab_out", {}},
      {"output.save_models", kBool, "false", {}},

      {"corpus.source", kChoice, "zipf", {"zipf", "bimodal"}},
      {"corpus.vocab", kInt, "16", {}},
      {"corpus.order", kInt, "1", {}},
      {"corpus.zipf_s", kReal, "1.1", {}},
      {"corpus.noise", kReal, "1.0", {}},
      {"corpus.length", kInt, "2000", {}},
      {"corpus.sequences", kInt, "8", {}},
      {"bimodal.shared", kInt, "4", {}},
      {"bimodal.specific", kInt, "4", {}},
      {"bimodal.shared_logit", kReal, "3.0", {}},
      {"bimodal.specific_logit", kReal, "4.0", {}},
      {"bimodal.background_logit", kReal, "0.0", {}},

      {"teacher.kind", kChoice, "fitted", {"fitted", "source"}},
      {"teacher.order", kInt, "1", {}},
      {"teacher.contexts", kInt, "0", {}},
      {"teacher.smoothing", kReal, "0.1", {}},

      {"student.kind", kChoice, "tabular", {"tabular", "linear"}},
      {"student.order", kInt, "1", {}},
      {"student.contexts", kInt, "0", {}},
      {"student.buckets", kInt, "0", {}},
      {"student.init", kChoice, "zero", {"zero", "random"}},
      {"student.init_scale", kReal, "0.01", {}},

      {"train.objective", kChoice, "KL",
       {"KL", "RKL", "TVD", "GJSD", "SKL", "SRKL", "TAID", "TAID_LINEAR"}},
      {"train.learning_rate", kReal, "0.5", {}},
      {"train.steps", kInt, "200", {}},
      {"train.batch_size", kInt, "32", {}},
      {"train.lambda", kReal, "0.1", {}},
      {"train.optimizer", kChoice, "gd", {"gd", "adamw"}},
      {"train.weight_decay", kReal, "0.0", {}},

      {"taid.alpha", kReal, "5e-4", {}},
      {"taid.beta", kReal, "0.99", {}},
      {"taid.t_start", kReal, "0.2", {}},
      {"taid.t_end", kReal, "1.0", {}},
      {"taid.epsilon", kReal, "1e-8", {}},
      {"taid.adaptive", kBool, "true", {}},

      {"eval.reference", kChoice, "source", {"source", "teacher"}},
      {"eval.positions", kInt, "2000", {}},
      {"eval.length", kInt, "2000", {}},
      {"eval.sequences", kInt, "4", {}},
      {"analysis.head_k", kInt, "10", {}},
      {"analysis.tail_lo", kReal, "80", {}},
      {"analysis.tail_hi", kReal, "100", {}},

      {"theory.trials", kInt, "200", {}},
      {"theory.mode", kChoice, "TAID", {"TAID", "SELF_DISTILL"}},
      {"theory.alpha_mode", kChoice, "D_MIN", {"D_MIN", "D_MAX", "FIXED"}},
      {"theory.alpha", kReal, "0", {}},
      {"theory.n_min", kInt, "4", {}},
      {"theory.n_max", kInt, "64", {}},
      {"theory.kappa_min", kReal, "1", {}},
      {"theory.kappa_max", kReal, "10", {}},
      {"theory.t_min", kInt, "10", {}},
      {"theory.t_max", kInt, "200", {}},
      {"theory.r0_min", kReal, "1.5", {}},
      {"theory.r0_max", kReal, "20", {}},
      {"theory.epsilon", kReal, "0.05", {}},
      {"theory.corollary_factor", kReal, "0", {}},
      {"theory.write_traces", kBool, "false", {}},
      {"theory.y0", kRealList, "", {}},
      {"theory.gram", kChoice, "identity", {"identity", "rbf", "random"}},
      {"theory.bandwidth", kReal, "0.5", {}},
      {"theory.kappa", kReal, "2", {}},
      {"theory.horizon", kInt, "10", {}},
      {"theory.continue_after_collapse", kBool, "false", {}},
  };
  return schema;
}

const KeySpec* find_key_spec(std::string_view key) {
  const auto& schema = experiment_schema();
  const auto it = std::find_if(schema.begin(), schema.end(),
                               [&](const KeySpec& spec) { return spec.key == key; });
  return it == schema.end() ? nullptr : &*it;
}

std::optional<std::string> check_value(const KeySpec& spec, std::string_view value) {
  switch (spec.type) {
    case ValueType::kInt:
      if (!parse_int(value)) return "expected an integer, got '" + std::string(value) + "'";
      break;
    case ValueType::kReal: {
      const auto v = parse_double(value);
      if (!v || !std::isfinite(*v)) return "expected a finite number, got '" + std::string(value) + "'";
      break;
    }
    case ValueType::kBool:
      if (!parse_bool(value)) return "expected true/false, got '" + std::string(value) + "'";
      break;
    case ValueType::kString:
      break;
    case ValueType::kChoice:
      if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
        std::string allowed;
        for (auto c : spec.choices) allowed += (allowed.empty() ? "" : "|") + std::string(c);
        return "expected one of " + allowed + ", got '" + std::string(value) + "'";
      }
      break;
    case ValueType::kRealList:
      for (const auto& item : split_list(value)) {
        const auto v = parse_double(item);
        if (!v || !std::isfinite(*v)) return "expected a comma-separated list of numbers";
      }
      break;
  }
  return std::nullopt;
}

ValidatedConfig::ValidatedConfig(ConfigDocument doc) : doc_(std::move(doc)) {
  std::vector<std::pair<int, std::string>> axis_order;
  std::map<std::string, SweepAxis> axes;
  for (const auto& [key, entry] : doc_.entries()) {
    const std::string where = at_line(doc_.source_name(), entry.line);
    if (key.rfind("sweep.", 0) == 0) {
      const std::string rest = key.substr(6);
      const auto dot = rest.find('.');
      require(dot != std::string::npos && dot > 0, ErrorCode::kConfig,
              where + "sweep keys look like sweep.<axis>.<key>, got '" + key + "'");
      const std::string axis_name = rest.substr(0, dot);
      const std::string target = rest.substr(dot + 1);
      const KeySpec* spec = find_key_spec(target);
      require(spec != nullptr, ErrorCode::kConfig,
              where + "sweep axis '" + axis_name + "' names unknown key '" + target + "'");
      require(spec->type != ValueType::kRealList, ErrorCode::kConfig,
              where + "list-valued key '" + target + "' cannot be swept");
      const auto values = split_list(entry.value);
      for (const auto& v : values) {
        if (auto problem = check_value(*spec, v)) {
          fail(ErrorCode::kConfig, where + key + ": " + *problem);
        }
      }
      auto& axis = axes[axis_name];
      if (axis.name.empty()) {
        axis.name = axis_name;
        axis_order.emplace_back(entry.line, axis_name);
      }
      require(axis.values.empty() || axis.size() == values.size(), ErrorCode::kConfig,
              where + "sweep axis '" + axis_name + "' has keys with different value counts");
      axis.keys.push_back(target);
      axis.values.push_back(values);
      continue;
    }
    const KeySpec* spec = find_key_spec(key);
    require(spec != nullptr, ErrorCode::kConfig, where + "unknown key '" + key + "'");
    if (auto problem = check_value(*spec, entry.value)) {
      fail(ErrorCode::kConfig, where + key + ": " + *problem);
    }
  }
  for (auto& [name, axis] : axes) {
    for (const auto& target : axis.keys) {
      for (const auto& other : axes) {
        if (other.first == name) continue;
        require(std::find(other.second.keys.begin(), other.second.keys.end(), target) ==
                    other.second.keys.end(),
                ErrorCode::kConfig,
                doc_.source_name() + ": key '" + target + "' is swept by more than one axis");
      }
    }
  }
  std::sort(axis_order.begin(), axis_order.end());
  for (const auto& [line, name] : axis_order) axes_.push_back(std::move(axes[name]));
}

std::vector<std::map<std::string, std::string>> ValidatedConfig::expand() const {
  std::vector<std::map<std::string, std::string>> runs(1);
  for (const auto& axis : axes_) {
    std::vector<std::map<std::string, std::string>> next;
    for (const auto& partial : runs) {
      for (std::size_t i = 0; i < axis.size(); ++i) {
        auto combined = partial;
        for (std::size_t k = 0; k < axis.keys.size(); ++k) combined[axis.keys[k]] = axis.values[k][i];
        next.push_back(std::move(combined));
      }
    }
    runs = std::move(next);
  }
  return runs;
}

std::string ValidatedConfig::View::raw(std::string_view key) const {
  const std::string k(key);
  if (overrides_) {
    if (const auto it = overrides_->find(k); it != overrides_->end()) return it->second;
  }
  if (const auto* entry = config_.doc_.find(k)) return entry->value;
  const KeySpec* spec = find_key_spec(key);
  require(spec != nullptr, ErrorCode::kConfig, "internal: unknown config key '" + k + "'");
  return std::string(spec->default_value);
}

bool ValidatedConfig::View::is_set(std::string_view key) const {
  const std::string k(key);
  return (overrides_ && overrides_->count(k)) || config_.doc_.contains(k);
}

std::string ValidatedConfig::View::where(std::string_view key) const {
  const std::string k(key);
  if (overrides_ && overrides_->count(k)) return config_.doc_.source_name() + ": sweep value of " + k + ": ";
  if (const auto* entry = config_.doc_.find(k)) return at_line(config_.doc_.source_name(), entry->line) + k + ": ";
  return config_.doc_.source_name() + ": default of " + k + ": ";
}

std::int64_t ValidatedConfig::View::integer(std::string_view key) const {
  const auto v = parse_int(raw(key));
  require(v.has_value(), ErrorCode::kConfig, where(key) + "expected an integer");
  return *v;
}

double ValidatedConfig::View::real(std::string_view key) const {
  const auto v = parse_double(raw(key));
  require(v.has_value() && std::isfinite(*v), ErrorCode::kConfig, where(key) + "expected a number");
  return *v;
}

bool ValidatedConfig::View::boolean(std::string_view key) const {
  const auto v = parse_bool(raw(key));
  require(v.has_value(), ErrorCode::kConfig, where(key) + "expected true/false");
  return *v;
}

std::vector<double> ValidatedConfig::View::real_list(std::string_view key) const {
  std::vector<double> out;
  for (const auto& item : split_list(raw(key))) {
    const auto v = parse_double(item);
    require(v.has_value(), ErrorCode::kConfig, where(key) + "bad list entry '" + item + "'");
    out.push_back(*v);
  }
  return out;
}

}  // namespace taidlab
