// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <set>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "stepspec/core/types.hpp"

namespace stepspec {

using json = nlohmann::json;

// Raised for malformed or unknown keys. `path` is the dotted key path.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Reads fields out of a JSON object and rejects any key it was not asked
// about once finish() is called.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path);

  template <typename T>
  void optional(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const SchemaError&) {
      throw;
    } catch (const std::exception& e) {
      throw SchemaError(child(key), e.what());
    }
  }

  template <typename T>
  void required(const char* key, T& out) {
    if (!j_.contains(key)) throw SchemaError(child(key), "missing required key");
    optional(key, out);
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const;

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void to_json(json& j, const UtilityScore& s);
void from_json(const json& j, UtilityScore& s);
void to_json(json& j, const AcceptanceThreshold& t);
void from_json(const json& j, AcceptanceThreshold& t);
void to_json(json& j, StepProducer p);
void from_json(const json& j, StepProducer& p);
void to_json(json& j, Phase p);
void from_json(const json& j, Phase& p);
void to_json(json& j, BackendRole r);
void from_json(const json& j, BackendRole& r);
void to_json(json& j, const LatencyBreakdown& l);
void from_json(const json& j, LatencyBreakdown& l);
void to_json(json& j, const ReasoningStep& s);
void from_json(const json& j, ReasoningStep& s);
void to_json(json& j, const BackendProfile& p);
void from_json(const json& j, BackendProfile& p);
void to_json(json& j, const EngineConfig& c);
void from_json(const json& j, EngineConfig& c);
void to_json(json& j, const TrajectoryState& t);
void from_json(const json& j, TrajectoryState& t);

// from_json for EngineConfig with the dotted path used in error messages.
EngineConfig engine_config_from_json(const json& j, const std::string& path);
BackendProfile backend_profile_from_json(const json& j,
                                         const std::string& path);

}  // namespace stepspec
