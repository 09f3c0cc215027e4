#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace idips {

// Validator for the subset of JSON Schema the committed schemas use: type,
// properties, required, additionalProperties, items, minItems, maxItems,
// enum, const, minimum, maximum, oneOf, anyOf and local "#/$defs/..." refs.
class JsonSchema {
 public:
  explicit JsonSchema(nlohmann::json schema) : root_(std::move(schema)) {}

  // Empty when valid; otherwise one message per violation, prefixed with the
  // instance path ("$.transitions[0].stage: ...").
  std::vector<std::string> validate(const nlohmann::json& doc) const;
  bool valid(const nlohmann::json& doc) const { return validate(doc).empty(); }

 private:
  void check(const nlohmann::json& schema, const nlohmann::json& doc, const std::string& path,
             std::vector<std::string>& errors) const;
  const nlohmann::json& resolve(const nlohmann::json& schema) const;

  nlohmann::json root_;
};

// Loads `<schema dir>/<name>.schema.json`.
JsonSchema load_schema(const std::string& name);

// Throws SchemaError listing the violations.
void require_valid(const JsonSchema& schema, const nlohmann::json& doc, const std::string& what);

}  // namespace idips
