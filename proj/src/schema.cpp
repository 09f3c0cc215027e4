#include "idips/schema.hpp"

#include <fstream>
#include <sstream>

#include "idips/errors.hpp"

namespace idips {

using json = nlohmann::json;

namespace {

bool type_matches(const std::string& type, const json& doc) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "number") return doc.is_number();
  if (type == "integer") return doc.is_number_integer();
  if (type == "boolean") return doc.is_boolean();
  if (type == "null") return doc.is_null();
  return false;
}

}  // namespace

const json& JsonSchema::resolve(const json& schema) const {
  auto it = schema.find("$ref");
  if (it == schema.end()) return schema;
  const std::string ref = it->get<std::string>();
  const std::string prefix = "#/$defs/";
  if (ref.rfind(prefix, 0) != 0) throw Error(ErrorCode::SchemaError, "unsupported schema reference " + ref);
  const auto& defs = root_.at("$defs");
  auto def = defs.find(ref.substr(prefix.size()));
  if (def == defs.end()) throw Error(ErrorCode::SchemaError, "unknown schema reference " + ref);
  return resolve(*def);
}

void JsonSchema::check(const json& raw, const json& doc, const std::string& path,
                       std::vector<std::string>& errors) const {
  const json& schema = resolve(raw);
  if (schema.is_boolean()) {
    if (!schema.get<bool>()) errors.push_back(path + ": not allowed");
    return;
  }
  if (auto t = schema.find("type"); t != schema.end()) {
    bool ok = false;
    if (t->is_string()) {
      ok = type_matches(t->get<std::string>(), doc);
    } else {
      for (const auto& alt : *t) ok = ok || type_matches(alt.get<std::string>(), doc);
    }
    if (!ok) {
      errors.push_back(path + ": expected " + t->dump());
      return;
    }
  }
  if (auto c = schema.find("const"); c != schema.end() && *c != doc) {
    errors.push_back(path + ": expected " + c->dump());
  }
  if (auto e = schema.find("enum"); e != schema.end()) {
    bool found = false;
    for (const auto& v : *e) found = found || v == doc;
    if (!found) errors.push_back(path + ": " + doc.dump() + " not in " + e->dump());
  }
  if (doc.is_number()) {
    double v = doc.get<double>();
    if (auto m = schema.find("minimum"); m != schema.end() && v < m->get<double>()) {
      errors.push_back(path + ": below minimum " + m->dump());
    }
    if (auto m = schema.find("maximum"); m != schema.end() && v > m->get<double>()) {
      errors.push_back(path + ": above maximum " + m->dump());
    }
  }
  if (doc.is_object()) {
    if (auto req = schema.find("required"); req != schema.end()) {
      for (const auto& k : *req) {
        if (!doc.contains(k.get<std::string>())) errors.push_back(path + "." + k.get<std::string>() + ": missing");
      }
    }
    const json* props = nullptr;
    if (auto p = schema.find("properties"); p != schema.end()) props = &*p;
    auto extra = schema.find("additionalProperties");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const std::string sub = path + "." + it.key();
      if (props && props->contains(it.key())) {
        check((*props)[it.key()], it.value(), sub, errors);
      } else if (extra != schema.end()) {
        if (extra->is_boolean()) {
          if (!extra->get<bool>()) errors.push_back(sub + ": unexpected property");
        } else {
          check(*extra, it.value(), sub, errors);
        }
      }
    }
  }
  if (doc.is_array()) {
    if (auto m = schema.find("minItems"); m != schema.end() && doc.size() < m->get<size_t>()) {
      errors.push_back(path + ": fewer than " + m->dump() + " items");
    }
    if (auto m = schema.find("maxItems"); m != schema.end() && doc.size() > m->get<size_t>()) {
      errors.push_back(path + ": more than " + m->dump() + " items");
    }
    if (auto items = schema.find("items"); items != schema.end()) {
      for (size_t i = 0; i < doc.size(); ++i) check(*items, doc[i], path + "[" + std::to_string(i) + "]", errors);
    }
  }
  auto count_valid = [&](const json& alts) {
    size_t n = 0;
    for (const auto& alt : alts) {
      std::vector<std::string> sub;
      check(alt, doc, path, sub);
      if (sub.empty()) ++n;
    }
    return n;
  };
  if (auto one = schema.find("oneOf"); one != schema.end()) {
    size_t n = count_valid(*one);
    if (n != 1) errors.push_back(path + ": matches " + std::to_string(n) + " alternatives of oneOf");
  }
  if (auto any = schema.find("anyOf"); any != schema.end()) {
    if (count_valid(*any) == 0) errors.push_back(path + ": matches no alternative of anyOf");
  }
}

std::vector<std::string> JsonSchema::validate(const json& doc) const {
  std::vector<std::string> errors;
  check(root_, doc, "$", errors);
  return errors;
}

JsonSchema load_schema(const std::string& name) {
  const std::string path = std::string(IDIPS_SCHEMA_DIR) + "/" + name + ".schema.json";
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open schema " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return JsonSchema(json::parse(ss.str()));
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::SchemaError, path + ": " + ex.what());
  }
}

void require_valid(const JsonSchema& schema, const json& doc, const std::string& what) {
  auto errors = schema.validate(doc);
  if (errors.empty()) return;
  std::string msg = what + " violates its schema:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw Error(ErrorCode::SchemaError, msg);
}

}  // namespace idips
