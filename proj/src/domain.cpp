#include "idips/domain.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "idips/errors.hpp"

namespace idips {

using nlohmann::json;

std::optional<OpCode> op_code_from_name(const std::string& name) {
  static const std::map<std::string, OpCode> kNames = {
      {"norm", OpCode::Norm},   {"abs", OpCode::Abs},
      {"vx", OpCode::VecX},     {"vy", OpCode::VecY},
      {"angle", OpCode::Angle}, {"freePathLength", OpCode::FreePathLength},
      {"dist", OpCode::Dist},   {"angleDist", OpCode::AngleDist},
      {"+", OpCode::Add},       {"-", OpCode::Sub},
      {"*", OpCode::Mul},       {"/", OpCode::Div},
  };
  auto it = kNames.find(name);
  if (it == kNames.end()) return std::nullopt;
  return it->second;
}

namespace {

Dimension parse_dim_literal(const std::string& text) {
  Dimension d;
  char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  std::istringstream in(text);
  in >> c1 >> d.exps[0] >> c2 >> d.exps[1] >> c3 >> d.exps[2] >> c4;
  if (!in || c1 != '[' || c2 != ',' || c3 != ',' || c4 != ']') {
    throw Error(ErrorCode::SchemaError, "bad dimension literal '" + text + "'");
  }
  return d;
}

}  // namespace

TypePattern TypePattern::parse(const std::string& text) {
  TypePattern p;
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  if (kind == "bool") {
    p.kind = TypeKind::Bool;
    return p;
  }
  if (kind == "scalar") {
    p.kind = TypeKind::Scalar;
  } else if (kind == "vec") {
    p.kind = TypeKind::Vector;
  } else {
    throw Error(ErrorCode::SchemaError, "bad type pattern '" + text + "'");
  }
  std::string rest;
  std::getline(in, rest);
  rest.erase(0, rest.find_first_not_of(' '));
  if (rest == "D") {
    p.form = DimForm::VarD;
  } else if (rest == "E") {
    p.form = DimForm::VarE;
  } else if (rest == "D*E") {
    p.form = DimForm::Product;
  } else if (rest == "D/E") {
    p.form = DimForm::Quotient;
  } else {
    p.form = DimForm::Concrete;
    p.concrete = parse_dim_literal(rest);
  }
  return p;
}

std::string TypePattern::str() const {
  if (kind == TypeKind::Bool) return "bool";
  std::string s = kind == TypeKind::Scalar ? "scalar " : "vec ";
  switch (form) {
    case DimForm::Concrete: return s + concrete.str();
    case DimForm::VarD: return s + "D";
    case DimForm::VarE: return s + "E";
    case DimForm::Product: return s + "D*E";
    case DimForm::Quotient: return s + "D/E";
  }
  return s;
}

int OpDef::arity() const {
  return signatures.empty() ? 0 : static_cast<int>(signatures.front().args.size());
}

bool DomainDefinition::has_action(const std::string& a) const {
  for (const auto& x : actions) {
    if (x == a) return true;
  }
  return false;
}

const InputDef* DomainDefinition::find_input(const std::string& name) const {
  for (const auto& i : inputs) {
    if (i.name == name) return &i;
  }
  return nullptr;
}

const OpDef* DomainDefinition::find_op(const std::string& name) const {
  for (const auto& o : ops) {
    if (o.name == name) return &o;
  }
  return nullptr;
}

std::optional<AspType> DomainDefinition::apply_signature(
    const OpDef& op, const std::vector<AspType>& args) const {
  for (const auto& sig : op.signatures) {
    if (sig.args.size() != args.size()) continue;
    std::optional<Dimension> d, e;
    bool ok = true;
    for (size_t i = 0; i < args.size() && ok; ++i) {
      const TypePattern& pat = sig.args[i];
      if (pat.kind != args[i].kind) {
        ok = false;
        break;
      }
      if (pat.kind == TypeKind::Bool) continue;
      switch (pat.form) {
        case TypePattern::DimForm::Concrete:
          ok = pat.concrete == args[i].dim;
          break;
        case TypePattern::DimForm::VarD:
          if (!d) d = args[i].dim;
          ok = *d == args[i].dim;
          break;
        case TypePattern::DimForm::VarE:
          if (!e) e = args[i].dim;
          ok = *e == args[i].dim;
          break;
        default:
          ok = false;
      }
    }
    if (!ok) continue;
    const TypePattern& r = sig.result;
    if (r.kind == TypeKind::Bool) return AspType::boolean();
    Dimension rd;
    switch (r.form) {
      case TypePattern::DimForm::Concrete: rd = r.concrete; break;
      case TypePattern::DimForm::VarD: rd = d.value_or(Dimension{}); break;
      case TypePattern::DimForm::VarE: rd = e.value_or(Dimension{}); break;
      case TypePattern::DimForm::Product:
        rd = d.value_or(Dimension{}) * e.value_or(Dimension{});
        break;
      case TypePattern::DimForm::Quotient:
        rd = d.value_or(Dimension{}) / e.value_or(Dimension{});
        break;
    }
    return AspType{r.kind, rd};
  }
  return std::nullopt;
}

DomainDefinition parse_domain_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::SchemaError, std::string("domain: ") + ex.what());
  }
  DomainDefinition dom;
  try {
    dom.name = j.value("name", "");
    for (const auto& a : j.at("actions")) dom.actions.push_back(a.get<std::string>());
    for (const auto& in : j.at("inputs")) {
      TypePattern p = TypePattern::parse(in.at("type").get<std::string>());
      if (p.kind != TypeKind::Bool && p.form != TypePattern::DimForm::Concrete) {
        throw Error(ErrorCode::SchemaError, "input types must be concrete");
      }
      dom.inputs.push_back({in.at("name").get<std::string>(), AspType{p.kind, p.concrete}});
    }
    for (const auto& o : j.at("ops")) {
      OpDef def;
      def.name = o.at("name").get<std::string>();
      auto code = op_code_from_name(def.name);
      if (!code) throw Error(ErrorCode::UnknownOperator, "domain: unknown op '" + def.name + "'");
      def.code = *code;
      def.commutative = o.value("commutative", false);
      def.enumerate = o.value("enumerate", true);
      for (const auto& s : o.at("signatures")) {
        OpSignature sig;
        for (const auto& a : s.at("args")) sig.args.push_back(TypePattern::parse(a.get<std::string>()));
        sig.result = TypePattern::parse(s.at("result").get<std::string>());
        def.signatures.push_back(std::move(sig));
      }
      dom.ops.push_back(std::move(def));
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::SchemaError, std::string("domain: ") + ex.what());
  }
  return dom;
}

DomainDefinition load_domain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open domain file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_domain_json(ss.str());
}

std::string domain_to_json(const DomainDefinition& dom) {
  json j;
  j["v"] = 1;
  j["name"] = dom.name;
  j["actions"] = dom.actions;
  j["inputs"] = json::array();
  for (const auto& in : dom.inputs) {
    TypePattern p{in.type.kind, TypePattern::DimForm::Concrete, in.type.dim};
    j["inputs"].push_back({{"name", in.name}, {"type", p.str()}});
  }
  j["ops"] = json::array();
  for (const auto& o : dom.ops) {
    json jo = {{"name", o.name}, {"commutative", o.commutative}, {"enumerate", o.enumerate}};
    jo["signatures"] = json::array();
    for (const auto& s : o.signatures) {
      json args = json::array();
      for (const auto& a : s.args) args.push_back(a.str());
      jo["signatures"].push_back({{"args", args}, {"result", s.result.str()}});
    }
    j["ops"].push_back(jo);
  }
  return j.dump(2);
}

const DomainDefinition& social_domain() {
  static const DomainDefinition dom = parse_domain_json(
#include "social_domain.inc"
  );
  return dom;
}

}  // namespace idips
