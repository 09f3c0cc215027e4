#pragma once

#include <optional>
#include <string>
#include <vector>

#include "idips/dimension.hpp"

namespace idips {

// Operator semantics the runtime knows how to evaluate. A domain file picks a
// subset and attaches type signatures to them.
enum class OpCode {
  Norm,
  Abs,
  VecX,
  VecY,
  Angle,
  FreePathLength,
  Dist,
  AngleDist,
  Add,
  Sub,
  Mul,
  Div,
};

std::optional<OpCode> op_code_from_name(const std::string& name);

// A type pattern in a signature. Dimensions are either concrete or built from
// the two dimension variables D and E: "D", "E", "D*E", "D/E".
struct TypePattern {
  enum class DimForm { Concrete, VarD, VarE, Product, Quotient };
  TypeKind kind = TypeKind::Scalar;
  DimForm form = DimForm::Concrete;
  Dimension concrete;

  // "bool", "scalar D", "vec D", "scalar [1,0,0]", "scalar D*E", ...
  static TypePattern parse(const std::string& text);
  std::string str() const;
};

struct OpSignature {
  std::vector<TypePattern> args;
  TypePattern result;
};

struct OpDef {
  std::string name;
  OpCode code;
  std::vector<OpSignature> signatures;
  bool commutative = false;
  bool enumerate = true;  // used by expression enumeration
  int arity() const;
};

struct InputDef {
  std::string name;
  AspType type;
};

struct DomainDefinition {
  std::string name;
  std::vector<std::string> actions;
  std::vector<InputDef> inputs;
  std::vector<OpDef> ops;

  bool has_action(const std::string& a) const;
  const InputDef* find_input(const std::string& name) const;
  const OpDef* find_op(const std::string& name) const;

  // Result type of applying `op` to `args`, or nullopt when no signature
  // matches. Dimension variables are instantiated per call.
  std::optional<AspType> apply_signature(const OpDef& op,
                                         const std::vector<AspType>& args) const;
};

DomainDefinition load_domain(const std::string& path);
DomainDefinition parse_domain_json(const std::string& text);
std::string domain_to_json(const DomainDefinition& dom);

// Built-in social navigation domain (same content as data/social_domain.json).
const DomainDefinition& social_domain();

}  // namespace idips
