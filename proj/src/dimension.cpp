#include "idips/dimension.hpp"

namespace idips {

std::string Dimension::str() const {
  return "[" + std::to_string(exps[0]) + "," + std::to_string(exps[1]) + "," +
         std::to_string(exps[2]) + "]";
}

std::string AspType::str() const {
  switch (kind) {
    case TypeKind::Bool:
      return "bool";
    case TypeKind::Scalar:
      return "scalar" + dim.str();
    case TypeKind::Vector:
      return "vec" + dim.str();
  }
  return "?";
}

}  // namespace idips
