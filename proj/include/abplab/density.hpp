#pragma once

#include "abplab/mesh.hpp"

#include <memory>
#include <stdexcept>
#include <string>

namespace abp {

class DensityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Density given by an arithmetic expression in the ambient coordinates.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('-' | '+') unary | power
///   power   := primary ('^' unary)?          right associative
///   primary := number | x1..x4 | exp '(' expr ')' | '(' expr ')'
///
/// The Unicode minus sign and multiplication sign are accepted as '-' and '*'.
class DensityExpression {
 public:
  struct Node;

  static DensityExpression parse(const std::string& text);

  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Per-vertex values; throws DensityError if a coordinate exceeds the
  /// ambient dimension or any value is not finite and positive.
  ScalarField evaluate(const Mesh& mesh) const;

  const std::string& text() const { return text_; }
  /// Largest coordinate index referenced (0 if none).
  int max_coordinate() const { return max_coordinate_; }

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
  int max_coordinate_ = 0;
};

}  // namespace abp
