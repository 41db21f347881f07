#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "abphase/vec.hpp"

namespace abphase {

/// Scalar field chi(x, y) parsed from text.
///
/// Grammar: numbers, the identifiers x, y and pi, binary + - * /, unary
/// minus, parentheses, and the functions sin, cos, sqrt (one argument) and
/// atan2, pow (two arguments). The gradient is exact: evaluation carries
/// forward-mode derivatives, so a winding function such as atan2(y, x) has a
/// single-valued gradient even though its value jumps across a branch cut.
class Expression {
 public:
  Expression();  // the zero field

  /// Throws ParseError; the column is 1-based within `text`.
  static Expression parse(std::string_view text);

  /// Parses and evaluates an expression that must not reference x or y.
  static double evaluate_constant(std::string_view text);

  double value(const Point2& p) const;
  Vec2 gradient(const Point2& p) const;
  const std::string& text() const { return text_; }
  bool depends_on_position() const { return uses_position_; }

  enum class Op {
    constant, var_x, var_y, add, sub, mul, div, neg, sin, cos, sqrt, atan2, pow
  };
  struct Instr {
    Op op;
    double value = 0.0;
  };

 private:
  std::vector<Instr> code_;
  std::string text_;
  bool uses_position_ = false;
};

}  // namespace abphase
