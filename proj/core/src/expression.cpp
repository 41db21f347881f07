#include "abphase/expression.hpp"

#include <charconv>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "abphase/errors.hpp"

namespace abphase {

namespace {

struct Dual {
  double v = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  std::vector<Expression::Instr> run() {
    expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return std::move(code_);
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression: " + msg, 1, pos_ + 1);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  void emit(Op op, double v = 0.0) { code_.push_back({op, v}); }

  void expr() {
    term();
    for (;;) {
      if (accept('+')) {
        term();
        emit(Op::add);
      } else if (accept('-')) {
        term();
        emit(Op::sub);
      } else {
        return;
      }
    }
  }

  void term() {
    unary();
    for (;;) {
      if (accept('*')) {
        unary();
        emit(Op::mul);
      } else if (accept('/')) {
        unary();
        emit(Op::div);
      } else {
        return;
      }
    }
  }

  void unary() {
    if (accept('-')) {
      unary();
      emit(Op::neg);
    } else if (accept('+')) {
      unary();
    } else {
      primary();
    }
  }

  void primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (accept('(')) {
      expr();
      expect(')');
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string_view name = s_.substr(start, pos_ - start);
      call_or_name(name, start);
      return;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  void number() {
    double v = 0.0;
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    emit(Op::constant, v);
  }

  void call_or_name(std::string_view name, std::size_t start) {
    if (name == "x") return emit(Op::var_x);
    if (name == "y") return emit(Op::var_y);
    if (name == "pi") return emit(Op::constant, std::numbers::pi);
    int arity = 0;
    Op op{};
    if (name == "sin") {
      arity = 1;
      op = Op::sin;
    } else if (name == "cos") {
      arity = 1;
      op = Op::cos;
    } else if (name == "sqrt") {
      arity = 1;
      op = Op::sqrt;
    } else if (name == "atan2") {
      arity = 2;
      op = Op::atan2;
    } else if (name == "pow") {
      arity = 2;
      op = Op::pow;
    } else {
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "'");
    }
    expect('(');
    expr();
    for (int i = 1; i < arity; ++i) {
      expect(',');
      expr();
    }
    expect(')');
    emit(op);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::vector<Expression::Instr> code_;
};

Dual evaluate(const std::vector<Expression::Instr>& code, const Point2& p) {
  using Op = Expression::Op;
  Dual stack[64];
  std::vector<Dual> heap;
  // Expressions deeper than the fixed stack fall back to the heap.
  Dual* st = stack;
  if (code.size() > 64) {
    heap.resize(code.size());
    st = heap.data();
  }
  std::size_t n = 0;
  for (const auto& in : code) {
    switch (in.op) {
      case Op::constant:
        st[n++] = {in.value, 0.0, 0.0};
        break;
      case Op::var_x:
        st[n++] = {p.x, 1.0, 0.0};
        break;
      case Op::var_y:
        st[n++] = {p.y, 0.0, 1.0};
        break;
      case Op::neg: {
        Dual& a = st[n - 1];
        a = {-a.v, -a.dx, -a.dy};
        break;
      }
      case Op::sin: {
        Dual& a = st[n - 1];
        const double d = std::cos(a.v);
        a = {std::sin(a.v), d * a.dx, d * a.dy};
        break;
      }
      case Op::cos: {
        Dual& a = st[n - 1];
        const double d = -std::sin(a.v);
        a = {std::cos(a.v), d * a.dx, d * a.dy};
        break;
      }
      case Op::sqrt: {
        Dual& a = st[n - 1];
        const double r = std::sqrt(a.v);
        const double d = 0.5 / r;
        a = {r, d * a.dx, d * a.dy};
        break;
      }
      default: {
        const Dual b = st[--n];
        Dual& a = st[n - 1];
        switch (in.op) {
          case Op::add:
            a = {a.v + b.v, a.dx + b.dx, a.dy + b.dy};
            break;
          case Op::sub:
            a = {a.v - b.v, a.dx - b.dx, a.dy - b.dy};
            break;
          case Op::mul:
            a = {a.v * b.v, a.dx * b.v + a.v * b.dx, a.dy * b.v + a.v * b.dy};
            break;
          case Op::div: {
            const double q = a.v / b.v;
            a = {q, (a.dx - q * b.dx) / b.v, (a.dy - q * b.dy) / b.v};
            break;
          }
          case Op::atan2: {
            // atan2(a, b): d = (b da - a db) / (a^2 + b^2)
            const double r2 = a.v * a.v + b.v * b.v;
            a = {std::atan2(a.v, b.v), (b.v * a.dx - a.v * b.dx) / r2,
                 (b.v * a.dy - a.v * b.dy) / r2};
            break;
          }
          case Op::pow: {
            const double v = std::pow(a.v, b.v);
            const double da = b.v == 0.0 ? 0.0 : b.v * std::pow(a.v, b.v - 1.0);
            const bool exp_varies = b.dx != 0.0 || b.dy != 0.0;
            const double db = exp_varies ? v * std::log(a.v) : 0.0;
            a = {v, da * a.dx + db * b.dx, da * a.dy + db * b.dy};
            break;
          }
          default:
            break;
        }
      }
    }
  }
  return st[0];
}

}  // namespace

Expression::Expression() : code_{{Op::constant, 0.0}}, text_("0") {}

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.code_ = Parser(text).run();
  e.text_ = std::string(text);
  for (const auto& in : e.code_) {
    if (in.op == Op::var_x || in.op == Op::var_y) e.uses_position_ = true;
  }
  return e;
}

double Expression::evaluate_constant(std::string_view text) {
  const Expression e = parse(text);
  if (e.uses_position_) {
    const auto col = text.find_first_of("xy");
    throw ParseError("expression: constant expected, found a position variable", 1,
                     col == std::string_view::npos ? 1 : col + 1);
  }
  return e.value({});
}

double Expression::value(const Point2& p) const { return evaluate(code_, p).v; }

Vec2 Expression::gradient(const Point2& p) const {
  const Dual d = evaluate(code_, p);
  return {d.dx, d.dy};
}

}  // namespace abphase
