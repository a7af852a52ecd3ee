#include "perdiff/expr.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>

namespace perdiff {

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& what)
    : ExprError(what + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset) {}

namespace {

struct FuncInfo {
  Func func;
  std::string_view name;
  int min_arity;
  int max_arity;
};

constexpr std::array<FuncInfo, 12> kFuncs{{
    {Func::Sin, "sin", 1, 1},
    {Func::Cos, "cos", 1, 1},
    {Func::Tan, "tan", 1, 1},
    {Func::Tanh, "tanh", 1, 1},
    {Func::Atan, "atan", 1, 1},
    {Func::Exp, "exp", 1, 1},
    {Func::Ln, "ln", 1, 1},
    {Func::Abs, "abs", 1, 1},
    {Func::Sign, "sign", 1, 1},
    {Func::Min, "min", 2, 2},
    {Func::Max, "max", 2, 2},
    {Func::LogFade, "logfade", 1, 4},
}};

std::optional<FuncInfo> lookup_func(std::string_view name) {
  for (const auto& f : kFuncs) {
    if (f.name == name) return f;
  }
  return std::nullopt;
}

const FuncInfo& info(Func f) {
  for (const auto& fi : kFuncs) {
    if (fi.func == f) return fi;
  }
  throw std::logic_error("unregistered function");
}

ExprNodePtr make(ExprNode::Op op, std::vector<ExprNodePtr> args = {}) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

ExprNodePtr make_const(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprNode::Op::Const;
  n->value = v;
  return n;
}

ExprNodePtr make_call(Func f, std::vector<ExprNodePtr> args) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprNode::Op::Call;
  n->func = f;
  n->args = std::move(args);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprNodePtr run() {
    ExprNodePtr root = sum();
    skip_ws();
    if (pos_ != text_.size()) {
      throw ParseError(ParseError::Kind::Syntax, pos_,
                       "unexpected '" + std::string(1, text_[pos_]) + "'");
    }
    return root;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      throw ParseError(ParseError::Kind::Syntax, pos_, std::string("expected '") + c + "'");
    }
  }

  ExprNodePtr sum() {
    ExprNodePtr lhs = product();
    for (;;) {
      if (accept('+')) {
        lhs = make(ExprNode::Op::Add, {lhs, product()});
      } else if (accept('-')) {
        lhs = make(ExprNode::Op::Sub, {lhs, product()});
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr product() {
    ExprNodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(ExprNode::Op::Mul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make(ExprNode::Op::Div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr unary() {
    if (accept('-')) return make(ExprNode::Op::Neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  ExprNodePtr power() {
    ExprNodePtr base = primary();
    if (accept('^')) {
      return make(ExprNode::Op::Pow, {base, unary()});
    }
    return base;
  }

  ExprNodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) {
      throw ParseError(ParseError::Kind::Syntax, pos_, "unexpected end of expression");
    }
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprNodePtr inner = sum();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return identifier();
    }
    throw ParseError(ParseError::Kind::Syntax, pos_, "unexpected '" + std::string(1, c) + "'");
  }

  ExprNodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    const std::string literal(text_.substr(start, pos_ - start));
    double v = 0.0;
    const auto res = std::from_chars(literal.data(), literal.data() + literal.size(), v);
    if (res.ec != std::errc{} || res.ptr != literal.data() + literal.size() || !std::isfinite(v)) {
      throw ParseError(ParseError::Kind::Syntax, start, "malformed number '" + literal + "'");
    }
    return make_const(v);
  }

  ExprNodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    const auto fn = lookup_func(name);
    skip_ws();
    const bool call = pos_ < text_.size() && text_[pos_] == '(';

    if (!call) {
      if (name == "t") return make(ExprNode::Op::VarT);
      if (name == "x") return make(ExprNode::Op::VarX);
      if (name == "pi") return make(ExprNode::Op::Pi);
      if (fn && fn->func == Func::LogFade) {
        return make_call(Func::LogFade, {make(ExprNode::Op::VarX)});
      }
      if (fn) {
        throw ParseError(ParseError::Kind::Syntax, pos_,
                         "function '" + std::string(name) + "' needs an argument list");
      }
      throw ParseError(ParseError::Kind::UnknownIdentifier, start,
                       "unknown identifier '" + std::string(name) + "'");
    }
    if (!fn) {
      throw ParseError(ParseError::Kind::UnknownIdentifier, start,
                       "unknown function '" + std::string(name) + "'");
    }
    ++pos_;  // '('
    std::vector<ExprNodePtr> args;
    if (!accept(')')) {
      args.push_back(sum());
      while (accept(',')) args.push_back(sum());
      expect(')');
    }
    const int n = static_cast<int>(args.size());
    if (n < fn->min_arity || n > fn->max_arity || (fn->func == Func::LogFade && n != 1 && n != 4)) {
      throw ParseError(ParseError::Kind::Arity, start,
                       "function '" + std::string(name) + "' called with " + std::to_string(n) +
                           " argument(s)");
    }
    return make_call(fn->func, std::move(args));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double checked(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw DomainError(std::string("non-finite result in ") + what);
  }
  return v;
}

double eval_node(const ExprNode& n, double t, double x) {
  using Op = ExprNode::Op;
  switch (n.op) {
    case Op::Const:
      return n.value;
    case Op::Pi:
      return std::numbers::pi;
    case Op::VarT:
      return t;
    case Op::VarX:
      return x;
    case Op::Neg:
      return -eval_node(*n.args[0], t, x);
    case Op::Add:
      return checked(eval_node(*n.args[0], t, x) + eval_node(*n.args[1], t, x), "addition");
    case Op::Sub:
      return checked(eval_node(*n.args[0], t, x) - eval_node(*n.args[1], t, x), "subtraction");
    case Op::Mul:
      return checked(eval_node(*n.args[0], t, x) * eval_node(*n.args[1], t, x), "product");
    case Op::Div: {
      const double num = eval_node(*n.args[0], t, x);
      const double den = eval_node(*n.args[1], t, x);
      if (den == 0.0) throw DomainError("division by zero");
      return checked(num / den, "division");
    }
    case Op::Pow:
      return checked(std::pow(eval_node(*n.args[0], t, x), eval_node(*n.args[1], t, x)), "power");
    case Op::Call:
      break;
  }

  const double a = eval_node(*n.args[0], t, x);
  switch (n.func) {
    case Func::Sin:
      return std::sin(a);
    case Func::Cos:
      return std::cos(a);
    case Func::Tan:
      return checked(std::tan(a), "tan");
    case Func::Tanh:
      return std::tanh(a);
    case Func::Atan:
      return std::atan(a);
    case Func::Exp:
      return checked(std::exp(a), "exp");
    case Func::Ln:
      if (a <= 0.0) throw DomainError("ln of non-positive argument");
      return std::log(a);
    case Func::Abs:
      return std::fabs(a);
    case Func::Sign:
      return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
    case Func::Min:
      return std::fmin(a, eval_node(*n.args[1], t, x));
    case Func::Max:
      return std::fmax(a, eval_node(*n.args[1], t, x));
    case Func::LogFade:
      if (n.args.size() == 4) {
        return checked(logfade(a, eval_node(*n.args[1], t, x), eval_node(*n.args[2], t, x),
                               eval_node(*n.args[3], t, x)),
                       "logfade");
      }
      return checked(logfade(a), "logfade");
  }
  throw std::logic_error("unhandled function");
}

void print_node(const ExprNode& n, std::string& out) {
  using Op = ExprNode::Op;
  auto binary = [&](const char* op) {
    out += '(';
    print_node(*n.args[0], out);
    out += op;
    print_node(*n.args[1], out);
    out += ')';
  };
  switch (n.op) {
    case Op::Const: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case Op::Pi:
      out += "pi";
      return;
    case Op::VarT:
      out += 't';
      return;
    case Op::VarX:
      out += 'x';
      return;
    case Op::Neg:
      out += "(-";
      print_node(*n.args[0], out);
      out += ')';
      return;
    case Op::Add:
      return binary("+");
    case Op::Sub:
      return binary("-");
    case Op::Mul:
      return binary("*");
    case Op::Div:
      return binary("/");
    case Op::Pow:
      return binary("^");
    case Op::Call:
      out += func_name(n.func);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ',';
        print_node(*n.args[i], out);
      }
      out += ')';
      return;
  }
}

}  // namespace

Expr::Expr(ExprNodePtr root, std::string source) : root_(std::move(root)), source_(std::move(source)) {}

double Expr::eval(double t, double x) const {
  if (!root_) throw ExprError("evaluating an empty expression");
  if (!std::isfinite(t) || !std::isfinite(x)) throw DomainError("non-finite argument");
  return eval_node(*root_, t, x);
}

std::string Expr::print() const {
  std::string out;
  if (root_) print_node(*root_, out);
  return out;
}

Expr parse(std::string_view text) {
  return Expr(Parser(text).run(), std::string(text));
}

bool same_tree(const ExprNode& a, const ExprNode& b) {
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  if (a.op == ExprNode::Op::Const && std::bit_cast<std::uint64_t>(a.value) !=
                                         std::bit_cast<std::uint64_t>(b.value)) {
    return false;
  }
  if (a.op == ExprNode::Op::Call && a.func != b.func) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_tree(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

std::string_view func_name(Func f) { return info(f).name; }

double logfade_k(double x) {
  constexpr double e = std::numbers::e;
  if (x <= -e) return -1.0 / std::log(-x);
  if (x >= e) return 1.0 / std::log(x);
  return x / e;
}

double logfade(double x, double m1, double beta, double m2) {
  const double signed_pow = std::copysign(std::pow(std::fabs(x), beta), x);
  return logfade_k(x) * x + m1 * (x == 0.0 ? 0.0 : signed_pow) + m2;
}

}  // namespace perdiff
