#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace perdiff {

class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error, unknown identifier, or arity mismatch. offset() is the byte
/// position in the source text where the problem was detected.
class ParseError : public ExprError {
 public:
  enum class Kind { Syntax, UnknownIdentifier, Arity };

  ParseError(Kind kind, std::size_t offset, const std::string& what);

  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Raised by evaluation instead of returning NaN or infinity.
class DomainError : public ExprError {
 public:
  using ExprError::ExprError;
};

enum class Func { Sin, Cos, Tan, Tanh, Atan, Exp, Ln, Abs, Sign, Min, Max, LogFade };

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Op { Const, Pi, VarT, VarX, Neg, Add, Sub, Mul, Div, Pow, Call };

  Op op = Op::Const;
  double value = 0.0;  // Const only
  Func func = Func::Sin;  // Call only
  std::vector<ExprNodePtr> args;
};

/// Immutable parsed expression in the two variables t and x.
class Expr {
 public:
  Expr() = default;
  explicit Expr(ExprNodePtr root, std::string source = {});

  /// Evaluates with t passed as a real equal to the integer time index.
  double eval(double t, double x) const;

  /// Fully parenthesized text that parses back to an identical tree.
  std::string print() const;

  const std::string& source() const { return source_; }
  const ExprNode& root() const { return *root_; }
  bool empty() const { return root_ == nullptr; }

 private:
  ExprNodePtr root_;
  std::string source_;
};

/// Grammar, loosest binding first:
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | '+' unary | power
///   power   := primary ('^' unary)?            right-associative
///   primary := number | 't' | 'x' | 'pi' | name | func '(' sum (',' sum)* ')' | '(' sum ')'
/// A bare built-in name (currently `logfade`) stands for that function applied to x.
Expr parse(std::string_view text);

/// Structural equality of two trees (constants compared bit-for-bit).
bool same_tree(const ExprNode& a, const ExprNode& b);

std::string_view func_name(Func f);

/// The log-fading nonlinearity h(x) = k(x) x + m1 sgn(x)|x|^beta + m2 with
/// k(x) = -1/ln(-x) for x <= -e, x/e on (-e, e), 1/ln(x) for x >= e.
double logfade(double x, double m1 = 0.1, double beta = 0.5, double m2 = 0.1);
double logfade_k(double x);

}  // namespace perdiff
