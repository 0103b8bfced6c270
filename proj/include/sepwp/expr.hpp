#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sepwp/error.hpp"

/// Scalar expression language for bifunctions such as f(x,p) = p^2 - x^2.
///
/// Text is tokenized, parsed against a list of declared vector variables and
/// compiled to a small stack program. A parsed Expression is immutable, so
/// evaluation may run from any number of threads without locking.
namespace sepwp::expr {

enum class TokenKind { Number, Identifier, Operator, LParen, RParen, Comma };

struct Token {
  TokenKind kind;
  std::string lexeme;
  std::size_t position;  // byte offset into the source text
};

/// Splits text into tokens. Throws LexError on any character outside the grammar.
std::vector<Token> tokenize(std::string_view text);

/// A named real vector variable. Components are referenced as x1, x2, ...;
/// when dim == 1 the bare name refers to the only component.
struct VariableDecl {
  std::string name;
  std::size_t dim = 1;
};

enum class BinaryOp { Add, Sub, Mul, Div };
enum class CompareOp { Less, LessEqual, Greater, GreaterEqual, Equal };
enum class Function { Exp, Abs, Sqrt, Min, Max, Norm };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Constant {
  double value;
};
struct VariableRef {
  std::string name;
  std::size_t slot;
  std::size_t component;
  bool whole;  // whole vector, only legal as a norm() argument
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs, rhs;
};
struct Power {
  NodePtr base;
  double exponent;  // folded constant
};
struct Call {
  Function fn;
  std::vector<NodePtr> args;
};
struct Conditional {
  NodePtr condition, then_branch, else_branch;
};
struct Comparison {
  CompareOp op;
  NodePtr lhs, rhs;
};

struct Node {
  std::variant<Constant, VariableRef, Negate, Binary, Power, Call, Conditional, Comparison> data;
};

/// Structural equality of two trees.
bool structurally_equal(const Node& a, const Node& b);

/// Name -> value vector, used by the convenience evaluation entry point.
using Bindings = std::map<std::string, std::vector<double>>;

class Expression {
 public:
  Expression() = default;

  const Node& root() const { return *root_; }
  const std::vector<VariableDecl>& variables() const { return variables_; }
  bool empty() const { return root_ == nullptr; }

  /// Fast path: one span per declared variable, in declaration order.
  double evaluate(std::span<const std::span<const double>> slots) const;
  double evaluate(const Bindings& bindings) const;

  /// Canonical, fully parenthesized text form. Parsing it yields an equal tree.
  std::string print() const;

  friend bool operator==(const Expression& a, const Expression& b) {
    if (a.empty() || b.empty()) return a.empty() == b.empty();
    return structurally_equal(*a.root_, *b.root_);
  }

 private:
  friend Expression parse(std::span<const Token>, std::vector<VariableDecl>);

  enum class OpCode : std::uint8_t {
    Const, Var, VecSquaredNorm, Neg, Add, Sub, Mul, Div, Pow, Square,
    Exp, Abs, Sqrt, Min, Max, Sum,
    Less, LessEqual, Greater, GreaterEqual, Equal,
    JumpIfZero, Jump,
  };
  struct Instr {
    OpCode op;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double value = 0.0;
  };

  void compile();
  void emit(const Node& node);

  NodePtr root_;
  std::vector<VariableDecl> variables_;
  std::vector<Instr> program_;
  std::size_t max_stack_ = 0;
};

/// Parses a token stream. Throws ParseError or UnknownIdentifier.
Expression parse(std::span<const Token> tokens, std::vector<VariableDecl> variables);
Expression parse(std::string_view text, std::vector<VariableDecl> variables);

std::string to_string(const Node& node, const std::vector<VariableDecl>& variables);

}  // namespace sepwp::expr
