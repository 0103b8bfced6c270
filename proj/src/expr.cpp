#include "sepwp/expr.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <optional>

namespace sepwp::expr {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Whole UTF-8 sequence starting at text[i], for error messages.
std::string utf8_char_at(std::string_view text, std::size_t i) {
  const auto lead = static_cast<unsigned char>(text[i]);
  std::size_t len = 1;
  if ((lead & 0xE0) == 0xC0) len = 2;
  else if ((lead & 0xF0) == 0xE0) len = 3;
  else if ((lead & 0xF8) == 0xF0) len = 4;
  return std::string(text.substr(i, len));
}

std::string format_number(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

std::optional<Function> function_named(std::string_view name) {
  if (name == "exp") return Function::Exp;
  if (name == "abs") return Function::Abs;
  if (name == "sqrt") return Function::Sqrt;
  if (name == "min") return Function::Min;
  if (name == "max") return Function::Max;
  if (name == "norm") return Function::Norm;
  return std::nullopt;
}

const char* function_name(Function fn) {
  switch (fn) {
    case Function::Exp: return "exp";
    case Function::Abs: return "abs";
    case Function::Sqrt: return "sqrt";
    case Function::Min: return "min";
    case Function::Max: return "max";
    case Function::Norm: return "norm";
  }
  return "?";
}

const char* compare_symbol(CompareOp op) {
  switch (op) {
    case CompareOp::Less: return "<";
    case CompareOp::LessEqual: return "<=";
    case CompareOp::Greater: return ">";
    case CompareOp::GreaterEqual: return ">=";
    case CompareOp::Equal: return "==";
  }
  return "?";
}

char binary_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return '+';
    case BinaryOp::Sub: return '-';
    case BinaryOp::Mul: return '*';
    case BinaryOp::Div: return '/';
  }
  return '?';
}

NodePtr make(auto&& data) { return std::make_shared<const Node>(Node{std::forward<decltype(data)>(data)}); }

bool has_variables(const Node& node) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) return false;
        else if constexpr (std::is_same_v<T, VariableRef>) return true;
        else if constexpr (std::is_same_v<T, Negate>) return has_variables(*n.operand);
        else if constexpr (std::is_same_v<T, Binary>) return has_variables(*n.lhs) || has_variables(*n.rhs);
        else if constexpr (std::is_same_v<T, Power>) return has_variables(*n.base);
        else if constexpr (std::is_same_v<T, Call>) {
          for (const auto& a : n.args)
            if (has_variables(*a)) return true;
          return false;
        } else if constexpr (std::is_same_v<T, Conditional>)
          return has_variables(*n.condition) || has_variables(*n.then_branch) ||
                 has_variables(*n.else_branch);
        else return has_variables(*n.lhs) || has_variables(*n.rhs);
      },
      node.data);
}

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + what);
  return v;
}

double apply_pow(double base, double exponent) {
  if (base == 0.0 && exponent < 0.0) throw EvalError("0 raised to a negative power");
  if (exponent == 2.0) return checked(base * base, "^");
  return checked(std::pow(base, exponent), "^");
}

// Evaluates a variable-free subtree; used to fold exponents at parse time.
double fold_constant(const Node& node) {
  return std::visit(
      [](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) return n.value;
        else if constexpr (std::is_same_v<T, VariableRef>) throw EvalError("variable in constant");
        else if constexpr (std::is_same_v<T, Negate>) return -fold_constant(*n.operand);
        else if constexpr (std::is_same_v<T, Power>) return apply_pow(fold_constant(*n.base), n.exponent);
        else if constexpr (std::is_same_v<T, Binary>) {
          const double a = fold_constant(*n.lhs);
          const double b = fold_constant(*n.rhs);
          switch (n.op) {
            case BinaryOp::Add: return checked(a + b, "+");
            case BinaryOp::Sub: return checked(a - b, "-");
            case BinaryOp::Mul: return checked(a * b, "*");
            case BinaryOp::Div:
              if (b == 0.0) throw EvalError("division by zero");
              return checked(a / b, "/");
          }
          return 0.0;
        } else if constexpr (std::is_same_v<T, Call>) {
          std::vector<double> v;
          for (const auto& a : n.args) v.push_back(fold_constant(*a));
          switch (n.fn) {
            case Function::Exp: return checked(std::exp(v[0]), "exp");
            case Function::Abs: return std::fabs(v[0]);
            case Function::Sqrt:
              if (v[0] < 0.0) throw EvalError("sqrt of a negative number");
              return std::sqrt(v[0]);
            case Function::Min: return *std::min_element(v.begin(), v.end());
            case Function::Max: return *std::max_element(v.begin(), v.end());
            case Function::Norm: {
              double s = 0.0;
              for (double x : v) s += x * x;
              return checked(std::sqrt(s), "norm");
            }
          }
          return 0.0;
        } else if constexpr (std::is_same_v<T, Conditional>) {
          return fold_constant(*n.condition) != 0.0 ? fold_constant(*n.then_branch)
                                                    : fold_constant(*n.else_branch);
        } else {
          const double a = fold_constant(*n.lhs);
          const double b = fold_constant(*n.rhs);
          switch (n.op) {
            case CompareOp::Less: return a < b ? 1.0 : 0.0;
            case CompareOp::LessEqual: return a <= b ? 1.0 : 0.0;
            case CompareOp::Greater: return a > b ? 1.0 : 0.0;
            case CompareOp::GreaterEqual: return a >= b ? 1.0 : 0.0;
            case CompareOp::Equal: return a == b ? 1.0 : 0.0;
          }
          return 0.0;
        }
      },
      node.data);
}

class Parser {
 public:
  Parser(std::span<const Token> tokens, const std::vector<VariableDecl>& vars)
      : tokens_(tokens), vars_(vars) {
    if (!tokens_.empty()) end_ = tokens_.back().position + tokens_.back().lexeme.size();
  }

  NodePtr parse_all() {
    auto node = comparison();
    if (pos_ < tokens_.size()) throw ParseError(tokens_[pos_].position, "end of input");
    return node;
  }

 private:
  const Token* peek() const { return pos_ < tokens_.size() ? &tokens_[pos_] : nullptr; }
  std::size_t here() const { return pos_ < tokens_.size() ? tokens_[pos_].position : end_; }

  bool accept_op(std::string_view op) {
    const Token* t = peek();
    if (t && t->kind == TokenKind::Operator && t->lexeme == op) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(TokenKind kind, const char* what) {
    const Token* t = peek();
    if (!t || t->kind != kind) throw ParseError(here(), what);
    ++pos_;
  }

  NodePtr comparison() {
    auto lhs = additive();
    static constexpr std::array<std::pair<std::string_view, CompareOp>, 5> ops{{
        {"<=", CompareOp::LessEqual},
        {">=", CompareOp::GreaterEqual},
        {"==", CompareOp::Equal},
        {"<", CompareOp::Less},
        {">", CompareOp::Greater},
    }};
    for (const auto& [sym, op] : ops) {
      if (accept_op(sym)) {
        auto rhs = additive();
        return make(Comparison{op, std::move(lhs), std::move(rhs)});
      }
    }
    return lhs;
  }

  NodePtr additive() {
    auto lhs = multiplicative();
    for (;;) {
      if (accept_op("+")) lhs = make(Binary{BinaryOp::Add, std::move(lhs), multiplicative()});
      else if (accept_op("-")) lhs = make(Binary{BinaryOp::Sub, std::move(lhs), multiplicative()});
      else return lhs;
    }
  }

  NodePtr multiplicative() {
    auto lhs = unary();
    for (;;) {
      if (accept_op("*")) lhs = make(Binary{BinaryOp::Mul, std::move(lhs), unary()});
      else if (accept_op("/")) lhs = make(Binary{BinaryOp::Div, std::move(lhs), unary()});
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept_op("-")) return make(Negate{unary()});
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (!accept_op("^")) return base;
    const std::size_t exponent_pos = here();
    auto exponent = unary();  // right associative, allows 2^-1
    if (has_variables(*exponent)) throw ParseError(exponent_pos, "constant exponent");
    double value = 0.0;
    try {
      value = fold_constant(*exponent);
    } catch (const EvalError&) {
      throw ParseError(exponent_pos, "finite constant exponent");
    }
    return make(Power{std::move(base), value});
  }

  NodePtr primary() {
    const Token* t = peek();
    if (!t) throw ParseError(end_, "operand");
    switch (t->kind) {
      case TokenKind::Number: {
        ++pos_;
        return make(Constant{std::stod(t->lexeme)});
      }
      case TokenKind::LParen: {
        ++pos_;
        auto inner = comparison();
        expect(TokenKind::RParen, "')'");
        return inner;
      }
      case TokenKind::Identifier: {
        ++pos_;
        const Token* next = peek();
        if (next && next->kind == TokenKind::LParen) return call(*t);
        return variable(*t, false);
      }
      default:
        throw ParseError(t->position, "operand");
    }
  }

  NodePtr call(const Token& name) {
    const bool is_if = name.lexeme == "if";
    const auto fn = function_named(name.lexeme);
    if (!is_if && !fn) throw UnknownIdentifier(name.lexeme);
    ++pos_;  // '('
    std::vector<NodePtr> args;
    if (const Token* t = peek(); t && t->kind == TokenKind::RParen) {
      ++pos_;
    } else {
      for (;;) {
        const Token* t0 = peek();
        // A bare vector variable is allowed as a norm() argument.
        if (fn == Function::Norm && t0 && t0->kind == TokenKind::Identifier &&
            pos_ + 1 < tokens_.size() &&
            (tokens_[pos_ + 1].kind == TokenKind::Comma || tokens_[pos_ + 1].kind == TokenKind::RParen)) {
          ++pos_;
          args.push_back(variable(*t0, true));
        } else {
          args.push_back(comparison());
        }
        if (const Token* sep = peek(); sep && sep->kind == TokenKind::Comma) {
          ++pos_;
          continue;
        }
        expect(TokenKind::RParen, "',' or ')'");
        break;
      }
    }
    if (is_if) {
      if (args.size() != 3) throw ParseError(name.position, "if(condition, then, else) with 3 arguments");
      return make(Conditional{args[0], args[1], args[2]});
    }
    const std::size_t n = args.size();
    switch (*fn) {
      case Function::Exp:
      case Function::Abs:
      case Function::Sqrt:
        if (n != 1) throw ParseError(name.position, std::string(function_name(*fn)) + " with 1 argument");
        break;
      case Function::Min:
      case Function::Max:
        if (n < 2) throw ParseError(name.position, std::string(function_name(*fn)) + " with at least 2 arguments");
        break;
      case Function::Norm:
        if (n < 1) throw ParseError(name.position, "norm with at least 1 argument");
        break;
    }
    return make(Call{*fn, std::move(args)});
  }

  NodePtr variable(const Token& t, bool allow_whole) {
    const std::string& name = t.lexeme;
    for (std::size_t s = 0; s < vars_.size(); ++s) {
      if (vars_[s].name != name) continue;
      if (vars_[s].dim == 1) return make(VariableRef{name, s, 0, false});
      if (allow_whole) return make(VariableRef{name, s, 0, true});
      throw ParseError(t.position, "component index for vector variable '" + name + "'");
    }
    // name followed by a 1-based component index, e.g. x2
    std::size_t split = name.size();
    while (split > 0 && is_digit(name[split - 1])) --split;
    if (split > 0 && split < name.size()) {
      const std::string base = name.substr(0, split);
      const std::string digits = name.substr(split);
      for (std::size_t s = 0; s < vars_.size(); ++s) {
        if (vars_[s].name != base) continue;
        const unsigned long index = std::stoul(digits);
        if (index == 0 || index > vars_[s].dim || digits[0] == '0')
          throw ParseError(t.position, "component index 1.." + std::to_string(vars_[s].dim) + " of '" + base + "'");
        return make(VariableRef{name, s, index - 1, false});
      }
    }
    if (name == "if" || function_named(name)) throw ParseError(t.position, "'(' after function name");
    throw UnknownIdentifier(name);
  }

  std::span<const Token> tokens_;
  const std::vector<VariableDecl>& vars_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_digit(c) || (c == '.' && i + 1 < text.size() && is_digit(text[i + 1]))) {
      while (i < text.size() && is_digit(text[i])) ++i;
      if (i < text.size() && text[i] == '.') {
        ++i;
        while (i < text.size() && is_digit(text[i])) ++i;
      }
      if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
        if (j < text.size() && is_digit(text[j])) {
          i = j;
          while (i < text.size() && is_digit(text[i])) ++i;
        }
      }
      out.push_back({TokenKind::Number, std::string(text.substr(start, i - start)), start});
      continue;
    }
    if (is_ident_start(c)) {
      while (i < text.size() && is_ident_char(text[i])) ++i;
      out.push_back({TokenKind::Identifier, std::string(text.substr(start, i - start)), start});
      continue;
    }
    switch (c) {
      case '(':
        out.push_back({TokenKind::LParen, "(", start});
        ++i;
        continue;
      case ')':
        out.push_back({TokenKind::RParen, ")", start});
        ++i;
        continue;
      case ',':
        out.push_back({TokenKind::Comma, ",", start});
        ++i;
        continue;
      case '+':
      case '-':
      case '*':
      case '/':
      case '^':
        out.push_back({TokenKind::Operator, std::string(1, c), start});
        ++i;
        continue;
      case '<':
      case '>':
        if (i + 1 < text.size() && text[i + 1] == '=') {
          out.push_back({TokenKind::Operator, std::string(text.substr(i, 2)), start});
          i += 2;
        } else {
          out.push_back({TokenKind::Operator, std::string(1, c), start});
          ++i;
        }
        continue;
      case '=':
        if (i + 1 < text.size() && text[i + 1] == '=') {
          out.push_back({TokenKind::Operator, "==", start});
          i += 2;
          continue;
        }
        break;
      default:
        break;
    }
    throw LexError(start, utf8_char_at(text, start));
  }
  return out;
}

Expression parse(std::span<const Token> tokens, std::vector<VariableDecl> variables) {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].dim == 0) throw Error("variable '" + variables[i].name + "' has dimension 0");
    for (std::size_t j = 0; j < i; ++j)
      if (variables[i].name == variables[j].name) throw Error("duplicate variable '" + variables[i].name + "'");
  }
  if (tokens.empty()) throw ParseError(0, "operand");
  Expression e;
  e.root_ = Parser(tokens, variables).parse_all();
  e.variables_ = std::move(variables);
  e.compile();
  return e;
}

Expression parse(std::string_view text, std::vector<VariableDecl> variables) {
  const auto tokens = tokenize(text);
  return parse(tokens, std::move(variables));
}

bool structurally_equal(const Node& a, const Node& b) {
  if (a.data.index() != b.data.index()) return false;
  return std::visit(
      [&b](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.data);
        if constexpr (std::is_same_v<T, Constant>) return x.value == y.value;
        else if constexpr (std::is_same_v<T, VariableRef>)
          return x.slot == y.slot && x.component == y.component && x.whole == y.whole;
        else if constexpr (std::is_same_v<T, Negate>) return structurally_equal(*x.operand, *y.operand);
        else if constexpr (std::is_same_v<T, Binary>)
          return x.op == y.op && structurally_equal(*x.lhs, *y.lhs) && structurally_equal(*x.rhs, *y.rhs);
        else if constexpr (std::is_same_v<T, Power>)
          return x.exponent == y.exponent && structurally_equal(*x.base, *y.base);
        else if constexpr (std::is_same_v<T, Call>) {
          if (x.fn != y.fn || x.args.size() != y.args.size()) return false;
          for (std::size_t i = 0; i < x.args.size(); ++i)
            if (!structurally_equal(*x.args[i], *y.args[i])) return false;
          return true;
        } else if constexpr (std::is_same_v<T, Conditional>)
          return structurally_equal(*x.condition, *y.condition) &&
                 structurally_equal(*x.then_branch, *y.then_branch) &&
                 structurally_equal(*x.else_branch, *y.else_branch);
        else
          return x.op == y.op && structurally_equal(*x.lhs, *y.lhs) && structurally_equal(*x.rhs, *y.rhs);
      },
      a.data);
}

std::string to_string(const Node& node, const std::vector<VariableDecl>& variables) {
  return std::visit(
      [&variables](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) return format_number(n.value);
        else if constexpr (std::is_same_v<T, VariableRef>) {
          const auto& decl = variables.at(n.slot);
          if (n.whole || decl.dim == 1) return decl.name;
          return decl.name + std::to_string(n.component + 1);
        } else if constexpr (std::is_same_v<T, Negate>) return "(-" + to_string(*n.operand, variables) + ")";
        else if constexpr (std::is_same_v<T, Binary>)
          return "(" + to_string(*n.lhs, variables) + " " + binary_symbol(n.op) + " " +
                 to_string(*n.rhs, variables) + ")";
        else if constexpr (std::is_same_v<T, Power>)
          return "(" + to_string(*n.base, variables) + " ^ " + format_number(n.exponent) + ")";
        else if constexpr (std::is_same_v<T, Call>) {
          std::string s = std::string(function_name(n.fn)) + "(";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) s += ", ";
            s += to_string(*n.args[i], variables);
          }
          return s + ")";
        } else if constexpr (std::is_same_v<T, Conditional>)
          return "if(" + to_string(*n.condition, variables) + ", " + to_string(*n.then_branch, variables) +
                 ", " + to_string(*n.else_branch, variables) + ")";
        else
          return "(" + to_string(*n.lhs, variables) + " " + compare_symbol(n.op) + " " +
                 to_string(*n.rhs, variables) + ")";
      },
      node.data);
}

std::string Expression::print() const { return root_ ? to_string(*root_, variables_) : std::string(); }

void Expression::compile() {
  program_.clear();
  emit(*root_);

  // Upper bound on the stack depth. Both branches of a conditional are
  // counted as pushed, which over-reserves by one slot per `if`.
  std::size_t depth = 0, peak = 0;
  for (const auto& ins : program_) {
    switch (ins.op) {
      case OpCode::Const:
      case OpCode::Var:
      case OpCode::VecSquaredNorm:
        ++depth;
        break;
      case OpCode::Add: case OpCode::Sub: case OpCode::Mul: case OpCode::Div:
      case OpCode::Less: case OpCode::LessEqual: case OpCode::Greater:
      case OpCode::GreaterEqual: case OpCode::Equal: case OpCode::JumpIfZero:
        if (depth) --depth;
        break;
      case OpCode::Min: case OpCode::Max: case OpCode::Sum:
        depth = depth >= ins.a ? depth - ins.a + 1 : 1;
        break;
      default:
        break;
    }
    peak = std::max(peak, depth);
  }
  max_stack_ = peak + 1;
}

void Expression::emit(const Node& node) {
  std::visit(
      [this](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) {
          program_.push_back({OpCode::Const, 0, 0, n.value});
        } else if constexpr (std::is_same_v<T, VariableRef>) {
          const auto slot = static_cast<std::uint32_t>(n.slot);
          if (n.whole) program_.push_back({OpCode::VecSquaredNorm, slot, 0, 0.0});
          else program_.push_back({OpCode::Var, slot, static_cast<std::uint32_t>(n.component), 0.0});
        } else if constexpr (std::is_same_v<T, Negate>) {
          emit(*n.operand);
          program_.push_back({OpCode::Neg});
        } else if constexpr (std::is_same_v<T, Binary>) {
          emit(*n.lhs);
          emit(*n.rhs);
          static constexpr OpCode codes[] = {OpCode::Add, OpCode::Sub, OpCode::Mul, OpCode::Div};
          program_.push_back({codes[static_cast<int>(n.op)]});
        } else if constexpr (std::is_same_v<T, Power>) {
          emit(*n.base);
          program_.push_back({OpCode::Pow, 0, 0, n.exponent});
        } else if constexpr (std::is_same_v<T, Call>) {
          const auto count = static_cast<std::uint32_t>(n.args.size());
          if (n.fn == Function::Norm) {
            for (const auto& arg : n.args) {
              emit(*arg);
              const auto* ref = std::get_if<VariableRef>(&arg->data);
              if (!(ref && ref->whole)) program_.push_back({OpCode::Square});
            }
            program_.push_back({OpCode::Sum, count});
            program_.push_back({OpCode::Sqrt});
            return;
          }
          for (const auto& arg : n.args) emit(*arg);
          switch (n.fn) {
            case Function::Exp: program_.push_back({OpCode::Exp}); break;
            case Function::Abs: program_.push_back({OpCode::Abs}); break;
            case Function::Sqrt: program_.push_back({OpCode::Sqrt}); break;
            case Function::Min: program_.push_back({OpCode::Min, count}); break;
            case Function::Max: program_.push_back({OpCode::Max, count}); break;
            case Function::Norm: break;
          }
        } else if constexpr (std::is_same_v<T, Conditional>) {
          emit(*n.condition);
          const std::size_t jz = program_.size();
          program_.push_back({OpCode::JumpIfZero});
          emit(*n.then_branch);
          const std::size_t jmp = program_.size();
          program_.push_back({OpCode::Jump});
          program_[jz].a = static_cast<std::uint32_t>(program_.size());
          emit(*n.else_branch);
          program_[jmp].a = static_cast<std::uint32_t>(program_.size());
        } else {
          emit(*n.lhs);
          emit(*n.rhs);
          static constexpr OpCode codes[] = {OpCode::Less, OpCode::LessEqual, OpCode::Greater,
                                             OpCode::GreaterEqual, OpCode::Equal};
          program_.push_back({codes[static_cast<int>(n.op)]});
        }
      },
      node.data);
}

double Expression::evaluate(std::span<const std::span<const double>> slots) const {
  if (!root_) throw EvalError("empty expression");
  if (slots.size() != variables_.size()) throw DimensionMismatch(variables_.size(), slots.size());
  for (std::size_t s = 0; s < slots.size(); ++s)
    if (slots[s].size() != variables_[s].dim) throw DimensionMismatch(variables_[s].dim, slots[s].size());

  constexpr std::size_t kInline = 64;
  std::array<double, kInline> inline_stack{};
  std::vector<double> heap_stack;
  double* stack = inline_stack.data();
  if (max_stack_ > kInline) {
    heap_stack.resize(max_stack_);
    stack = heap_stack.data();
  }
  std::size_t top = 0;  // number of live entries

  const std::size_t n = program_.size();
  for (std::size_t pc = 0; pc < n; ++pc) {
    const Instr& ins = program_[pc];
    switch (ins.op) {
      case OpCode::Const: stack[top++] = ins.value; break;
      case OpCode::Var: stack[top++] = slots[ins.a][ins.b]; break;
      case OpCode::VecSquaredNorm: {
        double s = 0.0;
        for (double v : slots[ins.a]) s += v * v;
        stack[top++] = checked(s, "norm");
        break;
      }
      case OpCode::Neg: stack[top - 1] = -stack[top - 1]; break;
      case OpCode::Add: --top; stack[top - 1] = checked(stack[top - 1] + stack[top], "+"); break;
      case OpCode::Sub: --top; stack[top - 1] = checked(stack[top - 1] - stack[top], "-"); break;
      case OpCode::Mul: --top; stack[top - 1] = checked(stack[top - 1] * stack[top], "*"); break;
      case OpCode::Div:
        --top;
        if (stack[top] == 0.0) throw EvalError("division by zero");
        stack[top - 1] = checked(stack[top - 1] / stack[top], "/");
        break;
      case OpCode::Pow: stack[top - 1] = apply_pow(stack[top - 1], ins.value); break;
      case OpCode::Square: stack[top - 1] = checked(stack[top - 1] * stack[top - 1], "norm"); break;
      case OpCode::Exp: stack[top - 1] = checked(std::exp(stack[top - 1]), "exp"); break;
      case OpCode::Abs: stack[top - 1] = std::fabs(stack[top - 1]); break;
      case OpCode::Sqrt:
        if (stack[top - 1] < 0.0) throw EvalError("sqrt of a negative number");
        stack[top - 1] = std::sqrt(stack[top - 1]);
        break;
      case OpCode::Min:
      case OpCode::Max:
      case OpCode::Sum: {
        const std::size_t k = ins.a;
        double acc = stack[top - k];
        for (std::size_t i = top - k + 1; i < top; ++i) {
          if (ins.op == OpCode::Min) acc = std::min(acc, stack[i]);
          else if (ins.op == OpCode::Max) acc = std::max(acc, stack[i]);
          else acc += stack[i];
        }
        top -= k;
        stack[top++] = checked(acc, "norm");
        break;
      }
      case OpCode::Less: --top; stack[top - 1] = stack[top - 1] < stack[top] ? 1.0 : 0.0; break;
      case OpCode::LessEqual: --top; stack[top - 1] = stack[top - 1] <= stack[top] ? 1.0 : 0.0; break;
      case OpCode::Greater: --top; stack[top - 1] = stack[top - 1] > stack[top] ? 1.0 : 0.0; break;
      case OpCode::GreaterEqual: --top; stack[top - 1] = stack[top - 1] >= stack[top] ? 1.0 : 0.0; break;
      case OpCode::Equal: --top; stack[top - 1] = stack[top - 1] == stack[top] ? 1.0 : 0.0; break;
      case OpCode::JumpIfZero:
        --top;
        if (stack[top] == 0.0) pc = ins.a - 1;
        break;
      case OpCode::Jump: pc = ins.a - 1; break;
    }
  }
  return stack[0];
}

double Expression::evaluate(const Bindings& bindings) const {
  std::vector<std::span<const double>> slots;
  slots.reserve(variables_.size());
  for (const auto& decl : variables_) {
    const auto it = bindings.find(decl.name);
    if (it == bindings.end()) throw EvalError("variable '" + decl.name + "' is not bound");
    if (it->second.size() != decl.dim) throw DimensionMismatch(decl.dim, it->second.size());
    slots.emplace_back(it->second);
  }
  return evaluate(slots);
}

}  // namespace sepwp::expr
