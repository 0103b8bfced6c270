#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <thread>

#include "sepwp/expr.hpp"

using namespace sepwp;
using namespace sepwp::expr;

namespace {

std::vector<VariableDecl> xp() { return {{"x", 1}, {"p", 1}}; }
std::vector<VariableDecl> yq() { return {{"y", 1}, {"q", 1}}; }

double eval(const Expression& e, double a, double b) {
  const double va[] = {a};
  const double vb[] = {b};
  const std::span<const double> slots[] = {va, vb};
  return e.evaluate(slots);
}

}  // namespace

TEST_CASE("tokenize splits the grammar's lexemes") {
  const auto t = tokenize("p^2 - x^2");
  REQUIRE(t.size() == 7);
  const char* lex[] = {"p", "^", "2", "-", "x", "^", "2"};
  const TokenKind kinds[] = {TokenKind::Identifier, TokenKind::Operator, TokenKind::Number, TokenKind::Operator,
                             TokenKind::Identifier, TokenKind::Operator, TokenKind::Number};
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t[i].lexeme == lex[i]);
    CHECK(t[i].kind == kinds[i]);
    if (i > 0) CHECK(t[i].position > t[i - 1].position);
  }
  CHECK(tokenize("").empty());
  CHECK(tokenize("  \t ").empty());
}

TEST_CASE("tokenize rejects unknown characters with their offset") {
  try {
    (void)tokenize("p §");
    FAIL("expected LexError");
  } catch (const LexError& e) {
    CHECK(e.position() == 2);
    CHECK(e.character() == "§");
  }
  CHECK_THROWS_AS(tokenize("x $ y"), LexError);
}

TEST_CASE("lexemes reconstruct the non-whitespace input") {
  const std::string src = "if(x <= 0.5, -y^2*exp(-q^2), max(x1, 3e-2) / 4)";
  std::string joined, stripped;
  for (const auto& tok : tokenize(src)) joined += tok.lexeme;
  for (char c : src)
    if (c != ' ') stripped += c;
  CHECK(joined == stripped);
}

TEST_CASE("precedence: unary minus binds looser than power") {
  const Expression e = parse("-y^2*exp(-q^2)", yq());
  const auto& mul = std::get<Binary>(e.root().data);
  CHECK(mul.op == BinaryOp::Mul);
  const auto& neg = std::get<Negate>(mul.lhs->data);
  const auto& pw = std::get<Power>(neg.operand->data);
  CHECK(pw.exponent == 2.0);
  CHECK(std::get<VariableRef>(pw.base->data).name == "y");
  const auto& call = std::get<Call>(mul.rhs->data);
  CHECK(call.fn == Function::Exp);
  CHECK(std::holds_alternative<Negate>(call.args[0]->data));
  CHECK(eval(e, 1.0, 0.0) == -1.0);
  CHECK(eval(e, 2.0, 1.0) == doctest::Approx(-4.0 * std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("piecewise forms parse as conditionals and pick one branch") {
  const Expression f = parse("if(x < 0.5, x, x^2/2)", xp());
  CHECK(std::holds_alternative<Conditional>(f.root().data));
  CHECK(eval(f, 1.0, 0.0) == 0.5);
  CHECK(eval(f, 0.25, 0.0) == 0.25);
  CHECK(eval(f, 0.5, 0.0) == 0.125);

  const Expression g = parse("if(y == 0.5, 0, 2)", yq());
  CHECK(eval(g, 0.5, 0.3) == 0.0);
  CHECK(eval(g, std::nextafter(0.5, 1.0), 0.3) == 2.0);

  // The untaken branch would divide by zero.
  const Expression guarded = parse("if(x > 0, 1/x, 0)", xp());
  CHECK(eval(guarded, 0.0, 0.0) == 0.0);
}

TEST_CASE("Example 2's f is total on a sampled domain and takes one of its two forms") {
  const Expression f = parse("if(x < 0.5, x, x^2/2)", xp());
  for (int i = 0; i <= 1024; ++i) {
    const double x = i / 1024.0;
    const double v = eval(f, x, 0.0);
    CHECK((v == x || v == x * x / 2));
  }
}

TEST_CASE("parse errors") {
  try {
    (void)parse("x + ", xp());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.expected() == "operand");
  }
  CHECK_THROWS_AS(parse("", xp()), ParseError);
  CHECK_THROWS_AS(parse("z + 1", xp()), UnknownIdentifier);
  CHECK_THROWS_AS(parse("x^p", xp()), ParseError);
  CHECK_THROWS_AS(parse("if(x < 1, 2)", xp()), ParseError);
  CHECK_THROWS_AS(parse("exp(x, p)", xp()), ParseError);
  CHECK_THROWS_AS(parse("(x + p", xp()), ParseError);
  CHECK_THROWS_AS(parse("x p", xp()), ParseError);
}

TEST_CASE("evaluation arithmetic and domain errors") {
  CHECK(eval(parse("p^2 - x^2", xp()), 2.0, 3.0) == 5.0);
  CHECK(eval(parse("x^-1", xp()), 4.0, 0.0) == 0.25);
  CHECK(eval(parse("2^3^2", xp()), 0.0, 0.0) == 512.0);
  CHECK(eval(parse("min(x, p, 3) + max(x, p) + abs(-2) + sqrt(9)", xp()), 1.0, 2.0) == 1.0 + 2.0 + 2.0 + 3.0);
  CHECK_THROWS_AS(eval(parse("1/x", xp()), 0.0, 0.0), EvalError);
  CHECK_THROWS_AS(eval(parse("x^-2", xp()), 0.0, 0.0), EvalError);
  CHECK_THROWS_AS(eval(parse("sqrt(x)", xp()), -1.0, 0.0), EvalError);
  CHECK_THROWS_AS(eval(parse("exp(x)", xp()), 1000.0, 0.0), EvalError);
}

TEST_CASE("vector variables by component and norm") {
  const Expression e = parse("x1 * p2 - x2 + norm(p)", {{"x", 2}, {"p", 2}});
  Bindings b{{"x", {1.0, 2.0}}, {"p", {3.0, 4.0}}};
  CHECK(e.evaluate(b) == doctest::Approx(1.0 * 4.0 - 2.0 + 5.0));
  CHECK_THROWS_AS(parse("x + 1", {{"x", 2}, {"p", 2}}), ParseError);
  CHECK_THROWS_AS(parse("x3", {{"x", 2}, {"p", 2}}), ParseError);
  CHECK_THROWS_AS(e.evaluate(Bindings{{"x", {1.0}}, {"p", {3.0, 4.0}}}), DimensionMismatch);
  CHECK_THROWS_AS(e.evaluate(Bindings{{"x", {1.0, 2.0}}}), EvalError);
}

TEST_CASE("print round-trips to a structurally equal tree") {
  const char* sources[] = {"p^2 - x^2",
                           "-y^2*exp(-q^2)",
                           "if(x < 0.5, x, x^2/2)",
                           "if(y == 0.5, 0, 2)",
                           "q - y",
                           "-(x - p)^3 / 7 + abs(x) * min(p, 0.1, -x)",
                           "if(x >= p, sqrt(x^2 + 1), max(p, x) <= 3)",
                           "1e-3 * x - 2.5e10 * p^-1"};
  for (const char* s : sources) {
    const Expression a = parse(s, std::string(s).find('y') != std::string::npos ? yq() : xp());
    const Expression b = parse(a.print(), a.variables());
    CHECK_MESSAGE(a == b, s);
  }
}

TEST_CASE("random expressions round-trip through the printer") {
  std::mt19937_64 rng(11);
  const char* leaves[] = {"x", "p", "0.5", "3", "1e-2"};
  const char* binops[] = {" + ", " - ", " * ", " / "};
  std::function<std::string(int)> gen = [&](int depth) -> std::string {
    if (depth == 0) return leaves[rng() % 5];
    switch (rng() % 6) {
      case 0: return "-" + gen(depth - 1);
      case 1: return "(" + gen(depth - 1) + ")^" + std::to_string(rng() % 4);
      case 2: return "exp(" + gen(depth - 1) + ")";
      case 3: return "if(" + gen(depth - 1) + " < " + gen(depth - 1) + ", " + gen(depth - 1) + ", " + gen(depth - 1) + ")";
      default: return "(" + gen(depth - 1) + binops[rng() % 4] + gen(depth - 1) + ")";
    }
  };
  for (int i = 0; i < 300; ++i) {
    const std::string s = gen(3);
    const Expression a = parse(s, xp());
    CHECK_MESSAGE(a == parse(a.print(), xp()), s);
  }
}

TEST_CASE("evaluation is deterministic across threads") {
  const Expression e = parse("-y^2*exp(-q^2) + if(y < q, y, q^2/3)", yq());
  std::vector<double> ref(1000);
  for (int i = 0; i < 1000; ++i) ref[i] = eval(e, i * 0.001, 1.0 - i * 0.002);
  std::vector<std::vector<double>> out(4, std::vector<double>(1000));
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      for (int i = 0; i < 1000; ++i) out[t][i] = eval(e, i * 0.001, 1.0 - i * 0.002);
    });
  for (auto& th : pool) th.join();
  for (const auto& o : out) CHECK(o == ref);
}
