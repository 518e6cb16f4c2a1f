#include "qsep/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace qsep {

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " at position " + std::to_string(position)),
      position_(position) {}

namespace {

enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Abs, Min, Max, If };
enum class Cmp { Lt, Le, Gt, Ge, Eq, Ne };

struct Node {
  Op op = Op::Const;
  double value = 0.0;
  int index = 0;  // variable index or integer exponent
  Cmp cmp = Cmp::Eq;
  std::array<int, 4> kids{-1, -1, -1, -1};
};

}  // namespace

struct Expr::Tree {
  std::vector<Node> nodes;
  std::vector<int> roots;
  std::vector<std::string> variables;
};

namespace {

using Tree = Expr::Tree;

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
  Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma,
  LBracket, RBracket, Lt, Le, Gt, Ge, EqEq, Ne, End
};

struct Token {
  Tok kind;
  std::size_t pos;
  std::string_view text;
  double number = 0.0;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      double value = 0.0;
      const auto res = std::from_chars(src.data() + start, src.data() + j, value);
      if (res.ec != std::errc() || res.ptr != src.data() + j) {
        throw ParseError("malformed number '" + std::string(src.substr(start, j - start)) + "'",
                         start);
      }
      out.push_back({Tok::Number, start, src.substr(start, j - start), value});
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        ++j;
      }
      out.push_back({Tok::Ident, start, src.substr(start, j - start)});
      i = j;
      continue;
    }
    auto two = [&](char next) { return i + 1 < src.size() && src[i + 1] == next; };
    Tok kind;
    std::size_t len = 1;
    switch (c) {
      case '+': kind = Tok::Plus; break;
      case '-': kind = Tok::Minus; break;
      case '*': kind = Tok::Star; break;
      case '/': kind = Tok::Slash; break;
      case '^': kind = Tok::Caret; break;
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case ',': kind = Tok::Comma; break;
      case '[': kind = Tok::LBracket; break;
      case ']': kind = Tok::RBracket; break;
      case '<':
        kind = two('=') ? Tok::Le : Tok::Lt;
        len = two('=') ? 2 : 1;
        break;
      case '>':
        kind = two('=') ? Tok::Ge : Tok::Gt;
        len = two('=') ? 2 : 1;
        break;
      case '=':
        if (!two('=')) throw ParseError("expected '=='", start);
        kind = Tok::EqEq;
        len = 2;
        break;
      case '!':
        if (!two('=')) throw ParseError("expected '!='", start);
        kind = Tok::Ne;
        len = 2;
        break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
    out.push_back({kind, start, src.substr(start, len)});
    i += len;
  }
  out.push_back({Tok::End, src.size(), {}});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view src, Tree& tree) : toks_(tokenize(src)), tree_(tree) {}

  void parse_top() {
    if (peek().kind == Tok::LBracket) {
      next();
      tree_.roots.push_back(expr());
      while (peek().kind == Tok::Comma) {
        next();
        tree_.roots.push_back(expr());
      }
      expect(Tok::RBracket, "']'");
    } else {
      tree_.roots.push_back(expr());
    }
    if (peek().kind != Tok::End) {
      throw ParseError("unexpected trailing input '" + std::string(peek().text) + "'",
                       peek().pos);
    }
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      throw ParseError(std::string("expected ") + what, peek().pos);
    }
    next();
  }

  int add(Node n) {
    tree_.nodes.push_back(n);
    return static_cast<int>(tree_.nodes.size()) - 1;
  }

  int binary(Op op, int a, int b) {
    Node n;
    n.op = op;
    n.kids[0] = a;
    n.kids[1] = b;
    return add(n);
  }

  int expr() {
    int lhs = term();
    for (;;) {
      if (peek().kind == Tok::Plus) {
        next();
        lhs = binary(Op::Add, lhs, term());
      } else if (peek().kind == Tok::Minus) {
        next();
        lhs = binary(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  int term() {
    int lhs = factor();
    for (;;) {
      if (peek().kind == Tok::Star) {
        next();
        lhs = binary(Op::Mul, lhs, factor());
      } else if (peek().kind == Tok::Slash) {
        next();
        lhs = binary(Op::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  int factor() {
    if (peek().kind == Tok::Minus) {
      next();
      Node n;
      n.op = Op::Neg;
      n.kids[0] = factor();
      return add(n);
    }
    int base = atom();
    if (peek().kind == Tok::Caret) {
      next();
      const Token& t = peek();
      if (t.kind != Tok::Number || t.text.find_first_not_of("0123456789") != std::string_view::npos) {
        throw ParseError("exponent must be a non-negative integer literal", t.pos);
      }
      next();
      Node n;
      n.op = Op::Pow;
      n.kids[0] = base;
      n.index = static_cast<int>(t.number);
      return add(n);
    }
    return base;
  }

  int atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: {
        next();
        Node n;
        n.op = Op::Const;
        n.value = t.number;
        return add(n);
      }
      case Tok::LParen: {
        next();
        const int inner = expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident:
        return ident();
      default:
        throw ParseError(t.kind == Tok::End ? "unexpected end of input"
                                            : "unexpected token '" + std::string(t.text) + "'",
                         t.pos);
    }
  }

  int ident() {
    const Token& t = next();
    const std::string_view name = t.text;
    if (name == "abs" || name == "min" || name == "max") {
      expect(Tok::LParen, "'('");
      Node n;
      n.kids[0] = expr();
      if (name == "abs") {
        n.op = Op::Abs;
      } else {
        expect(Tok::Comma, "','");
        n.kids[1] = expr();
        n.op = name == "min" ? Op::Min : Op::Max;
      }
      expect(Tok::RParen, "')'");
      return add(n);
    }
    if (name == "if") {
      Node n;
      n.op = Op::If;
      n.kids[0] = expr();
      switch (peek().kind) {
        case Tok::Lt: n.cmp = Cmp::Lt; break;
        case Tok::Le: n.cmp = Cmp::Le; break;
        case Tok::Gt: n.cmp = Cmp::Gt; break;
        case Tok::Ge: n.cmp = Cmp::Ge; break;
        case Tok::EqEq: n.cmp = Cmp::Eq; break;
        case Tok::Ne: n.cmp = Cmp::Ne; break;
        default:
          throw ParseError("expected comparison operator in 'if' guard", peek().pos);
      }
      next();
      n.kids[1] = expr();
      keyword("then");
      n.kids[2] = expr();
      keyword("else");
      n.kids[3] = expr();
      return add(n);
    }
    if (name == "then" || name == "else") {
      throw ParseError("unexpected keyword '" + std::string(name) + "'", t.pos);
    }
    const auto& vars = tree_.variables;
    const auto it = std::find(vars.begin(), vars.end(), name);
    if (it == vars.end()) {
      throw ParseError("undeclared variable '" + std::string(name) + "'", t.pos);
    }
    Node n;
    n.op = Op::Var;
    n.index = static_cast<int>(it - vars.begin());
    return add(n);
  }

  void keyword(std::string_view word) {
    if (peek().kind != Tok::Ident || peek().text != word) {
      throw ParseError("expected '" + std::string(word) + "'", peek().pos);
    }
    next();
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Tree& tree_;
};

// ---------------------------------------------------------------------------
// Evaluation

std::string describe_args(const Tree& tree, std::span<const double> args) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) os << ", ";
    os << tree.variables[i] << '=' << format_real(args[i]);
  }
  os << ')';
  return os.str();
}

double eval_node(const Tree& tree, int idx, std::span<const double> args) {
  const Node& n = tree.nodes[static_cast<std::size_t>(idx)];
  auto kid = [&](int k) { return eval_node(tree, n.kids[static_cast<std::size_t>(k)], args); };
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return args[static_cast<std::size_t>(n.index)];
    case Op::Add: return kid(0) + kid(1);
    case Op::Sub: return kid(0) - kid(1);
    case Op::Mul: return kid(0) * kid(1);
    case Op::Div: {
      const double num = kid(0);
      const double den = kid(1);
      if (den == 0.0) {
        throw EvalError("division by zero at " + describe_args(tree, args));
      }
      return num / den;
    }
    case Op::Neg: return -kid(0);
    case Op::Pow: {
      const double base = kid(0);
      double result = 1.0;
      for (int i = 0; i < n.index; ++i) result *= base;
      return result;
    }
    case Op::Abs: return std::abs(kid(0));
    case Op::Min: return std::min(kid(0), kid(1));
    case Op::Max: return std::max(kid(0), kid(1));
    case Op::If: {
      const double a = kid(0);
      const double b = kid(1);
      bool take = false;
      switch (n.cmp) {
        case Cmp::Lt: take = a < b; break;
        case Cmp::Le: take = a <= b; break;
        case Cmp::Gt: take = a > b; break;
        case Cmp::Ge: take = a >= b; break;
        case Cmp::Eq: take = a == b; break;
        case Cmp::Ne: take = a != b; break;
      }
      return take ? kid(2) : kid(3);
    }
  }
  return 0.0;
}

bool references(const Tree& tree, int idx, int var) {
  const Node& n = tree.nodes[static_cast<std::size_t>(idx)];
  if (n.op == Op::Var) return n.index == var;
  for (int k : n.kids) {
    if (k >= 0 && references(tree, k, var)) return true;
  }
  return false;
}

const char* cmp_text(Cmp c) {
  switch (c) {
    case Cmp::Lt: return " < ";
    case Cmp::Le: return " <= ";
    case Cmp::Gt: return " > ";
    case Cmp::Ge: return " >= ";
    case Cmp::Eq: return " == ";
    case Cmp::Ne: return " != ";
  }
  return " == ";
}

void print_node(const Tree& tree, int idx, std::string& out) {
  const Node& n = tree.nodes[static_cast<std::size_t>(idx)];
  auto kid = [&](int k) { print_node(tree, n.kids[static_cast<std::size_t>(k)], out); };
  auto bin = [&](const char* op) {
    out += '(';
    kid(0);
    out += op;
    kid(1);
    out += ')';
  };
  switch (n.op) {
    case Op::Const:
      if (n.value < 0.0 || std::signbit(n.value)) {
        out += "(-" + format_real(-n.value) + ")";
      } else {
        out += format_real(n.value);
      }
      break;
    case Op::Var: out += tree.variables[static_cast<std::size_t>(n.index)]; break;
    case Op::Add: bin(" + "); break;
    case Op::Sub: bin(" - "); break;
    case Op::Mul: bin(" * "); break;
    case Op::Div: bin(" / "); break;
    case Op::Neg:
      out += "(-";
      kid(0);
      out += ')';
      break;
    case Op::Pow:
      out += '(';
      kid(0);
      out += ")^" + std::to_string(n.index);
      break;
    case Op::Abs:
      out += "abs(";
      kid(0);
      out += ')';
      break;
    case Op::Min:
    case Op::Max:
      out += n.op == Op::Min ? "min(" : "max(";
      kid(0);
      out += ", ";
      kid(1);
      out += ')';
      break;
    case Op::If:
      out += "(if ";
      kid(0);
      out += cmp_text(n.cmp);
      kid(1);
      out += " then ";
      kid(2);
      out += " else ";
      kid(3);
      out += ')';
      break;
  }
}

}  // namespace

std::string format_real(double value) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    double back = 0.0;
    std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
    if (back == value) break;
  }
  return buf;
}

Expr Expr::parse(std::string_view source, std::vector<std::string> variables) {
  auto tree = std::make_shared<Tree>();
  tree->variables = std::move(variables);
  Parser(source, *tree).parse_top();
  return Expr(std::move(tree));
}

Expr Expr::parse(std::string_view source, std::vector<std::string> variables,
                 std::size_t output_dim) {
  Expr e = parse(source, std::move(variables));
  if (e.output_dim() != output_dim) {
    throw ParseError("arity mismatch: expected " + std::to_string(output_dim) +
                         " component(s), got " + std::to_string(e.output_dim()),
                     0);
  }
  return e;
}

const Expr::Tree& Expr::tree() const {
  if (!tree_) throw std::logic_error("use of an empty Expr");
  return *tree_;
}

std::size_t Expr::arity() const { return tree().variables.size(); }
std::size_t Expr::output_dim() const { return tree().roots.size(); }
const std::vector<std::string>& Expr::variables() const { return tree().variables; }

double Expr::eval(std::span<const double> args) const {
  const Tree& t = tree();
  if (args.size() != t.variables.size()) {
    throw std::invalid_argument("Expr::eval: expected " + std::to_string(t.variables.size()) +
                                " arguments, got " + std::to_string(args.size()));
  }
  if (t.roots.size() != 1) {
    throw std::invalid_argument("Expr::eval: expression is vector-valued");
  }
  return eval_node(t, t.roots.front(), args);
}

void Expr::eval_into(std::span<const double> args, std::span<double> out) const {
  const Tree& t = tree();
  if (args.size() != t.variables.size() || out.size() != t.roots.size()) {
    throw std::invalid_argument("Expr::eval_into: dimension mismatch");
  }
  for (std::size_t i = 0; i < t.roots.size(); ++i) out[i] = eval_node(t, t.roots[i], args);
}

Eigen::VectorXd Expr::eval_vector(std::span<const double> args) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(output_dim()));
  eval_into(args, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

bool Expr::depends_on(std::size_t component, std::size_t variable) const {
  const Tree& t = tree();
  return references(t, t.roots.at(component), static_cast<int>(variable));
}

std::string Expr::to_string() const {
  const Tree& t = tree();
  std::string out;
  if (t.roots.size() == 1) {
    print_node(t, t.roots.front(), out);
    return out;
  }
  out += '[';
  for (std::size_t i = 0; i < t.roots.size(); ++i) {
    if (i) out += ", ";
    print_node(t, t.roots[i], out);
  }
  out += ']';
  return out;
}

}  // namespace qsep
