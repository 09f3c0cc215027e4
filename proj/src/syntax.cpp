#include "idips/syntax.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "idips/errors.hpp"
#include "idips/typecheck.hpp"

namespace idips {

namespace {

struct Token {
  enum class Kind { Ident, Number, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Token::Kind::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      const char* begin = src.data() + i;
      auto [ptr, ec] = std::from_chars(begin, src.data() + src.size(), t.number);
      if (ec != std::errc()) throw ParseError(line, col, "malformed number");
      t.kind = Token::Kind::Number;
      t.text = std::string(begin, ptr);
      advance(static_cast<size_t>(ptr - begin));
    } else {
      static const char* kTwo[] = {"==", "&&", "||"};
      t.kind = Token::Kind::Punct;
      for (const char* two : kTwo) {
        if (src.compare(i, 2, two) == 0) t.text = two;
      }
      if (t.text.empty()) {
        if (std::string("()[],:.?=<>+-*/").find(c) == std::string::npos) {
          throw ParseError(line, col, std::string("unexpected character '") + c + "'");
        }
        t.text = std::string(1, c);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  Parser(const std::string& src, const DomainDefinition& dom) : toks_(lex(src)), dom_(dom) {}

  Policy policy() {
    Policy p;
    bool first = true;
    while (!at_end()) {
      const Token& kw = peek();
      if (kw.kind != Token::Kind::Ident || (kw.text != "if" && kw.text != "elif") ||
          (first && kw.text == "elif")) {
        fail(kw, first ? "expected 'if'" : "expected 'elif'");
      }
      first = false;
      next();
      Branch b;
      b.guard = pred();
      expect_punct(":");
      expect_ident("return");
      b.action = ident("action name");
      p.branches.push_back(std::move(b));
    }
    return p;
  }

  PredPtr whole_pred() {
    PredPtr p = pred();
    if (!at_end()) fail(peek(), "unexpected '" + peek().text + "'");
    return p;
  }

  ExprPtr whole_expr() {
    ExprPtr e = expr();
    if (!at_end()) fail(peek(), "unexpected '" + peek().text + "'");
    return e;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  const DomainDefinition& dom_;

  const Token& peek(size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  bool is_punct(const char* p, size_t ahead = 0) const {
    return peek(ahead).kind == Token::Kind::Punct && peek(ahead).text == p;
  }
  bool is_ident(const char* s) const {
    return peek().kind == Token::Kind::Ident && peek().text == s;
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(t.line, t.column, msg);
  }
  void expect_punct(const char* p) {
    if (!is_punct(p)) fail(peek(), std::string("expected '") + p + "'");
    next();
  }
  void expect_ident(const char* s) {
    if (!is_ident(s)) fail(peek(), std::string("expected '") + s + "'");
    next();
  }
  std::string ident(const char* what) {
    if (peek().kind != Token::Kind::Ident) fail(peek(), std::string("expected ") + what);
    return next().text;
  }

  PredPtr pred() {
    PredPtr lhs = conj();
    while (is_punct("||")) {
      next();
      lhs = Predicate::disj(lhs, conj());
    }
    return lhs;
  }

  PredPtr conj() {
    PredPtr lhs = atom();
    while (is_punct("&&")) {
      next();
      lhs = Predicate::conj(lhs, atom());
    }
    return lhs;
  }

  PredPtr atom() {
    if (is_ident("true")) {
      next();
      return Predicate::truth(true);
    }
    if (is_ident("false")) {
      next();
      return Predicate::truth(false);
    }
    if (is_ident(kStartKeyword)) {
      next();
      expect_punct("==");
      return Predicate::action_eq(ident("action name"));
    }
    if (is_punct("?") && peek(1).kind == Token::Kind::Ident && peek(1).text == "pred") {
      next();
      next();
      return Predicate::blank();
    }
    std::optional<ParseError> as_pred;
    if (is_punct("(")) {
      // Either a parenthesised predicate or an expression starting with '('.
      size_t save = pos_;
      try {
        next();
        PredPtr inner = pred();
        expect_punct(")");
        if (!is_punct(">") && !is_punct("<") && !is_punct(".") && !is_punct("+") &&
            !is_punct("-") && !is_punct("*") && !is_punct("/")) {
          return inner;
        }
      } catch (const ParseError& ex) {
        as_pred = ex;
      }
      pos_ = save;
    }
    if (as_pred) {
      // Report whichever reading got further.
      try {
        return comparison();
      } catch (const ParseError& ex) {
        auto at = [](const ParseError& e) { return std::pair(e.line(), e.column()); };
        if (at(*as_pred) > at(ex)) throw *as_pred;
        throw;
      }
    }
    return comparison();
  }

  PredPtr comparison() {
    ExprPtr e = expr();
    Rel rel;
    if (is_punct(">")) {
      rel = Rel::Gt;
    } else if (is_punct("<")) {
      rel = Rel::Lt;
    } else {
      fail(peek(), "expected '>' or '<' after expression");
    }
    next();
    return Predicate::compare(e, rel, param());
  }

  Param param() {
    Param p;
    bool blank = false;
    if (is_punct("?")) {
      next();
      blank = true;
    }
    p.name = ident("parameter name");
    p.dim = dims();
    if (!blank && is_punct("=")) {
      next();
      p.value = signed_number();
    }
    return p;
  }

  double signed_number() {
    bool neg = false;
    if (is_punct("-")) {
      next();
      neg = true;
    }
    if (peek().kind != Token::Kind::Number) fail(peek(), "expected number");
    double v = next().number;
    return neg ? -v : v;
  }

  int signed_int() {
    const Token& t = peek();
    double v = signed_number();
    if (v != static_cast<int>(v)) fail(t, "dimension exponents must be integers");
    return static_cast<int>(v);
  }

  Dimension dims() {
    expect_punct("[");
    Dimension d;
    d.exps[0] = signed_int();
    expect_punct(",");
    d.exps[1] = signed_int();
    expect_punct(",");
    d.exps[2] = signed_int();
    expect_punct("]");
    return d;
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    while (is_punct("+") || is_punct("-")) {
      std::string op = next().text;
      lhs = Expr::binary(op, lhs, term());
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = postfix();
    while (is_punct("*") || is_punct("/")) {
      std::string op = next().text;
      lhs = Expr::binary(op, lhs, postfix());
    }
    return lhs;
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    while (is_punct(".")) {
      next();
      const Token& t = peek();
      std::string field = ident("'x' or 'y'");
      if (field == "x") {
        e = Expr::unary("vx", e);
      } else if (field == "y") {
        e = Expr::unary("vy", e);
      } else {
        fail(t, "unknown accessor '." + field + "'");
      }
    }
    return e;
  }

  ExprPtr primary() {
    if (is_punct("(")) {
      next();
      ExprPtr e = expr();
      expect_punct(")");
      return e;
    }
    if (is_punct("?")) {
      next();
      expect_ident("expr");
      expect_punct(":");
      const Token& t = peek();
      std::string kind = ident("'scalar' or 'vec'");
      if (kind != "scalar" && kind != "vec") fail(t, "expected 'scalar' or 'vec'");
      Dimension d = dims();
      return Expr::blank(kind == "scalar" ? AspType::scalar(d) : AspType::vector(d));
    }
    if (peek().kind == Token::Kind::Number || is_punct("-")) {
      double v = signed_number();
      Dimension d = dims();
      return Expr::constant({v, 0.0}, AspType::scalar(d));
    }
    if (is_ident("vec") && is_punct("(", 1)) {
      next();
      next();
      double x = signed_number();
      expect_punct(",");
      double y = signed_number();
      expect_punct(")");
      Dimension d = dims();
      return Expr::constant({x, y}, AspType::vector(d));
    }
    std::string name = ident("expression");
    if (is_punct("(")) {
      next();
      std::vector<ExprPtr> args;
      args.push_back(expr());
      while (is_punct(",")) {
        next();
        args.push_back(expr());
      }
      expect_punct(")");
      if (args.size() == 1) return Expr::unary(name, args[0]);
      if (args.size() == 2) return Expr::binary(name, args[0], args[1]);
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Binary;
      e->name = name;
      e->args = std::move(args);
      return e;  // rejected by the typechecker with ArityMismatch
    }
    const InputDef* in = dom_.find_input(name);
    return Expr::input(name, in ? in->type : AspType::boolean());
  }
};

bool is_infix(const std::string& op) {
  return op == "+" || op == "-" || op == "*" || op == "/";
}

void print_expr_to(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Input:
      out += e.name;
      return;
    case Expr::Kind::Const:
      if (e.type.is_vector()) {
        out += "vec(" + format_number(e.value.x) + ", " + format_number(e.value.y) + ") " +
               e.type.dim.str();
      } else {
        out += format_number(e.value.x) + " " + e.type.dim.str();
      }
      return;
    case Expr::Kind::Blank:
      out += "?expr:" + e.type.str();
      return;
    case Expr::Kind::Unary:
      if (e.op() == "vx" || e.op() == "vy") {
        const Expr& a = *e.args[0];
        // Constants carry a dimension suffix, so they need grouping before an accessor.
        bool wrap = a.kind == Expr::Kind::Const;
        if (wrap) out += "(";
        print_expr_to(a, out);
        if (wrap) out += ")";
        out += e.op() == "vx" ? ".x" : ".y";
        return;
      }
      [[fallthrough]];
    case Expr::Kind::Binary:
      if (e.args.size() == 2 && is_infix(e.op())) {
        out += "(";
        print_expr_to(*e.args[0], out);
        out += " " + e.op() + " ";
        print_expr_to(*e.args[1], out);
        out += ")";
        return;
      }
      out += e.op() + "(";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        print_expr_to(*e.args[i], out);
      }
      out += ")";
      return;
  }
}

void print_pred_to(const Predicate& p, std::string& out);

void print_child(const Predicate& child, bool parens, std::string& out) {
  if (parens) out += "(";
  print_pred_to(child, out);
  if (parens) out += ")";
}

void print_pred_to(const Predicate& p, std::string& out) {
  using K = Predicate::Kind;
  switch (p.kind) {
    case K::True:
      out += "true";
      return;
    case K::False:
      out += "false";
      return;
    case K::Blank:
      out += "?pred";
      return;
    case K::ActionEq:
      out += std::string(kStartKeyword) + " == " + p.action;
      return;
    case K::Compare:
      print_expr_to(*p.expr, out);
      out += p.rel == Rel::Gt ? " > " : " < ";
      if (p.param.blank()) out += "?";
      out += p.param.name + " " + p.param.dim.str();
      if (p.param.value) out += " = " + format_number(*p.param.value);
      return;
    case K::And:
      print_child(*p.lhs, p.lhs->kind == K::Or, out);
      out += " && ";
      print_child(*p.rhs, p.rhs->kind == K::Or || p.rhs->kind == K::And, out);
      return;
    case K::Or:
      print_child(*p.lhs, false, out);
      out += " || ";
      print_child(*p.rhs, p.rhs->kind == K::Or, out);
      return;
  }
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

Policy parse_policy(const std::string& text, const DomainDefinition& dom) {
  Parser parser(text, dom);
  Policy p = parser.policy();
  typecheck_policy(p, dom);
  return p;
}

PredPtr parse_predicate(const std::string& text, const DomainDefinition& dom) {
  Parser parser(text, dom);
  PredPtr p = parser.whole_pred();
  typecheck_predicate(*p, dom);
  return p;
}

ExprPtr parse_expr(const std::string& text, const DomainDefinition& dom) {
  Parser parser(text, dom);
  ExprPtr e = parser.whole_expr();
  typecheck_expr(*e, dom);
  return e;
}

std::string print_expr(const Expr& e) {
  std::string out;
  print_expr_to(e, out);
  return out;
}

std::string print_predicate(const Predicate& p) {
  std::string out;
  print_pred_to(p, out);
  return out;
}

std::string print_policy(const Policy& p) {
  std::string out;
  for (size_t i = 0; i < p.branches.size(); ++i) {
    out += i == 0 ? "if " : "elif ";
    out += print_predicate(*p.branches[i].guard);
    out += ": return " + p.branches[i].action + "\n";
  }
  return out;
}

Policy load_policy(const std::string& path, const DomainDefinition& dom) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open policy file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_policy(ss.str(), dom);
}

void save_policy(const Policy& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write policy file " + path);
  out << print_policy(p);
}

}  // namespace idips
