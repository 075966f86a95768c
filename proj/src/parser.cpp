#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wstl/formula.hpp"

namespace wstl {

namespace {

enum class Tok {
  End,
  Ident,
  Number,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Star,
  Plus,
  Minus,
  Ge,
  Le,
  Eq,
  Gt,
  Lt,
  Arrow,
  Bang,
  Amp,
  Pipe,
};

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  std::size_t pos = 0;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_ws();
      if (i_ >= src_.size()) break;
      out.push_back(next());
    }
    out.push_back({Tok::End, "", 0.0, src_.size()});
    return out;
  }

private:
  void skip_ws() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_])))
      ++i_;
  }

  Token next() {
    std::size_t start = i_;
    char c = src_[i_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i_;
      while (j < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[j])) ||
              src_[j] == '_'))
        ++j;
      Token t{Tok::Ident, std::string(src_.substr(i_, j - i_)), 0.0, start};
      i_ = j;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i_;
      while (j < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[j])) ||
              src_[j] == '.' || src_[j] == 'e' || src_[j] == 'E' ||
              ((src_[j] == '+' || src_[j] == '-') && j > i_ &&
               (src_[j - 1] == 'e' || src_[j - 1] == 'E'))))
        ++j;
      double value = 0.0;
      auto [p, ec] =
          std::from_chars(src_.data() + i_, src_.data() + j, value);
      if (ec != std::errc() || p != src_.data() + j)
        throw SyntaxError("malformed number", start);
      i_ = j;
      return {Tok::Number, std::string(src_.substr(start, j - start)), value,
              start};
    }
    ++i_;
    switch (c) {
      case '(': return {Tok::LParen, "(", 0.0, start};
      case ')': return {Tok::RParen, ")", 0.0, start};
      case '[': return {Tok::LBracket, "[", 0.0, start};
      case ']': return {Tok::RBracket, "]", 0.0, start};
      case ',': return {Tok::Comma, ",", 0.0, start};
      case '*': return {Tok::Star, "*", 0.0, start};
      case '+': return {Tok::Plus, "+", 0.0, start};
      case '!': return {Tok::Bang, "!", 0.0, start};
      case '&': return {Tok::Amp, "&", 0.0, start};
      case '|': return {Tok::Pipe, "|", 0.0, start};
      case '-':
        if (i_ < src_.size() && src_[i_] == '>') {
          ++i_;
          return {Tok::Arrow, "->", 0.0, start};
        }
        return {Tok::Minus, "-", 0.0, start};
      case '>':
        if (i_ < src_.size() && src_[i_] == '=') {
          ++i_;
          return {Tok::Ge, ">=", 0.0, start};
        }
        return {Tok::Gt, ">", 0.0, start};
      case '<':
        if (i_ < src_.size() && src_[i_] == '=') {
          ++i_;
          return {Tok::Le, "<=", 0.0, start};
        }
        return {Tok::Lt, "<", 0.0, start};
      case '=': return {Tok::Eq, "=", 0.0, start};
      default:
        throw SyntaxError(std::string("unexpected character '") + c + "'",
                          start);
    }
  }

  std::string_view src_;
  std::size_t i_ = 0;
};

bool is_reserved(const std::string& s) {
  return s == "U" || s == "F" || s == "G" || s == "in" || s == "true" ||
         s == "inf";
}

/// Affine expression under construction; channels accumulate coefficients.
struct Affine {
  std::vector<std::pair<std::string, double>> terms;
  double constant = 0.0;

  void add_term(const std::string& ch, double coef) {
    for (auto& [name, c] : terms) {
      if (name == ch) {
        c += coef;
        return;
      }
    }
    terms.emplace_back(ch, coef);
  }

  Predicate to_pred() const {
    Predicate p;
    for (const auto& [ch, c] : terms)
      if (c != 0.0) p.terms.emplace_back(ch, c);
    p.constant = constant;
    return p;
  }
};

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  FormulaPtr run() {
    auto f = parse_implies();
    expect(Tok::End, "trailing input after formula");
    return f;
  }

private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(i_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& advance() { return toks_[i_++]; }
  bool accept(Tok k) {
    if (peek().kind == k) {
      ++i_;
      return true;
    }
    return false;
  }
  void expect(Tok k, const std::string& what) {
    if (!accept(k)) throw SyntaxError("expected " + what, peek().pos);
  }
  bool at_ident(const char* word) const {
    return peek().kind == Tok::Ident && peek().text == word;
  }

  FormulaPtr parse_implies() {
    auto lhs = parse_or();
    if (accept(Tok::Arrow)) return make_implies(lhs, parse_implies());
    return lhs;
  }

  FormulaPtr parse_or() {
    auto f = parse_and();
    while (accept(Tok::Pipe)) f = make_or(f, parse_and());
    return f;
  }

  FormulaPtr parse_and() {
    auto f = parse_until();
    while (accept(Tok::Amp)) f = make_and(f, parse_until());
    return f;
  }

  FormulaPtr parse_until() {
    auto lhs = parse_unary();
    if (at_ident("U")) {
      advance();
      Interval iv = parse_optional_interval();
      return make_until(iv, lhs, parse_until());
    }
    return lhs;
  }

  FormulaPtr parse_unary() {
    if (accept(Tok::Bang)) return make_not(parse_unary());
    if (at_ident("F")) {
      advance();
      Interval iv = parse_optional_interval();
      return make_eventually(iv, parse_unary());
    }
    if (at_ident("G")) {
      advance();
      Interval iv = parse_optional_interval();
      return make_always(iv, parse_unary());
    }
    return parse_atom();
  }

  Interval parse_optional_interval() {
    if (peek().kind != Tok::LBracket) return Interval{0, std::nullopt, true};
    std::size_t pos = peek().pos;
    advance();
    int lo = parse_bound();
    expect(Tok::Comma, "',' in interval");
    int hi = parse_bound();
    expect(Tok::RBracket, "']' closing interval");
    if (hi < lo) throw SyntaxError("reversed interval", pos);
    return Interval{lo, hi, false};
  }

  int parse_bound() {
    if (peek().kind == Tok::Minus)
      throw SyntaxError("negative interval bound", peek().pos);
    if (peek().kind != Tok::Number)
      throw SyntaxError("expected interval bound", peek().pos);
    const Token& t = advance();
    double v = t.number;
    if (v != std::floor(v))
      throw SyntaxError("interval bound must be an integer", t.pos);
    return static_cast<int>(v);
  }

  FormulaPtr parse_atom() {
    if (at_ident("true")) {
      advance();
      return make_true();
    }
    if (peek().kind == Tok::LParen) {
      // "(x,y) in [..]x[..]" box membership vs. a parenthesized formula
      if (peek(1).kind == Tok::Ident && peek(2).kind == Tok::Comma &&
          !is_reserved(peek(1).text))
        return parse_box();
      advance();
      auto f = parse_implies();
      expect(Tok::RParen, "')'");
      return f;
    }
    return parse_comparison();
  }

  FormulaPtr parse_box() {
    expect(Tok::LParen, "'('");
    std::string cx = parse_channel();
    expect(Tok::Comma, "','");
    std::string cy = parse_channel();
    expect(Tok::RParen, "')'");
    if (!at_ident("in"))
      throw SyntaxError("expected 'in' after channel tuple", peek().pos);
    advance();
    auto [x1, x2] = parse_range();
    if (!at_ident("x"))
      throw SyntaxError("expected 'x' between box ranges", peek().pos);
    advance();
    auto [y1, y2] = parse_range();
    // (x,y) in [x1,x2]x[y1,y2]  ==  x>=x1 & x<=x2 & y>=y1 & y<=y2
    auto side = [](const std::string& ch, double coef, double c) {
      Predicate p;
      p.terms.emplace_back(ch, coef);
      p.constant = c;
      return make_pred(p);
    };
    FormulaPtr f = make_and(side(cx, 1.0, -x1), side(cx, -1.0, x2));
    f = make_and(f, side(cy, 1.0, -y1));
    f = make_and(f, side(cy, -1.0, y2));
    return f;
  }

  std::string parse_channel() {
    if (peek().kind != Tok::Ident || is_reserved(peek().text))
      throw SyntaxError("expected channel name", peek().pos);
    return advance().text;
  }

  std::pair<double, double> parse_range() {
    std::size_t pos = peek().pos;
    expect(Tok::LBracket, "'['");
    double lo = parse_signed_number();
    expect(Tok::Comma, "','");
    double hi = parse_signed_number();
    expect(Tok::RBracket, "']'");
    if (hi < lo) throw SyntaxError("reversed range", pos);
    return {lo, hi};
  }

  double parse_signed_number() {
    double sign = 1.0;
    if (accept(Tok::Minus)) sign = -1.0;
    if (peek().kind != Tok::Number)
      throw SyntaxError("expected number", peek().pos);
    return sign * advance().number;
  }

  FormulaPtr parse_comparison() {
    std::size_t pos = peek().pos;
    Affine lhs = parse_affine();
    Tok op = peek().kind;
    if (op != Tok::Ge && op != Tok::Le && op != Tok::Eq && op != Tok::Gt &&
        op != Tok::Lt)
      throw SyntaxError("expected comparison operator", peek().pos);
    advance();
    Affine rhs = parse_affine();

    Affine diff;  // lhs - rhs
    diff = lhs;
    for (const auto& [ch, c] : rhs.terms) diff.add_term(ch, -c);
    diff.constant -= rhs.constant;

    auto flipped = [&diff]() {
      Affine f;
      for (const auto& [ch, c] : diff.terms) f.add_term(ch, -c);
      f.constant = -diff.constant;
      return f;
    };

    switch (op) {
      case Tok::Ge:
      case Tok::Gt:
        return make_pred(diff.to_pred());
      case Tok::Le:
      case Tok::Lt:
        return make_pred(flipped().to_pred());
      case Tok::Eq: {
        auto a = make_pred(diff.to_pred());
        auto b = make_pred(flipped().to_pred());
        if (a->pred.terms.empty() && b->pred.terms.empty() &&
            a->pred.constant == 0.0)
          return a;  // degenerate 0 = 0
        return make_and(a, b);
      }
      default:
        throw SyntaxError("expected comparison operator", pos);
    }
  }

  Affine parse_affine() {
    Affine acc;
    double sign = accept(Tok::Minus) ? -1.0 : 1.0;
    parse_affine_term(acc, sign);
    while (true) {
      if (accept(Tok::Plus))
        parse_affine_term(acc, 1.0);
      else if (accept(Tok::Minus))
        parse_affine_term(acc, -1.0);
      else
        break;
    }
    return acc;
  }

  void parse_affine_term(Affine& acc, double sign) {
    if (peek().kind == Tok::Number) {
      double v = advance().number;
      if (accept(Tok::Star)) {
        acc.add_term(parse_channel(), sign * v);
      } else if (peek().kind == Tok::Ident && !is_reserved(peek().text)) {
        // implicit multiplication: "2 x"
        acc.add_term(advance().text, sign * v);
      } else {
        acc.constant += sign * v;
      }
      return;
    }
    if (at_ident("inf")) {
      advance();
      acc.constant += sign * std::numeric_limits<double>::infinity();
      return;
    }
    if (peek().kind == Tok::Ident && !is_reserved(peek().text)) {
      acc.add_term(advance().text, sign);
      return;
    }
    throw SyntaxError("expected affine term", peek().pos);
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

}  // namespace

FormulaPtr parse_formula(std::string_view text) {
  Lexer lex(text);
  Parser parser(lex.run());
  return parser.run();
}

}  // namespace wstl
