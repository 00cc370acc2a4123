#include <cctype>
#include <charconv>
#include <cstdlib>
#include <set>
#include <string>

#include "pmx/lang.hpp"
#include "utf8.hpp"

namespace pmx {
namespace {

enum class Tok { Ident, Int, Float, Char, String, Punct, End };

struct Token {
  Tok kind;
  std::string text;  // identifier / punctuation / raw literal text
  std::u32string chars;  // decoded Char / String payload
  Span span;
};

const std::set<std::string, std::less<>> kKeywords = {
    "let",   "in",         "lam", "recursive", "match", "with",    "then",   "else",
    "never", "accelerate", "map", "map2",      "reduce", "flatten", "loop",  "if",
    "true",  "false"};

struct ParseFailure {
  Span span;
  std::string message;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skipTrivia();
      Span sp{line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", {}, sp});
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() && isIdentChar(src_[pos_])) advance();
        out.push_back({Tok::Ident, std::string(src_.substr(start, pos_ - start)), {}, sp});
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && pos_ + 1 < src_.size() &&
                  std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        out.push_back(number(sp));
      } else if (c == '\'') {
        advance();
        char32_t ch = charInLiteral('\'', sp);
        if (pos_ >= src_.size() || src_[pos_] != '\'') fail(sp, "unterminated character literal");
        advance();
        out.push_back({Tok::Char, "", std::u32string(1, ch), sp});
      } else if (c == '"') {
        advance();
        std::u32string s;
        while (pos_ < src_.size() && src_[pos_] != '"') s.push_back(charInLiteral('"', sp));
        if (pos_ >= src_.size()) fail(sp, "unterminated string literal");
        advance();
        out.push_back({Tok::String, "", s, sp});
      } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
        advance();
        advance();
        out.push_back({Tok::Punct, "->", {}, sp});
      } else if (std::string_view("()[]{},=.:;").find(c) != std::string_view::npos) {
        advance();
        out.push_back({Tok::Punct, std::string(1, c), {}, sp});
      } else {
        fail(sp, std::string("unexpected character '") + c + "'");
      }
    }
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  [[noreturn]] static void fail(Span sp, std::string msg) { throw ParseFailure{sp, std::move(msg)}; }

  static bool isIdentChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '#';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(src_[pos_]) & 0xC0) != 0x80) {
      ++col_;
    }
    ++pos_;
  }

  void skipTrivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
        Span sp{line_, col_};
        int depth = 0;
        do {
          if (pos_ + 1 < src_.size() && src_[pos_] == '/' && src_[pos_ + 1] == '-') {
            ++depth;
            advance();
          } else if (pos_ + 1 < src_.size() && src_[pos_] == '-' && src_[pos_ + 1] == '/') {
            --depth;
            advance();
          }
          if (pos_ >= src_.size()) fail(sp, "unterminated block comment");
          advance();
        } while (depth > 0);
      } else {
        return;
      }
    }
  }

  Token number(Span sp) {
    std::size_t start = pos_;
    bool isFloat = false;
    if (src_[pos_] == '-') advance();
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    };
    digits();
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      isFloat = true;
      advance();
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      int saveLine = line_, saveCol = col_;
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        isFloat = true;
        digits();
      } else {
        pos_ = save;
        line_ = saveLine;
        col_ = saveCol;
      }
    }
    return {isFloat ? Tok::Float : Tok::Int, std::string(src_.substr(start, pos_ - start)), {}, sp};
  }

  char32_t charInLiteral(char quote, Span sp) {
    if (pos_ >= src_.size()) fail(sp, "unterminated literal");
    char c = src_[pos_];
    if (c == '\n') fail(sp, "newline in literal");
    if (c != '\\') {
      std::size_t len = 0;
      char32_t cp = utf8::decode(src_.substr(pos_), len);
      if (len == 0) fail(sp, "invalid UTF-8 in literal");
      for (std::size_t i = 0; i < len; ++i) advance();
      if (cp == static_cast<char32_t>(quote)) fail(sp, "empty literal");
      return cp;
    }
    advance();
    if (pos_ >= src_.size()) fail(sp, "unterminated escape");
    char e = src_[pos_];
    advance();
    switch (e) {
      case 'n':
        return U'\n';
      case 't':
        return U'\t';
      case 'r':
        return U'\r';
      case '0':
        return U'\0';
      case '\\':
        return U'\\';
      case '\'':
        return U'\'';
      case '"':
        return U'"';
      case 'u': {
        if (pos_ >= src_.size() || src_[pos_] != '{') fail(sp, "expected '{' in \\u escape");
        advance();
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        if (pos_ >= src_.size() || src_[pos_] != '}' || pos_ == start) fail(sp, "bad \\u escape");
        auto hex = src_.substr(start, pos_ - start);
        advance();
        return static_cast<char32_t>(std::strtoul(std::string(hex).c_str(), nullptr, 16));
      }
      default:
        fail(sp, std::string("unknown escape '\\") + e + "'");
    }
  }
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ExprPtr program() {
    ExprPtr e = expr();
    if (peek().kind != Tok::End) fail(peek().span, "unexpected " + describe(peek()));
    return e;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  [[noreturn]] static void fail(Span sp, std::string msg) { throw ParseFailure{sp, std::move(msg)}; }

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool isKw(const Token& t, std::string_view kw) const { return t.kind == Tok::Ident && t.text == kw; }
  bool isPunct(const Token& t, std::string_view p) const { return t.kind == Tok::Punct && t.text == p; }
  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End:
        return "end of input";
      case Tok::String:
        return "string literal";
      case Tok::Char:
        return "character literal";
      default:
        return "\"" + t.text + "\"";
    }
  }

  void expectKw(std::string_view kw) {
    if (!isKw(peek(), kw)) fail(peek().span, "expected \"" + std::string(kw) + "\", found " + describe(peek()));
    next();
  }
  void expectPunct(std::string_view p) {
    if (!isPunct(peek(), p)) fail(peek().span, "expected \"" + std::string(p) + "\", found " + describe(peek()));
    next();
  }

  Name binder() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || kKeywords.count(t.text)) {
      fail(t.span, "expected identifier, found " + describe(t));
    }
    if (builtinByName(t.text)) fail(t.span, "\"" + t.text + "\" is a reserved builtin name");
    if (std::isupper(static_cast<unsigned char>(t.text[0]))) {
      fail(t.span, "identifiers must start with a lowercase letter or '_'");
    }
    next();
    return Name{t.text, 0};
  }

  std::string label() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || t.text == "_") fail(t.span, "expected record label, found " + describe(t));
    next();
    return t.text;
  }

  std::optional<Type> optAnnot() {
    if (!isPunct(peek(), ":")) return std::nullopt;
    next();
    return type();
  }

  // ---- types ----
  Type type() {
    Type lhs = typeAtom();
    if (isPunct(peek(), "->")) {
      next();
      return Type::arrow(lhs, type());
    }
    return lhs;
  }

  Type typeAtom() {
    const Token& t = peek();
    if (isPunct(t, "(")) {
      next();
      Type inner = type();
      expectPunct(")");
      return inner;
    }
    if (isPunct(t, "[")) {
      next();
      Type elem = type();
      expectPunct("]");
      return Type::seq(elem);
    }
    if (isPunct(t, "{")) {
      next();
      std::vector<Type::Field> fields;
      std::set<std::string> seen;
      if (!isPunct(peek(), "}")) {
        for (;;) {
          Span sp = peek().span;
          std::string l = label();
          if (!seen.insert(l).second) fail(sp, "duplicate record label \"" + l + "\"");
          expectPunct(":");
          fields.emplace_back(l, type());
          if (!isPunct(peek(), ",")) break;
          next();
        }
      }
      expectPunct("}");
      return Type::record(std::move(fields));
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "Int") return next(), Type::integer();
      if (t.text == "Float") return next(), Type::floating();
      if (t.text == "Bool") return next(), Type::boolean();
      if (t.text == "Char") return next(), Type::character();
      if (t.text == "Tensor") {
        next();
        expectPunct("[");
        Type elem = type();
        expectPunct("]");
        return Type::tensor(elem);
      }
    }
    fail(t.span, "expected a type, found " + describe(t));
  }

  // ---- expressions ----
  ExprPtr expr() {
    const Token& t = peek();
    Span sp = t.span;
    if (isKw(t, "let")) {
      next();
      Name n = binder();
      auto annot = optAnnot();
      expectPunct("=");
      ExprPtr bound = expr();
      expectKw("in");
      ExprPtr body = expr();
      return mk(Let{n, annot, bound, body}, sp);
    }
    if (isKw(t, "recursive")) {
      next();
      std::vector<Binding> bs;
      while (isKw(peek(), "let")) {
        Span bsp = next().span;
        Name n = binder();
        auto annot = optAnnot();
        expectPunct("=");
        ExprPtr body = expr();
        if (!is<Lam>(body)) fail(body->span, "recursive bindings must be lambdas");
        bs.push_back(Binding{n, annot, body, bsp});
      }
      if (bs.empty()) fail(peek().span, "expected \"let\" after \"recursive\"");
      expectKw("in");
      ExprPtr body = expr();
      return mk(RecLets{std::move(bs), body}, sp);
    }
    if (isKw(t, "lam")) {
      next();
      Name n = binder();
      auto annot = optAnnot();
      expectPunct(".");
      ExprPtr body = expr();
      return mk(Lam{n, annot, body}, sp);
    }
    if (isKw(t, "match")) {
      next();
      ExprPtr target = expr();
      expectKw("with");
      PatternPtr p = pattern();
      expectKw("then");
      ExprPtr thn = expr();
      expectKw("else");
      ExprPtr els = expr();
      return mk(Match{target, p, thn, els}, sp);
    }
    if (isKw(t, "if")) {
      next();
      ExprPtr cond = expr();
      expectKw("then");
      ExprPtr thn = expr();
      expectKw("else");
      ExprPtr els = expr();
      return mk(Match{cond, mkPat(PConst{Const::boolean(true)}, sp), thn, els}, sp);
    }
    return application();
  }

  bool atomStart(const Token& t) const {
    switch (t.kind) {
      case Tok::Int:
      case Tok::Float:
      case Tok::Char:
      case Tok::String:
        return true;
      case Tok::Ident:
        return !kKeywords.count(t.text) || t.text == "true" || t.text == "false" || t.text == "never";
      case Tok::Punct:
        return t.text == "(" || t.text == "[" || t.text == "{";
      case Tok::End:
        return false;
    }
    return false;
  }

  ExprPtr application() {
    const Token& t = peek();
    Span sp = t.span;
    ExprPtr head;
    if (isKw(t, "accelerate")) {
      next();
      head = mk(Accelerate{postfix()}, sp);
    } else if (isKw(t, "map")) {
      next();
      ExprPtr f = postfix();
      head = mk(Map{f, postfix()}, sp);
    } else if (isKw(t, "map2")) {
      next();
      ExprPtr f = postfix();
      ExprPtr a = postfix();
      head = mk(Map2{f, a, postfix()}, sp);
    } else if (isKw(t, "reduce")) {
      next();
      ExprPtr f = postfix();
      ExprPtr acc = postfix();
      head = mk(Reduce{f, acc, postfix()}, sp);
    } else if (isKw(t, "flatten")) {
      next();
      head = mk(Flatten{postfix()}, sp);
    } else if (isKw(t, "loop")) {
      next();
      ExprPtr n = postfix();
      head = mk(Loop{n, postfix()}, sp);
    } else {
      head = postfix();
    }
    while (atomStart(peek())) {
      ExprPtr arg = postfix();
      head = mk(App{head, arg}, sp);
    }
    return head;
  }

  ExprPtr postfix() {
    ExprPtr e = atom();
    while (isPunct(peek(), ".") && peek(1).kind == Tok::Ident) {
      Span sp = next().span;
      std::string l = label();
      Name x{l, 0};
      auto pat = mkPat(PRecord{{{l, mkPat(PVar{x}, sp)}}}, sp);
      e = mk(Match{e, pat, mk(Var{x}, sp), mk(Never{}, sp)}, e->span);
    }
    return e;
  }

  ExprPtr atom() {
    const Token& t = peek();
    Span sp = t.span;
    switch (t.kind) {
      case Tok::Int:
      case Tok::Float:
        next();
        return mk(Lit{numberConst(t)}, sp);
      case Tok::Char:
        next();
        return mk(Lit{Const::character(t.chars[0])}, sp);
      case Tok::String: {
        next();
        std::vector<ExprPtr> elems;
        for (char32_t c : t.chars) elems.push_back(mk(Lit{Const::character(c)}, sp));
        return mk(SeqLit{std::move(elems)}, sp);
      }
      case Tok::Ident: {
        if (t.text == "true" || t.text == "false") {
          next();
          return mk(Lit{Const::boolean(t.text == "true")}, sp);
        }
        if (t.text == "never") {
          next();
          return mk(Never{}, sp);
        }
        if (kKeywords.count(t.text)) break;
        if (t.text == "_") fail(sp, "\"_\" cannot be used as an expression");
        next();
        if (auto b = builtinByName(t.text)) return mk(Lit{Const::builtin(*b)}, sp);
        return mk(Var{Name{t.text, 0}}, sp);
      }
      case Tok::Punct:
        if (t.text == "(") {
          next();
          ExprPtr e = expr();
          expectPunct(")");
          return e;
        }
        if (t.text == "[") {
          next();
          std::vector<ExprPtr> elems;
          if (!isPunct(peek(), "]")) {
            for (;;) {
              elems.push_back(expr());
              if (!isPunct(peek(), ",")) break;
              next();
            }
          }
          expectPunct("]");
          return mk(SeqLit{std::move(elems)}, sp);
        }
        if (t.text == "{") {
          next();
          std::vector<std::pair<std::string, ExprPtr>> fields;
          std::set<std::string> seen;
          if (!isPunct(peek(), "}")) {
            for (;;) {
              Span lsp = peek().span;
              std::string l = label();
              if (!seen.insert(l).second) fail(lsp, "duplicate record label \"" + l + "\"");
              expectPunct("=");
              fields.emplace_back(l, expr());
              if (!isPunct(peek(), ",")) break;
              next();
            }
          }
          expectPunct("}");
          return mk(RecordLit{std::move(fields)}, sp);
        }
        break;
      case Tok::End:
        break;
    }
    fail(sp, "unexpected " + describe(t));
  }

  Const numberConst(const Token& t) {
    if (t.kind == Tok::Int) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (ec != std::errc{} || p != t.text.data() + t.text.size()) {
        fail(t.span, "integer literal out of range: " + t.text);
      }
      return Const::integer(v);
    }
    return Const::floating(std::strtod(t.text.c_str(), nullptr));
  }

  PatternPtr pattern() {
    const Token& t = peek();
    Span sp = t.span;
    switch (t.kind) {
      case Tok::Int:
      case Tok::Float:
        next();
        return mkPat(PConst{numberConst(t)}, sp);
      case Tok::Char:
        next();
        return mkPat(PConst{Const::character(t.chars[0])}, sp);
      case Tok::Ident:
        if (t.text == "true" || t.text == "false") {
          next();
          return mkPat(PConst{Const::boolean(t.text == "true")}, sp);
        }
        return mkPat(PVar{binder()}, sp);
      case Tok::Punct:
        if (t.text == "{") {
          next();
          std::vector<std::pair<std::string, PatternPtr>> fields;
          std::set<std::string> seen;
          if (!isPunct(peek(), "}")) {
            for (;;) {
              Span lsp = peek().span;
              std::string l = label();
              if (!seen.insert(l).second) fail(lsp, "duplicate record label \"" + l + "\"");
              expectPunct("=");
              fields.emplace_back(l, pattern());
              if (!isPunct(peek(), ",")) break;
              next();
            }
          }
          expectPunct("}");
          return mkPat(PRecord{std::move(fields)}, sp);
        }
        if (t.text == "(") {
          next();
          PatternPtr p = pattern();
          expectPunct(")");
          return p;
        }
        break;
      default:
        break;
    }
    fail(sp, "expected a pattern, found " + describe(t));
  }
};

}  // namespace

Outcome<ExprPtr> parse(std::string_view source) {
  try {
    Lexer lexer(source);
    Parser parser(lexer.run());
    return parser.program();
  } catch (const ParseFailure& f) {
    return Diagnostics{Diagnostic{DiagKind::ParseError, std::nullopt, f.span, f.message}};
  }
}

Outcome<ExprPtr> frontend(std::string_view source) {
  auto parsed = parse(source);
  if (!parsed) return parsed;
  auto sym = symbolize(*parsed);
  if (!sym) return sym;
  return typecheck(*sym);
}

}  // namespace pmx
