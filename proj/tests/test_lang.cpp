#include "doctest.h"
#include "pmx/lang.hpp"

using namespace pmx;

namespace {

ExprPtr parseOk(const std::string& src) {
  auto r = parse(src);
  REQUIRE_MESSAGE(r.ok(), (r.ok() ? "" : r.diagnostics()[0].message));
  return *r;
}

ExprPtr typedOk(const std::string& src) {
  auto r = frontend(src);
  REQUIRE_MESSAGE(r.ok(), (r.ok() ? "" : render(r.diagnostics()[0], "<src>")));
  return *r;
}

Diagnostic firstError(const std::string& src) {
  auto r = frontend(src);
  REQUIRE_FALSE(r.ok());
  return r.diagnostics().front();
}

}  // namespace

TEST_CASE("parse let with builtin application") {
  ExprPtr e = parseOk("let x = addi 1 2 in x");
  const auto* l = as<Let>(e);
  REQUIRE(l);
  CHECK(l->name.text == "x");
  auto [head, args] = appSpine(l->bound);
  REQUIRE(as<Lit>(head));
  CHECK(as<Lit>(head)->value == Const::builtin(Builtin::Addi));
  REQUIRE(args.size() == 2);
  CHECK(as<Lit>(args[0])->value == Const::integer(1));
  CHECK(as<Lit>(args[1])->value == Const::integer(2));
  CHECK(as<Var>(l->body)->name.text == "x");
}

TEST_CASE("parse accelerate map2") {
  ExprPtr e = parseOk("accelerate (map2 addi s1 s2)");
  const auto* a = as<Accelerate>(e);
  REQUIRE(a);
  const auto* m = as<Map2>(a->body);
  REQUIRE(m);
  CHECK(as<Var>(m->lhs)->name.text == "s1");
  CHECK(as<Var>(m->rhs)->name.text == "s2");
}

TEST_CASE("parse error points at offending token") {
  auto r = parse("let x = in");
  REQUIRE_FALSE(r.ok());
  const auto& d = r.diagnostics()[0];
  CHECK(d.kind == DiagKind::ParseError);
  CHECK(d.span.line == 1);
  CHECK(d.span.col == 9);
}

TEST_CASE("parse rejects duplicate record labels and reserved binders") {
  CHECK_FALSE(parse("{a = 1, a = 2}").ok());
  CHECK_FALSE(parse("let addi = 1 in addi").ok());
}

TEST_CASE("comments and negative literals") {
  ExprPtr e = parseOk("-- comment\n/- block /- nested -/ -/ subi -3 -2.5e1");
  auto [head, args] = appSpine(e);
  CHECK(as<Lit>(args[0])->value == Const::integer(-3));
  CHECK(as<Lit>(args[1])->value == Const::floating(-25.0));
}

TEST_CASE("symbolize shadowing") {
  auto s = symbolize(parseOk("let x = 1 in let x = 2 in x"));
  REQUIRE(s.ok());
  const auto* outer = as<Let>(*s);
  const auto* inner = as<Let>(outer->body);
  CHECK(outer->name.uid != inner->name.uid);
  CHECK(as<Var>(inner->body)->name == inner->name);

  auto lam = symbolize(parseOk("lam x. lam x. x"));
  REQUIRE(lam.ok());
  const auto* l1 = as<Lam>(*lam);
  const auto* l2 = as<Lam>(l1->body);
  CHECK(as<Var>(l2->body)->name == l2->param);
  CHECK_FALSE(as<Var>(l2->body)->name == l1->param);
}

TEST_CASE("symbolize reports unbound variables") {
  auto s = symbolize(parseOk("addi y 1"));
  REQUIRE_FALSE(s.ok());
  CHECK(s.diagnostics()[0].message == "unbound variable y");
}

TEST_CASE("symbolize is idempotent on binder structure") {
  auto a = symbolize(parseOk("let f = lam x. match x with {a = y, b = z} then addi y z else 0 in f {a = 1, b = 2}"));
  REQUIRE(a.ok());
  auto b = symbolize(*a);
  REQUIRE(b.ok());
  CHECK(alphaEqual(*a, *b));
}

TEST_CASE("typecheck basics") {
  CHECK(typedOk("addi 1 2")->type->str() == "Int");
  ExprPtr m = typedOk("map (lam x. muli x x) [1,2,3]");
  CHECK(m->type->str() == "[Int]");
  CHECK(as<Map>(m)->fn->type->str() == "Int -> Int");
  Diagnostic d = firstError("addi 1 1.0");
  CHECK(d.kind == DiagKind::TypeError);
  CHECK(d.message.find("Int") != std::string::npos);
  CHECK(d.message.find("Float") != std::string::npos);
}

TEST_CASE("typecheck records, projections and patterns") {
  CHECK(typedOk("let r = {a = 1, b = 2.0} in r.b")->type->str() == "Float");
  CHECK(typedOk("let f = lam r. addi r.x 1 in f {x = 3}")->type->str() == "Int");
  CHECK(firstError("let f = lam r. r.x in 0").message.find("ambiguous") != std::string::npos);
  CHECK(firstError("{a = 1}.b").message.find("no field b") != std::string::npos);
  CHECK(typedOk("if lti 1 2 then 'a' else 'b'")->type->str() == "Char");
  CHECK(typedOk("\"hi\"")->type->str() == "[Char]");
}

TEST_CASE("typecheck builtins instantiate per use") {
  CHECK(typedOk("let s = [1,2] in let t = [1.0] in addf (get t 0) (int2float (get s 1))")->type->str() == "Float");
  CHECK(typedOk("tensorCreate [2,2] (lam i. 0.0)")->type->str() == "Tensor[Float]");
  CHECK(firstError("tensorCreate [2] (lam i. true)").message.find("tensor elements") != std::string::npos);
  CHECK(typedOk("loop 3 (lam i. {})")->type->str() == "{}");
  CHECK(typedOk("reduce addi 0 [1,2]")->type->str() == "Int");
  CHECK(typedOk("flatten [[1],[2,3]]")->type->str() == "[Int]");
}

TEST_CASE("typecheck recursive lets") {
  ExprPtr e = typedOk(
      "recursive let even = lam n. if eqi n 0 then true else odd (subi n 1)\n"
      "let odd = lam n. if eqi n 0 then false else even (subi n 1) in even 10");
  CHECK(e->type->str() == "Bool");
}

TEST_CASE("pretty printing") {
  CHECK(prettyPrint(parseOk("accelerate (reduce muli 1 s)")) == "accelerate (reduce muli 1 s)");
  CHECK(prettyPrint(parseOk("never")) == "never");
  CHECK(prettyPrint(parseOk("{b = 1, a = {d = 2, c = 3}}")) == "{b = 1, a = {d = 2, c = 3}}");
  CHECK(prettyPrint(parseOk("r.x.y")) == "r.x.y");
  CHECK(prettyPrint(parseOk("subi (-1) 2.5")) == "subi (-1) 2.5");
}

TEST_CASE("pretty printing disambiguates shadowed binders") {
  auto s = symbolize(parseOk("let x = 1 in let y = lam x. x in let x = 2 in y x"));
  REQUIRE(s.ok());
  std::string out = prettyPrint(*s);
  CHECK(out.find("x#1") != std::string::npos);
  auto back = parse(out);
  REQUIRE(back.ok());
  CHECK(alphaEqual(*back, *s));
}

TEST_CASE("round trip on a mixed program") {
  const char* src =
      "let s = [1, 2, 3] in\n"
      "recursive let f = lam n : Int. match n with 0 then 1 else muli n (f (subi n 1)) in\n"
      "let r : {a : Int, b : [Char]} = {a = f 3, b = \"q\\n\\u{1F600}\"} in\n"
      "let g = lam x. match x with {a = a, b = _} then a else never in\n"
      "let t = tensorCreate [2, 3] (lam i. int2float (get i 0)) in\n"
      "let u = loop 2 (lam i. tensorSet t [0, i] 1.5) in\n"
      "accelerate (map2 (lam x. lam y. addi x y) s (map (lam z. muli z (g r)) s))";
  ExprPtr e = typedOk(src);
  std::string printed = prettyPrint(e);
  auto again = parse(printed);
  REQUIRE_MESSAGE(again.ok(), printed);
  CHECK(alphaEqual(*again, e));
  CHECK(prettyPrint(*again) == printed);
  CHECK(frontend(printed).ok());
}
