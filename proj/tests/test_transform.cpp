#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pmx/extraction.hpp"
#include "pmx/lang.hpp"
#include "pmx/transform.hpp"
#include "test_util.hpp"

using namespace pmx;
using testutil::typed;

TEST_CASE("nesting check") {
  CHECK(checkNoNestedAccelerate(typed("let f = lam x. addi x 1 in accelerate (map f [1])")).empty());
  auto direct = checkNoNestedAccelerate(typed("accelerate (accelerate (map (lam x. x) [1]))"));
  REQUIRE(direct.size() == 1);
  CHECK(direct[0].span.col == 13);
  auto via = checkNoNestedAccelerate(typed(
      "let g = lam x. accelerate (map (lam y. addi x y) [1]) in\n"
      "accelerate (g 1)"));
  REQUIRE(via.size() == 1);
  CHECK(via[0].span.line == 1);
  CHECK(via[0].message.find("through g") != std::string::npos);
}

TEST_CASE("rewriteAccelerate") {
  auto none = rewriteAccelerate(typed("addi 1 2"));
  CHECK(none.accel.idents.empty());
  auto one = rewriteAccelerate(typed("accelerate (reduce addi 0 [1])"));
  REQUIRE(one.accel.idents.size() == 1);
  const auto* l = as<Let>(one.program);
  REQUIRE(l);
  CHECK(one.accel.contains(l->name));
  CHECK(is<Reduce>(l->bound));
  CHECK(as<Var>(l->body)->name == l->name);
  auto two = rewriteAccelerate(typed("addi (accelerate (reduce addi 0 [1])) (accelerate (reduce addi 0 [2]))"));
  CHECK(two.accel.idents.size() == 2);
}

TEST_CASE("lambda lifting on the extraction walkthrough") {
  auto rw = rewriteAccelerate(typed(testutil::readFile("programs/extraction.pmx")));
  auto lifted = lambdaLift(rw.program, rw.accel);
  auto names = topLevelNames(lifted.program);
  std::vector<std::string> texts;
  for (const auto& n : names) texts.push_back(n.text);
  CHECK(texts == std::vector<std::string>{"g", "unused", "f", "a", "s", "r"});
  const Name& a = names[3];
  CHECK(lifted.accelArity.at(a) == 1);
  // a = lam s. reduce addi 0 (map f s); fv = {f}
  ExprPtr cur = lifted.program;
  for (int i = 0; i < 3; ++i) cur = as<Let>(cur)->body;
  const auto* la = as<Let>(cur);
  REQUIRE(as<Lam>(la->bound));
  CHECK(as<Lam>(la->bound)->param.text == "s");
  auto fv = freeVars(la->bound);
  REQUIRE(fv.size() == 1);
  CHECK(fv.begin()->text == "f");
  CHECK(typecheck(lifted.program).ok());
  CHECK(prettyPrint(lifted.program).find("a s") != std::string::npos);
}

TEST_CASE("zero-capture accelerate gets a unit parameter") {
  auto rw = rewriteAccelerate(typed("accelerate (reduce addi 0 [1, 2])"));
  auto lifted = lambdaLift(rw.program, rw.accel);
  const auto* l = as<Let>(lifted.program);
  REQUIRE(l);
  const auto* lam = as<Lam>(l->bound);
  REQUIRE(lam);
  CHECK(lam->paramType->isUnit());
  CHECK(lifted.accelArity.begin()->second == 1);
  auto [head, args] = appSpine(l->body);
  REQUIRE(args.size() == 1);
  CHECK(as<RecordLit>(args[0]));
}

TEST_CASE("lifting captures transitively through callees") {
  auto e = typed(
      "let k = lam n. let h = lam x. addi x n in let g = lam y. h y in g 1 in k 5");
  auto lifted = lambdaLift(e, {});
  auto names = topLevelNames(lifted.program);
  REQUIRE(names.size() == 3);
  auto printed = prettyPrint(lifted.program);
  CHECK(typecheck(lifted.program).ok());
  // every binding body is closed up to top-level names
  std::set<Name> top(names.begin(), names.end());
  ExprPtr cur = lifted.program;
  while (const auto* l = as<Let>(cur)) {
    for (const auto& v : freeVars(l->bound)) CHECK_MESSAGE(top.count(v), printed);
    cur = l->body;
  }
}

TEST_CASE("mutual recursion becomes one group") {
  auto e = typed(
      "let k = lam m.\n"
      "  recursive let ev = lam n. if eqi n 0 then true else od (subi n 1)\n"
      "  let od = lam n. if eqi n 0 then false else ev (subi n m) in ev 4 in k 1");
  auto lifted = lambdaLift(e, {});
  const auto* r = as<RecLets>(lifted.program);
  REQUIRE(r);
  CHECK(r->bindings.size() == 2);
  CHECK(typecheck(lifted.program).ok());
}

TEST_CASE("ANF") {
  auto e = toANF(typed("let a = 1 in let b = 2 in let c = 3 in addi (muli a b) c"));
  std::string s = prettyPrint(e);
  CHECK(s == "let a = 1 in\nlet b = 2 in\nlet c = 3 in\nlet t#1 = muli a b in\naddi t#1 c");
  auto loopE = toANF(typed("let f = lam z. lam i. {} in let x = 1 in loop 3 (f x)"));
  CHECK(prettyPrint(loopE).find("loop 3 (f x)") != std::string::npos);
  CHECK(prettyPrint(toANF(typed("let x = 1 in x"))) == "let x = 1 in\nx");
  auto nested = toANF(typed("let x = (let y = addi 1 2 in muli y y) in x"));
  CHECK(prettyPrint(nested) == "let y = addi 1 2 in\nlet x = muli y y in\nx");
  CHECK(typecheck(nested).ok());
}
