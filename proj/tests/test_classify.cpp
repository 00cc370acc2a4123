#include "doctest.h"
#include "pmx/pipeline.hpp"
#include "pmx/wellformed.hpp"
#include "test_util.hpp"
#include "testkit/harness.hpp"

using namespace pmx;

namespace {

Compilation compiled(const std::string& src) { return compile(src); }

std::vector<std::string> verdicts(const Compilation& c) {
  std::vector<std::string> out;
  for (const auto& r : classificationTable(c)) out.emplace_back(verdictName(r.verdict));
  return out;
}

bool hasRule(const Compilation& c, const std::string& rule) {
  for (const auto& r : testkit::rules(c)) {
    if (r == rule) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("parallel construct counts") {
  auto e = testutil::typed("let s = [1] in map (lam x. reduce addi 0 [x]) (flatten [s])");
  CHECK(countFutharkExprs(e) == 3);
  CHECK(countCudaExprs(e) == 0);
  auto l = testutil::typed("loop 2 (lam i. loop i (lam j. {}))");
  CHECK(countCudaExprs(l) == 2);
}

TEST_CASE("classifyCounts covers the four verdicts") {
  CHECK(classifyCounts({0, 0}) == Verdict::Any);
  CHECK(classifyCounts({2, 0}) == Verdict::Futhark);
  CHECK(classifyCounts({0, 1}) == Verdict::Cuda);
  CHECK(classifyCounts({1, 1}) == Verdict::Invalid);
}

TEST_CASE("transitive counts see through helpers once") {
  auto e = testutil::typed(
      "let h = lam s. map (addi 1) s in "
      "let k = lam s. h (h s) in "
      "let top = lam s. reduce addi 0 (k s) in {}");
  auto bodies = bindingBodies(e);
  Name top;
  for (const auto& [n, _] : bodies) {
    if (n.text == "top") top = n;
  }
  Counts c = transitiveCounts(top, bodies);
  CHECK(c.fut == 2);  // reduce in top, map in h counted once
  CHECK(c.cu == 0);
}

TEST_CASE("classification fixtures") {
  SUBCASE("Any is an error") {
    auto c = compiled("let x = accelerate (addi 1 2) in print (int2string x)");
    REQUIRE_FALSE(c.ok());
    REQUIRE(c.diagnostics.size() == 1);
    CHECK(c.diagnostics[0].kind == DiagKind::ClassifyError);
    CHECK(c.diagnostics[0].message.find("does not use any parallel") != std::string::npos);
  }
  SUBCASE("Futhark") {
    auto c = compiled("let r = accelerate (map (addi 1) [1, 2]) in {}");
    CHECK(c.ok());
    CHECK(verdicts(c) == std::vector<std::string>{"Futhark"});
  }
  SUBCASE("CUDA") {
    auto c = compiled("let t = tensorCreate [2] (lam i. 0) in accelerate (loop 2 (lam i. tensorSet t [i] i))");
    CHECK(c.ok());
    CHECK(verdicts(c) == std::vector<std::string>{"CUDA"});
  }
  SUBCASE("Invalid is an error") {
    auto c = compiled(
        "let t = tensorCreate [2] (lam i. 0) in "
        "accelerate (let s = map (addi 1) [1, 2] in loop 2 (lam i. tensorSet t [i] (get s i)))");
    REQUIRE_FALSE(c.ok());
    REQUIRE(c.diagnostics.size() == 1);
    CHECK(c.diagnostics[0].kind == DiagKind::ClassifyError);
    CHECK(c.diagnostics[0].message.find("unique to both backends (1 Futhark, 1 CUDA)") != std::string::npos);
  }
  SUBCASE("Any and Invalid are reported together in program order") {
    auto c = compiled(
        "let t = tensorCreate [2] (lam i. 0) in "
        "let _ = accelerate (addi 1 2) in "
        "accelerate (let s = map (addi 1) [1, 2] in loop 2 (lam i. tensorSet t [i] (get s i)))");
    REQUIRE(c.diagnostics.size() == 2);
    CHECK(c.diagnostics[0].message.find("does not use") != std::string::npos);
    CHECK(c.diagnostics[1].message.find("both backends") != std::string::npos);
    CHECK(c.diagnostics[0].span < c.diagnostics[1].span);
  }
}

TEST_CASE("two-backend program has one binding per backend") {
  auto c = compiled(testutil::readFile("programs/two_backends.pmx"));
  REQUIRE(c.ok());
  CHECK(verdicts(c) == std::vector<std::string>{"Futhark", "CUDA"});
  CHECK(c.split->futIdents.size() == 1);
  CHECK(c.split->cuIdents.size() == 1);
}

TEST_CASE("backend programs are disjoint in parallel constructs") {
  auto c = compiled(testutil::readFile("tests/corpus/equiv/15_two_backends.pmx"));
  REQUIRE(c.ok());
  CHECK(countCudaExprs(c.split->futProgram) == 0);
  CHECK(countFutharkExprs(c.split->cuProgram) == 0);
  CHECK(countFutharkExprs(c.split->futProgram) > 0);
  CHECK(countCudaExprs(c.split->cuProgram) > 0);
}

TEST_CASE("dump of the Futhark side of a CUDA-only program is empty") {
  auto c = compiled(testutil::readFile("programs/overlapping_views.pmx"));
  REQUIRE(c.ok());
  CHECK(*dumpStage(c, "fut") == "{}\n");
}

TEST_CASE("shared CUDA helper appears once in the CUDA program") {
  auto c = compiled(
      "let h = lam x. muli x 3 in "
      "let t = tensorCreate [4] (lam i. 0) in "
      "let _ = accelerate (loop 4 (lam i. tensorSet t [i] (h i))) in "
      "accelerate (loop 4 (lam i. tensorSet t [i] (h (h i))))");
  REQUIRE(c.ok());
  std::string cu = *dumpStage(c, "cu");
  std::size_t first = cu.find("let h =");
  REQUIRE(first != std::string::npos);
  CHECK(cu.find("let h =", first + 1) == std::string::npos);
}

TEST_CASE("well-formedness examples") {
  SUBCASE("reduce in Futhark is accepted") {
    auto c = compiled("let s = [1, 2] in let r2 = accelerate (let r = reduce addi 0 s in r) in {}");
    CHECK(c.ok());
  }
  SUBCASE("no accelerate at all is vacuously well-formed") {
    auto c = compiled("print \"hi\"");
    CHECK(c.ok());
    CHECK(c.split->futProgram->node.index() == 8);
  }
  SUBCASE("a CUDA loop over a lifted function is accepted") {
    auto c = compiled(testutil::readFile("programs/two_backends.pmx"));
    CHECK(c.ok());
  }
  SUBCASE("arrow-typed parameter in CUDA code") {
    auto c = compiled(testutil::readFile("tests/corpus/wf/reject/arrow_parameter_cuda.pmx"));
    CHECK(hasRule(c, "WF-BC-2"));
  }
  SUBCASE("only the failing side reports") {
    auto c = compiled(
        "let t = tensorCreate [2] (lam i. 0) in "
        "let r = accelerate (map (addi 1) [1]) in "
        "accelerate (loop 2 (lam i. let p = addi i in tensorSet t [i] (p 1)))");
    REQUIRE_FALSE(c.ok());
    for (const auto& r : testkit::rules(c)) CHECK(r.rfind("WF-EC", 0) == 0);
  }
}

TEST_CASE("well-formedness corpus") {
  auto accept = testkit::corpus("tests/corpus/wf/accept");
  auto reject = testkit::corpus("tests/corpus/wf/reject");
  CHECK(accept.size() >= 10);
  CHECK(reject.size() >= 10);
  for (const auto& p : accept) {
    CAPTURE(p.filename().string());
    auto src = testkit::slurp(p);
    auto c = compiled(src);
    CHECK(c.ok());
    // Accepted programs run to completion on the simulated device.
    auto r = testkit::runSource(src, testkit::accelConfig(4));
    CHECK(r.error == "");
  }
  for (const auto& p : reject) {
    CAPTURE(p.filename().string());
    auto src = testkit::slurp(p);
    auto want = testkit::header(src, "expect");
    REQUIRE(want);
    auto c = compiled(src);
    CHECK_FALSE(c.ok());
    CHECK(hasRule(c, *want));
  }
}

TEST_CASE("checks are deterministic") {
  auto src = testutil::readFile("tests/corpus/wf/reject/record_of_function.pmx");
  auto a = compiled(src);
  auto b = compiled(src);
  REQUIRE(a.diagnostics.size() == b.diagnostics.size());
  for (std::size_t i = 0; i < a.diagnostics.size(); ++i) {
    CHECK(render(a.diagnostics[i], "f") == render(b.diagnostics[i], "f"));
  }
}
