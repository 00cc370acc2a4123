#include <algorithm>
#include <atomic>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "pmx/pipeline.hpp"
#include "test_util.hpp"
#include "testkit/harness.hpp"

using namespace pmx;
using testkit::accelConfig;
using testkit::debugConfig;
using testkit::runSource;

namespace {

std::string out(const std::string& src, const RunConfig& cfg = debugConfig()) {
  auto r = runSource(src, cfg);
  REQUIRE_MESSAGE(r.compiled, r.diagnostics);
  REQUIRE_MESSAGE(r.error.empty(), r.error);
  return r.output;
}

Value value(const std::string& src, const RunConfig& cfg = debugConfig()) {
  auto r = runSource(src, cfg);
  REQUIRE_MESSAGE(r.compiled, r.diagnostics);
  REQUIRE_MESSAGE(r.error.empty(), r.error);
  return *r.value;
}

std::string failure(const std::string& src, const RunConfig& cfg = debugConfig()) {
  auto r = runSource(src, cfg);
  REQUIRE_MESSAGE(r.compiled, r.diagnostics);
  REQUIRE_FALSE(r.error.empty());
  return r.error;
}

}  // namespace

TEST_CASE("interval merging") {
  using V = std::vector<Interval>;
  CHECK(mergeOverlappingIntervals(V{{0, 2}, {1, 4}, {5, 6}}) == V{{0, 4}, {5, 6}});
  CHECK(mergeOverlappingIntervals(V{}) == V{});
  CHECK(mergeOverlappingIntervals(V{{5, 6}, {0, 2}}) == V{{0, 2}, {5, 6}});
  CHECK(mergeOverlappingIntervals(V{{0, 2}, {2, 3}}) == V{{0, 3}});
  CHECK(mergeOverlappingIntervals(V{{0, 10}, {2, 3}, {4, 5}}) == V{{0, 10}});
}

TEST_CASE("interval merging over views skips empty views") {
  auto buf = std::make_shared<Buffer>(TypeKind::Int, 6);
  std::vector<TensorView> vs{{buf, 0, {2}}, {buf, 1, {3}}, {buf, 5, {1}}, {buf, 3, {0}}};
  CHECK(mergeOverlappingIntervals(vs) == std::vector<Interval>{{0, 4}, {5, 6}});
}

TEST_CASE("device arena rebuilds aliasing") {
  auto buf = std::make_shared<Buffer>(TypeKind::Int, 6);
  TensorView a{buf, 0, {2}}, b{buf, 1, {3}}, c{buf, 5, {1}};
  DeviceArena arena;
  auto dev = arena.marshalIn({makeTensor(a), makeTensor(b), makeTensor(c)});
  REQUIRE(arena.roots().size() == 2);
  CHECK(arena.roots()[0].interval == Interval{0, 4});
  CHECK(arena.roots()[1].interval == Interval{5, 6});
  const auto& da = *dev[0].get<TensorPtr>();
  const auto& db = *dev[1].get<TensorPtr>();
  CHECK(da.buffer == db.buffer);
  CHECK(da.buffer != buf);
  CHECK(db.offset == 1);
  // Writes through either device view land in one cell and are copied back once.
  setTensorElement(da, 1, Value(std::int64_t{5}));
  setTensorElement(db, 0, Value(std::int64_t{7}));
  CHECK(tensorElement(TensorView{buf, 0, {6}}, 1).get<std::int64_t>() == 0);
  Value back = arena.marshalOut(makeTensor(db));
  CHECK(tensorElement(TensorView{buf, 0, {6}}, 1).get<std::int64_t>() == 7);
  const auto& hb = *back.get<TensorPtr>();
  CHECK(hb.buffer == buf);
  CHECK(hb.offset == 1);
}

TEST_CASE("device arena separates host buffers") {
  auto b1 = std::make_shared<Buffer>(TypeKind::Int, 4);
  auto b2 = std::make_shared<Buffer>(TypeKind::Float, 4);
  DeviceArena arena;
  arena.marshalIn({makeSeq({makeTensor({b1, 0, {4}}), makeTensor({b2, 0, {4}})})});
  CHECK(arena.roots().size() == 2);
  auto p = arena.placement(TensorView{b2, 0, {4}});
  REQUIRE(p);
  CHECK(arena.roots()[p->first].host == b2);
}

TEST_CASE("device arena returns fresh tensors by copy") {
  DeviceArena arena;
  arena.marshalIn({});
  auto fresh = std::make_shared<Buffer>(TypeKind::Int, 3, true);
  fresh->store(2, 9);
  Value r = arena.marshalOut(makeRecord({{"x", makeTensor({fresh, 1, {2}})}, {"y", makeTensor({fresh, 0, {3}})}}));
  const auto& x = *r.get<RecordPtr>()->field("x")->get<TensorPtr>();
  const auto& y = *r.get<RecordPtr>()->field("y")->get<TensorPtr>();
  CHECK_FALSE(x.buffer->device());
  CHECK(x.buffer == y.buffer);  // aliasing between results survives
  CHECK(tensorElement(x, 1).get<std::int64_t>() == 9);
}

TEST_CASE("device arena rejects functions") {
  DeviceArena arena;
  auto fn = value("lam x. addi x 1");
  CHECK_THROWS_AS(arena.marshalIn({fn}), RuntimeError);
}

TEST_CASE("worker pool runs every lane and rethrows") {
  WorkerPool pool(4);
  std::atomic<int> mask{0};
  pool.run([&](int lane) { mask |= 1 << lane; });
  CHECK(mask == 15);
  CHECK_THROWS_AS(pool.run([](int lane) {
                    if (lane == 2) throw RuntimeError("boom");
                  }),
                  RuntimeError);
  // The pool stays usable after a failure.
  std::atomic<int> count{0};
  pool.run([&](int) { ++count; });
  CHECK(count == 4);
}

TEST_CASE("assumption checks") {
  CHECK_NOTHROW(checkRegular(makeSeq({makeSeq({Value(std::int64_t{1})}), makeSeq({Value(std::int64_t{2})})})));
  try {
    checkRegular(makeSeq({makeSeq({Value(std::int64_t{1}), Value(std::int64_t{2})}), makeSeq({Value(std::int64_t{3})})}));
    FAIL("expected an error");
  } catch (const RuntimeError& e) {
    CHECK(std::string(e.what()).find("irregular sequence") != std::string::npos);
    CHECK(std::string(e.what()).find("element [1] has length 1, expected 2") != std::string::npos);
    CHECK(e.assumption() == "regular-sequence");
  }
  auto buf = std::make_shared<Buffer>(TypeKind::Int, 1);
  CHECK_NOTHROW(checkRank(TensorView{buf, 0, {1, 1, 1}}, 3));
  try {
    checkRank(TensorView{buf, 0, {1, 1, 1, 1}}, 3);
    FAIL("expected an error");
  } catch (const RuntimeError& e) {
    CHECK(std::string(e.what()) == "tensor rank 4 exceeds bound 3");
    CHECK(e.assumption() == "tensor-rank");
  }
}

TEST_CASE("integer builtins") {
  CHECK(out("print (int2string (divi 7 2))") == "3");
  CHECK(out("print (int2string (divi (negi 7) 2))") == "-3");
  CHECK(out("print (int2string (modi (negi 7) 2))") == "-1");
  CHECK(out("print (int2string (addi 9223372036854775807 1))") == "-9223372036854775808");
  CHECK(out("print (int2string (divi (subi (negi 9223372036854775807) 1) (negi 1)))") == "-9223372036854775808");
  CHECK(failure("print (int2string (divi 1 0))") == "division by zero");
  CHECK(failure("print (int2string (modi 1 0))") == "division by zero");
}

TEST_CASE("float builtins") {
  CHECK(out("print (float2string (addf 0.1 0.2))") == "0.30000000000000004");
  CHECK(out("print (float2string (int2float 3))") == "3.0");
  CHECK(out("print (int2string (floor (negf 2.5)))") == "-3");
  CHECK(out("print (float2string (sqrt 2.0))") == "1.4142135623730951");
  CHECK(failure("print (int2string (floor (divf 1.0 0.0)))").find("out of the Int range") != std::string::npos);
}

TEST_CASE("sequence builtins") {
  CHECK(show(value("create 3 (lam i. muli i 2)")) == "[0, 2, 4]");
  CHECK(show(value("set [1, 2, 3] 1 9")) == "[1, 9, 3]");
  CHECK(show(value("let s = [1, 2] in let u = set s 0 5 in s")) == "[1, 2]");
  CHECK(show(value("concat [1] [2, 3]")) == "[1, 2, 3]");
  CHECK(show(value("reverse \"abc\"")) == "\"cba\"");
  CHECK(show(value("foldl subi 10 [1, 2, 3]")) == "4");
  CHECK(show(value("length [[1], [2]]")) == "2");
  CHECK(failure("get [1, 2] 2").find("out of bounds") != std::string::npos);
  CHECK(failure("create (negi 1) (lam i. i)").find("negative length") != std::string::npos);
}

TEST_CASE("parallel constructs evaluate sequentially in debug mode") {
  CHECK(show(value("map (addi 1) [1, 2]")) == "[2, 3]");
  CHECK(show(value("map2 (lam a. lam b. {a = a, b = b}) [1] [true]")) == "[{a = 1, b = true}]");
  CHECK(show(value("reduce subi 0 [1, 2, 3]")) == "-6");
  CHECK(show(value("flatten [[1], [], [2, 3]]")) == "[1, 2, 3]");
  CHECK(show(value("loop 3 (lam i. {})")) == "{}");
  CHECK(show(value("loop (negi 3) (lam i. {})")) == "{}");
  CHECK(failure("map2 addi [1] [1, 2]").find("equal length") != std::string::npos);
}

TEST_CASE("tensor builtins") {
  CHECK(show(value("tensorCreate [2, 2] (lam ix. addi (muli 10 (get ix 0)) (get ix 1))")) ==
        "tensor[2, 2]{0, 1, 10, 11}");
  CHECK(show(value("tensorShape (tensorCreate [2, 3] (lam ix. 0.0))")) == "[2, 3]");
  CHECK(show(value("let t = tensorCreate [3, 2] (lam ix. get ix 0) in tensorSub t 1 2")) == "tensor[2, 2]{1, 1, 2, 2}");
  CHECK(show(value("let t = tensorCreate [3] (lam ix. 0) in let v = tensorSub t 1 2 in "
                   "let _ = tensorSet v [1] 4 in t")) == "tensor[3]{0, 0, 4}");
  CHECK(failure("tensorGet (tensorCreate [2] (lam i. 0)) [2]").find("out of bounds") != std::string::npos);
  CHECK(failure("tensorGet (tensorCreate [2] (lam i. 0)) [0, 0]").find("rank 1") != std::string::npos);
  CHECK(failure("tensorSub (tensorCreate [2] (lam i. 0)) 1 2").find("out of bounds") != std::string::npos);
}

TEST_CASE("patterns and records") {
  CHECK(show(value("match {a = 1, b = 2} with {b = y} then y else 0")) == "2");
  CHECK(show(value("match 3 with 4 then true else false")) == "false");
  CHECK(show(value("match 'x' with 'x' then 1 else 2")) == "1");
  CHECK(show(value("{}")) == "{}");
  CHECK(failure("match 1 with 2 then 3 else never") == "reached never");
}

TEST_CASE("closures, partial and over-application") {
  CHECK(show(value("let add = lam a. lam b. addi a b in let inc = add 1 in inc 41")) == "42");
  CHECK(show(value("let k = lam a. lam b. a in (k (addi 1)) 0 9")) == "10");
  CHECK(show(value("recursive let even = lam n. if eqi n 0 then true else odd (subi n 1) "
                   "let odd = lam n. if eqi n 0 then false else even (subi n 1) in even 10")) == "true");
  CHECK(show(value("lam x : Int. x")) == "<function>");
}

TEST_CASE("runtime errors carry a position") {
  auto c = compile("let s = [1] in\nget s 3");
  REQUIRE(c.ok());
  try {
    runCompiled(c, debugConfig());
    FAIL("expected an error");
  } catch (const RuntimeError& e) {
    CHECK(e.span().line == 2);
  }
}

TEST_CASE("effects are refused on the device") {
  // Bypasses the static checks, which reject this program.
  auto e = testutil::typed("let a = lam u : {}. print \"x\" in a {}");
  AccelInfo info;
  info.arity[topLevelNames(e)[0]] = 1;
  std::ostringstream sink;
  auto cfg = accelConfig(2);
  cfg.out = &sink;
  CHECK_THROWS_WITH_AS(evaluate(e, info, cfg), "print is not available in accelerated code", RuntimeError);
  cfg.mode = Mode::Debug;
  CHECK_NOTHROW(evaluate(e, info, cfg));
  CHECK(sink.str() == "x");
}

TEST_CASE("debug mode rejects an irregular sequence; accel mode only with checks forced") {
  const std::string src = "let s = [[1, 2], [3]] in let r = accelerate (map (lam row. reduce addi 0 row) s) in "
                          "print (int2string (get r 1))";
  auto d = runSource(src, debugConfig());
  CHECK(d.error.find("irregular sequence") != std::string::npos);
  CHECK(d.assumption == "regular-sequence");
  auto a = runSource(src, accelConfig(2));
  CHECK(a.error.empty());
  CHECK(a.output == "3");
  auto cfg = accelConfig(2);
  cfg.runtimeChecks = true;
  auto f = runSource(src, cfg);
  CHECK(f.error == d.error);
}

TEST_CASE("tensor rank bound") {
  const std::string src = "let t = tensorCreate [1, 1, 1, 2] (lam ix. 0) in "
                          "let _ = accelerate (loop 2 (lam i. tensorSet t [0, 0, 0, i] i)) in "
                          "print (int2string (tensorGet t [0, 0, 0, 1]))";
  auto d = runSource(src, debugConfig());
  CHECK(d.error == "tensor rank 4 exceeds bound 3");
  auto cfg = debugConfig();
  cfg.maxRank = 4;
  CHECK(runSource(src, cfg).output == "1");
  auto a = accelConfig(2);
  CHECK(runSource(src, a).output == "1");
  a.runtimeChecks = true;
  CHECK(runSource(src, a).error == d.error);
}

TEST_CASE("check-determinism flags a non-associative reduce") {
  const std::string src = "let s = create 64 (lam i. i) in let r = accelerate (reduce subi 0 s) in "
                          "print (int2string r)";
  auto cfg = accelConfig(4);
  cfg.checkDeterminism = true;
  auto r = runSource(src, cfg);
  REQUIRE(r.error.empty());
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("differs from the left fold") != std::string::npos);
  const std::string ok = "let s = create 64 (lam i. i) in let r = accelerate (reduce addi 0 s) in "
                         "print (int2string r)";
  CHECK(runSource(ok, cfg).warnings.empty());
  // Without workers to split over, the block tree degenerates to the left fold.
  auto one = accelConfig(1);
  one.checkDeterminism = true;
  CHECK(runSource(src, one).warnings.empty());
}

TEST_CASE("a failing iteration stops the kernel with its error") {
  const std::string src = "let t = tensorCreate [4] (lam i. 0) in "
                          "let _ = accelerate (loop 8 (lam i. tensorSet t [i] i)) in {}";
  CHECK(runSource(src, accelConfig(4)).error.find("out of bounds") != std::string::npos);
  CHECK(runSource(src, debugConfig()).error.find("out of bounds") != std::string::npos);
}

TEST_CASE("overlapping views print 7") {
  auto src = testutil::readFile("programs/overlapping_views.pmx");
  CHECK(out(src) == "7");
  for (int w : {1, 2, 8}) CHECK(out(src, accelConfig(w)) == "7");
}

TEST_CASE("show formatting") {
  CHECK(show(Value(1.0)) == "1.0");
  CHECK(show(Value(1e21)) == "1e+21");
  CHECK(show(Value(char32_t{'q'})) == "'q'");
  CHECK(show(makeString("h\xc3\xa9")) == "\"h\xc3\xa9\"");
  CHECK(show(makeSeq({})) == "[]");
  CHECK(valuesClose(Value(1.0), Value(1.0 + 1e-12), 1e-9));
  CHECK_FALSE(valuesClose(Value(1.0), Value(1.1), 1e-9));
  CHECK_FALSE(valuesClose(Value(std::int64_t{1}), Value(1.0), 1e-9));
}
