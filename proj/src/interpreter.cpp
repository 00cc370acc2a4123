#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <pthread.h>
#include <random>
#include <sstream>

#include "pmx/runtime.hpp"
#include "pmx/transform.hpp"

namespace pmx {

namespace {

struct EnvNode;
using EnvPtr = std::shared_ptr<const EnvNode>;

struct EnvNode {
  std::uint64_t uid;
  Value value;
  EnvPtr next;
};

EnvPtr extend(EnvPtr env, const Name& n, Value v) {
  return std::make_shared<const EnvNode>(EnvNode{n.uid, std::move(v), std::move(env)});
}

struct FunInfo {
  std::vector<Name> params;
  ExprPtr body;
};

std::shared_ptr<const FunInfo> funInfo(const ExprPtr& lam, std::size_t limit = SIZE_MAX) {
  auto info = std::make_shared<FunInfo>();
  ExprPtr cur = lam;
  while (info->params.size() < limit) {
    const auto* l = as<Lam>(cur);
    if (!l) break;
    info->params.push_back(l->param);
    cur = l->body;
  }
  info->body = cur;
  return info;
}

struct AccelTag {
  Name name;
  Verdict verdict;
};

struct RecGroup;

}  // namespace

struct Closure {
  enum class Kind { Fun, Prim } kind = Kind::Fun;
  std::shared_ptr<const FunInfo> fun;
  EnvPtr env;
  std::shared_ptr<const RecGroup> rec;
  std::size_t recIndex = 0;
  std::shared_ptr<const AccelTag> accel;
  Builtin prim = Builtin::Addi;
  TypeKind elemKind = TypeKind::Int;  // tensorCreate result element
  std::vector<Value> args;

  std::size_t arity() const {
    return kind == Kind::Prim ? static_cast<std::size_t>(builtinInfo(prim).arity) : fun->params.size();
  }
};

namespace {

struct RecGroup {
  std::vector<Name> names;
  std::vector<std::shared_ptr<const FunInfo>> infos;
  EnvPtr env;  // environment outside the group
};

struct Lane {
  bool onDevice = false;
  bool inParallel = false;
};
thread_local Lane tlsLane;

struct LaneScope {
  Lane saved;
  explicit LaneScope(Lane next) : saved(tlsLane) { tlsLane = next; }
  ~LaneScope() { tlsLane = saved; }
};

[[noreturn]] void fail(const std::string& msg, Span sp = {}) { throw RuntimeError(msg, sp); }

// Native stack spent by eval on this thread, measured from the outermost frame.
constexpr std::size_t kRunStack = std::size_t{512} << 20;
constexpr std::size_t kDefaultBudget = std::size_t{6} << 20;
thread_local int tlsDepth = 0;
thread_local const char* tlsStackBase = nullptr;
thread_local std::size_t tlsStackBudget = kDefaultBudget;

struct DepthGuard {
  DepthGuard() {
    char probe;
    if (tlsDepth++ == 0) tlsStackBase = &probe;
    auto used = static_cast<std::size_t>(tlsStackBase > &probe ? tlsStackBase - &probe : &probe - tlsStackBase);
    if (used > tlsStackBudget) {
      --tlsDepth;
      fail("evaluation nested too deeply (non-tail recursion exhausted the " +
           std::to_string(tlsStackBudget >> 20) + " MiB stack budget)");
    }
  }
  ~DepthGuard() { --tlsDepth; }
};

// Runs f on a thread with a kRunStack-sized stack so deep recursion hits the guard, not the OS limit.
template <class F>
void onLargeStack(F&& f) {
  struct Job {
    F* f;
    std::exception_ptr error;
  } job{&f, nullptr};
  auto entry = [](void* p) -> void* {
    auto* j = static_cast<Job*>(p);
    tlsStackBudget = kRunStack - (std::size_t{8} << 20);
    try {
      (*j->f)();
    } catch (...) {
      j->error = std::current_exception();
    }
    return nullptr;
  };
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_t th;
  bool started = pthread_attr_setstacksize(&attr, kRunStack) == 0 && pthread_create(&th, &attr, entry, &job) == 0;
  pthread_attr_destroy(&attr);
  if (!started) {
    f();
    return;
  }
  pthread_join(th, nullptr);
  if (job.error) std::rethrow_exception(job.error);
}

std::int64_t wrapAdd(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrapSub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrapMul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

std::int64_t asInt(const Value& v) { return v.get<std::int64_t>(); }
double asFloat(const Value& v) { return v.get<double>(); }
const std::vector<Value>& asSeq(const Value& v) {
  if (!v.is<SeqPtr>()) fail("expected a sequence");
  return v.get<SeqPtr>()->elems;
}
const TensorView& asTensor(const Value& v) {
  if (!v.is<TensorPtr>()) fail("expected a tensor");
  return *v.get<TensorPtr>();
}

std::size_t linearIndex(const TensorView& t, const Value& idx) {
  const auto& is = asSeq(idx);
  if (is.size() != t.rank()) {
    fail("tensor index has " + std::to_string(is.size()) + " components but the tensor has rank " +
         std::to_string(t.rank()));
  }
  std::size_t lin = 0;
  for (std::size_t k = 0; k < is.size(); ++k) {
    std::int64_t i = asInt(is[k]);
    if (i < 0 || i >= t.shape[k]) {
      fail("tensor index " + std::to_string(i) + " out of bounds for dimension " + std::to_string(k) + " of size " +
           std::to_string(t.shape[k]));
    }
    lin = lin * static_cast<std::size_t>(t.shape[k]) + static_cast<std::size_t>(i);
  }
  return lin;
}

void collectTensors(const Value& v, std::vector<TensorView>& out) {
  if (v.is<TensorPtr>()) {
    out.push_back(*v.get<TensorPtr>());
  } else if (v.is<SeqPtr>()) {
    for (const auto& e : v.get<SeqPtr>()->elems) collectTensors(e, out);
  } else if (v.is<RecordPtr>()) {
    for (const auto& [_, f] : v.get<RecordPtr>()->fields) collectTensors(f, out);
  }
}

std::string where(Span s) { return std::to_string(s.line) + ":" + std::to_string(s.col); }

class Interpreter {
 public:
  Interpreter(const AccelInfo& info, const RunConfig& cfg)
      : info_(info), cfg_(cfg), out_(cfg.out ? cfg.out : &std::cout) {
    checks_ = cfg.runtimeChecks.value_or(cfg.mode == Mode::Debug);
    if (cfg.mode == Mode::Accel) pool_ = std::make_unique<WorkerPool>(std::max(1, cfg.workers));
  }

  RunResult run(const ExprPtr& program) {
    RunResult r;
    r.value = eval(program, nullptr);
    r.warnings = warnings_;
    return r;
  }

 private:
  const AccelInfo& info_;
  const RunConfig& cfg_;
  std::ostream* out_;
  bool checks_ = false;
  std::unique_ptr<WorkerPool> pool_;
  std::mutex warnMutex_;
  std::vector<std::string> warnings_;
  std::atomic<std::uint64_t> shuffleCounter_{0};

  // ---- environment ----

  const Value& lookup(const EnvPtr& env, const Name& n, Span sp) {
    for (const EnvNode* p = env.get(); p; p = p->next.get()) {
      if (p->uid == n.uid) return p->value;
    }
    fail("internal: unbound variable " + n.text, sp);
  }

  EnvPtr baseEnv(const Closure& c) {
    if (!c.rec) return c.env;
    EnvPtr env = c.rec->env;
    for (std::size_t i = 0; i < c.rec->names.size(); ++i) env = extend(env, c.rec->names[i], memberClosure(c.rec, i));
    return env;
  }

  Value memberClosure(const std::shared_ptr<const RecGroup>& g, std::size_t i) {
    auto c = std::make_shared<Closure>();
    c->fun = g->infos[i];
    c->rec = g;
    c->recIndex = i;
    return Value(ClosurePtr(std::move(c)));
  }

  // ---- application ----

  Value apply(Value f, std::vector<Value> args, Span sp) {
    std::size_t pos = 0;
    while (pos < args.size()) {
      if (!f.is<ClosurePtr>()) fail("cannot apply a non-function value", sp);
      const Closure& c = *f.get<ClosurePtr>();
      std::size_t need = c.arity() - c.args.size();
      std::size_t avail = args.size() - pos;
      if (avail < need) {
        auto p = std::make_shared<Closure>(c);
        for (; pos < args.size(); ++pos) p->args.push_back(std::move(args[pos]));
        return Value(ClosurePtr(std::move(p)));
      }
      std::vector<Value> all = c.args;
      for (std::size_t i = 0; i < need; ++i) all.push_back(std::move(args[pos++]));
      ClosurePtr keep = f.get<ClosurePtr>();
      f = call(*keep, std::move(all), sp);
    }
    return f;
  }

  // Attaches the call site to errors raised without a position.
  Value primitiveAt(Builtin prim, TypeKind elemKind, const Value* a, Span sp) {
    try {
      return primitive(prim, elemKind, a, sp);
    } catch (RuntimeError& e) {
      if (e.span().line == 0) throw RuntimeError(e.what(), sp, e.assumption());
      throw;
    }
  }

  static TypeKind tensorElemKind(const Expr& lit) {
    return lit.type ? lit.type->result().result().elem().kind() : TypeKind::Int;
  }

  Value call(const Closure& c, std::vector<Value> args, Span sp) {
    if (c.kind == Closure::Kind::Prim) {
      return primitiveAt(c.prim, c.elemKind, args.data(), sp);
    }
    if (c.accel && !tlsLane.onDevice) return accelCall(c, std::move(args), sp);
    EnvPtr env = baseEnv(c);
    for (std::size_t i = 0; i < args.size(); ++i) env = extend(env, c.fun->params[i], std::move(args[i]));
    return eval(c.fun->body, env);
  }

  Value accelCall(const Closure& c, std::vector<Value> args, Span sp) {
    if (checks_) {
      try {
        if (c.accel->verdict == Verdict::Futhark) {
          for (const auto& a : args) checkRegular(a);
        } else if (c.accel->verdict == Verdict::Cuda) {
          std::vector<TensorView> ts;
          for (const auto& a : args) collectTensors(a, ts);
          for (const auto& t : ts) checkRank(t, cfg_.maxRank);
        }
      } catch (RuntimeError& e) {
        throw RuntimeError(e.what(), sp, e.assumption());
      }
    }
    if (cfg_.mode != Mode::Accel) {
      EnvPtr env = baseEnv(c);
      for (std::size_t i = 0; i < args.size(); ++i) env = extend(env, c.fun->params[i], std::move(args[i]));
      return eval(c.fun->body, env);
    }
    DeviceArena arena;
    std::vector<Value> dev = arena.marshalIn(args);
    Value result;
    {
      LaneScope scope(Lane{true, false});
      EnvPtr env = baseEnv(c);
      for (std::size_t i = 0; i < dev.size(); ++i) env = extend(env, c.fun->params[i], std::move(dev[i]));
      result = eval(c.fun->body, env);
    }
    return arena.marshalOut(result);
  }

  // ---- parallel execution ----

  bool fanOut() const { return cfg_.mode == Mode::Accel && tlsLane.onDevice && !tlsLane.inParallel && pool_; }

  // Runs body(i) for i in [0, n). Fans out across lanes at the outermost level on the device.
  void parallelFor(std::size_t n, const std::function<void(std::size_t)>& body) {
    if (!fanOut()) {
      for (std::size_t i = 0; i < n; ++i) body(i);
      return;
    }
    std::vector<std::size_t> order;
    if (cfg_.shuffleSeed) {
      order.resize(n);
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(*cfg_.shuffleSeed + shuffleCounter_.fetch_add(1));
      std::shuffle(order.begin(), order.end(), rng);
    }
    int lanes = pool_->workers();
    std::atomic<bool> failed{false};
    pool_->run([&](int lane) {
      LaneScope scope(Lane{true, true});
      std::size_t lo = n * static_cast<std::size_t>(lane) / static_cast<std::size_t>(lanes);
      std::size_t hi = n * static_cast<std::size_t>(lane + 1) / static_cast<std::size_t>(lanes);
      for (std::size_t j = lo; j < hi && !failed.load(std::memory_order_relaxed); ++j) {
        try {
          body(order.empty() ? j : order[j]);
        } catch (...) {
          failed = true;
          throw;
        }
      }
    });
  }

  Value foldl(const Value& f, Value acc, const std::vector<Value>& xs, std::size_t lo, std::size_t hi, Span sp) {
    for (std::size_t i = lo; i < hi; ++i) acc = apply(f, {acc, xs[i]}, sp);
    return acc;
  }

  Value reduce(const Value& f, const Value& acc, const std::vector<Value>& xs, Span sp) {
    if (!fanOut() || xs.empty()) return foldl(f, acc, xs, 0, xs.size(), sp);
    std::size_t n = xs.size();
    std::size_t chunks = std::min<std::size_t>(static_cast<std::size_t>(pool_->workers()), n);
    std::vector<Value> partial(chunks);
    pool_->run([&](int lane) {
      auto c = static_cast<std::size_t>(lane);
      if (c >= chunks) return;
      LaneScope scope(Lane{true, true});
      partial[c] = foldl(f, acc, xs, n * c / chunks, n * (c + 1) / chunks, sp);
    });
    Value result;
    {
      LaneScope scope(Lane{true, true});
      result = foldl(f, partial[0], partial, 1, chunks, sp);
      if (cfg_.checkDeterminism) {
        Value seq = foldl(f, acc, xs, 0, n, sp);
        if (!valuesClose(seq, result, 1e-6)) {
          std::lock_guard lock(warnMutex_);
          warnings_.push_back("reduce at " + where(sp) + ": block-tree result " + show(result) +
                              " differs from the left fold " + show(seq) +
                              "; the operator may not be associative with a neutral accumulator");
        }
      }
    }
    return result;
  }

  // ---- evaluation ----

  Value eval(ExprPtr e, EnvPtr env) {
    DepthGuard guard;
    // Tail positions continue the loop instead of recursing.
    for (;;) {
    const Span sp = e->span;
    switch (e->node.index()) {
      case 0:  // Var
        return lookup(env, std::get<Var>(e->node).name, sp);
      case 1:
        return literal(std::get<Lit>(e->node).value, e);
      case 2: {
        auto c = std::make_shared<Closure>();
        c->fun = funInfo(e);
        c->env = env;
        return Value(ClosurePtr(std::move(c)));
      }
      case 3: {
        std::size_t argc = 0;
        const Expr* head = e.get();
        while (const auto* app = std::get_if<App>(&head->node)) {
          head = app->fn.get();
          ++argc;
        }
        // Saturated builtin: no closure, no spine vector.
        if (const auto* lit = std::get_if<Lit>(&head->node)) {
          if (const auto* b = std::get_if<Builtin>(&lit->value.value)) {
            if (argc == static_cast<std::size_t>(builtinInfo(*b).arity) && argc <= 3) {
              std::array<Value, 3> av;
              const Expr* cur = e.get();
              for (std::size_t i = argc; i-- > 0;) {
                const auto& app = std::get<App>(cur->node);
                av[i] = eval(app.arg, env);
                cur = app.fn.get();
              }
              TypeKind ek = *b == Builtin::TensorCreate ? tensorElemKind(*head) : TypeKind::Int;
              return primitiveAt(*b, ek, av.data(), sp);
            }
          }
        }
        std::vector<const ExprPtr*> argExprs(argc);
        const ExprPtr* headPtr = &e;
        for (std::size_t i = argc; i-- > 0;) {
          const auto& app = std::get<App>((*headPtr)->node);
          argExprs[i] = &app.arg;
          headPtr = &app.fn;
        }
        Value f = eval(*headPtr, env);
        std::vector<Value> args;
        args.reserve(argc);
        for (const auto* a : argExprs) args.push_back(eval(*a, env));
        if (f.is<ClosurePtr>()) {
          ClosurePtr cp = f.get<ClosurePtr>();
          const Closure& c = *cp;
          bool host = c.accel && !tlsLane.onDevice;
          if (c.kind == Closure::Kind::Fun && !host && c.args.size() + args.size() == c.arity()) {
            EnvPtr next = baseEnv(c);
            std::size_t k = 0;
            for (const auto& a : c.args) next = extend(next, c.fun->params[k++], a);
            for (auto& a : args) next = extend(next, c.fun->params[k++], std::move(a));
            ExprPtr body = c.fun->body;
            env = std::move(next);
            e = std::move(body);
            continue;
          }
        }
        return apply(std::move(f), std::move(args), sp);
      }
      case 4: {
        EnvPtr cur = env;
        ExprPtr node = e;
        // Iterate let chains instead of recursing.
        while (const auto* l = as<Let>(node)) {
          Value v = eval(l->bound, cur);
          if (v.is<ClosurePtr>() && !info_.arity.empty()) {
            auto it = info_.arity.find(l->name);
            if (it != info_.arity.end()) v = tagAccel(v, l->name, it->second);
          }
          cur = extend(cur, l->name, std::move(v));
          node = l->body;
        }
        env = std::move(cur);
        e = std::move(node);
        continue;
      }
      case 5: {
        const auto& r = std::get<RecLets>(e->node);
        auto g = std::make_shared<RecGroup>();
        for (const auto& b : r.bindings) {
          g->names.push_back(b.name);
          g->infos.push_back(funInfo(b.body));
        }
        g->env = env;
        std::shared_ptr<const RecGroup> cg = g;
        EnvPtr cur = env;
        for (std::size_t i = 0; i < g->names.size(); ++i) cur = extend(cur, g->names[i], memberClosure(cg, i));
        ExprPtr body = r.body;
        env = std::move(cur);
        e = std::move(body);
        continue;
      }
      case 6: {
        const auto& m = std::get<Match>(e->node);
        Value target = eval(m.target, env);
        EnvPtr bound = env;
        ExprPtr next = m.els;
        if (matches(m.pat, target, bound)) {
          next = m.thn;
          env = std::move(bound);
        }
        e = std::move(next);
        continue;
      }
      case 7:
        fail("reached never", sp);
      case 8: {
        const auto& r = std::get<RecordLit>(e->node);
        std::vector<std::pair<std::string, Value>> fields;
        fields.reserve(r.fields.size());
        for (const auto& [l, x] : r.fields) fields.emplace_back(l, eval(x, env));
        return makeRecord(std::move(fields));
      }
      case 9: {
        const auto& s = std::get<SeqLit>(e->node);
        std::vector<Value> elems;
        elems.reserve(s.elems.size());
        for (const auto& x : s.elems) elems.push_back(eval(x, env));
        return makeSeq(std::move(elems));
      }
      case 10: {
        ExprPtr body = std::get<Accelerate>(e->node).body;
        e = std::move(body);
        continue;
      }
      case 11: {
        const auto& m = std::get<Map>(e->node);
        Value f = eval(m.fn, env);
        Value s = eval(m.seq, env);
        const auto& xs = asSeq(s);
        std::vector<Value> out(xs.size());
        parallelFor(xs.size(), [&](std::size_t i) { out[i] = apply(f, {xs[i]}, sp); });
        return makeSeq(std::move(out));
      }
      case 12: {
        const auto& m = std::get<Map2>(e->node);
        Value f = eval(m.fn, env);
        Value a = eval(m.lhs, env);
        Value b = eval(m.rhs, env);
        const auto& xs = asSeq(a);
        const auto& ys = asSeq(b);
        if (xs.size() != ys.size()) {
          fail("map2 requires two sequences of equal length, got " + std::to_string(xs.size()) + " and " +
                   std::to_string(ys.size()),
               sp);
        }
        std::vector<Value> out(xs.size());
        parallelFor(xs.size(), [&](std::size_t i) { out[i] = apply(f, {xs[i], ys[i]}, sp); });
        return makeSeq(std::move(out));
      }
      case 13: {
        const auto& r = std::get<Reduce>(e->node);
        Value f = eval(r.fn, env);
        Value acc = eval(r.acc, env);
        Value s = eval(r.seq, env);
        return reduce(f, acc, asSeq(s), sp);
      }
      case 14: {
        Value s = eval(std::get<Flatten>(e->node).seq, env);
        std::vector<Value> out;
        for (const auto& inner : asSeq(s)) {
          const auto& xs = asSeq(inner);
          out.insert(out.end(), xs.begin(), xs.end());
        }
        return makeSeq(std::move(out));
      }
      case 15: {
        const auto& l = std::get<Loop>(e->node);
        Value n = eval(l.count, env);
        Value f = eval(l.fn, env);
        std::int64_t count = std::max<std::int64_t>(0, asInt(n));
        parallelFor(static_cast<std::size_t>(count),
                    [&](std::size_t i) { apply(f, {Value(static_cast<std::int64_t>(i))}, sp); });
        return Value(Unit{});
      }
      default:
        fail("internal: unknown expression", sp);
    }
    }
  }

  Value tagAccel(const Value& v, const Name& name, int arity) {
    const Closure& c = *v.get<ClosurePtr>();
    if (c.kind != Closure::Kind::Fun || !c.args.empty()) return v;
    auto t = std::make_shared<Closure>(c);
    // Re-split the parameter chain at the binding's arity.
    ExprPtr lam = lamAt(c);
    if (lam) t->fun = funInfo(lam, static_cast<std::size_t>(arity));
    auto vit = info_.verdicts.find(name);
    t->accel = std::make_shared<const AccelTag>(AccelTag{name, vit == info_.verdicts.end() ? Verdict::Any : vit->second});
    return Value(ClosurePtr(std::move(t)));
  }

  // Rebuilds the lambda chain node a closure came from.
  static ExprPtr lamAt(const Closure& c) {
    ExprPtr body = c.fun->body;
    for (auto it = c.fun->params.rbegin(); it != c.fun->params.rend(); ++it) {
      body = mk(Lam{*it, std::nullopt, body}, body->span);
    }
    return body;
  }

  bool matches(const PatternPtr& p, const Value& v, EnvPtr& env) {
    if (const auto* pv = std::get_if<PVar>(&p->node)) {
      env = extend(env, pv->name, v);
      return true;
    }
    if (const auto* pc = std::get_if<PConst>(&p->node)) {
      return std::visit(
          [&](const auto& c) -> bool {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, Builtin>) {
              return false;
            } else {
              return v.is<T>() && v.get<T>() == c;
            }
          },
          pc->value.value);
    }
    const auto& r = std::get<PRecord>(p->node);
    if (r.fields.empty()) return true;
    if (!v.is<RecordPtr>()) return false;
    for (const auto& [label, sub] : r.fields) {
      const Value* f = v.get<RecordPtr>()->field(label);
      if (!f || !matches(sub, *f, env)) return false;
    }
    return true;
  }

  Value literal(const Const& c, const ExprPtr& e) {
    return std::visit(
        [&](const auto& x) -> Value {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Builtin>) {
            auto cl = std::make_shared<Closure>();
            cl->kind = Closure::Kind::Prim;
            cl->prim = x;
            if (x == Builtin::TensorCreate) cl->elemKind = tensorElemKind(*e);
            return Value(ClosurePtr(std::move(cl)));
          } else {
            return Value(x);
          }
        },
        c.value);
  }

  // ---- builtins ----

  Value primitive(Builtin prim, TypeKind elemKind, const Value* a, Span sp) {
    switch (prim) {
      case Builtin::Addi:
        return Value(wrapAdd(asInt(a[0]), asInt(a[1])));
      case Builtin::Subi:
        return Value(wrapSub(asInt(a[0]), asInt(a[1])));
      case Builtin::Muli:
        return Value(wrapMul(asInt(a[0]), asInt(a[1])));
      case Builtin::Divi: {
        std::int64_t x = asInt(a[0]), y = asInt(a[1]);
        if (y == 0) fail("division by zero");
        if (x == std::numeric_limits<std::int64_t>::min() && y == -1) return Value(x);
        return Value(static_cast<std::int64_t>(x / y));
      }
      case Builtin::Modi: {
        std::int64_t x = asInt(a[0]), y = asInt(a[1]);
        if (y == 0) fail("division by zero");
        if (y == -1) return Value(std::int64_t{0});
        return Value(static_cast<std::int64_t>(x % y));
      }
      case Builtin::Negi:
        return Value(wrapSub(0, asInt(a[0])));
      case Builtin::Addf:
        return Value(asFloat(a[0]) + asFloat(a[1]));
      case Builtin::Subf:
        return Value(asFloat(a[0]) - asFloat(a[1]));
      case Builtin::Mulf:
        return Value(asFloat(a[0]) * asFloat(a[1]));
      case Builtin::Divf:
        return Value(asFloat(a[0]) / asFloat(a[1]));
      case Builtin::Negf:
        return Value(-asFloat(a[0]));
      case Builtin::Eqi:
        return Value(asInt(a[0]) == asInt(a[1]));
      case Builtin::Neqi:
        return Value(asInt(a[0]) != asInt(a[1]));
      case Builtin::Lti:
        return Value(asInt(a[0]) < asInt(a[1]));
      case Builtin::Gti:
        return Value(asInt(a[0]) > asInt(a[1]));
      case Builtin::Leqi:
        return Value(asInt(a[0]) <= asInt(a[1]));
      case Builtin::Geqi:
        return Value(asInt(a[0]) >= asInt(a[1]));
      case Builtin::Eqf:
        return Value(asFloat(a[0]) == asFloat(a[1]));
      case Builtin::Ltf:
        return Value(asFloat(a[0]) < asFloat(a[1]));
      case Builtin::Gtf:
        return Value(asFloat(a[0]) > asFloat(a[1]));
      case Builtin::Leqf:
        return Value(asFloat(a[0]) <= asFloat(a[1]));
      case Builtin::Geqf:
        return Value(asFloat(a[0]) >= asFloat(a[1]));
      case Builtin::Int2Float:
        return Value(static_cast<double>(asInt(a[0])));
      case Builtin::Floor: {
        double f = std::floor(asFloat(a[0]));
        if (!(f >= -9223372036854775808.0 && f < 9223372036854775808.0)) {
          fail("floor: value out of the Int range");
        }
        return Value(static_cast<std::int64_t>(f));
      }
      case Builtin::Int2String:
        return makeString(std::to_string(asInt(a[0])));
      case Builtin::Float2String:
        return makeString(show(a[0]));
      case Builtin::Exp:
        return Value(std::exp(asFloat(a[0])));
      case Builtin::Log:
        return Value(std::log(asFloat(a[0])));
      case Builtin::Sin:
        return Value(std::sin(asFloat(a[0])));
      case Builtin::Cos:
        return Value(std::cos(asFloat(a[0])));
      case Builtin::Sqrt:
        return Value(std::sqrt(asFloat(a[0])));
      case Builtin::Create: {
        std::int64_t n = asInt(a[0]);
        if (n < 0) fail("create: negative length " + std::to_string(n));
        std::vector<Value> out;
        out.reserve(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) out.push_back(apply(a[1], {Value(i)}, sp));
        return makeSeq(std::move(out));
      }
      case Builtin::Length:
        return Value(static_cast<std::int64_t>(asSeq(a[0]).size()));
      case Builtin::Get: {
        const auto& xs = asSeq(a[0]);
        std::int64_t i = asInt(a[1]);
        if (i < 0 || static_cast<std::size_t>(i) >= xs.size()) {
          fail("get: index " + std::to_string(i) + " out of bounds for sequence of length " +
               std::to_string(xs.size()));
        }
        return xs[static_cast<std::size_t>(i)];
      }
      case Builtin::Set: {
        const auto& xs = asSeq(a[0]);
        std::int64_t i = asInt(a[1]);
        if (i < 0 || static_cast<std::size_t>(i) >= xs.size()) {
          fail("set: index " + std::to_string(i) + " out of bounds for sequence of length " +
               std::to_string(xs.size()));
        }
        std::vector<Value> out = xs;
        out[static_cast<std::size_t>(i)] = a[2];
        return makeSeq(std::move(out));
      }
      case Builtin::Concat: {
        std::vector<Value> out = asSeq(a[0]);
        const auto& ys = asSeq(a[1]);
        out.insert(out.end(), ys.begin(), ys.end());
        return makeSeq(std::move(out));
      }
      case Builtin::Foldl: {
        const auto& xs = asSeq(a[2]);
        return foldl(a[0], a[1], xs, 0, xs.size(), sp);
      }
      case Builtin::Reverse: {
        std::vector<Value> out(asSeq(a[0]).rbegin(), asSeq(a[0]).rend());
        return makeSeq(std::move(out));
      }
      case Builtin::TensorCreate: {
        std::vector<std::int64_t> shape;
        for (const auto& d : asSeq(a[0])) {
          std::int64_t n = asInt(d);
          if (n < 0) fail("tensorCreate: negative dimension " + std::to_string(n));
          shape.push_back(n);
        }
        TensorView t{std::make_shared<Buffer>(elemKind, 0, tlsLane.onDevice), 0, shape};
        std::size_t size = t.size();
        t.buffer->words().resize(size);
        std::vector<std::int64_t> idx(shape.size(), 0);
        for (std::size_t lin = 0; lin < size; ++lin) {
          std::vector<Value> iv;
          iv.reserve(idx.size());
          for (auto i : idx) iv.emplace_back(i);
          Value x = apply(a[1], {makeSeq(std::move(iv))}, sp);
          setTensorElement(t, lin, x);
          for (std::size_t k = idx.size(); k-- > 0;) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
          }
        }
        return makeTensor(std::move(t));
      }
      case Builtin::TensorGet: {
        const TensorView& t = asTensor(a[0]);
        return tensorElement(t, linearIndex(t, a[1]));
      }
      case Builtin::TensorSet: {
        const TensorView& t = asTensor(a[0]);
        setTensorElement(t, linearIndex(t, a[1]), a[2]);
        return Value(Unit{});
      }
      case Builtin::TensorSub: {
        const TensorView& t = asTensor(a[0]);
        std::int64_t ofs = asInt(a[1]), len = asInt(a[2]);
        if (t.rank() == 0) fail("tensorSub: rank-0 tensor");
        if (ofs < 0 || len < 0 || ofs + len > t.shape[0]) {
          fail("tensorSub: range [" + std::to_string(ofs) + ", " + std::to_string(ofs + len) +
               ") out of bounds for dimension of size " + std::to_string(t.shape[0]));
        }
        std::size_t stride = 1;
        for (std::size_t k = 1; k < t.rank(); ++k) stride *= static_cast<std::size_t>(t.shape[k]);
        TensorView v{t.buffer, t.offset + static_cast<std::size_t>(ofs) * stride, t.shape};
        v.shape[0] = len;
        return makeTensor(std::move(v));
      }
      case Builtin::TensorShape: {
        std::vector<Value> out;
        for (auto d : asTensor(a[0]).shape) out.emplace_back(d);
        return makeSeq(std::move(out));
      }
      case Builtin::Print:
      case Builtin::ReadFile:
      case Builtin::WriteFile:
        if (tlsLane.onDevice) {
          fail(std::string(builtinInfo(prim).name) + " is not available in accelerated code");
        }
        return effect(prim, a);
    }
    fail("internal: unknown builtin");
  }

  Value effect(Builtin b, const Value* a) {
    if (b == Builtin::Print) {
      *out_ << stringOf(a[0]);
      out_->flush();
      return Value(Unit{});
    }
    if (b == Builtin::ReadFile) {
      std::ifstream in(stringOf(a[0]), std::ios::binary);
      if (!in) fail("readFile: cannot open " + stringOf(a[0]));
      std::stringstream ss;
      ss << in.rdbuf();
      return makeString(ss.str());
    }
    std::ofstream o(stringOf(a[0]), std::ios::binary);
    if (!o) fail("writeFile: cannot open " + stringOf(a[0]));
    o << stringOf(a[1]);
    return Value(Unit{});
  }
};

}  // namespace

RunResult evaluate(const ExprPtr& program, const AccelInfo& info, const RunConfig& config) {
  Interpreter in(info, config);
  RunResult r;
  onLargeStack([&] { r = in.run(program); });
  return r;
}

Value evalSequential(const ExprPtr& program, const AccelInfo& info, bool debug, std::ostream* out) {
  RunConfig cfg;
  cfg.mode = debug ? Mode::Debug : Mode::Plain;
  cfg.out = out;
  return evaluate(program, info, cfg).value;
}

Value evalAccelSim(const ExprPtr& program, const AccelInfo& info, int workers, std::ostream* out) {
  RunConfig cfg;
  cfg.mode = Mode::Accel;
  cfg.workers = workers;
  cfg.out = out;
  return evaluate(program, info, cfg).value;
}

}  // namespace pmx
