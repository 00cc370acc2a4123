#include <algorithm>
#include <condition_variable>
#include <exception>
#include <mutex>

#include "pmx/runtime.hpp"

namespace pmx {

std::vector<Interval> mergeOverlappingIntervals(std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
    return a.start < b.start || (a.start == b.start && a.end < b.end);
  });
  std::vector<Interval> stack;
  for (const auto& i : intervals) {
    if (!stack.empty() && stack.back().end >= i.start) {
      stack.back().end = std::max(stack.back().end, i.end);
    } else {
      stack.push_back(i);
    }
  }
  return stack;
}

std::vector<Interval> mergeOverlappingIntervals(const std::vector<TensorView>& views) {
  std::vector<Interval> in;
  for (const auto& v : views) {
    auto start = static_cast<std::int64_t>(v.offset);
    auto end = start + static_cast<std::int64_t>(v.size());
    if (end > start) in.push_back({start, end});
  }
  return mergeOverlappingIntervals(std::move(in));
}

// ---- assumption checks ----

namespace {

struct Shape {
  enum Kind { Leaf, Seq, Rec } kind = Leaf;
  std::size_t length = 0;
  std::vector<Shape> kids;  // Seq: shape of every element (one entry); Rec: per field
};

std::string pathText(const std::vector<std::size_t>& path) {
  std::string s;
  for (auto i : path) s += "[" + std::to_string(i) + "]";
  return s.empty() ? "the top level" : s;
}

[[noreturn]] void irregular(const std::vector<std::size_t>& path, std::size_t got, std::size_t want) {
  throw RuntimeError("irregular sequence: element " + pathText(path) + " has length " + std::to_string(got) +
                         ", expected " + std::to_string(want) + " (at depth " + std::to_string(path.size()) + ")",
                     {}, "regular-sequence");
}

// Reports the first place where b's structure departs from a's.
void sameShape(const Shape& a, const Shape& b, std::vector<std::size_t>& path) {
  if (a.kind != b.kind) {
    throw RuntimeError("irregular sequence: element " + pathText(path) + " differs in structure", {},
                       "regular-sequence");
  }
  if (a.kind == Shape::Seq) {
    if (a.length != b.length) irregular(path, b.length, a.length);
    if (!a.kids.empty() && !b.kids.empty()) {
      path.push_back(0);
      sameShape(a.kids[0], b.kids[0], path);
      path.pop_back();
    }
  } else if (a.kind == Shape::Rec) {
    for (std::size_t i = 0; i < a.kids.size() && i < b.kids.size(); ++i) sameShape(a.kids[i], b.kids[i], path);
  }
}

Shape shapeOf(const Value& v, std::vector<std::size_t>& path) {
  Shape s;
  if (v.is<SeqPtr>()) {
    const auto& elems = v.get<SeqPtr>()->elems;
    s.kind = Shape::Seq;
    s.length = elems.size();
    if (elems.empty()) return s;
    path.push_back(0);
    Shape first = shapeOf(elems[0], path);
    for (std::size_t i = 1; i < elems.size(); ++i) {
      path.back() = i;
      Shape si = shapeOf(elems[i], path);
      sameShape(first, si, path);
    }
    path.pop_back();
    s.kids.push_back(std::move(first));
  } else if (v.is<RecordPtr>()) {
    s.kind = Shape::Rec;
    for (const auto& [_, f] : v.get<RecordPtr>()->fields) s.kids.push_back(shapeOf(f, path));
  }
  return s;
}

}  // namespace

void checkRegular(const Value& v) {
  std::vector<std::size_t> path;
  shapeOf(v, path);
}

void checkRank(const TensorView& t, int maxRank) {
  if (static_cast<int>(t.rank()) > maxRank) {
    throw RuntimeError("tensor rank " + std::to_string(t.rank()) + " exceeds bound " + std::to_string(maxRank), {},
                       "tensor-rank");
  }
}

// ---- marshaling ----

namespace {

void collectTensors(const Value& v, std::vector<TensorView>& out) {
  if (v.is<TensorPtr>()) {
    out.push_back(*v.get<TensorPtr>());
  } else if (v.is<SeqPtr>()) {
    for (const auto& e : v.get<SeqPtr>()->elems) collectTensors(e, out);
  } else if (v.is<RecordPtr>()) {
    for (const auto& [_, f] : v.get<RecordPtr>()->fields) collectTensors(f, out);
  } else if (v.is<ClosurePtr>()) {
    throw RuntimeError("internal: a function value cannot be copied to the device");
  }
}

}  // namespace

std::vector<Value> DeviceArena::marshalIn(const std::vector<Value>& args) {
  std::vector<TensorView> tensors;
  for (const auto& a : args) collectTensors(a, tensors);

  // Partition by host buffer, ordered by buffer id for determinism.
  std::map<std::uint64_t, std::vector<TensorView>> byBuffer;
  for (const auto& t : tensors) byBuffer[t.buffer->id()].push_back(t);
  for (auto& [_, views] : byBuffer) {
    const BufferPtr& host = views.front().buffer;
    for (const auto& iv : mergeOverlappingIntervals(views)) {
      auto dev = std::make_shared<Buffer>(host->elem(), static_cast<std::size_t>(iv.end - iv.start), true);
      std::copy(host->words().begin() + iv.start, host->words().begin() + iv.end, dev->words().begin());
      rootOfDevice_[dev.get()] = roots_.size();
      roots_.push_back({host, iv, dev});
    }
  }
  std::vector<Value> out;
  out.reserve(args.size());
  for (const auto& a : args) out.push_back(toDevice(a));
  return out;
}

std::optional<std::pair<std::size_t, std::size_t>> DeviceArena::placement(const TensorView& t) const {
  auto start = static_cast<std::int64_t>(t.offset);
  auto end = start + static_cast<std::int64_t>(t.size());
  for (std::size_t i = 0; i < roots_.size(); ++i) {
    const Root& r = roots_[i];
    if (r.host == t.buffer && r.interval.start <= start && end <= r.interval.end && end > start) {
      return std::make_pair(i, static_cast<std::size_t>(start - r.interval.start));
    }
  }
  return std::nullopt;
}

Value DeviceArena::toDevice(const Value& v) {
  if (v.is<TensorPtr>()) {
    const TensorView& t = *v.get<TensorPtr>();
    if (t.size() == 0) {
      auto dev = std::make_shared<Buffer>(t.elem(), 0, true);
      auto start = static_cast<std::int64_t>(t.offset);
      rootOfDevice_[dev.get()] = roots_.size();
      roots_.push_back({t.buffer, {start, start}, dev});
      return makeTensor({dev, 0, t.shape});
    }
    auto where = placement(t);
    if (!where) throw RuntimeError("internal: tensor has no device root");
    return makeTensor({roots_[where->first].device, where->second, t.shape});
  }
  if (v.is<SeqPtr>()) {
    std::vector<Value> elems;
    elems.reserve(v.get<SeqPtr>()->elems.size());
    for (const auto& e : v.get<SeqPtr>()->elems) elems.push_back(toDevice(e));
    return makeSeq(std::move(elems));
  }
  if (v.is<RecordPtr>()) {
    std::vector<std::pair<std::string, Value>> fields;
    for (const auto& [l, f] : v.get<RecordPtr>()->fields) fields.emplace_back(l, toDevice(f));
    return makeRecord(std::move(fields));
  }
  if (v.is<ClosurePtr>()) throw RuntimeError("internal: a function value cannot be copied to the device");
  return v;
}

Value DeviceArena::marshalOut(const Value& result) {
  for (const auto& r : roots_) {
    std::copy(r.device->words().begin(), r.device->words().end(), r.host->words().begin() + r.interval.start);
  }
  return toHost(result);
}

Value DeviceArena::toHost(const Value& v) {
  if (v.is<TensorPtr>()) {
    const TensorView& t = *v.get<TensorPtr>();
    auto it = rootOfDevice_.find(t.buffer.get());
    if (it != rootOfDevice_.end()) {
      const Root& r = roots_[it->second];
      return makeTensor({r.host, static_cast<std::size_t>(r.interval.start) + t.offset, t.shape});
    }
    // Allocated during the call: copy the whole buffer once so aliases survive.
    auto dev = t.buffer;
    auto host = std::make_shared<Buffer>(dev->elem(), dev->size(), false);
    host->words() = dev->words();
    rootOfDevice_[dev.get()] = roots_.size();
    roots_.push_back({host, {0, static_cast<std::int64_t>(dev->size())}, dev});
    return makeTensor({host, t.offset, t.shape});
  }
  if (v.is<SeqPtr>()) {
    std::vector<Value> elems;
    elems.reserve(v.get<SeqPtr>()->elems.size());
    for (const auto& e : v.get<SeqPtr>()->elems) elems.push_back(toHost(e));
    return makeSeq(std::move(elems));
  }
  if (v.is<RecordPtr>()) {
    std::vector<std::pair<std::string, Value>> fields;
    for (const auto& [l, f] : v.get<RecordPtr>()->fields) fields.emplace_back(l, toHost(f));
    return makeRecord(std::move(fields));
  }
  if (v.is<ClosurePtr>()) throw RuntimeError("internal: a function value cannot be copied from the device");
  return v;
}

// ---- worker pool ----

struct WorkerPool::State {
  std::mutex m;
  std::condition_variable wake;
  std::condition_variable done;
  const std::function<void(int)>* task = nullptr;
  std::uint64_t generation = 0;
  int remaining = 0;
  bool stop = false;
  std::exception_ptr error;
};

WorkerPool::WorkerPool(int workers) : workers_(std::max(1, workers)), state_(std::make_unique<State>()) {
  for (int lane = 1; lane < workers_; ++lane) {
    threads_.emplace_back([this, lane] {
      std::uint64_t seen = 0;
      for (;;) {
        const std::function<void(int)>* task;
        {
          std::unique_lock lock(state_->m);
          state_->wake.wait(lock, [&] { return state_->stop || state_->generation != seen; });
          if (state_->stop) return;
          seen = state_->generation;
          task = state_->task;
        }
        std::exception_ptr err;
        try {
          (*task)(lane);
        } catch (...) {
          err = std::current_exception();
        }
        std::lock_guard lock(state_->m);
        if (err && !state_->error) state_->error = err;
        if (--state_->remaining == 0) state_->done.notify_one();
      }
    });
  }
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(state_->m);
    state_->stop = true;
  }
  state_->wake.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::run(const std::function<void(int)>& task) {
  {
    std::lock_guard lock(state_->m);
    state_->task = &task;
    state_->remaining = workers_ - 1;
    state_->error = nullptr;
    ++state_->generation;
  }
  state_->wake.notify_all();
  std::exception_ptr mine;
  try {
    task(0);
  } catch (...) {
    mine = std::current_exception();
  }
  std::exception_ptr err;
  {
    std::unique_lock lock(state_->m);
    state_->done.wait(lock, [&] { return state_->remaining == 0; });
    err = mine ? mine : state_->error;
    state_->task = nullptr;
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace pmx
