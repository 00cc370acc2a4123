#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "pmx/classify.hpp"
#include "pmx/diagnostic.hpp"
#include "pmx/value.hpp"

namespace pmx {

// Half-open element range [start, end) within one buffer.
struct Interval {
  std::int64_t start;
  std::int64_t end;

  friend bool operator==(const Interval&, const Interval&) = default;
};

// Sort by start, then merge with a stack; touching intervals merge too.
std::vector<Interval> mergeOverlappingIntervals(std::vector<Interval> intervals);

// Same over views of one buffer (empty views cover nothing).
std::vector<Interval> mergeOverlappingIntervals(const std::vector<TensorView>& views);

// Throws RuntimeError("irregular sequence ...") naming the first offending path.
void checkRegular(const Value& v);

// Throws RuntimeError("tensor rank r exceeds bound R").
void checkRank(const TensorView& t, int maxRank);

// Copies accelerate-call arguments to simulated device memory, rebuilding
// aliasing between tensors, and copies them back afterwards.
class DeviceArena {
 public:
  struct Root {
    BufferPtr host;
    Interval interval;
    BufferPtr device;
  };

  std::vector<Value> marshalIn(const std::vector<Value>& args);
  // Copies every root back to its host interval once, then converts the result.
  Value marshalOut(const Value& result);

  const std::vector<Root>& roots() const { return roots_; }
  // Device root index and offset of an input tensor, after marshalIn.
  std::optional<std::pair<std::size_t, std::size_t>> placement(const TensorView& host) const;

 private:
  std::vector<Root> roots_;
  std::map<const Buffer*, std::size_t> rootOfDevice_;

  Value toDevice(const Value& v);
  Value toHost(const Value& v);
};

// Fixed pool of execution lanes. The calling thread takes part as lane 0.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int workers() const { return workers_; }

  // Runs task(lane) on every lane and waits for all. The first exception is rethrown.
  void run(const std::function<void(int)>& task);

 private:
  struct State;
  int workers_;
  std::unique_ptr<State> state_;
  std::vector<std::thread> threads_;
};

enum class Mode { Plain, Debug, Accel };

struct AccelInfo {
  std::map<Name, int> arity;
  std::map<Name, Verdict> verdicts;
};

struct RunConfig {
  Mode mode = Mode::Debug;
  int workers = 1;
  int maxRank = 3;
  bool checkDeterminism = false;
  std::optional<bool> runtimeChecks;  // default: on in debug mode, off otherwise
  std::optional<std::uint64_t> shuffleSeed;  // randomize iteration order of parallel constructs
  std::ostream* out = nullptr;  // `print` target; stdout when null
};

struct RunResult {
  Value value;
  std::vector<std::string> warnings;
};

// Evaluates a closed, typed program. Throws RuntimeError.
RunResult evaluate(const ExprPtr& program, const AccelInfo& info, const RunConfig& config);

Value evalSequential(const ExprPtr& program, const AccelInfo& info, bool debug, std::ostream* out = nullptr);
Value evalAccelSim(const ExprPtr& program, const AccelInfo& info, int workers, std::ostream* out = nullptr);

}  // namespace pmx
