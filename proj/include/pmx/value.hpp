#pragma once

#include <atomic>
#include <bit>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pmx/ast.hpp"
#include "pmx/builtins.hpp"

namespace pmx {

struct Unit {
  friend bool operator==(Unit, Unit) { return true; }
};

// Flat numeric storage. Elements are 64-bit words holding an int64 or a double.
// Concurrent access goes through relaxed atomic refs so that distinct cells can be
// written from several workers.
class Buffer {
 public:
  Buffer(TypeKind elem, std::size_t size, bool device = false);

  TypeKind elem() const { return elem_; }
  std::size_t size() const { return words_.size(); }
  std::uint64_t id() const { return id_; }
  bool device() const { return device_; }

  std::uint64_t load(std::size_t i) const {
    return std::atomic_ref<std::uint64_t>(const_cast<std::uint64_t&>(words_[i])).load(std::memory_order_relaxed);
  }
  void store(std::size_t i, std::uint64_t w) {
    std::atomic_ref<std::uint64_t>(words_[i]).store(w, std::memory_order_relaxed);
  }
  std::vector<std::uint64_t>& words() { return words_; }
  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  TypeKind elem_;
  std::vector<std::uint64_t> words_;
  std::uint64_t id_;
  bool device_;
};

using BufferPtr = std::shared_ptr<Buffer>;

// A row-major view into a buffer.
struct TensorView {
  BufferPtr buffer;
  std::size_t offset = 0;
  std::vector<std::int64_t> shape;

  std::size_t rank() const { return shape.size(); }
  std::size_t size() const;
  TypeKind elem() const { return buffer->elem(); }
};

struct Value;
struct SeqData;
struct RecordData;
struct Closure;

using SeqPtr = std::shared_ptr<const SeqData>;
using RecordPtr = std::shared_ptr<const RecordData>;
using ClosurePtr = std::shared_ptr<const Closure>;
using TensorPtr = std::shared_ptr<const TensorView>;

struct Value {
  std::variant<std::int64_t, double, bool, char32_t, Unit, SeqPtr, RecordPtr, ClosurePtr, TensorPtr> v;

  Value() : v(Unit{}) {}
  template <class T>
  Value(T x) : v(std::move(x)) {}  // NOLINT

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(v);
  }
  template <class T>
  const T& get() const {
    return std::get<T>(v);
  }
  bool isUnit() const;
};

struct SeqData {
  std::vector<Value> elems;
};

struct RecordData {
  std::vector<std::pair<std::string, Value>> fields;  // declaration order

  const Value* field(const std::string& label) const;
};

Value makeSeq(std::vector<Value> elems);
Value makeRecord(std::vector<std::pair<std::string, Value>> fields);
Value makeTensor(TensorView view);
Value makeString(const std::string& utf8);
std::string stringOf(const Value& seqOfChars);

// Elements of a tensor read as Values, row-major.
Value tensorElement(const TensorView& t, std::size_t linear);
void setTensorElement(const TensorView& t, std::size_t linear, const Value& v);

// Deterministic rendering, e.g. `[1, 2]`, `{a = 1.5}`, `"text"`, `tensor[2, 2]{0, 1, 2, 3}`.
std::string show(const Value& v);

// Structural comparison; floats within a relative tolerance (0 means exact).
bool valuesClose(const Value& a, const Value& b, double relTol);

bool floatsClose(double a, double b, double relTol);

}  // namespace pmx
