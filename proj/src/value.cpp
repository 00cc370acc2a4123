#include "pmx/value.hpp"

#include <cmath>
#include <cstdio>

#include "pmx/diagnostic.hpp"
#include "utf8.hpp"

namespace pmx {

namespace {
std::atomic<std::uint64_t> nextBufferId{1};
}

Buffer::Buffer(TypeKind elem, std::size_t size, bool device)
    : elem_(elem), words_(size, 0), id_(nextBufferId.fetch_add(1, std::memory_order_relaxed)), device_(device) {}

std::size_t TensorView::size() const {
  std::size_t n = 1;
  for (auto d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

bool Value::isUnit() const {
  if (is<Unit>()) return true;
  return is<RecordPtr>() && get<RecordPtr>()->fields.empty();
}

const Value* RecordData::field(const std::string& label) const {
  for (const auto& [l, v] : fields) {
    if (l == label) return &v;
  }
  return nullptr;
}

Value makeSeq(std::vector<Value> elems) { return Value(std::make_shared<const SeqData>(SeqData{std::move(elems)})); }

Value makeRecord(std::vector<std::pair<std::string, Value>> fields) {
  if (fields.empty()) return Value(Unit{});
  return Value(std::make_shared<const RecordData>(RecordData{std::move(fields)}));
}

Value makeTensor(TensorView view) { return Value(std::make_shared<const TensorView>(std::move(view))); }

Value makeString(const std::string& s) {
  std::vector<Value> out;
  std::string_view rest = s;
  while (!rest.empty()) {
    std::size_t len = 0;
    char32_t c = utf8::decode(rest, len);
    if (len == 0) {
      c = static_cast<unsigned char>(rest[0]);
      len = 1;
    }
    out.emplace_back(c);
    rest.remove_prefix(len);
  }
  return makeSeq(std::move(out));
}

std::string stringOf(const Value& v) {
  std::string out;
  for (const auto& c : v.get<SeqPtr>()->elems) utf8::encode(c.get<char32_t>(), out);
  return out;
}

Value tensorElement(const TensorView& t, std::size_t linear) {
  std::uint64_t w = t.buffer->load(t.offset + linear);
  if (t.elem() == TypeKind::Float) return Value(std::bit_cast<double>(w));
  return Value(std::bit_cast<std::int64_t>(w));
}

void setTensorElement(const TensorView& t, std::size_t linear, const Value& v) {
  std::uint64_t w = t.elem() == TypeKind::Float ? std::bit_cast<std::uint64_t>(v.get<double>())
                                                : std::bit_cast<std::uint64_t>(v.get<std::int64_t>());
  t.buffer->store(t.offset + linear, w);
}

namespace {

std::string showFloat(double d) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  for (int prec = 1; prec < 17; ++prec) {
    char b2[40];
    std::snprintf(b2, sizeof b2, "%.*g", prec, d);
    if (std::strtod(b2, nullptr) == d) {
      std::snprintf(buf, sizeof buf, "%s", b2);
      break;
    }
  }
  std::string s = buf;
  if (std::isfinite(d) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

bool allChars(const SeqData& s) {
  if (s.elems.empty()) return false;
  for (const auto& e : s.elems) {
    if (!e.is<char32_t>()) return false;
  }
  return true;
}

}  // namespace

std::string show(const Value& v) {
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, double>) {
          return showFloat(x);
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, char32_t>) {
          std::string s = "'";
          utf8::encode(x, s);
          return s + "'";
        } else if constexpr (std::is_same_v<T, Unit>) {
          return "{}";
        } else if constexpr (std::is_same_v<T, SeqPtr>) {
          if (allChars(*x)) return "\"" + stringOf(v) + "\"";
          std::string s = "[";
          for (std::size_t i = 0; i < x->elems.size(); ++i) {
            if (i) s += ", ";
            s += show(x->elems[i]);
          }
          return s + "]";
        } else if constexpr (std::is_same_v<T, RecordPtr>) {
          std::string s = "{";
          for (std::size_t i = 0; i < x->fields.size(); ++i) {
            if (i) s += ", ";
            s += x->fields[i].first + " = " + show(x->fields[i].second);
          }
          return s + "}";
        } else if constexpr (std::is_same_v<T, ClosurePtr>) {
          return "<function>";
        } else {
          std::string s = "tensor[";
          for (std::size_t i = 0; i < x->shape.size(); ++i) {
            if (i) s += ", ";
            s += std::to_string(x->shape[i]);
          }
          s += "]{";
          for (std::size_t i = 0; i < x->size(); ++i) {
            if (i) s += ", ";
            s += show(tensorElement(*x, i));
          }
          return s + "}";
        }
      },
      v.v);
}

bool floatsClose(double a, double b, double relTol) {
  if (a == b) return true;
  if (std::isnan(a) && std::isnan(b)) return true;
  if (relTol == 0) return false;
  double scale = std::max(std::fabs(a), std::fabs(b));
  return std::fabs(a - b) <= relTol * scale;
}

bool valuesClose(const Value& a, const Value& b, double relTol) {
  if (a.isUnit() && b.isUnit()) return true;
  if (a.v.index() != b.v.index()) return false;
  if (a.is<double>()) return floatsClose(a.get<double>(), b.get<double>(), relTol);
  if (a.is<SeqPtr>()) {
    const auto& x = a.get<SeqPtr>()->elems;
    const auto& y = b.get<SeqPtr>()->elems;
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!valuesClose(x[i], y[i], relTol)) return false;
    }
    return true;
  }
  if (a.is<RecordPtr>()) {
    const auto& x = a.get<RecordPtr>()->fields;
    const auto& y = b.get<RecordPtr>()->fields;
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].first != y[i].first || !valuesClose(x[i].second, y[i].second, relTol)) return false;
    }
    return true;
  }
  if (a.is<TensorPtr>()) {
    const auto& x = *a.get<TensorPtr>();
    const auto& y = *b.get<TensorPtr>();
    if (x.shape != y.shape || x.elem() != y.elem()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!valuesClose(tensorElement(x, i), tensorElement(y, i), relTol)) return false;
    }
    return true;
  }
  if (a.is<ClosurePtr>()) return a.get<ClosurePtr>() == b.get<ClosurePtr>();
  return a.v == b.v;
}

}  // namespace pmx
