#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace vpinn {

// Elementary operation categories. `add` covers additions, subtractions and
// negations; transcendental calls count one each.
enum class Op : uint8_t { add, mul, div, tanh, sin, cos, exp, sqrt, pow, cmp, count_ };
inline constexpr std::size_t kOpKinds = static_cast<std::size_t>(Op::count_);

const char* op_name(Op op);

// Deterministic arithmetic-operation counter. Counting is thread-confined:
// each thread talks to its own active counter, installed via CountScope.
// Counts from worker scopes can be merged additively if needed.
class OpCounter {
public:
  void add(Op op, uint64_t n = 1) { counts_[static_cast<std::size_t>(op)] += n; }
  void add_tangent(uint64_t n) { tangent_ops_ += n; }

  uint64_t operator[](Op op) const { return counts_[static_cast<std::size_t>(op)]; }
  uint64_t total() const;
  // Operations spent propagating spatial forward-mode tangents. Zero for any
  // computation that takes no spatial derivatives of the trial functions.
  uint64_t tangent_ops() const { return tangent_ops_; }

  void reset() { counts_.fill(0); tangent_ops_ = 0; }
  void merge(const OpCounter& other);
  // Adds factor copies of other; used when one representative computation
  // stands for many with identical op sequences.
  void merge_scaled(const OpCounter& other, uint64_t factor);
  OpCounter diff_since(const OpCounter& snapshot) const;

  std::map<std::string, uint64_t> as_map() const;

private:
  std::array<uint64_t, kOpKinds> counts_{};
  uint64_t tangent_ops_ = 0;
};

namespace detail {
OpCounter*& active_counter();
}

// Hot-path hooks; no-ops when no counter is installed on this thread.
inline void count_op(Op op, uint64_t n = 1) {
  if (OpCounter* c = detail::active_counter()) c->add(op, n);
}
inline void count_tangent(uint64_t n) {
  if (OpCounter* c = detail::active_counter()) c->add_tangent(n);
}

// RAII counting scope. Nested scopes compose additively: the inner scope's
// delta is folded into the enclosing counter when the scope closes.
class CountScope {
public:
  CountScope();
  CountScope(const CountScope&) = delete;
  CountScope& operator=(const CountScope&) = delete;
  ~CountScope();

  // Counts attributed to this scope so far (including closed nested scopes).
  const OpCounter& counts() const { return counter_; }
  // Closes the scope early and returns the final counts.
  OpCounter stop();

private:
  OpCounter counter_;
  OpCounter* parent_;
  uint64_t token_;
  bool open_ = true;
};

struct scope_error : std::logic_error {
  using std::logic_error::logic_error;
};

// Counted double: plain IEEE arithmetic that reports every operation to the
// active counter. Used by reference implementations whose cost must mirror a
// scalar execution exactly.
struct Cd {
  double v = 0.0;
  Cd() = default;
  Cd(double x) : v(x) {}  // NOLINT: implicit by design
  explicit operator double() const { return v; }
};

inline Cd operator+(Cd a, Cd b) { count_op(Op::add); return {a.v + b.v}; }
inline Cd operator-(Cd a, Cd b) { count_op(Op::add); return {a.v - b.v}; }
inline Cd operator-(Cd a) { count_op(Op::add); return {-a.v}; }
inline Cd operator*(Cd a, Cd b) { count_op(Op::mul); return {a.v * b.v}; }
inline Cd operator/(Cd a, Cd b) { count_op(Op::div); return {a.v / b.v}; }
inline Cd& operator+=(Cd& a, Cd b) { a = a + b; return a; }
inline Cd& operator-=(Cd& a, Cd b) { a = a - b; return a; }
inline Cd& operator*=(Cd& a, Cd b) { a = a * b; return a; }
inline bool operator<(Cd a, Cd b) { count_op(Op::cmp); return a.v < b.v; }
inline bool operator>(Cd a, Cd b) { count_op(Op::cmp); return a.v > b.v; }
inline Cd tanh(Cd a) { count_op(Op::tanh); return {std::tanh(a.v)}; }
inline Cd sin(Cd a) { count_op(Op::sin); return {std::sin(a.v)}; }
inline Cd cos(Cd a) { count_op(Op::cos); return {std::cos(a.v)}; }
inline Cd exp(Cd a) { count_op(Op::exp); return {std::exp(a.v)}; }
inline Cd sqrt(Cd a) { count_op(Op::sqrt); return {std::sqrt(a.v)}; }
inline Cd abs(Cd a) { count_op(Op::cmp); return {std::abs(a.v)}; }

}  // namespace vpinn
