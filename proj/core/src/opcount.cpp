#include "vpinn/opcount.hpp"

#include <cmath>
#include <numeric>

namespace vpinn {

const char* op_name(Op op) {
  switch (op) {
    case Op::add: return "add";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::tanh: return "tanh";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::sqrt: return "sqrt";
    case Op::pow: return "pow";
    case Op::cmp: return "cmp";
    default: return "?";
  }
}

uint64_t OpCounter::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), uint64_t{0});
}

void OpCounter::merge(const OpCounter& other) {
  for (std::size_t i = 0; i < kOpKinds; ++i) counts_[i] += other.counts_[i];
  tangent_ops_ += other.tangent_ops_;
}

void OpCounter::merge_scaled(const OpCounter& other, uint64_t factor) {
  for (std::size_t i = 0; i < kOpKinds; ++i) counts_[i] += factor * other.counts_[i];
  tangent_ops_ += factor * other.tangent_ops_;
}

OpCounter OpCounter::diff_since(const OpCounter& snapshot) const {
  OpCounter d;
  for (std::size_t i = 0; i < kOpKinds; ++i)
    d.counts_[i] = counts_[i] - snapshot.counts_[i];
  d.tangent_ops_ = tangent_ops_ - snapshot.tangent_ops_;
  return d;
}

std::map<std::string, uint64_t> OpCounter::as_map() const {
  std::map<std::string, uint64_t> m;
  for (std::size_t i = 0; i < kOpKinds; ++i)
    if (counts_[i] != 0) m[op_name(static_cast<Op>(i))] = counts_[i];
  return m;
}

namespace detail {
OpCounter*& active_counter() {
  thread_local OpCounter* active = nullptr;
  return active;
}
namespace {
thread_local uint64_t scope_serial = 0;
thread_local uint64_t scope_depth = 0;
}  // namespace
}  // namespace detail

CountScope::CountScope() {
  parent_ = detail::active_counter();
  detail::active_counter() = &counter_;
  token_ = ++detail::scope_depth;
  (void)detail::scope_serial;
}

OpCounter CountScope::stop() {
  if (!open_) throw scope_error("count scope already closed");
  if (token_ != detail::scope_depth)
    throw scope_error("count scopes closed out of order");
  --detail::scope_depth;
  detail::active_counter() = parent_;
  if (parent_) parent_->merge(counter_);
  open_ = false;
  return counter_;
}

CountScope::~CountScope() {
  // Automatic scopes unwind LIFO; a token mismatch can only happen through
  // misuse of heap-held scopes, and a destructor must not throw for it.
  if (open_ && token_ == detail::scope_depth) stop();
}

}  // namespace vpinn
