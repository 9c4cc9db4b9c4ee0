#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "vpinn/dual.hpp"
#include "vpinn/opcount.hpp"

namespace vpinn {

struct tape_error : std::logic_error {
  using std::logic_error::logic_error;
};

// Counted elementary arithmetic over tape payloads. For double the counting
// happens here; Dual payloads count through their own operators, including
// the tangent meta-counter.
namespace counted {
inline double add(double a, double b) { count_op(Op::add); return a + b; }
inline double sub(double a, double b) { count_op(Op::add); return a - b; }
inline double neg(double a) { count_op(Op::add); return -a; }
inline double mul(double a, double b) { count_op(Op::mul); return a * b; }
inline double div(double a, double b) { count_op(Op::div); return a / b; }
inline double tanh(double a) { count_op(Op::tanh); return std::tanh(a); }
inline double sin(double a) { count_op(Op::sin); return std::sin(a); }
inline double cos(double a) { count_op(Op::cos); return std::cos(a); }
inline double exp(double a) { count_op(Op::exp); return std::exp(a); }
inline double sqrt(double a) { count_op(Op::sqrt); return std::sqrt(a); }
template <std::size_t W> Dual<W> add(const Dual<W>& a, const Dual<W>& b) { return a + b; }
template <std::size_t W> Dual<W> sub(const Dual<W>& a, const Dual<W>& b) { return a - b; }
template <std::size_t W> Dual<W> neg(const Dual<W>& a) { return -a; }
template <std::size_t W> Dual<W> mul(const Dual<W>& a, const Dual<W>& b) { return a * b; }
template <std::size_t W> Dual<W> div(const Dual<W>& a, const Dual<W>& b) { return a / b; }
template <std::size_t W> Dual<W> tanh(const Dual<W>& a) { return vpinn::tanh(a); }
template <std::size_t W> Dual<W> sin(const Dual<W>& a) { return vpinn::sin(a); }
template <std::size_t W> Dual<W> cos(const Dual<W>& a) { return vpinn::cos(a); }
template <std::size_t W> Dual<W> exp(const Dual<W>& a) { return vpinn::exp(a); }
template <std::size_t W> Dual<W> sqrt(const Dual<W>& a) { return vpinn::sqrt(a); }
}  // namespace counted

template <class V>
class Tape;

// Handle to a tape node.
template <class V>
class TapeVar {
public:
  TapeVar() = default;
  const V& value() const;
  uint32_t index() const { return i_; }
  Tape<V>* tape() const { return tape_; }

private:
  friend class Tape<V>;
  TapeVar(Tape<V>* t, uint32_t i) : tape_(t), i_(i) {}
  Tape<V>* tape_ = nullptr;
  uint32_t i_ = 0;
};

// Evaluation tape: every arithmetic op appends one node holding its payload
// value and the indices of its inputs. A backward sweep from a scalar root
// deposits exact adjoints in the watched leaves. The payload V may be a
// Dual<W>, in which case the tangent slot of the swept adjoints carries the
// mixed (reverse-over-forward) derivatives. A recording sweep emits its
// adjoint arithmetic back onto the tape, so a second sweep can differentiate
// through the first (reverse-over-reverse).
//
// Tapes are rebuilt per evaluation and confined to one thread.
template <class V>
class Tape {
public:
  using Index = uint32_t;
  using Var = TapeVar<V>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void reserve(std::size_t n) { nodes_.reserve(n); }
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // Watched leaf: adjoints propagate into it.
  Var leaf(const V& v) { return push(Code::leaf, 0, 0, v); }
  // Unwatched constant: partials may read it, adjoints never enter it.
  Var constant(const V& v) { return push(Code::constant, 0, 0, v); }

  Var add(Var a, Var b) { chk(a); chk(b); return push(Code::add, a.i_, b.i_, counted::add(val(a.i_), val(b.i_))); }
  Var sub(Var a, Var b) { chk(a); chk(b); return push(Code::sub, a.i_, b.i_, counted::sub(val(a.i_), val(b.i_))); }
  Var neg(Var a) { chk(a); return push(Code::neg, a.i_, a.i_, counted::neg(val(a.i_))); }
  Var mul(Var a, Var b) { chk(a); chk(b); return push(Code::mul, a.i_, b.i_, counted::mul(val(a.i_), val(b.i_))); }
  Var div(Var a, Var b) { chk(a); chk(b); return push(Code::div, a.i_, b.i_, counted::div(val(a.i_), val(b.i_))); }
  Var tanh(Var a) { chk(a); return push(Code::tanh_, a.i_, a.i_, counted::tanh(val(a.i_))); }
  Var sin(Var a) { chk(a); return push(Code::sin_, a.i_, a.i_, counted::sin(val(a.i_))); }
  Var cos(Var a) { chk(a); return push(Code::cos_, a.i_, a.i_, counted::cos(val(a.i_))); }
  Var exp(Var a) { chk(a); return push(Code::exp_, a.i_, a.i_, counted::exp(val(a.i_))); }
  Var sqrt(Var a) { chk(a); return push(Code::sqrt_, a.i_, a.i_, counted::sqrt(val(a.i_))); }

  const V& value_of(Var v) const { chk(v); return val(v.i_); }

  // Exact adjoints of root with respect to targets (one sweep per scalar
  // root). Work is pruned to the subgraph linking root and targets, matching
  // what a graph framework with explicit watch lists executes. The optional
  // seed scales the whole sweep linearly (adjoint of root itself).
  std::vector<V> gradient(Var root, std::span<const Var> targets, const V& seed = V(1.0)) {
    ValuePolicy pol(*this);
    pol.seed_value = seed;
    return sweep(root, targets, pol);
  }

  // Recording sweep: the returned gradients are themselves tape variables.
  std::vector<Var> gradient_recorded(Var root, std::span<const Var> targets) {
    RecordPolicy pol(*this);
    return sweep(root, targets, pol);
  }

private:
  enum class Code : uint8_t {
    leaf, constant, add, sub, neg, mul, div, tanh_, sin_, cos_, exp_, sqrt_
  };
  struct Node {
    Code op;
    Index a, b;
    V val;
  };

  std::vector<Node> nodes_;

  friend class TapeVar<V>;

  const V& val(Index i) const { return nodes_[i].val; }
  void chk(Var v) const {
    if (v.tape_ != this) throw tape_error("variable does not belong to this tape");
  }
  Var push(Code op, Index a, Index b, const V& v) {
    nodes_.push_back(Node{op, a, b, v});
    return Var(this, static_cast<Index>(nodes_.size() - 1));
  }
  static bool is_nullary(Code c) { return c == Code::leaf || c == Code::constant; }
  static bool is_binary(Code c) {
    return c == Code::add || c == Code::sub || c == Code::mul || c == Code::div;
  }

  // Adjoint policies share one canonical op sequence per node type, so the
  // counted cost of a recording sweep equals that of a plain one.
  struct ValuePolicy {
    Tape& t;
    std::vector<V> adj;
    std::vector<uint8_t> has;
    V seed_value = V(1.0);
    explicit ValuePolicy(Tape& tape) : t(tape) {}
    using A = V;
    void init(std::size_t n0) { adj.assign(n0, V{}); has.assign(n0, 0); }
    void seed(Index root) { adj[root] = seed_value; has[root] = 1; }
    bool seen(Index i) const { return has[i] != 0; }
    A adjoint(Index i) const { return adj[i]; }
    A mul_node(const A& g, Index n) { return counted::mul(g, t.val(n)); }
    A div_node(const A& g, Index n) { return counted::div(g, t.val(n)); }
    A mul(const A& a, const A& b) { return counted::mul(a, b); }
    A one_minus_sq(Index n) {
      return counted::sub(V(1.0), counted::mul(t.val(n), t.val(n)));
    }
    A sin_node(Index n) { return counted::sin(t.val(n)); }
    A cos_node(Index n) { return counted::cos(t.val(n)); }
    A half(const A& g) { return counted::mul(g, V(0.5)); }
    void acc(Index p, const A& c, bool negative) {
      if (!has[p]) {
        adj[p] = negative ? counted::neg(c) : c;
        has[p] = 1;
      } else {
        adj[p] = negative ? counted::sub(adj[p], c) : counted::add(adj[p], c);
      }
    }
    A result(Index p) const { return has[p] ? adj[p] : V{}; }
  };

  struct RecordPolicy {
    Tape& t;
    std::vector<Index> adj;
    std::vector<uint8_t> has;
    explicit RecordPolicy(Tape& tape) : t(tape) {}
    using A = Var;
    void init(std::size_t n0) { adj.assign(n0, 0); has.assign(n0, 0); }
    void seed(Index root) {
      adj[root] = t.constant(V(1.0)).i_;
      has[root] = 1;
    }
    bool seen(Index i) const { return has[i] != 0; }
    A adjoint(Index i) { return Var(&t, adj[i]); }
    Var ref(Index n) { return Var(&t, n); }
    A mul_node(const A& g, Index n) { return t.mul(g, ref(n)); }
    A div_node(const A& g, Index n) { return t.div(g, ref(n)); }
    A mul(const A& a, const A& b) { return t.mul(a, b); }
    A one_minus_sq(Index n) { return t.sub(t.constant(V(1.0)), t.mul(ref(n), ref(n))); }
    A sin_node(Index n) { return t.sin(ref(n)); }
    A cos_node(Index n) { return t.cos(ref(n)); }
    A half(const A& g) { return t.mul(g, t.constant(V(0.5))); }
    void acc(Index p, const A& c, bool negative) {
      if (!has[p]) {
        adj[p] = negative ? t.neg(c).i_ : c.i_;
        has[p] = 1;
      } else {
        Var cur(&t, adj[p]);
        adj[p] = (negative ? t.sub(cur, c) : t.add(cur, c)).i_;
      }
    }
    A result(Index p) { return has[p] ? Var(&t, adj[p]) : t.constant(V{}); }
  };

  template <class Policy>
  auto sweep(Var root, std::span<const Var> targets, Policy& pol)
      -> std::vector<typename Policy::A> {
    chk(root);
    const std::size_t n0 = nodes_.size();
    std::vector<uint8_t> reach(n0, 0);
    for (const Var& tv : targets) {
      chk(tv);
      reach[tv.i_] = 1;
    }
    for (Index i = 0; i < n0; ++i) {
      const Node& nd = nodes_[i];
      if (!is_nullary(nd.op) && !reach[i] && (reach[nd.a] || reach[nd.b])) reach[i] = 1;
    }

    pol.init(n0);
    if (reach[root.i_]) {
      pol.seed(root.i_);
      for (Index i = root.i_ + 1; i-- > 0;) {
        if (!pol.seen(i)) continue;
        const Node nd = nodes_[i];
        if (is_nullary(nd.op)) continue;
        auto g = pol.adjoint(i);
        const bool wa = reach[nd.a] != 0;
        const bool wb = is_binary(nd.op) && reach[nd.b] != 0;
        switch (nd.op) {
          case Code::add:
            if (wa) pol.acc(nd.a, g, false);
            if (wb) pol.acc(nd.b, g, false);
            break;
          case Code::sub:
            if (wa) pol.acc(nd.a, g, false);
            if (wb) pol.acc(nd.b, g, true);
            break;
          case Code::neg:
            if (wa) pol.acc(nd.a, g, true);
            break;
          case Code::mul:
            if (wa) pol.acc(nd.a, pol.mul_node(g, nd.b), false);
            if (wb) pol.acc(nd.b, pol.mul_node(g, nd.a), false);
            break;
          case Code::div: {
            if (wa || wb) {
              auto q = pol.div_node(g, nd.b);  // g / b
              if (wa) pol.acc(nd.a, q, false);
              if (wb) pol.acc(nd.b, pol.mul_node(q, i), true);  // -= (g/b) * (a/b)
            }
            break;
          }
          case Code::tanh_:
            if (wa) pol.acc(nd.a, pol.mul(g, pol.one_minus_sq(i)), false);
            break;
          case Code::sin_:
            if (wa) pol.acc(nd.a, pol.mul(g, pol.cos_node(nd.a)), false);
            break;
          case Code::cos_:
            if (wa) pol.acc(nd.a, pol.mul(g, pol.sin_node(nd.a)), true);
            break;
          case Code::exp_:
            if (wa) pol.acc(nd.a, pol.mul_node(g, i), false);
            break;
          case Code::sqrt_:
            if (wa) pol.acc(nd.a, pol.half(pol.div_node(g, i)), false);
            break;
          default:
            break;
        }
      }
    }

    std::vector<typename Policy::A> out;
    out.reserve(targets.size());
    for (const Var& tv : targets) out.push_back(pol.result(tv.i_));
    return out;
  }
};

template <class V>
const V& TapeVar<V>::value() const { return tape_->value_of(*this); }

template <class V> TapeVar<V> operator+(TapeVar<V> a, TapeVar<V> b) { return a.tape()->add(a, b); }
template <class V> TapeVar<V> operator-(TapeVar<V> a, TapeVar<V> b) { return a.tape()->sub(a, b); }
template <class V> TapeVar<V> operator-(TapeVar<V> a) { return a.tape()->neg(a); }
template <class V> TapeVar<V> operator*(TapeVar<V> a, TapeVar<V> b) { return a.tape()->mul(a, b); }
template <class V> TapeVar<V> operator/(TapeVar<V> a, TapeVar<V> b) { return a.tape()->div(a, b); }
template <class V> TapeVar<V> tanh(TapeVar<V> a) { return a.tape()->tanh(a); }
template <class V> TapeVar<V> sin(TapeVar<V> a) { return a.tape()->sin(a); }
template <class V> TapeVar<V> cos(TapeVar<V> a) { return a.tape()->cos(a); }
template <class V> TapeVar<V> exp(TapeVar<V> a) { return a.tape()->exp(a); }
template <class V> TapeVar<V> sqrt(TapeVar<V> a) { return a.tape()->sqrt(a); }

using DTape = Tape<double>;

}  // namespace vpinn
