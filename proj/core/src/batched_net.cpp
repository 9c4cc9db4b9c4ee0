#include "vpinn/batched_net.hpp"

#include "vpinn/fast_math.hpp"
#include "vpinn/opcount.hpp"

namespace vpinn {

namespace {

constexpr Eigen::Index kChunk = 8192;

// out = a * w^T, processed in row blocks to keep the packed panels cache
// resident on large batches.
void gemm_nt(const Eigen::MatrixXd& a, const Eigen::MatrixXd& w, Eigen::MatrixXd& out) {
  out.resize(a.rows(), w.rows());
  for (Eigen::Index r = 0; r < a.rows(); r += kChunk) {
    const Eigen::Index nb = std::min(kChunk, a.rows() - r);
    out.middleRows(r, nb).noalias() = a.middleRows(r, nb) * w.transpose();
  }
}

// out += a^T * b with a, b tall (K x m / K x n), blocked over K.
void gemm_tn_acc(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::MatrixXd& out) {
  for (Eigen::Index r = 0; r < a.rows(); r += kChunk) {
    const Eigen::Index nb = std::min(kChunk, a.rows() - r);
    out.noalias() += a.middleRows(r, nb).transpose() * b.middleRows(r, nb);
  }
}

void gemm_nn(const Eigen::MatrixXd& a, const Eigen::MatrixXd& w, Eigen::MatrixXd& out) {
  out.resize(a.rows(), w.cols());
  for (Eigen::Index r = 0; r < a.rows(); r += kChunk) {
    const Eigen::Index nb = std::min(kChunk, a.rows() - r);
    out.middleRows(r, nb).noalias() = a.middleRows(r, nb) * w;
  }
}

}  // namespace

void count_gemm(std::ptrdiff_t m, std::ptrdiff_t k, std::ptrdiff_t n, bool accumulate,
                bool tangent) {
  const auto mn = static_cast<uint64_t>(m) * static_cast<uint64_t>(n);
  const auto muls = mn * static_cast<uint64_t>(k);
  const auto adds = mn * static_cast<uint64_t>(k - 1) + (accumulate ? mn : 0);
  count_op(Op::mul, muls);
  count_op(Op::add, adds);
  if (tangent) count_tangent(muls + adds);
}

void count_elementwise(Op op, std::ptrdiff_t n, bool tangent) {
  count_op(op, static_cast<uint64_t>(n));
  if (tangent) count_tangent(static_cast<uint64_t>(n));
}

CutoffBatch cutoff_batch(const Eigen::MatrixXd& x) {
  CutoffBatch out;
  const Eigen::Index k = x.rows();
  out.dxi.resize(k, x.cols());
  if (x.cols() == 1) {
    out.xi = x.col(0).array() * (x.col(0).array() - kPi);
    out.dxi.col(0) = 2.0 * x.col(0).array() - kPi;
    count_op(Op::mul, static_cast<uint64_t>(2 * k));
    count_op(Op::add, static_cast<uint64_t>(2 * k));
  } else {
    Eigen::ArrayXd fx = x.col(0).array() * (x.col(0).array() - kPi);
    Eigen::ArrayXd fy = x.col(1).array() * (x.col(1).array() - kPi);
    out.xi = fx * fy;
    out.dxi.col(0) = (2.0 * x.col(0).array() - kPi) * fy;
    out.dxi.col(1) = (2.0 * x.col(1).array() - kPi) * fx;
    count_op(Op::mul, static_cast<uint64_t>(7 * k));
    count_op(Op::add, static_cast<uint64_t>(4 * k));
  }
  return out;
}

void batched_forward(const MlpParameters& p, const Eigen::MatrixXd& x, bool want_tangents,
                     BatchedStack& out) {
  const auto L = p.alpha.size();
  const Eigen::Index k = x.rows();
  const int d = static_cast<int>(x.cols());
  out.x = x;
  out.h.resize(L + 1);
  out.h[0] = x;
  out.tangents = want_tangents;
  if (want_tangents) {
    out.t.resize(L);
    out.u.resize(L);
  }
  Eigen::MatrixXd act;  // 1 - h^2 for the current layer
  for (std::size_t l = 1; l <= L; ++l) {
    const auto& w = p.alpha[l - 1].w;
    const auto& b = p.alpha[l - 1].b;
    gemm_nt(out.h[l - 1], w, out.h[l]);
    count_gemm(k, w.cols(), w.rows());
    out.h[l].rowwise() += b.transpose();
    count_op(Op::add, static_cast<uint64_t>(k) * w.rows());
    fast_tanh_inplace(out.h[l]);
    count_elementwise(Op::tanh, k * w.rows());
    if (want_tangents) {
      act = 1.0 - out.h[l].array().square();
      count_op(Op::mul, static_cast<uint64_t>(k) * w.rows());
      count_op(Op::add, static_cast<uint64_t>(k) * w.rows());
      for (int c = 0; c < d; ++c) {
        if (l == 1) {
          // t_0 rows are unit seeds, so the pre-activation tangent is just a
          // broadcast of column c of W_1.
          out.u[0][c] = w.col(c).transpose().replicate(k, 1);
        } else {
          gemm_nt(out.t[l - 2][c], w, out.u[l - 1][c]);
          count_gemm(k, w.cols(), w.rows(), false, true);
        }
        out.t[l - 1][c] = act.cwiseProduct(out.u[l - 1][c]);
        count_elementwise(Op::mul, k * w.rows(), true);
      }
    }
  }
}

TrialSamples trial_samples(const BatchedStack& s, const CutoffBatch& cut) {
  TrialSamples ts;
  const Eigen::MatrixXd& hl = s.h.back();
  const Eigen::Index k = hl.rows(), n = hl.cols();
  ts.phi = hl.array().colwise() * cut.xi.array();
  count_op(Op::mul, static_cast<uint64_t>(k * n));
  if (s.tangents) {
    ts.has_grad = true;
    const int d = static_cast<int>(s.x.cols());
    for (int c = 0; c < d; ++c) {
      ts.grad[c] = (hl.array().colwise() * cut.dxi.col(c).array()) +
                   (s.t.back()[c].array().colwise() * cut.xi.array());
      count_op(Op::mul, static_cast<uint64_t>(2 * k * n));
      count_op(Op::add, static_cast<uint64_t>(k * n));
      count_tangent(static_cast<uint64_t>(3 * k * n));
    }
  }
  return ts;
}

void ParamGrads::resize_like(const MlpParameters& p) {
  w.resize(p.alpha.size());
  b.resize(p.alpha.size());
  for (std::size_t l = 0; l < p.alpha.size(); ++l) {
    w[l] = Eigen::MatrixXd::Zero(p.alpha[l].w.rows(), p.alpha[l].w.cols());
    b[l] = Eigen::VectorXd::Zero(p.alpha[l].b.size());
  }
  omega = Eigen::VectorXd::Zero(p.omega.size());
}

void ParamGrads::flatten_alpha(Eigen::VectorXd& out) const {
  std::ptrdiff_t total = 0;
  for (std::size_t l = 0; l < w.size(); ++l) total += w[l].size() + b[l].size();
  out.resize(total);
  std::ptrdiff_t at = 0;
  for (std::size_t l = 0; l < w.size(); ++l) {
    for (Eigen::Index i = 0; i < w[l].rows(); ++i)
      for (Eigen::Index j = 0; j < w[l].cols(); ++j) out(at++) = w[l](i, j);
    for (Eigen::Index i = 0; i < b[l].size(); ++i) out(at++) = b[l](i);
  }
}

void batched_backprop(const MlpParameters& p, const BatchedStack& s, const CutoffBatch& cut,
                      const Eigen::MatrixXd* d_phi,
                      const std::array<const Eigen::MatrixXd*, 2>& d_grad, ParamGrads& grads) {
  const auto L = p.alpha.size();
  const Eigen::MatrixXd& hl = s.h.back();
  const Eigen::Index k = hl.rows(), n = hl.cols();
  const int d = static_cast<int>(s.x.cols());

  // Adjoints entering the top of the stack.
  Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(k, n);
  std::array<Eigen::MatrixXd, 2> dt;
  if (d_phi) {
    dh = d_phi->array().colwise() * cut.xi.array();
    count_op(Op::mul, static_cast<uint64_t>(k * n));
  }
  for (int c = 0; c < d; ++c) {
    if (!d_grad[c]) continue;
    dh.array() += d_grad[c]->array().colwise() * cut.dxi.col(c).array();
    count_op(Op::mul, static_cast<uint64_t>(k * n));
    count_op(Op::add, static_cast<uint64_t>(k * n));
    dt[c] = d_grad[c]->array().colwise() * cut.xi.array();
    count_op(Op::mul, static_cast<uint64_t>(k * n));
  }
  const bool tang = s.tangents && (d_grad[0] || d_grad[1]);

  Eigen::MatrixXd act, dz, dh_prev;
  std::array<Eigen::MatrixXd, 2> dpc;
  for (std::size_t l = L; l >= 1; --l) {
    const auto& w = p.alpha[l - 1].w;
    const Eigen::Index wl = w.rows();
    act = 1.0 - s.h[l].array().square();
    count_op(Op::mul, static_cast<uint64_t>(k) * wl);
    count_op(Op::add, static_cast<uint64_t>(k) * wl);
    if (tang) {
      // t_l = act .* u_l gives adjoints into act (hence h_l) and u_l.
      for (int c = 0; c < d; ++c) {
        dh.array() += -2.0 * s.h[l].array() * (dt[c].array() * s.u[l - 1][c].array());
        count_op(Op::mul, static_cast<uint64_t>(3 * k) * wl);
        count_op(Op::add, static_cast<uint64_t>(k) * wl);
        dpc[c] = dt[c].cwiseProduct(act);
        count_elementwise(Op::mul, k * wl, true);
      }
    }
    dz = dh.cwiseProduct(act);
    count_elementwise(Op::mul, k * wl);

    gemm_tn_acc(dz, s.h[l - 1], grads.w[l - 1]);
    count_gemm(wl, k, w.cols(), true);
    grads.b[l - 1] += dz.colwise().sum();
    count_op(Op::add, static_cast<uint64_t>(k) * wl);
    if (tang) {
      if (l >= 2) {
        for (int c = 0; c < d; ++c) {
          gemm_tn_acc(dpc[c], s.t[l - 2][c], grads.w[l - 1]);
          count_gemm(wl, k, w.cols(), true, true);
        }
      } else {
        // t_0 rows are unit seeds: the tangent contribution lands in one
        // column of W_1 per channel.
        for (int c = 0; c < d; ++c) {
          grads.w[0].col(c) += dpc[c].colwise().sum().transpose();
          count_op(Op::add, static_cast<uint64_t>(k) * wl);
          count_tangent(static_cast<uint64_t>(k) * wl);
        }
      }
    }
    if (l >= 2) {
      gemm_nn(dz, w, dh_prev);
      count_gemm(k, wl, w.cols());
      dh.swap(dh_prev);
      if (tang) {
        for (int c = 0; c < d; ++c) {
          Eigen::MatrixXd dtp;
          gemm_nn(dpc[c], w, dtp);
          count_gemm(k, wl, w.cols(), false, true);
          dt[c].swap(dtp);
        }
      }
    }
  }
}

void batched_scalar_gradient(const MlpParameters& p, const Eigen::MatrixXd& x, Eigen::VectorXd& u,
                             Eigen::MatrixXd& grad_u) {
  const auto L = p.alpha.size();
  const Eigen::Index k = x.rows();
  const int d = static_cast<int>(x.cols());
  u.resize(k);
  grad_u.resize(k, d);

  std::vector<Eigen::MatrixXd> h(L + 1);
  Eigen::MatrixXd dh, dz, tmp;
  for (Eigen::Index r = 0; r < k; r += kChunk) {
    const Eigen::Index nb = std::min(kChunk, k - r);
    h[0] = x.middleRows(r, nb);
    for (std::size_t l = 1; l <= L; ++l) {
      const auto& w = p.alpha[l - 1].w;
      h[l].noalias() = h[l - 1] * w.transpose();
      count_gemm(nb, w.cols(), w.rows());
      h[l].rowwise() += p.alpha[l - 1].b.transpose();
      count_op(Op::add, static_cast<uint64_t>(nb) * w.rows());
      fast_tanh_inplace(h[l]);
      count_elementwise(Op::tanh, nb * w.rows());
    }
    Eigen::VectorXd uh = h[L] * p.omega;
    count_gemm(nb, p.omega.size(), 1);
    CutoffBatch cut = cutoff_batch(h[0]);
    u.segment(r, nb) = cut.xi.cwiseProduct(uh);
    count_elementwise(Op::mul, nb);

    // One reverse pass for the spatial gradient of the scalar hidden output.
    dh = p.omega.transpose().replicate(nb, 1);
    for (std::size_t l = L; l >= 1; --l) {
      const auto& w = p.alpha[l - 1].w;
      dz = dh.array() * (1.0 - h[l].array().square());
      count_op(Op::mul, 2 * static_cast<uint64_t>(nb) * w.rows());
      count_op(Op::add, static_cast<uint64_t>(nb) * w.rows());
      tmp.noalias() = dz * w;
      count_gemm(nb, w.rows(), w.cols());
      dh.swap(tmp);
    }
    // dh is now d(uh)/dx (nb x d).
    for (int c = 0; c < d; ++c) {
      grad_u.col(c).segment(r, nb) =
          cut.dxi.col(c).cwiseProduct(uh) + cut.xi.cwiseProduct(dh.col(c));
      count_op(Op::mul, 2 * static_cast<uint64_t>(nb));
      count_op(Op::add, static_cast<uint64_t>(nb));
    }
  }
}

Eigen::VectorXd flatten_alpha(const MlpParameters& p) {
  Eigen::VectorXd out(p.alpha_count());
  std::ptrdiff_t at = 0;
  for (const auto& l : p.alpha) {
    for (Eigen::Index i = 0; i < l.w.rows(); ++i)
      for (Eigen::Index j = 0; j < l.w.cols(); ++j) out(at++) = l.w(i, j);
    for (Eigen::Index i = 0; i < l.b.size(); ++i) out(at++) = l.b(i);
  }
  return out;
}

void unflatten_alpha(const Eigen::VectorXd& v, MlpParameters& p) {
  std::ptrdiff_t at = 0;
  for (auto& l : p.alpha) {
    for (Eigen::Index i = 0; i < l.w.rows(); ++i)
      for (Eigen::Index j = 0; j < l.w.cols(); ++j) l.w(i, j) = v(at++);
    for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b(i) = v(at++);
  }
}

}  // namespace vpinn
