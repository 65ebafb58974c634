#pragma once

// Boltzmann weights of the elliptic SOS model and the associated 4x4
// dynamical R-matrix, plus residuals for the two structural identities it
// satisfies (ice rule / weight conservation, dynamical Yang-Baxter).

#include <array>
#include <cmath>
#include <string>

#include "ellsos/theta.hpp"

namespace ellsos {

// Height-dependent vertex weights:
//   a_pm = f(lambda + gamma)
//   b_pm = f(lambda) f(theta -+ gamma) / f(theta)
//   c_pm = f(gamma)  f(theta -+ lambda) / f(theta)
struct WeightSet {
  cx a_plus, a_minus, b_plus, b_minus, c_plus, c_minus;
};

// R-matrix on C^2 x C^2 in the product basis (++, +-, -+, --).  Ten of the
// sixteen entries vanish identically (weight conservation).
struct RMatrix {
  std::array<std::array<cx, 4>, 4> entries{};
};

namespace detail {

inline cx f_checked(cx arg, const ThetaEvaluator& ev, const char* who, const char* what,
                    bool dynamical) {
  const cx v = eval_f(arg, ev);
  if (std::abs(v) < 1e-12 * ev.scale()) {
    const std::string msg = std::string(who) + ": " + what + " is numerically zero";
    if (dynamical) throw SingularDynamicalParameter(msg);
    throw SingularCoefficient(msg);
  }
  return v;
}

}  // namespace detail

inline WeightSet boltzmann(cx lam, cx th, cx gamma, const ThetaEvaluator& ev) {
  const cx ft = detail::f_checked(th, ev, "boltzmann", "f(theta)", true);
  const cx fa = eval_f(lam + gamma, ev);
  const cx fl = eval_f(lam, ev);
  const cx fg = eval_f(gamma, ev);
  return {fa,
          fa,
          fl * eval_f(th - gamma, ev) / ft,
          fl * eval_f(th + gamma, ev) / ft,
          fg * eval_f(th - lam, ev) / ft,
          fg * eval_f(th + lam, ev) / ft};
}

inline RMatrix r_matrix(cx lam, cx th, cx gamma, const ThetaEvaluator& ev) {
  const WeightSet w = boltzmann(lam, th, gamma, ev);
  RMatrix r{};
  r.entries[0][0] = w.a_plus;
  r.entries[1][1] = w.b_plus;
  r.entries[1][2] = w.c_plus;
  r.entries[2][1] = w.c_minus;
  r.entries[2][2] = w.b_minus;
  r.entries[3][3] = w.a_minus;
  return r;
}

// Frobenius-relative size of [R, h x 1 + 1 x h] with h = diag(1, -1).
// Zero for any weights with the block-diagonal sparsity pattern above.
inline double weight_zero_residual(cx lam, cx th, cx gamma, const ThetaEvaluator& ev) {
  const RMatrix r = r_matrix(lam, th, gamma, ev);
  static constexpr double spin_sum[4] = {2.0, 0.0, 0.0, -2.0};
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double c = std::abs(r.entries[i][j] * (spin_sum[j] - spin_sum[i]));
      num += c * c;
      den += std::norm(r.entries[i][j]);
    }
  return std::sqrt(num) / std::sqrt(den);
}

namespace detail {

using Mat8 = std::array<std::array<cx, 8>, 8>;

// Spin of site k (1..3) in an 8-dim basis index: bit (3-k), 0 = up.
inline int site_bit(int idx, int k) { return (idx >> (3 - k)) & 1; }
inline int with_bit(int idx, int k, int bit) { return idx | (bit << (3 - k)); }

// R acting on spaces (x, y) of C^2 x C^2 x C^2, dynamical parameter optionally
// shifted by -gamma * h(spectator).  The spectator spin is untouched, so the
// shift is read off the basis label directly.
inline Mat8 embed_r(int x, int y, int spect, bool shifted, cx lam, cx th, cx gamma,
                    const ThetaEvaluator& ev) {
  Mat8 m{};
  for (int sp = 0; sp <= 1; ++sp) {
    const double h = sp ? -1.0 : 1.0;
    const RMatrix r = r_matrix(lam, shifted ? th - gamma * h : th, gamma, ev);
    for (int bx = 0; bx <= 1; ++bx)
      for (int by = 0; by <= 1; ++by)
        for (int cxb = 0; cxb <= 1; ++cxb)
          for (int cyb = 0; cyb <= 1; ++cyb) {
            const int row = with_bit(with_bit(with_bit(0, x, bx), y, by), spect, sp);
            const int col = with_bit(with_bit(with_bit(0, x, cxb), y, cyb), spect, sp);
            m[row][col] += r.entries[bx * 2 + by][cxb * 2 + cyb];
          }
  }
  return m;
}

inline Mat8 mul8(const Mat8& a, const Mat8& b) {
  Mat8 c{};
  for (int i = 0; i < 8; ++i)
    for (int k = 0; k < 8; ++k) {
      const cx aik = a[i][k];
      if (aik == cx{}) continue;
      for (int j = 0; j < 8; ++j) c[i][j] += aik * b[k][j];
    }
  return c;
}

inline double max_abs(const Mat8& m) {
  double r = 0.0;
  for (const auto& row : m)
    for (const cx& v : row) r = std::max(r, std::abs(v));
  return r;
}

}  // namespace detail

// Max-entry relative residual of the dynamical Yang-Baxter equation
//   R12(l1-l2, th - g h3) R13(l1-l3, th) R23(l2-l3, th - g h1)
//     = R23(l2-l3, th) R13(l1-l3, th - g h2) R12(l1-l2, th).
inline double dybe_residual(cx l1, cx l2, cx l3, cx th, cx gamma, const ThetaEvaluator& ev) {
  using detail::embed_r;
  using detail::mul8;
  const detail::Mat8 lhs =
      mul8(embed_r(1, 2, 3, true, l1 - l2, th, gamma, ev),
           mul8(embed_r(1, 3, 2, false, l1 - l3, th, gamma, ev),
                embed_r(2, 3, 1, true, l2 - l3, th, gamma, ev)));
  const detail::Mat8 rhs =
      mul8(embed_r(2, 3, 1, false, l2 - l3, th, gamma, ev),
           mul8(embed_r(1, 3, 2, true, l1 - l3, th, gamma, ev),
                embed_r(1, 2, 3, false, l1 - l2, th, gamma, ev)));
  double diff = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) diff = std::max(diff, std::abs(lhs[i][j] - rhs[i][j]));
  return diff / std::max(detail::max_abs(lhs), detail::max_abs(rhs));
}

}  // namespace ellsos
