#pragma once

// Numerical evaluation of the odd elliptic theta function
//
//   f(lambda) = (1/2) sum_{n in Z} e^{i pi (n - 1/2)} p^{(n + 1/2)^2} e^{-(2n + 1) lambda}
//             = i sum_{m >= 0} (-1)^m p^{(m + 1/2)^2} sinh((2m + 1) lambda)
//
// with nome p = e^{i pi tau}, Im(tau) > 0.  Up to normalisation this is
// Theta_1(i lambda | tau): entire, odd, simple zeroes exactly on the lattice
// { i pi m + i pi tau n }, and quasi double periodicity
//
//   f(lambda - i pi)     = -f(lambda)
//   f(lambda - i pi tau) = -e^{2 lambda - i pi tau} f(lambda).
//
// As p -> 0 the leading pair of terms gives -i p^{-1/4} f(lambda) -> sinh(lambda),
// which is what fixes the phase e^{i pi (n - 1/2)} rather than its conjugate.
//
// Evaluation strategy: pull the argument back into the fundamental cell with
// the two quasi-periodicities (tracking the exponential multiplier), then sum
// the series in symmetric pairs n = m, -(m+1) until two consecutive pairs drop
// below epsilon_target relative to the largest term seen.  Inside the cell the
// pair magnitude decays like |p|^{(m+1/2)^2 - 1/4}, so for |p| <= 0.5 fewer
// than ten pairs are ever needed.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

#include "ellsos/errors.hpp"

namespace ellsos {

using cx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cx i_pi{0.0, pi};

// Modular parameter tau (Im tau > 0) together with the nome p = e^{i pi tau}.
// Construct through exactly one of the factories; the other field is derived.
struct Nome {
  cx tau{0.0, 1.0};
  cx p{0.0432139182637723, 0.0};  // e^{-pi}, matches tau = i

  static Nome from_tau(cx tau) {
    if (!(tau.imag() > 0.0))
      throw InvalidParameter("Nome::from_tau: Im(tau) must be positive");
    return Nome{tau, std::exp(i_pi * tau)};
  }

  static Nome from_p(cx p) {
    if (p == cx{} || !(std::abs(p) < 1.0))
      throw InvalidParameter("Nome::from_p: need 0 < |p| < 1");
    // principal log; tau = log(p) / (i pi)
    return Nome{std::log(p) / i_pi, p};
  }
};

namespace detail {

// One pass of the series at an *unreduced* argument; returns (f, f').
// Terms are grouped in pairs n = m, -(m+1); the pair sums are
//   f : i (-1)^m p^{(m+1/2)^2} sinh((2m+1) z)
//   f': i (-1)^m p^{(m+1/2)^2} (2m+1) cosh((2m+1) z)
// The pairing keeps oddness exact and avoids cancellation bookkeeping.
inline std::pair<cx, cx> theta_series(cx z, const Nome& nome, int n_max, double eps) {
  const cx i_unit{0.0, 1.0};
  const cx p2 = nome.p * nome.p;
  cx pk = std::exp(i_pi * nome.tau * 0.25);  // p^{(m+1/2)^2}, via tau to stay branch-consistent
  cx pstep = p2;                             // p^{2m+2}
  const cx ez = std::exp(z), emz = std::exp(-z);
  const cx ez2 = ez * ez, emz2 = emz * emz;
  cx e_pos = ez, e_neg = emz;  // e^{(2m+1) z}, e^{-(2m+1) z}

  cx f{}, fp{};
  double max_f = 0.0, max_fp = 0.0;
  int quiet = 0;
  for (int m = 0; m <= n_max; ++m) {
    const cx coeff = ((m & 1) ? -i_unit : i_unit) * pk;
    const cx tf = coeff * (e_pos - e_neg) * 0.5;
    const cx tfp = coeff * (e_pos + e_neg) * (0.5 * double(2 * m + 1));
    if (!std::isfinite(tf.real()) || !std::isfinite(tf.imag()) ||
        !std::isfinite(tfp.real()) || !std::isfinite(tfp.imag()))
      throw NonConvergent(
          "theta series overflowed before converging; keep argument reduction "
          "enabled or shrink |Re lambda|");
    f += tf;
    fp += tfp;
    const double af = std::abs(tf), afp = std::abs(tfp);
    max_f = std::max(max_f, af);
    max_fp = std::max(max_fp, afp);
    if (af <= eps * max_f && afp <= eps * max_fp) {
      if (++quiet >= 2) return {f, fp};
    } else {
      quiet = 0;
    }
    pk *= pstep;
    pstep *= p2;
    e_pos *= ez2;
    e_neg *= emz2;
  }
  throw NonConvergent("theta series needs more terms than the configured ceiling");
}

}  // namespace detail

// Result of pulling lambda back into the fundamental cell:
//   lambda = lam_red + shift_pi * (i pi) + shift_pitau * (i pi tau),
//   f(lambda) = multiplier * f(lam_red),
//   multiplier = (-1)^{shift_pi + shift_pitau} e^{-2 shift_pitau lam_red - shift_pitau^2 i pi tau}.
struct Reduction {
  cx lam_red{};
  cx multiplier{1.0, 0.0};
  long shift_pi = 0;
  long shift_pitau = 0;
};

inline Reduction reduce_argument(cx lam, const Nome& nome) {
  // Solve lam = alpha (i pi) + beta (i pi tau) over the reals.
  const double tr = nome.tau.real(), ti = nome.tau.imag();
  const double beta = -lam.real() / (pi * ti);
  const double alpha = lam.imag() / pi - tr * beta;
  const auto nearest = [](double x) { return static_cast<long>(std::floor(x + 0.5)); };
  const long b = nearest(beta);
  const long a = nearest(alpha);
  if (a == 0 && b == 0) return {lam, cx{1.0, 0.0}, 0, 0};
  const cx lam_red = lam - double(a) * i_pi - double(b) * (i_pi * nome.tau);
  const double sign = ((a + b) % 2 == 0) ? 1.0 : -1.0;
  const cx mult =
      sign * std::exp(-2.0 * double(b) * lam_red - double(b) * double(b) * (i_pi * nome.tau));
  return {lam_red, mult, a, b};
}

// Series truncation policy plus cached f'(0).  Immutable after construction;
// every free function taking a ThetaEvaluator is pure and thread-safe.
class ThetaEvaluator {
 public:
  explicit ThetaEvaluator(Nome nome, int n_max = 64, double epsilon_target = 1e-16,
                          bool reduce_arguments = true)
      : nome_(nome),
        n_max_(n_max),
        epsilon_target_(epsilon_target),
        reduce_arguments_(reduce_arguments) {
    if (n_max_ < 1) throw InvalidParameter("ThetaEvaluator: n_max must be >= 1");
    if (!(epsilon_target_ > 0.0))
      throw InvalidParameter("ThetaEvaluator: epsilon_target must be positive");
    if (nome_.p == cx{} || !(std::abs(nome_.p) < 1.0))
      throw InvalidParameter("ThetaEvaluator: nome must satisfy 0 < |p| < 1");
    f_prime0_ = detail::theta_series(cx{}, nome_, n_max_, epsilon_target_).second;
    scale_ = std::abs(f_prime0_);
  }

  const Nome& nome() const noexcept { return nome_; }
  int n_max() const noexcept { return n_max_; }
  double epsilon_target() const noexcept { return epsilon_target_; }
  bool reduce_arguments() const noexcept { return reduce_arguments_; }

  // f'(0); |f'(0)| serves as the magnitude against which "numerically on the
  // zero lattice" is judged throughout the library.
  cx f_prime0() const noexcept { return f_prime0_; }
  double scale() const noexcept { return scale_; }

 private:
  Nome nome_;
  int n_max_;
  double epsilon_target_;
  bool reduce_arguments_;
  cx f_prime0_{};
  double scale_ = 0.0;
};

inline cx eval_f(cx lam, const ThetaEvaluator& ev) {
  if (!ev.reduce_arguments())
    return detail::theta_series(lam, ev.nome(), ev.n_max(), ev.epsilon_target()).first;
  const Reduction red = reduce_argument(lam, ev.nome());
  return red.multiplier *
         detail::theta_series(red.lam_red, ev.nome(), ev.n_max(), ev.epsilon_target()).first;
}

// d/dlambda through the reduction: with f(lam) = M f(lam_red) and
// dM/dlam = -2 b M (b = shift_pitau), f'(lam) = M (f'(lam_red) - 2 b f(lam_red)).
inline cx eval_f_prime(cx lam, const ThetaEvaluator& ev) {
  if (!ev.reduce_arguments())
    return detail::theta_series(lam, ev.nome(), ev.n_max(), ev.epsilon_target()).second;
  const Reduction red = reduce_argument(lam, ev.nome());
  const auto [f0, fp0] =
      detail::theta_series(red.lam_red, ev.nome(), ev.n_max(), ev.epsilon_target());
  return red.multiplier * (fp0 - 2.0 * double(red.shift_pitau) * f0);
}

// The three products of the four-argument addition rule
//   f(l1+l2) f(l1-l2) f(l3+l4) f(l3-l4)
//     = f(l1+l4) f(l1-l4) f(l3+l2) f(l3-l2) + f(l1+l3) f(l1-l3) f(l2+l4) f(l2-l4).
inline std::array<cx, 3> addition_terms(cx l1, cx l2, cx l3, cx l4, const ThetaEvaluator& ev) {
  const auto F = [&](cx x) { return eval_f(x, ev); };
  return {F(l1 + l2) * F(l1 - l2) * F(l3 + l4) * F(l3 - l4),
          F(l1 + l4) * F(l1 - l4) * F(l3 + l2) * F(l3 - l2),
          F(l1 + l3) * F(l1 - l3) * F(l2 + l4) * F(l2 - l4)};
}

// LHS - RHS of the addition rule; 0 for the exact function.
inline cx addition_residual(cx l1, cx l2, cx l3, cx l4, const ThetaEvaluator& ev) {
  const auto t = addition_terms(l1, l2, l3, l4, ev);
  return t[0] - t[1] - t[2];
}

// | -i p^{-1/4} f(lambda) - sinh(lambda) | for small real nome p.
// The deviation is p^2 sinh(3 lambda) + O(p^6), so it vanishes (quadratically)
// in the trigonometric limit.
inline double trig_limit_deviation(cx lam, double p) {
  if (!(p > 0.0 && p < 0.1))
    throw InvalidParameter("trig_limit_deviation: p must lie in (0, 0.1)");
  const ThetaEvaluator ev(Nome::from_p(cx{p, 0.0}));
  const cx v = cx{0.0, -1.0} * std::pow(p, -0.25) * eval_f(lam, ev);
  return std::abs(v - std::sinh(lam));
}

}  // namespace ellsos
