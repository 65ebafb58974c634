#pragma once

// Domain-wall partition function Z of the elliptic SOS model, by four
// independent routes:
//
//   z_bruteforce  - apply the L creation blocks B(lambda_j, theta + j gamma)
//                   to |all up> and read the all-down amplitude,
//   z_perm_sum    - closed permutation sum over S_L,
//   z_quadrature  - L-fold contour integral of H(w) / prod f(w_i - lambda_j)
//                   via trapezoid quadrature on circles,
//   z_residues    - the same integral closed by iterated residues at the
//                   simple poles w_i = lambda_{sigma(i)}.
//
// All four agree at machine precision for generic parameters; this is the
// backbone consistency check of the library.

#include <algorithm>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ellsos/detail/kahan.hpp"
#include "ellsos/monodromy.hpp"

namespace ellsos {

// Permutation of {1, ..., L}, stored 1-based.
struct Permutation {
  std::vector<int> sigma;

  explicit Permutation(std::vector<int> s) : sigma(std::move(s)) { validate(); }
  static Permutation identity(int L) {
    std::vector<int> s(L);
    for (int i = 0; i < L; ++i) s[i] = i + 1;
    return Permutation(std::move(s));
  }

  int size() const noexcept { return (int)sigma.size(); }
  int operator()(int n) const { return sigma[n - 1]; }  // 1-based application

  void validate() const {
    if (sigma.empty()) throw InvalidParameter("Permutation: cannot be empty");
    std::vector<char> seen(sigma.size() + 1, 0);
    for (int v : sigma) {
      if (v < 1 || v > (int)sigma.size() || seen[v])
        throw InvalidParameter("Permutation: entries must be a rearrangement of 1..L");
      seen[v] = 1;
    }
  }
};

namespace detail {

inline cx pow_n(cx base, int n) {
  cx r{1.0, 0.0};
  for (int k = 0; k < n; ++k) r *= base;
  return r;
}

// f(theta + n gamma) for n = 1..L, checked against the zero lattice.
inline std::vector<cx> dynamical_denominators(const ModelParams& p, const ThetaEvaluator& ev,
                                              const char* who) {
  std::vector<cx> d(p.L);
  for (int n = 1; n <= p.L; ++n)
    d[n - 1] = f_checked(p.theta + double(n) * p.gamma, ev, who,
                         "f(theta + n gamma)", true);
  return d;
}

}  // namespace detail

// Z via the algebraic construction: Z = <all down| B(lambda_1, theta + gamma)
// ... B(lambda_L, theta + L gamma) |all up>, rightmost factor first.
inline cx z_bruteforce(const ModelParams& params, const ThetaEvaluator& ev) {
  params.validate();
  StateVector v = StateVector::basis(params.L, 0);
  for (int j = params.L; j >= 1; --j)
    v = apply_block(BlockTag::B, v, params.lambda[j - 1], params.theta + double(j) * params.gamma,
                    params, ev);
  return v[v.dim() - 1];
}

// Z as a sum over S_L.  Each term is
//
//   f(gamma)^L prod_n  f(theta + n g - lambda_{s(n)} + mu_n) / f(theta + n g)
//            * prod_{j > n} f(lambda_{s(n)} - mu_j + g)
//            * prod_{j < n} f(lambda_{s(n)} - mu_j)
//            * prod_{m > n} f(lambda_{s(m)} - lambda_{s(n)} + g) / f(lambda_{s(m)} - lambda_{s(n)})
//
// summed in lexicographic order with compensated summation.  The overall
// prefactor simplifies to f(gamma)^L; passing simplified_prefactor = false
// keeps the unsimplified ratio (product of f(mu_1 - mu_k + gamma) over itself)
// as a numerical cross-check of that simplification.
inline cx z_perm_sum(const ModelParams& params, const ThetaEvaluator& ev,
                     bool simplified_prefactor = true) {
  params.validate();
  const int L = params.L;
  const double thr = 1e-12 * ev.scale();

  const std::vector<cx> den = detail::dynamical_denominators(params, ev, "z_perm_sum");
  std::vector<std::vector<cx>> t1(L, std::vector<cx>(L));   // [n-1][a]
  std::vector<std::vector<cx>> mhi(L, std::vector<cx>(L));  // [a][j-1]
  std::vector<std::vector<cx>> mlo(L, std::vector<cx>(L));
  std::vector<std::vector<cx>> lr(L, std::vector<cx>(L));  // [a][b]: f(la-lb+g)/f(la-lb)
  for (int n = 1; n <= L; ++n)
    for (int a = 0; a < L; ++a)
      t1[n - 1][a] =
          eval_f(params.theta + double(n) * params.gamma - params.lambda[a] + params.mu[n - 1],
                 ev) /
          den[n - 1];
  for (int a = 0; a < L; ++a)
    for (int j = 0; j < L; ++j) {
      mhi[a][j] = eval_f(params.lambda[a] - params.mu[j] + params.gamma, ev);
      mlo[a][j] = eval_f(params.lambda[a] - params.mu[j], ev);
    }
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) {
      if (a == b) continue;
      const cx d = eval_f(params.lambda[a] - params.lambda[b], ev);
      if (std::abs(d) < thr)
        throw SingularCoefficient("z_perm_sum: coincident spectral parameters (f(lambda_a - "
                                  "lambda_b) numerically zero)");
      lr[a][b] = eval_f(params.lambda[a] - params.lambda[b] + params.gamma, ev) / d;
    }

  cx pref = detail::pow_n(eval_f(params.gamma, ev), L);
  if (!simplified_prefactor) {
    // literal prefactor: f(g)^L prod_{k>=2} f(mu_1 - mu_k + g) over the same product
    cx num = pref, denom{1.0, 0.0};
    for (int k = 2; k <= L; ++k) {
      const cx fk = detail::f_checked(params.mu[0] - params.mu[k - 1] + params.gamma, ev,
                                      "z_perm_sum", "f(mu_1 - mu_k + gamma)", false);
      num *= fk;
      denom *= fk;
    }
    pref = num / denom;
  }

  std::vector<int> sigma(L);
  for (int i = 0; i < L; ++i) sigma[i] = i + 1;
  detail::KahanSum<cx> acc;
  do {
    cx term = pref;
    for (int n = 1; n <= L; ++n) {
      const int a = sigma[n - 1] - 1;
      term *= t1[n - 1][a];
      for (int j = n + 1; j <= L; ++j) term *= mhi[a][j - 1];
      for (int j = 1; j < n; ++j) term *= mlo[a][j - 1];
    }
    for (int n = 1; n <= L; ++n)
      for (int m = n + 1; m <= L; ++m) term *= lr[sigma[m - 1] - 1][sigma[n - 1] - 1];
    acc.add(term);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return acc.value();
}

// Numerator of the integrand of the multiple-contour representation:
//
//   H(w) = [f'(0) f(gamma)]^L prod_{i<j} f(w_j - w_i + g) f(w_j - w_i)
//        * prod_j f(theta + j g - w_j + mu_j) / f(theta + j g)
//        * prod_{j<i} f(mu_j - w_i) * prod_{i<j} f(w_i - mu_j + g).
inline cx h_integrand(std::span<const cx> w, const ModelParams& params,
                      const ThetaEvaluator& ev) {
  params.validate();
  const int L = params.L;
  if ((int)w.size() != L)
    throw DimensionMismatch("h_integrand: w must have exactly L entries");
  const std::vector<cx> den = detail::dynamical_denominators(params, ev, "h_integrand");
  cx r = detail::pow_n(ev.f_prime0() * eval_f(params.gamma, ev), L);
  for (int i = 1; i <= L; ++i)
    for (int j = i + 1; j <= L; ++j)
      r *= eval_f(w[j - 1] - w[i - 1] + params.gamma, ev) * eval_f(w[j - 1] - w[i - 1], ev);
  for (int j = 1; j <= L; ++j)
    r *= eval_f(params.theta + double(j) * params.gamma - w[j - 1] + params.mu[j - 1], ev) /
         den[j - 1];
  for (int i = 1; i <= L; ++i) {
    for (int j = 1; j < i; ++j) r *= eval_f(params.mu[j - 1] - w[i - 1], ev);
    for (int j = i + 1; j <= L; ++j) r *= eval_f(w[i - 1] - params.mu[j - 1] + params.gamma, ev);
  }
  return r;
}

// Circle used for every integration variable: must enclose all lambda_j and
// exclude every quasi-period translate of them.
struct ContourSpec {
  cx center{};
  double radius = 0.0;
  int nodes = 64;
};

namespace detail {

// Gauss-reduce the period basis so lattice distances can be bounded reliably.
inline std::pair<cx, cx> gauss_reduce(cx u, cx v) {
  if (std::abs(u) > std::abs(v)) std::swap(u, v);
  for (int it = 0; it < 64; ++it) {
    const double mu =
        std::floor((v.real() * u.real() + v.imag() * u.imag()) / std::norm(u) + 0.5);
    v -= mu * u;
    if (std::abs(v) < std::abs(u))
      std::swap(u, v);
    else
      break;
  }
  return {u, v};
}

}  // namespace detail

inline cx contour_center(const ModelParams& params) {
  cx c{};
  for (const cx& l : params.lambda) c += l;
  return c / double(params.L);
}

// Largest distance from the center to a spectral parameter.
inline double contour_spread(const ModelParams& params, cx center) {
  double r = 0.0;
  for (const cx& l : params.lambda) r = std::max(r, std::abs(l - center));
  return r;
}

// Smallest distance from the center to any nonzero-lattice translate
// lambda_j + m (i pi) + n (i pi tau).
inline double contour_clearance(const ModelParams& params, cx center) {
  const auto [u1, u2] = detail::gauss_reduce(i_pi, i_pi * params.nome.tau);
  // cheap achievable upper bound, then enumerate everything that could beat it
  double best = std::numeric_limits<double>::infinity();
  for (const cx& l : params.lambda)
    for (const cx& w : {u1, -u1, u2, -u2}) best = std::min(best, std::abs(l + w - center));
  const double reach = contour_spread(params, center) + best;
  // Gauss-reduced basis: |a u1 + b u2| >= (sqrt(3)/2) max(|a||u1|, |b||u2|)
  const long amax = (long)std::ceil(reach / (0.866 * std::abs(u1))) + 1;
  const long bmax = (long)std::ceil(reach / (0.866 * std::abs(u2))) + 1;
  if (amax > 64 || bmax > 64)
    throw ContourTooTight("contour_clearance: period lattice too dense to certify a contour");
  for (long a = -amax; a <= amax; ++a)
    for (long b = -bmax; b <= bmax; ++b) {
      if (a == 0 && b == 0) continue;
      const cx w = double(a) * u1 + double(b) * u2;
      for (const cx& l : params.lambda) best = std::min(best, std::abs(l + w - center));
    }
  return best;
}

// Default radius is 1.25x the spread (half the clearance for L = 1, where the
// spread is zero), shrunk to the midpoint if a lattice translate intrudes.
// Fails loudly if no radius separates the poles from their translates.
inline ContourSpec make_contour(const ModelParams& params, int nodes,
                                std::optional<double> radius_override = std::nullopt) {
  params.validate();
  if (nodes < 2) throw InvalidParameter("make_contour: need at least 2 nodes");
  const cx c = contour_center(params);
  const double r = contour_spread(params, c);
  const double d = contour_clearance(params, c);
  double radius;
  if (radius_override) {
    radius = *radius_override;
  } else {
    radius = (r > 0.0) ? 1.25 * r : 0.5 * d;
    if (radius >= d) radius = 0.5 * (r + d);
  }
  if (!(radius > r && radius < d))
    throw ContourTooTight("make_contour: no circle encloses all spectral parameters while "
                          "excluding their quasi-period translates");
  return {c, radius, nodes};
}

// Circle at the midpoint between the outermost pole and the nearest lattice
// translate.  The trapezoid error decays like (spread/R)^nodes + (R/clear)^nodes,
// so with the default rule R = 1.25 * spread the first factor is pinned at
// 0.8^nodes (~6e-7 at 64 nodes) no matter how the parameters are drawn; the
// midpoint radius balances the two factors and reaches ~1e-13 instead.
inline ContourSpec make_contour_balanced(const ModelParams& params, int nodes) {
  const cx c = contour_center(params);
  const double r = contour_spread(params, c);
  const double d = contour_clearance(params, c);
  return make_contour(params, nodes, 0.5 * (r + d));
}

// Z = oint ... oint  H(w) / prod_{i,j} f(w_i - lambda_j)  prod_j dw_j / (2 pi i)
// by the trapezoid rule on contour^L (spectrally accurate for the analytic,
// periodic integrand).  Node factors and pairwise f-tables are precomputed;
// the tuple loop then only multiplies table entries.
inline cx z_quadrature(const ModelParams& params, const ContourSpec& contour,
                       const ThetaEvaluator& ev) {
  params.validate();
  const int L = params.L;
  const int N = contour.nodes;
  const double thr = 1e-12 * ev.scale();

  std::vector<cx> w(N), nodefac(N);
  for (int k = 0; k < N; ++k) {
    const cx e = std::exp(cx{0.0, 2.0 * pi * double(k) / double(N)});
    w[k] = contour.center + contour.radius * e;
    // (dw_k / (2 pi i)) / prod_j f(w_k - lambda_j)
    cx dfac = contour.radius * e / double(N);
    for (int j = 0; j < L; ++j) {
      const cx fd = eval_f(w[k] - params.lambda[j], ev);
      if (std::abs(fd) < thr)
        throw SingularCoefficient("z_quadrature: a node collides with a pole; perturb the "
                                  "contour radius or node count");
      dfac /= fd;
    }
    nodefac[k] = dfac;
  }

  const std::vector<cx> den = detail::dynamical_denominators(params, ev, "z_quadrature");
  // slotfac[j][k]: every single-variable factor of slot j at node k
  std::vector<std::vector<cx>> slotfac(L, std::vector<cx>(N));
  for (int j = 1; j <= L; ++j)
    for (int k = 0; k < N; ++k) {
      cx v = eval_f(params.theta + double(j) * params.gamma - w[k] + params.mu[j - 1], ev) /
             den[j - 1];
      for (int jp = 1; jp < j; ++jp) v *= eval_f(params.mu[jp - 1] - w[k], ev);
      for (int jp = j + 1; jp <= L; ++jp)
        v *= eval_f(w[k] - params.mu[jp - 1] + params.gamma, ev);
      slotfac[j - 1][k] = v * nodefac[k];
    }
  // pair[k1][k2] = f(w_{k2} - w_{k1} + g) f(w_{k2} - w_{k1}) for slot pair i < j
  std::vector<std::vector<cx>> pairfac;
  if (L > 1) {
    pairfac.assign(N, std::vector<cx>(N));
    for (int k1 = 0; k1 < N; ++k1)
      for (int k2 = 0; k2 < N; ++k2)
        pairfac[k1][k2] = eval_f(w[k2] - w[k1] + params.gamma, ev) * eval_f(w[k2] - w[k1], ev);
  }

  const cx hconst = detail::pow_n(ev.f_prime0() * eval_f(params.gamma, ev), L);
  std::vector<int> k(L, 0);
  detail::KahanSum<cx> acc;
  for (;;) {
    cx term = hconst;
    for (int j = 0; j < L; ++j) term *= slotfac[j][k[j]];
    for (int i = 0; i < L; ++i)
      for (int j = i + 1; j < L; ++j) term *= pairfac[k[i]][k[j]];
    acc.add(term);
    int pos = L - 1;
    while (pos >= 0 && ++k[pos] == N) k[pos--] = 0;
    if (pos < 0) break;
  }
  return acc.value();
}

// Z by closing each contour onto the simple poles w_i = lambda_{sigma(i)}.
// Every pole is simple with residue 1/f'(0) (cancelling the f'(0)^L in H),
// non-injective assignments drop out because H vanishes at coincident
// arguments, and the surviving closed form is
//
//   Z = sum_sigma f(g)^L  prod_{i<j} f(lambda_{s(j)} - lambda_{s(i)} + g)
//         * prod_n f(theta + n g - lambda_{s(n)} + mu_n) / f(theta + n g)
//         * prod_{j<i} f(mu_j - lambda_{s(i)}) * prod_{i<j} f(lambda_{s(i)} - mu_j + g)
//         / prod_{k<i} f(lambda_{s(k)} - lambda_{s(i)}).
inline cx z_residues(const ModelParams& params, const ThetaEvaluator& ev) {
  params.validate();
  const int L = params.L;
  const double thr = 1e-12 * ev.scale();

  const std::vector<cx> den = detail::dynamical_denominators(params, ev, "z_residues");
  std::vector<std::vector<cx>> t1(L, std::vector<cx>(L));     // [n-1][a]
  std::vector<std::vector<cx>> pairg(L, std::vector<cx>(L));  // [a][b]: f(lb - la + g)
  std::vector<std::vector<cx>> invd(L, std::vector<cx>(L));   // [a][b]: 1 / f(la - lb)
  std::vector<std::vector<cx>> mulo(L, std::vector<cx>(L));   // [j-1][a]: f(mu_j - la)
  std::vector<std::vector<cx>> muhi(L, std::vector<cx>(L));   // [a][j-1]: f(la - mu_j + g)
  for (int n = 1; n <= L; ++n)
    for (int a = 0; a < L; ++a)
      t1[n - 1][a] =
          eval_f(params.theta + double(n) * params.gamma - params.lambda[a] + params.mu[n - 1],
                 ev) /
          den[n - 1];
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) {
      pairg[a][b] = eval_f(params.lambda[b] - params.lambda[a] + params.gamma, ev);
      if (a != b) {
        const cx d = eval_f(params.lambda[a] - params.lambda[b], ev);
        if (std::abs(d) < thr)
          throw SingularCoefficient("z_residues: coincident spectral parameters");
        invd[a][b] = 1.0 / d;
      }
    }
  for (int a = 0; a < L; ++a)
    for (int j = 1; j <= L; ++j) {
      mulo[j - 1][a] = eval_f(params.mu[j - 1] - params.lambda[a], ev);
      muhi[a][j - 1] = eval_f(params.lambda[a] - params.mu[j - 1] + params.gamma, ev);
    }

  const cx pref = detail::pow_n(eval_f(params.gamma, ev), L);
  std::vector<int> sigma(L);
  for (int i = 0; i < L; ++i) sigma[i] = i + 1;
  detail::KahanSum<cx> acc;
  do {
    cx term = pref;
    for (int n = 1; n <= L; ++n) term *= t1[n - 1][sigma[n - 1] - 1];
    for (int i = 1; i <= L; ++i) {
      const int a = sigma[i - 1] - 1;
      for (int j = i + 1; j <= L; ++j) term *= pairg[a][sigma[j - 1] - 1];
      for (int j = 1; j < i; ++j) term *= mulo[j - 1][a];
      for (int j = i + 1; j <= L; ++j) term *= muhi[a][j - 1];
      for (int kk = 1; kk < i; ++kk) term *= invd[sigma[kk - 1] - 1][a];
    }
    acc.add(term);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return acc.value();
}

// L = 1 closed form: Z = f(gamma) f(theta + gamma - lambda_1 + mu_1) / f(theta + gamma).
inline cx z_closed_l1(const ModelParams& params, const ThetaEvaluator& ev) {
  params.validate();
  if (params.L != 1) throw DimensionMismatch("z_closed_l1: defined for L = 1 only");
  const cx den = detail::f_checked(params.theta + params.gamma, ev, "z_closed_l1",
                                   "f(theta + gamma)", true);
  return eval_f(params.gamma, ev) *
         eval_f(params.theta + params.gamma - params.lambda[0] + params.mu[0], ev) / den;
}

// Evaluator selection.  `automatic` picks the closed form for L = 1 and the
// permutation sum otherwise.
enum class Method { bruteforce, permsum, residues, quadrature, closed_l1, automatic };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::bruteforce: return "bruteforce";
    case Method::permsum: return "permsum";
    case Method::residues: return "residues";
    case Method::quadrature: return "quadrature";
    case Method::closed_l1: return "closed_l1";
    default: return "auto";
  }
}

inline std::optional<Method> method_from_name(const std::string& s) {
  for (Method m : {Method::bruteforce, Method::permsum, Method::residues, Method::quadrature,
                   Method::closed_l1, Method::automatic})
    if (s == method_name(m)) return m;
  return std::nullopt;
}

struct QuadratureOptions {
  int nodes = 64;
  std::optional<double> radius_override{};
};

inline Method resolve_method(Method m, int L) {
  if (m != Method::automatic) return m;
  return L == 1 ? Method::closed_l1 : Method::permsum;
}

inline cx evaluate_z(const ModelParams& params, Method method, const ThetaEvaluator& ev,
                     const QuadratureOptions& quad = {}) {
  switch (resolve_method(method, params.L)) {
    case Method::bruteforce:
      return z_bruteforce(params, ev);
    case Method::permsum:
      return z_perm_sum(params, ev);
    case Method::residues:
      return z_residues(params, ev);
    case Method::quadrature:
      return z_quadrature(params, make_contour(params, quad.nodes, quad.radius_override), ev);
    case Method::closed_l1:
      return z_closed_l1(params, ev);
    default:
      throw InvalidParameter("evaluate_z: unknown method");
  }
}

}  // namespace ellsos
