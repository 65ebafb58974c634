#pragma once

// Functional identities satisfied by the domain-wall partition function:
// the theta-shift functional equation and its coefficients, the
// factorisation-based recursion in L, exchange symmetry, and the leading
// large-argument asymptotic multi-sum (whose combinatorics are driven by the
// inversion set of a permutation).

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "ellsos/partition.hpp"

namespace ellsos {

// Coefficients of
//   M0 Z_{theta-gamma}(l1..lL) + sum_{i=0..L} N_i Z_theta(all of l0..lL but l_i) = 0:
//
//   M0  = f(theta)/f(theta + L g) prod_j f(l0 - mu_j)
//   N0  = -f(theta+g)/f(theta+(L+1)g) prod_j f(l0 - mu_j + g)
//         * prod_j f(l_j - l0 + g)/f(l_j - l0)
//   N_i = f(theta+g+l0-l_i)/f(theta+(L+1)g) * f(g)/f(l_i - l0)
//         * prod_j f(l_i - mu_j + g) * prod_{j != i} f(l_j - l_i + g)/f(l_j - l_i).
struct FunctionalCoefficients {
  cx m0{};
  std::vector<cx> n;  // n[0] = N_0, n[i] = N_i for i = 1..L
};

inline FunctionalCoefficients functional_coefficients(const ModelParams& params, cx lam0,
                                                      const ThetaEvaluator& ev) {
  params.validate();
  const int L = params.L;
  const cx g = params.gamma, th = params.theta;
  const cx denL =
      detail::f_checked(th + double(L) * g, ev, "functional_coefficients",
                        "f(theta + L gamma)", true);
  const cx denL1 =
      detail::f_checked(th + double(L + 1) * g, ev, "functional_coefficients",
                        "f(theta + (L+1) gamma)", true);

  FunctionalCoefficients co;
  co.n.resize(L + 1);

  cx m0 = eval_f(th, ev) / denL;
  for (int j = 0; j < L; ++j) m0 *= eval_f(lam0 - params.mu[j], ev);
  co.m0 = m0;

  cx n0 = -eval_f(th + g, ev) / denL1;
  for (int j = 0; j < L; ++j) n0 *= eval_f(lam0 - params.mu[j] + g, ev);
  for (int j = 0; j < L; ++j) {
    const cx d = detail::f_checked(params.lambda[j] - lam0, ev, "functional_coefficients",
                                   "f(lambda_j - lambda_0)", false);
    n0 *= eval_f(params.lambda[j] - lam0 + g, ev) / d;
  }
  co.n[0] = n0;

  for (int i = 1; i <= L; ++i) {
    const cx li = params.lambda[i - 1];
    const cx d0 = detail::f_checked(li - lam0, ev, "functional_coefficients",
                                    "f(lambda_i - lambda_0)", false);
    cx ni = eval_f(th + g + lam0 - li, ev) / denL1 * eval_f(g, ev) / d0;
    for (int j = 0; j < L; ++j) ni *= eval_f(li - params.mu[j] + g, ev);
    for (int j = 1; j <= L; ++j) {
      if (j == i) continue;
      const cx lj = params.lambda[j - 1];
      const cx d = detail::f_checked(lj - li, ev, "functional_coefficients",
                                     "f(lambda_j - lambda_i)", false);
      ni *= eval_f(lj - li + g, ev) / d;
    }
    co.n[i] = ni;
  }
  return co;
}

// Left-hand side of the functional equation divided by its largest summand;
// numerically zero for a correct Z.
inline cx functional_residual(const ModelParams& params, cx lam0, Method method,
                              const ThetaEvaluator& ev) {
  const int L = params.L;
  const FunctionalCoefficients co = functional_coefficients(params, lam0, ev);

  std::vector<cx> terms;
  terms.reserve(L + 2);
  terms.push_back(co.m0 * evaluate_z(params.with_theta(params.theta - params.gamma), method, ev));

  std::vector<cx> all(L + 1);
  all[0] = lam0;
  for (int j = 0; j < L; ++j) all[j + 1] = params.lambda[j];
  for (int i = 0; i <= L; ++i) {
    std::vector<cx> rest;
    rest.reserve(L);
    for (int j = 0; j <= L; ++j)
      if (j != i) rest.push_back(all[j]);
    terms.push_back(co.n[i] * evaluate_z(params.with_lambda(std::move(rest)), method, ev));
  }

  cx sum{};
  double scale = 0.0;
  for (const cx& t : terms) {
    sum += t;
    scale = std::max(scale, std::abs(t));
  }
  return scale > 0.0 ? sum / scale : sum;
}

// Recursion in the chain length via factorisation at lambda = mu_1:
//   V(omit i) = Z_theta(mu_1, lambda \ lambda_i) / prod_{j != i} f(lambda_j - mu_1 + g),
//   Z = sum_i m_i V(omit i),
//   m_i = f(theta+g+mu_1-lambda_i)/f(theta+g)
//         * prod_{j>=2} f(lambda_i - mu_j + g)/f(mu_1 - mu_j + g)
//         * prod_{j != i} f(lambda_j - mu_1) f(lambda_j - lambda_i + g)/f(lambda_j - lambda_i).
// Returns (Z - sum_i m_i V_i) / max(|Z|, max_i |m_i V_i|).
inline cx recursion_residual(const ModelParams& params, const ThetaEvaluator& ev,
                             Method method = Method::permsum) {
  params.validate();
  const int L = params.L;
  if (L < 2) throw DimensionMismatch("recursion_residual: needs L >= 2");
  const cx g = params.gamma, th = params.theta, mu1 = params.mu[0];
  const cx dent =
      detail::f_checked(th + g, ev, "recursion_residual", "f(theta + gamma)", true);

  const cx z = evaluate_z(params, method, ev);
  std::vector<cx> terms(L);
  for (int i = 1; i <= L; ++i) {
    const cx li = params.lambda[i - 1];

    cx mi = eval_f(th + g + mu1 - li, ev) / dent;
    for (int j = 2; j <= L; ++j) {
      const cx d = detail::f_checked(mu1 - params.mu[j - 1] + g, ev, "recursion_residual",
                                     "f(mu_1 - mu_j + gamma)", false);
      mi *= eval_f(li - params.mu[j - 1] + g, ev) / d;
    }
    cx vden{1.0, 0.0};
    std::vector<cx> sub;
    sub.reserve(L);
    sub.push_back(mu1);
    for (int j = 1; j <= L; ++j) {
      if (j == i) continue;
      const cx lj = params.lambda[j - 1];
      const cx d = detail::f_checked(lj - li, ev, "recursion_residual",
                                     "f(lambda_j - lambda_i)", false);
      mi *= eval_f(lj - mu1, ev) * eval_f(lj - li + g, ev) / d;
      vden *= detail::f_checked(lj - mu1 + g, ev, "recursion_residual",
                                "f(lambda_j - mu_1 + gamma)", false);
      sub.push_back(lj);
    }
    const cx v = evaluate_z(params.with_lambda(std::move(sub)), method, ev) / vden;
    terms[i - 1] = mi * v;
  }

  cx sum = z;
  double scale = std::abs(z);
  for (const cx& t : terms) {
    sum -= t;
    scale = std::max(scale, std::abs(t));
  }
  return scale > 0.0 ? sum / scale : sum;
}

// (Z - Z with lambda_i and lambda_j swapped) / max magnitude; Z is a
// symmetric function of the spectral parameters, so this is numerically zero
// (and exactly zero when lambda_i = lambda_j).
inline cx symmetry_residual(const ModelParams& params, int i, int j, const ThetaEvaluator& ev,
                            Method method = Method::permsum) {
  params.validate();
  if (i < 1 || j < 1 || i > params.L || j > params.L || i == j)
    throw InvalidParameter("symmetry_residual: need distinct 1-based indices in [1, L]");
  const cx z1 = evaluate_z(params, method, ev);
  std::vector<cx> swapped = params.lambda;
  std::swap(swapped[i - 1], swapped[j - 1]);
  const cx z2 = evaluate_z(params.with_lambda(std::move(swapped)), method, ev);
  const double scale = std::max(std::abs(z1), std::abs(z2));
  return scale > 0.0 ? (z1 - z2) / scale : (z1 - z2);
}

// Inversions of a permutation: pairs (a, b), a < b, with sigma(a) > sigma(b).
struct InversionSet {
  std::set<std::pair<int, int>> pairs;
};

inline InversionSet inversion_vertices(const Permutation& perm) {
  InversionSet inv;
  const int L = perm.size();
  for (int a = 1; a <= L; ++a)
    for (int b = a + 1; b <= L; ++b)
      if (perm(a) > perm(b)) inv.pairs.emplace(a, b);
  return inv;
}

// Truncation of the leading large-Re(lambda) asymptotic multi-sum.
struct AsymptoticSpec {
  int n_cut = 2;
  // bound on (2 n_cut + 1)^{L(L-1)} * L!
  long long term_ceiling = 20'000'000;
};

// Leading asymptotic coefficient
//
//   [f(g)^L / 2^{L(L-1)}] sum over n_i^{(a)} in [-n_cut, n_cut]
//     (-1)^{sum n - L(L-1)/2} prod_{a,i} p_n q_n e_n^{lambda_a - mu_i^{(a)}}
//     * sum_sigma prod_{(a,b) in inversions(sigma)} (q_{n_{b-1}^{(a)}} q_{n_a^{(b)}})^{-1}
//
// with e_n = e^{-(2n+1)}, p_n = p^{(n+1/2)^2}, q_n = e_n^gamma, and
// mu^{(a)} the mu-list with mu_a omitted.  For L = 1 the sum is empty and the
// value is exactly f(gamma).
inline cx asy_eval(const ModelParams& params, const AsymptoticSpec& spec,
                   const ThetaEvaluator& ev) {
  params.validate();
  if (spec.n_cut < 0) throw InvalidParameter("asy_eval: n_cut must be >= 0");
  const int L = params.L;
  const int idx = L * (L - 1);
  const long long K = 2LL * spec.n_cut + 1;

  long long total = 1;
  for (int d = 0; d < idx; ++d) {
    if (total > spec.term_ceiling / K + 1)
      throw TermBudgetExceeded("asy_eval: assignment count exceeds the term ceiling");
    total *= K;
  }
  for (int a = 2; a <= L; ++a) {
    if (total > spec.term_ceiling / a + 1)
      throw TermBudgetExceeded("asy_eval: assignment count exceeds the term ceiling");
    total *= a;
  }
  if (total > spec.term_ceiling)
    throw TermBudgetExceeded("asy_eval: assignment count exceeds the term ceiling");

  const cx fg = eval_f(params.gamma, ev);
  if (L == 1) return fg;

  // mu^{(a)}: component i (1-based, i <= L-1) is mu_i for i < a, else mu_{i+1}
  const auto mu_omit = [&](int a, int i) {
    return params.mu[(i < a ? i : i + 1) - 1];
  };
  // factor tables over (a, i, n): p_n q_n e_n^{lambda_a - mu_i^{(a)}}
  const int nk = (int)K;
  std::vector<std::vector<std::vector<cx>>> fac(
      L, std::vector<std::vector<cx>>(L - 1, std::vector<cx>(nk)));
  std::vector<cx> qinv(nk);
  for (int t = 0; t < nk; ++t) {
    const int n = t - spec.n_cut;
    const double e2n1 = double(2 * n + 1);
    qinv[t] = std::exp(e2n1 * params.gamma);
    for (int a = 1; a <= L; ++a)
      for (int i = 1; i <= L - 1; ++i)
        fac[a - 1][i - 1][t] =
            std::exp(i_pi * params.nome.tau * ((double(n) + 0.5) * (double(n) + 0.5)) -
                     e2n1 * (params.gamma + params.lambda[a - 1] - mu_omit(a, i)));
  }

  // inversion pair lists for every permutation, in lexicographic order
  std::vector<std::vector<std::pair<int, int>>> inv_lists;
  {
    std::vector<int> sigma(L);
    for (int i = 0; i < L; ++i) sigma[i] = i + 1;
    do {
      std::vector<std::pair<int, int>> inv;
      for (int a = 1; a <= L; ++a)
        for (int b = a + 1; b <= L; ++b)
          if (sigma[a - 1] > sigma[b - 1]) inv.emplace_back(a, b);
      inv_lists.push_back(std::move(inv));
    } while (std::next_permutation(sigma.begin(), sigma.end()));
  }

  // odometer over the L(L-1) truncation indices; digit d = (a-1)(L-1) + (i-1)
  std::vector<int> digit(idx, 0);
  const auto n_of = [&](int a, int i) { return digit[(a - 1) * (L - 1) + (i - 1)]; };
  const int base_parity = (idx / 2) % 2;  // parity of L(L-1)/2
  detail::KahanSum<cx> acc;
  for (;;) {
    int nsum = 0;
    cx base{1.0, 0.0};
    for (int a = 1; a <= L; ++a)
      for (int i = 1; i <= L - 1; ++i) {
        const int t = n_of(a, i);
        nsum += t - spec.n_cut;
        base *= fac[a - 1][i - 1][t];
      }
    cx perm_part{};
    for (const auto& inv : inv_lists) {
      cx w{1.0, 0.0};
      for (const auto& [a, b] : inv) w *= qinv[n_of(a, b - 1)] * qinv[n_of(b, a)];
      perm_part += w;
    }
    const bool negative = ((nsum % 2 + 2) % 2) != base_parity;
    acc.add(negative ? -base * perm_part : base * perm_part);

    int pos = idx - 1;
    while (pos >= 0 && ++digit[pos] == nk) digit[pos--] = 0;
    if (pos < 0) break;
  }

  cx pref = detail::pow_n(fg, L);
  for (int k = 0; k < idx; ++k) pref *= 0.5;  // 1 / 2^{L(L-1)}
  return pref * acc.value();
}

}  // namespace ellsos
