#pragma once

// Monodromy-matrix blocks of the L-site SOS chain acting on the 2^L-dim
// quantum space, with the dynamical parameter shifted in flight:
//
//   T_a(lambda, theta) = R_{a1}(lambda - mu_1, theta_1) ... R_{aL}(lambda - mu_L, theta_L),
//   theta_i = theta - gamma * sum_{k > i} h_k,
//
// where the rightmost factor acts first and h_k is read off the in-flight
// state.  A = <+|T|+>, B = <+|T|->, C = <-|T|+>, D = <-|T|-> in the auxiliary
// space.  Site k of a basis state is bit (k-1) of its index, 0 = spin up, so
// |0...0> (all up) has index 0 and the all-down state has index 2^L - 1.

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ellsos/weights.hpp"

namespace ellsos {

// Chain data: anisotropy gamma, dynamical parameter theta, inhomogeneities
// mu_1..mu_L, spectral parameters lambda_1..lambda_L, and the nome.
struct ModelParams {
  int L = 1;
  cx gamma{};
  cx theta{};
  std::vector<cx> mu;
  std::vector<cx> lambda;
  Nome nome{};

  ModelParams() = default;
  ModelParams(int L_, cx gamma_, cx theta_, std::vector<cx> mu_, std::vector<cx> lambda_,
              Nome nome_)
      : L(L_),
        gamma(gamma_),
        theta(theta_),
        mu(std::move(mu_)),
        lambda(std::move(lambda_)),
        nome(nome_) {
    validate();
  }

  void validate() const {
    if (L < 1) throw InvalidParameter("ModelParams: L must be >= 1");
    if ((int)mu.size() != L)
      throw DimensionMismatch("ModelParams: mu must have exactly L entries");
    if ((int)lambda.size() != L)
      throw DimensionMismatch("ModelParams: lambda must have exactly L entries");
  }

  ModelParams with_theta(cx th) const {
    ModelParams q = *this;
    q.theta = th;
    return q;
  }
  ModelParams with_lambda(std::vector<cx> lam) const {
    ModelParams q = *this;
    q.lambda = std::move(lam);
    q.validate();
    return q;
  }
};

// Dense state on the 2^L-dim spin chain.
class StateVector {
 public:
  explicit StateVector(int sites) : sites_(sites) {
    if (sites < 1 || sites > 24)
      throw InvalidParameter("StateVector: sites must lie in [1, 24]");
    amp_.assign(std::size_t{1} << sites, cx{});
  }

  static StateVector basis(int sites, std::size_t index) {
    StateVector v(sites);
    if (index >= v.dim()) throw InvalidParameter("StateVector::basis: index out of range");
    v.amp_[index] = cx{1.0, 0.0};
    return v;
  }

  int sites() const noexcept { return sites_; }
  std::size_t dim() const noexcept { return amp_.size(); }
  cx& operator[](std::size_t i) { return amp_[i]; }
  const cx& operator[](std::size_t i) const { return amp_[i]; }
  std::span<const cx> amplitudes() const noexcept { return amp_; }

  double inf_norm() const {
    double r = 0.0;
    for (const cx& a : amp_) r = std::max(r, std::abs(a));
    return r;
  }

 private:
  int sites_;
  std::vector<cx> amp_;
};

// Total spin sum_k h_k of a basis configuration.
inline int spin_weight(std::size_t index, int sites) {
  return sites - 2 * std::popcount(index);
}

enum class BlockTag { A, B, C, D };

// Apply one monodromy block to a state.  Cost O(L 2^L).  Weights are built
// lazily per (site, down-count) so that down-counts never reached by nonzero
// amplitudes cannot trigger spurious singular-parameter errors.
inline StateVector apply_block(BlockTag tag, const StateVector& v, cx lam, cx th,
                               const ModelParams& params, const ThetaEvaluator& ev) {
  params.validate();
  if (v.sites() != params.L)
    throw DimensionMismatch("apply_block: state has " + std::to_string(v.sites()) +
                            " sites, params have " + std::to_string(params.L));
  const int L = params.L;
  const std::size_t dim = v.dim();

  // auxiliary-space components; the block picks start column and end row
  std::vector<cx> up(dim), dn(dim);
  const bool col_plus = (tag == BlockTag::A || tag == BlockTag::C);
  (col_plus ? up : dn).assign(v.amplitudes().begin(), v.amplitudes().end());

  for (int site = L; site >= 1; --site) {
    const cx x = lam - params.mu[site - 1];
    std::vector<std::optional<WeightSet>> wtab(std::size_t(L - site) + 1);
    const auto wts = [&](int downs) -> const WeightSet& {
      auto& slot = wtab[downs];
      if (!slot)
        slot = boltzmann(x, th - params.gamma * double(L - site - 2 * downs), params.gamma, ev);
      return *slot;
    };

    std::vector<cx> nup(dim), ndn(dim);
    const std::size_t bit = std::size_t{1} << (site - 1);
    for (std::size_t s = 0; s < dim; ++s) {
      const cx au = up[s], ad = dn[s];
      if (au == cx{} && ad == cx{}) continue;
      const WeightSet& w = wts(std::popcount(s >> site));
      if ((s & bit) == 0) {  // site spin up
        nup[s] += w.a_plus * au;
        nup[s | bit] += w.c_plus * ad;  // aux - -> +, site up -> down
        ndn[s] += w.b_minus * ad;
      } else {  // site spin down
        nup[s] += w.b_plus * au;
        ndn[s & ~bit] += w.c_minus * au;  // aux + -> -, site down -> up
        ndn[s] += w.a_minus * ad;
      }
    }
    up = std::move(nup);
    dn = std::move(ndn);
  }

  StateVector out(L);
  const bool row_plus = (tag == BlockTag::A || tag == BlockTag::B);
  const std::vector<cx>& res = row_plus ? up : dn;
  for (std::size_t s = 0; s < dim; ++s) out[s] = res[s];
  return out;
}

// Genericity preconditions shared by the partition-function evaluators.
// Throws naming the violated condition; margin is relative to |f'(0)|.
inline void require_generic(const ModelParams& params, const ThetaEvaluator& ev,
                            double margin = 1e-12) {
  params.validate();
  const double thr = margin * ev.scale();
  for (int i = 0; i < params.L; ++i)
    for (int j = i + 1; j < params.L; ++j)
      if (std::abs(eval_f(params.lambda[i] - params.lambda[j], ev)) < thr)
        throw SingularCoefficient("require_generic: f(lambda_" + std::to_string(i + 1) +
                                  " - lambda_" + std::to_string(j + 1) + ") is numerically zero");
  for (int k = -1; k <= params.L + 1; ++k)
    if (std::abs(eval_f(params.theta + double(k) * params.gamma, ev)) < thr)
      throw SingularDynamicalParameter("require_generic: f(theta + " + std::to_string(k) +
                                       " gamma) is numerically zero");
  for (int k = 2; k <= params.L; ++k)
    if (std::abs(eval_f(params.mu[0] - params.mu[k - 1] + params.gamma, ev)) < thr)
      throw SingularCoefficient("require_generic: f(mu_1 - mu_" + std::to_string(k) +
                                " + gamma) is numerically zero");
}

inline bool is_generic(const ModelParams& params, const ThetaEvaluator& ev,
                       double margin = 1e-12) {
  try {
    require_generic(params, ev, margin);
    return true;
  } catch (const SingularDynamicalParameter&) {
    return false;
  } catch (const SingularCoefficient&) {
    return false;
  }
}

namespace detail {

// max ||(lhs - rhs) e_s||_inf over all basis vectors e_s, relative to the
// largest image norm, for two linear maps given as callables.
template <typename F1, typename F2>
double basis_sweep_residual(int L, F1&& lhs, F2&& rhs) {
  const std::size_t dim = std::size_t{1} << L;
  double diff = 0.0, scale = 0.0;
  for (std::size_t s = 0; s < dim; ++s) {
    const StateVector v = StateVector::basis(L, s);
    const StateVector a = lhs(v);
    const StateVector b = rhs(v);
    scale = std::max({scale, a.inf_norm(), b.inf_norm()});
    for (std::size_t k = 0; k < dim; ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
  }
  return scale > 0.0 ? diff / scale : 0.0;
}

}  // namespace detail

// Residual of  B(l1, th) B(l2, th + gamma) = B(l2, th) B(l1, th + gamma).
inline double commutation_residual_BB(cx l1, cx l2, cx th, const ModelParams& params,
                                      const ThetaEvaluator& ev) {
  const cx g = params.gamma;
  return detail::basis_sweep_residual(
      params.L,
      [&](const StateVector& v) {
        return apply_block(BlockTag::B, apply_block(BlockTag::B, v, l2, th + g, params, ev), l1,
                           th, params, ev);
      },
      [&](const StateVector& v) {
        return apply_block(BlockTag::B, apply_block(BlockTag::B, v, l1, th + g, params, ev), l2,
                           th, params, ev);
      });
}

// Residual of the exchange relation
//   A(l1, th + g) B(l2, th)
//     = [f(l2-l1+g) f(th+g)] / [f(l2-l1) f(th+2g)] B(l2, th+g) A(l1, th+2g)
//     - [f(th+g-l2+l1) f(g)] / [f(l2-l1) f(th+2g)] B(l1, th+g) A(l2, th+2g).
inline double commutation_residual_AB(cx l1, cx l2, cx th, const ModelParams& params,
                                      const ThetaEvaluator& ev) {
  const cx g = params.gamma;
  const cx den_l = detail::f_checked(l2 - l1, ev, "commutation_residual_AB", "f(l2 - l1)", false);
  const cx den_t =
      detail::f_checked(th + 2.0 * g, ev, "commutation_residual_AB", "f(theta + 2 gamma)", true);
  const cx c1 = eval_f(l2 - l1 + g, ev) * eval_f(th + g, ev) / (den_l * den_t);
  const cx c2 = eval_f(th + g - l2 + l1, ev) * eval_f(g, ev) / (den_l * den_t);
  return detail::basis_sweep_residual(
      params.L,
      [&](const StateVector& v) {
        return apply_block(BlockTag::A, apply_block(BlockTag::B, v, l2, th, params, ev), l1,
                           th + g, params, ev);
      },
      [&](const StateVector& v) {
        StateVector t1 = apply_block(
            BlockTag::B, apply_block(BlockTag::A, v, l1, th + 2.0 * g, params, ev), l2, th + g,
            params, ev);
        const StateVector t2 = apply_block(
            BlockTag::B, apply_block(BlockTag::A, v, l2, th + 2.0 * g, params, ev), l1, th + g,
            params, ev);
        for (std::size_t k = 0; k < t1.dim(); ++k) t1[k] = c1 * t1[k] - c2 * t2[k];
        return t1;
      });
}

}  // namespace ellsos
