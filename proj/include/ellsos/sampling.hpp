#pragma once

// Seeded parameter draws for the verification suites.  All scalars use
// Re ~ U[-1, 1], Im ~ U[-0.5, 0.5]; the nome is real with p ~ U[0.05, 0.3].
// A whole parameter set is redrawn (up to max_redraws) whenever it fails the
// genericity margin.  The draw order is fixed - p, gamma, theta, mu_1..mu_L,
// lambda_1..lambda_L - so a seed pins every sample exactly.

#include <cstdint>
#include <optional>
#include <random>

#include "ellsos/monodromy.hpp"

namespace ellsos {

struct DrawOptions {
  double re_lo = -1.0, re_hi = 1.0;
  double im_lo = -0.5, im_hi = 0.5;
  double p_lo = 0.05, p_hi = 0.3;
  // when set, lambdas are drawn inside a disc of this radius around a common
  // center (keeps quadrature contours comfortably clear of the translates)
  std::optional<double> lambda_cluster_radius{};
  std::optional<cx> p_override{};
  double genericity_margin = 1e-6;
  int max_redraws = 100;
};

struct Draw {
  ModelParams params;
  ThetaEvaluator ev;
};

class ParameterSampler {
 public:
  explicit ParameterSampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }

  cx scalar(const DrawOptions& opt = {}) {
    const double re = uniform(opt.re_lo, opt.re_hi);
    const double im = uniform(opt.im_lo, opt.im_hi);
    return {re, im};
  }

  double nome_p(const DrawOptions& opt = {}) { return uniform(opt.p_lo, opt.p_hi); }

  Draw draw(int L, const DrawOptions& opt = {}) {
    for (int attempt = 0; attempt <= opt.max_redraws; ++attempt) {
      const cx p = opt.p_override ? *opt.p_override : cx{nome_p(opt), 0.0};
      const Nome nome = Nome::from_p(p);
      const cx gamma = scalar(opt);
      const cx theta = scalar(opt);
      std::vector<cx> mu(L), lambda(L);
      for (int j = 0; j < L; ++j) mu[j] = scalar(opt);
      if (opt.lambda_cluster_radius) {
        const cx center = scalar(opt);
        for (int j = 0; j < L; ++j) {
          const double r = *opt.lambda_cluster_radius * std::sqrt(uniform(0.0, 1.0));
          const double phi = uniform(0.0, 2.0 * pi);
          lambda[j] = center + cx{r * std::cos(phi), r * std::sin(phi)};
        }
      } else {
        for (int j = 0; j < L; ++j) lambda[j] = scalar(opt);
      }
      ModelParams params(L, gamma, theta, std::move(mu), std::move(lambda), nome);
      ThetaEvaluator ev(nome);
      if (is_generic(params, ev, opt.genericity_margin)) return {std::move(params), std::move(ev)};
    }
    throw SingularCoefficient("ParameterSampler: no generic draw within the redraw budget");
  }

  std::mt19937_64& engine() noexcept { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace ellsos
