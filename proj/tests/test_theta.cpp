#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "ellsos/theta.hpp"

using namespace ellsos;

namespace {

// Reference sum, written as differently as possible from the library path:
// no reduction, no recurrences, std::pow for the nome powers.  Only valid
// for real p and moderate |Re lambda|.
cx theta_reference(cx lam, double p) {
  cx acc{};
  for (int m = 0; m <= 200; ++m) {
    const double w = std::pow(p, (m + 0.5) * (m + 0.5));
    if (w == 0.0) break;  // sinh keeps growing; avoid 0 * inf
    const cx term = (m % 2 ? -w : w) * std::sinh(double(2 * m + 1) * lam);
    acc += term;
    if (std::abs(term) < 1e-18 * std::abs(acc) && m > 2) break;
  }
  return cx{0.0, 1.0} * acc;
}

cx rand_lam(std::mt19937_64& rng, double re_max = 1.0) {
  std::uniform_real_distribution<double> re(-re_max, re_max), im(-1.5, 1.5);
  return cx{re(rng), im(rng)};
}

}  // namespace

TEST_CASE("series agrees with a directly summed reference") {
  std::mt19937_64 rng(2024);
  for (double p : {0.05, 0.3, 0.7}) {
    const ThetaEvaluator ev(Nome::from_p(cx{p, 0.0}));
    const double re_max = p < 0.5 ? 1.5 : 0.5;
    for (int k = 0; k < 40; ++k) {
      const cx lam = rand_lam(rng, re_max);
      const cx ref = theta_reference(lam, p);
      REQUIRE(std::abs(eval_f(lam, ev) - ref) <= 1e-13 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("matches an externally computed fixed point") {
  // jacobi theta_1(i/2, 0.1) / 2, cross-checked with an independent
  // arbitrary-precision implementation
  const ThetaEvaluator ev(Nome::from_p(cx{0.1, 0.0}));
  const cx got = eval_f(cx{0.5, 0.0}, ev);
  REQUIRE(std::abs(got - cx{0.0, 0.28106300860774058}) < 1e-15);
}

TEST_CASE("vanishes at the origin and is odd to the last bit") {
  std::mt19937_64 rng(7);
  const ThetaEvaluator ev(Nome{});
  REQUIRE(eval_f(cx{}, ev) == cx{});
  for (int k = 0; k < 50; ++k) {
    const cx lam = rand_lam(rng, 5.0);
    REQUIRE(eval_f(-lam, ev) == -eval_f(lam, ev));
  }
}

TEST_CASE("quasi-periodicity in both lattice directions") {
  std::mt19937_64 rng(11);
  for (double p : {0.05, 0.25}) {
    const Nome nome = Nome::from_p(cx{p, 0.0});
    const ThetaEvaluator ev(nome);
    for (int k = 0; k < 30; ++k) {
      const cx lam = rand_lam(rng, 2.0);
      const cx f = eval_f(lam, ev);
      REQUIRE(std::abs(eval_f(lam - i_pi, ev) + f) <= 1e-13 * std::abs(f));
      const cx mult = std::exp(2.0 * lam - i_pi * nome.tau);
      REQUIRE(std::abs(eval_f(lam - i_pi * nome.tau, ev) + mult * f) <=
              1e-13 * std::abs(mult * f));
    }
  }
}

TEST_CASE("argument reduction is the identity inside the fundamental cell") {
  const Nome nome = Nome{};
  const cx lam{0.21, 0.37};  // well inside: |Re| << pi tau_i / 2, |Im| << pi / 2
  const Reduction r = reduce_argument(lam, nome);
  REQUIRE(r.shift_pi == 0);
  REQUIRE(r.shift_pitau == 0);
  REQUIRE(r.lam_red == lam);
  REQUIRE(r.multiplier == cx{1.0, 0.0});
}

TEST_CASE("reduced and unreduced evaluation agree for far-out arguments") {
  std::mt19937_64 rng(13);
  const Nome nome = Nome::from_p(cx{0.15, 0.0});
  const ThetaEvaluator on(nome), off(nome, 64, 1e-16, false);
  for (int k = 0; k < 25; ++k) {
    const cx lam = rand_lam(rng, 1.0);
    REQUIRE(std::abs(eval_f(lam, on) - eval_f(lam, off)) <=
            1e-12 * std::max(1.0, std::abs(eval_f(lam, on))));
  }
  // several cells away the unreduced series still converges at this p,
  // while the reduced path must unwind the shifts exactly
  for (int a = -2; a <= 2; ++a)
    for (int b = -1; b <= 1; ++b) {
      const cx lam = cx{0.3, -0.4} + double(a) * i_pi + double(b) * i_pi * nome.tau;
      const cx want = eval_f(lam, off);
      REQUIRE(std::abs(eval_f(lam, on) - want) <= 1e-11 * std::abs(want));
    }
}

TEST_CASE("derivative matches a central difference") {
  std::mt19937_64 rng(17);
  const ThetaEvaluator ev(Nome::from_p(cx{0.2, 0.0}));
  const double h = 1e-5;
  for (int k = 0; k < 20; ++k) {
    const cx lam = rand_lam(rng, 1.5);
    const cx fd = (eval_f(lam + h, ev) - eval_f(lam - h, ev)) / (2.0 * h);
    REQUIRE(std::abs(eval_f_prime(lam, ev) - fd) <= 1e-8 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("derivative at the origin feeds the singularity scale") {
  const ThetaEvaluator ev(Nome::from_p(cx{0.1, 0.0}));
  const cx fp0 = eval_f_prime(cx{}, ev);
  REQUIRE(std::abs(fp0 - ev.f_prime0()) == 0.0);
  REQUIRE(ev.scale() == Catch::Approx(std::abs(fp0)));
  const cx fd = (eval_f(cx{1e-6, 0.0}, ev) - eval_f(cx{-1e-6, 0.0}, ev)) / cx{2e-6, 0.0};
  REQUIRE(std::abs(fp0 - fd) <= 1e-9 * std::abs(fp0));
}

TEST_CASE("three-term addition rule") {
  std::mt19937_64 rng(19);
  for (double p : {0.08, 0.35}) {
    const ThetaEvaluator ev(Nome::from_p(cx{p, 0.0}));
    for (int k = 0; k < 30; ++k) {
      const cx a = rand_lam(rng), b = rand_lam(rng), c = rand_lam(rng), d = rand_lam(rng);
      const auto t = addition_terms(a, b, c, d, ev);
      const double scale = std::max({std::abs(t[0]), std::abs(t[1]), std::abs(t[2]), 1e-30});
      REQUIRE(std::abs(t[0] - t[1] - t[2]) <= 1e-12 * scale);
      REQUIRE(std::abs(addition_residual(a, b, c, d, ev)) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("trigonometric limit decays at least linearly in the nome") {
  const cx lam{0.7, 0.0};
  const double d3 = trig_limit_deviation(lam, 1e-3);
  const double d5 = trig_limit_deviation(lam, 1e-5);
  // measured decay is quadratic (deviation ~ 4 sinh(3 lam) p^2 / ...);
  // the guaranteed bound is linear, so check both
  const double slope = std::log(d3 / d5) / std::log(1e-3 / 1e-5);
  REQUIRE(slope >= 1.0);
  REQUIRE(d3 / 1e-3 <= d5 / 1e-5 * 1.01 + 1.0);  // C p bound with C from the smaller p
  REQUIRE_THROWS_AS(trig_limit_deviation(lam, 0.5), InvalidParameter);
  REQUIRE_THROWS_AS(trig_limit_deviation(lam, 0.0), InvalidParameter);
}

TEST_CASE("series reports non-convergence instead of returning junk") {
  // construction fails fast when even the cached f'(0) cannot converge
  // within the term budget
  REQUIRE_THROWS_AS(ThetaEvaluator(Nome::from_p(cx{0.9, 0.0}), 8, 1e-16, false),
                    NonConvergent);
  // with an adequate budget the evaluator constructs, but a far-out argument
  // with reduction disabled still overruns the ceiling
  const ThetaEvaluator ev(Nome::from_p(cx{0.9, 0.0}), 32, 1e-16, false);
  REQUIRE_THROWS_AS(eval_f(cx{3.0, 0.0}, ev), NonConvergent);
}

TEST_CASE("constructor and nome validation") {
  REQUIRE_THROWS_AS(Nome::from_p(cx{1.1, 0.0}), InvalidParameter);
  REQUIRE_THROWS_AS(Nome::from_p(cx{}), InvalidParameter);
  REQUIRE_THROWS_AS(Nome::from_tau(cx{0.0, -1.0}), InvalidParameter);
  REQUIRE_THROWS_AS(ThetaEvaluator(Nome{}, 0), InvalidParameter);
  REQUIRE_THROWS_AS(ThetaEvaluator(Nome{}, 64, -1.0), InvalidParameter);
}
