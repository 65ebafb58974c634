#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "ellsos/relations.hpp"

using namespace ellsos;

namespace {

cx rand_c(std::mt19937_64& rng, double s = 1.0) {
  std::uniform_real_distribution<double> u(-s, s);
  return cx{u(rng), 0.5 * u(rng)};
}

ModelParams rand_params(std::mt19937_64& rng, int L, double p = 0.12) {
  std::vector<cx> mu, lam;
  for (int k = 0; k < L; ++k) mu.push_back(rand_c(rng));
  for (int k = 0; k < L; ++k) lam.push_back(rand_c(rng));
  return ModelParams(L, cx{0.33, 0.0} + rand_c(rng, 0.1), cx{1.15, 0.0} + rand_c(rng, 0.2),
                     std::move(mu), std::move(lam), Nome::from_p(cx{p, 0.0}));
}

// Literal transcription of the two-row limit sum: a double sum over the two
// exponent indices with one inversion vertex, written with plain std::exp
// and none of the library's table machinery.
cx asy_l2_reference(const ModelParams& mp, int ncut, const ThetaEvaluator& ev) {
  const cx fg = eval_f(mp.gamma, ev);
  const auto pn = [&](int n) {
    return std::exp(i_pi * mp.nome.tau * ((n + 0.5) * (n + 0.5)));
  };
  const auto qn = [&](int n) { return std::exp(-(2.0 * n + 1.0) * mp.gamma); };
  const auto en = [&](int n, cx x) { return std::exp(-(2.0 * n + 1.0) * x); };
  cx s{};
  for (int n1 = -ncut; n1 <= ncut; ++n1)
    for (int n2 = -ncut; n2 <= ncut; ++n2) {
      const double sgn = ((n1 + n2 - 1) % 2 + 2) % 2 ? -1.0 : 1.0;
      cx term = sgn * pn(n1) * qn(n1) * en(n1, mp.lambda[0] - mp.mu[1]) * pn(n2) * qn(n2) *
                en(n2, mp.lambda[1] - mp.mu[0]);
      term *= cx{1.0, 0.0} + 1.0 / (qn(n1) * qn(n2));
      s += term;
    }
  return fg * fg / 4.0 * s;
}

}  // namespace

TEST_CASE("mixed functional equation closes for every evaluation route") {
  std::mt19937_64 rng(211);
  for (int L = 1; L <= 3; ++L)
    for (int rep = 0; rep < 5; ++rep) {
      const ModelParams mp = rand_params(rng, L);
      const ThetaEvaluator ev(mp.nome);
      const cx lam0 = rand_c(rng);
      for (Method m : {Method::permsum, Method::bruteforce, Method::residues})
        REQUIRE(std::abs(functional_residual(mp, lam0, m, ev)) < 1e-10);
      if (L == 1)
        REQUIRE(std::abs(functional_residual(mp, lam0, Method::closed_l1, ev)) < 1e-13);
    }
}

TEST_CASE("equation coefficients track a swap of spectral parameters") {
  std::mt19937_64 rng(223);
  for (int L = 2; L <= 4; ++L) {
    const ModelParams mp = rand_params(rng, L);
    const ThetaEvaluator ev(mp.nome);
    const cx lam0 = rand_c(rng);
    const FunctionalCoefficients base = functional_coefficients(mp, lam0, ev);
    REQUIRE((int)base.n.size() == L + 1);

    for (int i = 1; i < L; ++i) {
      std::vector<cx> sw = mp.lambda;
      std::swap(sw[i - 1], sw[L - 1]);
      const FunctionalCoefficients perm =
          functional_coefficients(mp.with_lambda(std::move(sw)), lam0, ev);
      const auto close = [](cx a, cx b) {
        return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
      };
      REQUIRE(close(base.m0, perm.m0));
      REQUIRE(close(base.n[0], perm.n[0]));
      REQUIRE(close(base.n[i], perm.n[L]));
      REQUIRE(close(base.n[L], perm.n[i]));
      for (int k = 1; k < L; ++k)
        if (k != i) REQUIRE(close(base.n[k], perm.n[k]));
    }
  }
}

TEST_CASE("coefficients collapse on the factorization point") {
  std::mt19937_64 rng(227);
  for (int rep = 0; rep < 5; ++rep) {
    ModelParams mp = rand_params(rng, 3);
    mp.lambda[0] = mp.mu[0] - mp.gamma;
    const ThetaEvaluator ev(mp.nome);
    const FunctionalCoefficients co = functional_coefficients(mp, mp.mu[0], ev);

    double scale = std::abs(co.m0);
    for (const cx& v : co.n) scale = std::max(scale, std::abs(v));
    REQUIRE(std::abs(co.m0) < 1e-12 * scale);
    REQUIRE(std::abs(co.n[0]) < 1e-12 * scale);
    REQUIRE(std::abs(co.n[1]) < 1e-12 * scale);
    REQUIRE(std::abs(co.n[2]) > 1e-4 * scale);  // the equation stays nontrivial
  }
}

TEST_CASE("system-size recursion at the first inhomogeneity") {
  std::mt19937_64 rng(229);
  for (int L = 2; L <= 4; ++L)
    for (int rep = 0; rep < 4; ++rep) {
      const ModelParams mp = rand_params(rng, L);
      const ThetaEvaluator ev(mp.nome);
      REQUIRE(std::abs(recursion_residual(mp, ev)) < 1e-10);
    }
}

TEST_CASE("invariance under exchanging spectral parameters") {
  std::mt19937_64 rng(233);
  for (int L = 2; L <= 4; ++L) {
    const ModelParams mp = rand_params(rng, L);
    const ThetaEvaluator ev(mp.nome);
    for (int i = 1; i < L; ++i)
      REQUIRE(std::abs(symmetry_residual(mp, i, i + 1, ev)) < 1e-12);
    REQUIRE(std::abs(symmetry_residual(mp, 1, L, ev)) < 1e-12);
  }
}

TEST_CASE("inversion vertices match an independent swap count") {
  const InversionSet inv = inversion_vertices(Permutation({2, 4, 1, 3}));
  const std::set<std::pair<int, int>> want{{1, 3}, {2, 3}, {2, 4}};
  REQUIRE(inv.pairs == want);

  for (int L = 1; L <= 4; ++L) {
    std::vector<int> sigma(L);
    for (int i = 0; i < L; ++i) sigma[i] = i + 1;
    do {
      const InversionSet vs = inversion_vertices(Permutation(sigma));
      int count = 0;  // textbook inversion count
      for (int a = 0; a < L; ++a)
        for (int b = a + 1; b < L; ++b)
          if (sigma[a] > sigma[b]) ++count;
      REQUIRE((int)vs.pairs.size() == count);
      for (const auto& [a, b] : vs.pairs) {
        REQUIRE(a < b);
        REQUIRE(sigma[a - 1] > sigma[b - 1]);
      }
    } while (std::next_permutation(sigma.begin(), sigma.end()));
  }
}

TEST_CASE("limit sum collapses to a single weight for one row") {
  std::mt19937_64 rng(239);
  for (int rep = 0; rep < 5; ++rep) {
    const ModelParams mp = rand_params(rng, 1);
    const ThetaEvaluator ev(mp.nome);
    REQUIRE(asy_eval(mp, AsymptoticSpec{}, ev) == eval_f(mp.gamma, ev));
  }
}

TEST_CASE("limit sum matches a hand-written double sum for two rows") {
  std::mt19937_64 rng(241);
  for (int rep = 0; rep < 5; ++rep) {
    const ModelParams mp = rand_params(rng, 2, 0.15);
    const ThetaEvaluator ev(mp.nome);
    const cx got = asy_eval(mp, AsymptoticSpec{.n_cut = 3}, ev);
    const cx want = asy_l2_reference(mp, 3, ev);
    REQUIRE(std::abs(got - want) <= 1e-13 * std::abs(want));
  }
}

TEST_CASE("limit sum enforces its term budget") {
  std::mt19937_64 rng(251);
  const ModelParams mp = rand_params(rng, 2);
  const ThetaEvaluator ev(mp.nome);
  REQUIRE_THROWS_AS(asy_eval(mp, AsymptoticSpec{.n_cut = 3, .term_ceiling = 10}, ev),
                    TermBudgetExceeded);
}

TEST_CASE("functional-equation inputs are validated") {
  std::mt19937_64 rng(257);
  const ModelParams mp = rand_params(rng, 2);
  const ThetaEvaluator ev(mp.nome);
  // an L = 1 only method cannot evaluate the L = 2 terms of the equation
  REQUIRE_THROWS_AS(functional_residual(mp, cx{0.1, 0.0}, Method::closed_l1, ev),
                    DimensionMismatch);
  const ModelParams one = rand_params(rng, 1);
  REQUIRE_THROWS_AS(recursion_residual(one, ThetaEvaluator(one.nome)), DimensionMismatch);
}
