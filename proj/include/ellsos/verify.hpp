#pragma once

// Self-check suites behind `ellsos verify`.  Each suite draws seeded random
// parameters, exercises the identities its module must satisfy, and records
// one result per check name carrying the worst residual seen and where it
// occurred.  Any caught error (non-convergence, singular parameters) fails
// the corresponding check rather than aborting the run.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ellsos/relations.hpp"
#include "ellsos/report.hpp"
#include "ellsos/sampling.hpp"

namespace ellsos {

inline double recursion_step_residual(const ModelParams& big, cx lam, const ThetaEvaluator& ev);

enum class Suite { theta, weights, monodromy, partition, relations, all };

inline const char* suite_name(Suite s) {
  switch (s) {
    case Suite::theta: return "theta";
    case Suite::weights: return "weights";
    case Suite::monodromy: return "monodromy";
    case Suite::partition: return "partition";
    case Suite::relations: return "relations";
    default: return "all";
  }
}

inline std::optional<Suite> suite_from_name(const std::string& s) {
  for (Suite v : {Suite::theta, Suite::weights, Suite::monodromy, Suite::partition,
                  Suite::relations, Suite::all})
    if (s == suite_name(v)) return v;
  return std::nullopt;
}

// Every check name `verify` can emit, across all suites.  --tol overrides are
// validated against this list so a typo fails loudly instead of being ignored.
inline const std::vector<std::string>& known_check_names() {
  static const std::vector<std::string> names = {
      "oddness", "quasi_period_pi", "quasi_period_pitau", "reduction_consistency",
      "addition_rule", "trig_limit_bound", "trig_limit_slope",
      "dybe", "weight_zero", "rmatrix_sparsity", "boltzmann_zeroes",
      "a_action_highest", "a_action_lowest", "commutation_bb", "commutation_ab",
      "sector_map", "recursion_step",
      "agreement_permsum_bruteforce", "agreement_residues_permsum",
      "agreement_quadrature_residues", "symmetry", "special_zero", "factorization",
      "functional_equation", "functional_l1_closed", "recursion", "coefficient_swap",
      "zero_cascade", "inversion_count", "asymptotic_l1"};
  return names;
}

struct VerifyOptions {
  std::uint64_t seed = 1;
  int samples = 25;
  int l_max = 3;
  std::map<std::string, double> tol_overrides;
  std::optional<cx> p_override{};  // diagnostic: force the nome
  int n_max = 64;
  double epsilon_target = 1e-16;
};

namespace detail {

inline double tol_of(const VerifyOptions& o, const std::string& name, double def) {
  const auto it = o.tol_overrides.find(name);
  return it == o.tol_overrides.end() ? def : it->second;
}

// Worst-residual accumulator for one named check.
class CheckTracker {
 public:
  CheckTracker(std::string name, double tol) : tol_(tol) {
    res_.name = std::move(name);
    res_.tolerance = tol;
  }

  void record(double resid, const std::string& ctx = "") {
    seen_ = true;
    if (resid > worst_) {
      worst_ = resid;
      ctx_ = ctx;
    }
  }

  void record_error(const std::string& what, const std::string& ctx = "") {
    if (!errored_) {
      errored_ = true;
      res_.note = what;
      ctx_err_ = ctx;
    }
  }

  CheckResult finish() {
    if (seen_) res_.residual = worst_;
    res_.context = errored_ ? ctx_err_ : ctx_;
    res_.pass = !errored_ && (!seen_ || worst_ <= tol_);
    return res_;
  }

 private:
  double tol_;
  CheckResult res_;
  bool seen_ = false, errored_ = false;
  double worst_ = 0.0;
  std::string ctx_, ctx_err_;
};

inline double rel_diff(cx a, cx b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

inline DrawOptions draw_opts(const VerifyOptions& o) {
  DrawOptions d;
  d.p_override = o.p_override;
  return d;
}

inline ThetaEvaluator make_ev(const Nome& nome, const VerifyOptions& o, bool reduce = true) {
  return ThetaEvaluator(nome, o.n_max, o.epsilon_target, reduce);
}

// ---------------------------------------------------------------- theta ---

inline void suite_theta(ReportDocument& rep, const VerifyOptions& opt) {
  CheckTracker odd("oddness", tol_of(opt, "oddness", 1e-13));
  CheckTracker qp_pi("quasi_period_pi", tol_of(opt, "quasi_period_pi", 1e-13));
  CheckTracker qp_tau("quasi_period_pitau", tol_of(opt, "quasi_period_pitau", 1e-13));
  CheckTracker redc("reduction_consistency", tol_of(opt, "reduction_consistency", 1e-12));
  CheckTracker add("addition_rule", tol_of(opt, "addition_rule", 1e-12));

  ParameterSampler smp(opt.seed);
  const DrawOptions dopt = draw_opts(opt);
  for (int s = 0; s < opt.samples; ++s) {
    const std::string ctx = "draw=" + std::to_string(s);
    try {
      const cx p = opt.p_override ? *opt.p_override : cx{smp.nome_p(dopt), 0.0};
      const Nome nome = Nome::from_p(p);
      const ThetaEvaluator ev = make_ev(nome, opt);
      const cx lam = smp.scalar(dopt);

      const cx f = eval_f(lam, ev);
      const double mag = std::max(std::abs(f), ev.scale());
      odd.record(std::abs(eval_f(-lam, ev) + f) / mag, ctx);
      qp_pi.record(std::abs(eval_f(lam - i_pi, ev) + f) / mag, ctx);
      const cx mult = std::exp(2.0 * lam - i_pi * nome.tau);
      qp_tau.record(std::abs(eval_f(lam - i_pi * nome.tau, ev) + mult * f) /
                        std::max(std::abs(mult * f), ev.scale()),
                    ctx);

      const ThetaEvaluator ev_off = make_ev(nome, opt, false);
      redc.record(rel_diff(f, eval_f(lam, ev_off)), ctx);

      const cx l2 = smp.scalar(dopt), l3 = smp.scalar(dopt), l4 = smp.scalar(dopt);
      const auto t = addition_terms(lam, l2, l3, l4, ev);
      const double tsc =
          std::max({std::abs(t[0]), std::abs(t[1]), std::abs(t[2]), ev.scale()});
      add.record(std::abs(t[0] - t[1] - t[2]) / tsc, ctx);
    } catch (const std::exception& e) {
      for (auto* c : {&odd, &qp_pi, &qp_tau, &redc, &add}) c->record_error(e.what(), ctx);
    }
  }

  // trigonometric limit: deviation bounded by C p (fitted at the largest p);
  // measured decay is quadratic, so require at least linear
  CheckTracker bound("trig_limit_bound", tol_of(opt, "trig_limit_bound", 1.05));
  CheckTracker slope("trig_limit_slope", tol_of(opt, "trig_limit_slope", 0.1));
  try {
    const cx lam{0.7, 0.0};
    const double p4 = 1e-4, p5 = 1e-5, p6 = 1e-6;
    const double d4 = trig_limit_deviation(lam, p4);
    const double d5 = trig_limit_deviation(lam, p5);
    const double d6 = trig_limit_deviation(lam, p6);
    const double C = d4 / p4;
    bound.record(std::max({d4 / (C * p4), d5 / (C * p5), d6 / (C * p6)}), "lam=0.7");
    const double measured = std::log(d4 / d6) / std::log(p4 / p6);
    slope.record(std::max(0.0, 1.0 - measured),
                 "lam=0.7 slope=" + std::to_string(measured));
  } catch (const std::exception& e) {
    bound.record_error(e.what());
    slope.record_error(e.what());
  }

  for (auto* c : {&odd, &qp_pi, &qp_tau, &redc, &add, &bound, &slope}) rep.add(c->finish());
}

// --------------------------------------------------------------- weights ---

inline void suite_weights(ReportDocument& rep, const VerifyOptions& opt) {
  CheckTracker dybe("dybe", tol_of(opt, "dybe", 1e-12));
  CheckTracker wz("weight_zero", tol_of(opt, "weight_zero", 1e-13));
  CheckTracker sparse("rmatrix_sparsity", tol_of(opt, "rmatrix_sparsity", 0.0));
  CheckTracker zeroes("boltzmann_zeroes", tol_of(opt, "boltzmann_zeroes", 0.0));

  ParameterSampler smp(opt.seed);
  const DrawOptions dopt = draw_opts(opt);
  for (int s = 0; s < opt.samples; ++s) {
    const std::string ctx = "draw=" + std::to_string(s);
    try {
      const Draw d = smp.draw(1, dopt);
      const cx g = d.params.gamma, th = d.params.theta, lam = d.params.lambda[0];
      const cx l2 = smp.scalar(dopt), l3 = smp.scalar(dopt);

      dybe.record(dybe_residual(lam, l2, l3, th, g, d.ev), ctx);
      wz.record(weight_zero_residual(lam, th, g, d.ev), ctx);

      const RMatrix r = r_matrix(lam, th, g, d.ev);
      static constexpr bool live[4][4] = {{true, false, false, false},
                                          {false, true, true, false},
                                          {false, true, true, false},
                                          {false, false, false, true}};
      bool ok = true;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          if (!live[i][j] && r.entries[i][j] != cx{}) ok = false;
      sparse.record(ok ? 0.0 : 1.0, ctx);

      const WeightSet w0 = boltzmann(cx{}, th, g, d.ev);
      const WeightSet wt = boltzmann(th, th, g, d.ev);
      const bool z_ok = w0.b_plus == cx{} && w0.b_minus == cx{} &&
                        w0.a_plus == w0.a_minus && wt.c_plus == cx{};
      zeroes.record(z_ok ? 0.0 : 1.0, ctx);
    } catch (const std::exception& e) {
      for (auto* c : {&dybe, &wz, &sparse, &zeroes}) c->record_error(e.what(), ctx);
    }
  }
  for (auto* c : {&dybe, &wz, &sparse, &zeroes}) rep.add(c->finish());
}

// ------------------------------------------------------------- monodromy ---

inline void suite_monodromy(ReportDocument& rep, const VerifyOptions& opt) {
  CheckTracker hi("a_action_highest", tol_of(opt, "a_action_highest", 1e-12));
  CheckTracker lo("a_action_lowest", tol_of(opt, "a_action_lowest", 1e-12));
  CheckTracker bb("commutation_bb", tol_of(opt, "commutation_bb", 1e-11));
  CheckTracker ab("commutation_ab", tol_of(opt, "commutation_ab", 1e-11));
  CheckTracker sector("sector_map", tol_of(opt, "sector_map", 0.0));
  CheckTracker recb("recursion_step", tol_of(opt, "recursion_step", 1e-12));

  ParameterSampler smp(opt.seed);
  const DrawOptions dopt = draw_opts(opt);
  for (int s = 0; s < opt.samples; ++s) {
    for (int L = 1; L <= opt.l_max; ++L) {
      const std::string ctx = "L=" + std::to_string(L) + " draw=" + std::to_string(s);
      try {
        const Draw d = smp.draw(L, dopt);
        const ModelParams& mp = d.params;
        const ThetaEvaluator& ev = d.ev;
        const cx lam = smp.scalar(dopt);

        {  // A |all up> = prod f(lam - mu_j + gamma) |all up>
          const StateVector v =
              apply_block(BlockTag::A, StateVector::basis(L, 0), lam, mp.theta, mp, ev);
          cx want{1.0, 0.0};
          for (int j = 0; j < L; ++j) want *= eval_f(lam - mp.mu[j] + mp.gamma, ev);
          double off = 0.0;
          for (std::size_t k = 1; k < v.dim(); ++k) off = std::max(off, std::abs(v[k]));
          hi.record(std::max(std::abs(v[0] - want), off) / std::abs(want), ctx);
        }
        {  // <all down| A = f(th-g)/f(th+(L-1)g) prod f(lam - mu_j) <all down|
          const StateVector v = apply_block(BlockTag::A, StateVector::basis(L, (1u << L) - 1),
                                            lam, mp.theta, mp, ev);
          cx want = eval_f(mp.theta - mp.gamma, ev) /
                    detail::f_checked(mp.theta + double(L - 1) * mp.gamma, ev,
                                      "suite_monodromy", "f(theta + (L-1) gamma)", true);
          for (int j = 0; j < L; ++j) want *= eval_f(lam - mp.mu[j], ev);
          double off = 0.0;
          for (std::size_t k = 0; k + 1 < v.dim(); ++k) off = std::max(off, std::abs(v[k]));
          lo.record(std::max(std::abs(v[v.dim() - 1] - want), off) / std::abs(want), ctx);
        }
        if (L <= 3) {
          const cx l2 = smp.scalar(dopt);
          bb.record(commutation_residual_BB(lam, l2, mp.theta, mp, ev), ctx);
          ab.record(commutation_residual_AB(lam, l2, mp.theta, mp, ev), ctx);
        }
        {  // B maps the k-down sector into the (k+1)-down sector, exactly
          StateVector v(L);
          const int k_sector = L / 2;
          for (std::size_t idx = 0; idx < v.dim(); ++idx)
            if (std::popcount(idx) == k_sector) v[idx] = smp.scalar(dopt);
          const StateVector w = apply_block(BlockTag::B, v, lam, mp.theta, mp, ev);
          double leak = 0.0;
          for (std::size_t idx = 0; idx < w.dim(); ++idx)
            if (std::popcount(idx) != k_sector + 1 && w[idx] != cx{}) leak = 1.0;
          sector.record(leak, ctx);
        }
        if (L <= 2) {  // appending one site to the B block
          const Draw big = smp.draw(L + 1, dopt);
          recb.record(recursion_step_residual(big.params, lam, big.ev), ctx);
        }
      } catch (const std::exception& e) {
        for (auto* c : {&hi, &lo, &bb, &ab, &sector, &recb}) c->record_error(e.what(), ctx);
      }
    }
  }
  for (auto* c : {&hi, &lo, &bb, &ab, &sector, &recb}) rep.add(c->finish());
}

// ------------------------------------------------------------- partition ---

inline void suite_partition(ReportDocument& rep, const VerifyOptions& opt) {
  CheckTracker pb("agreement_permsum_bruteforce",
                  tol_of(opt, "agreement_permsum_bruteforce", 1e-10));
  CheckTracker rp("agreement_residues_permsum",
                  tol_of(opt, "agreement_residues_permsum", 1e-10));
  CheckTracker qr2("agreement_quadrature_residues",
                   tol_of(opt, "agreement_quadrature_residues", 1e-8));
  CheckTracker sym("symmetry", tol_of(opt, "symmetry", 1e-11));
  CheckTracker zero("special_zero", tol_of(opt, "special_zero", 1e-10));
  CheckTracker fact("factorization", tol_of(opt, "factorization", 1e-3));

  ParameterSampler smp(opt.seed);
  const DrawOptions dopt = draw_opts(opt);
  for (int s = 0; s < opt.samples; ++s) {
    for (int L = 1; L <= opt.l_max; ++L) {
      const std::string ctx = "L=" + std::to_string(L) + " draw=" + std::to_string(s);
      try {
        const Draw d = smp.draw(L, dopt);
        const cx zp = z_perm_sum(d.params, d.ev);
        pb.record(rel_diff(zp, z_bruteforce(d.params, d.ev)), ctx);
        if (L <= 4) rp.record(rel_diff(zp, z_residues(d.params, d.ev)), ctx);
        if (L >= 2) {
          const int i = 1 + int(smp.uniform(0.0, L - 1e-9));
          int j = 1 + int(smp.uniform(0.0, L - 1e-9));
          if (j == i) j = (i % L) + 1;
          sym.record(std::abs(symmetry_residual(d.params, std::min(i, j), std::max(i, j), d.ev)),
                     ctx);
        }
      } catch (const std::exception& e) {
        for (auto* c : {&pb, &rp, &sym}) c->record_error(e.what(), ctx);
      }

      if (L <= 3) {
        try {  // quadrature needs clustered spectral parameters
          DrawOptions cl = dopt;
          cl.lambda_cluster_radius = 0.3;
          const Draw d = smp.draw(L, cl);
          const cx zq = z_quadrature(d.params, make_contour_balanced(d.params, 64), d.ev);
          qr2.record(rel_diff(zq, z_residues(d.params, d.ev)), ctx);
        } catch (const std::exception& e) {
          qr2.record_error(e.what(), ctx);
        }
      }

      if (L >= 2) {
        try {  // Z vanishes when some (lambda_i, lambda_j) = (mu_1, mu_1 - gamma)
          const Draw d = smp.draw(L, dopt);
          ModelParams mp = d.params;
          const int i = int(smp.uniform(0.0, L - 1e-9));
          int j = int(smp.uniform(0.0, L - 1e-9));
          if (j == i) j = (i + 1) % L;
          mp.lambda[i] = mp.mu[0];
          mp.lambda[j] = mp.mu[0] - mp.gamma;
          const cx z0 = z_perm_sum(mp, d.ev);
          std::vector<double> mags;
          for (int t = 0; t < 5; ++t) {
            ModelParams pert = mp;
            pert.lambda[i] += 0.25 * smp.scalar(dopt);
            pert.lambda[j] += 0.25 * smp.scalar(dopt);
            mags.push_back(std::abs(z_perm_sum(pert, d.ev)));
          }
          std::sort(mags.begin(), mags.end());
          zero.record(std::abs(z0) / mags[mags.size() / 2], ctx);

          // the factorised ratio Z(mu_1, ...) / prod f(lambda_j - mu_1 + g)
          // stays finite as a lambda approaches the zero mu_1 - gamma
          ModelParams fp = d.params;
          fp.lambda[0] = fp.mu[0];
          const auto vratio = [&](double eps) {
            ModelParams q = fp;
            q.lambda[1] = q.mu[0] - q.gamma + cx{eps, 0.0};
            cx den{1.0, 0.0};
            for (int k = 1; k < L; ++k) den *= eval_f(q.lambda[k] - q.mu[0] + q.gamma, d.ev);
            return z_perm_sum(q, d.ev) / den;
          };
          const cx v1 = vratio(1e-6), v2 = vratio(2e-6);
          fact.record(rel_diff(v1, v2), ctx);
        } catch (const std::exception& e) {
          zero.record_error(e.what(), ctx);
          fact.record_error(e.what(), ctx);
        }
      }
    }
  }
  for (auto* c : {&pb, &rp, &qr2, &sym, &zero, &fact}) rep.add(c->finish());
}

// ------------------------------------------------------------- relations ---

inline void suite_relations(ReportDocument& rep, const VerifyOptions& opt) {
  CheckTracker fz("functional_equation", tol_of(opt, "functional_equation", 1e-9));
  CheckTracker fz1("functional_l1_closed", tol_of(opt, "functional_l1_closed", 1e-13));
  CheckTracker rec("recursion", tol_of(opt, "recursion", 1e-9));
  CheckTracker swap_c("coefficient_swap", tol_of(opt, "coefficient_swap", 1e-12));
  CheckTracker casc("zero_cascade", tol_of(opt, "zero_cascade", 1e-10));
  CheckTracker invc("inversion_count", tol_of(opt, "inversion_count", 0.0));
  CheckTracker asy1("asymptotic_l1", tol_of(opt, "asymptotic_l1", 1e-15));

  ParameterSampler smp(opt.seed);
  const DrawOptions dopt = draw_opts(opt);
  for (int s = 0; s < opt.samples; ++s) {
    for (int L = 1; L <= opt.l_max; ++L) {
      const std::string ctx = "L=" + std::to_string(L) + " draw=" + std::to_string(s);
      try {
        const Draw d = smp.draw(L, dopt);
        const cx lam0 = smp.scalar(dopt);
        for (Method m : {Method::permsum, Method::bruteforce, Method::residues})
          fz.record(std::abs(functional_residual(d.params, lam0, m, d.ev)),
                    ctx + " method=" + method_name(m));
        if (L == 1)
          fz1.record(std::abs(functional_residual(d.params, lam0, Method::closed_l1, d.ev)),
                     ctx);
        if (L >= 2) rec.record(std::abs(recursion_residual(d.params, d.ev)), ctx);

        if (L >= 2) {  // swapping lambda_i <-> lambda_j permutes N_i <-> N_j
          const FunctionalCoefficients c1 = functional_coefficients(d.params, lam0, d.ev);
          const int i = 1, j = L;
          std::vector<cx> sw = d.params.lambda;
          std::swap(sw[i - 1], sw[j - 1]);
          const FunctionalCoefficients c2 =
              functional_coefficients(d.params.with_lambda(std::move(sw)), lam0, d.ev);
          double worst = rel_diff(c1.m0, c2.m0);
          worst = std::max(worst, rel_diff(c1.n[0], c2.n[0]));
          worst = std::max(worst, rel_diff(c1.n[i], c2.n[j]));
          worst = std::max(worst, rel_diff(c1.n[j], c2.n[i]));
          for (int k = 1; k <= L; ++k)
            if (k != i && k != j) worst = std::max(worst, rel_diff(c1.n[k], c2.n[k]));
          swap_c.record(worst, ctx);
        }

        if (L >= 2) {  // lam0 = mu_1, lambda_1 = mu_1 - gamma kills M0, N0, N1
          ModelParams mp = d.params;
          mp.lambda[0] = mp.mu[0] - mp.gamma;
          const FunctionalCoefficients co = functional_coefficients(mp, mp.mu[0], d.ev);
          double sc = std::abs(co.m0);
          for (const cx& v : co.n) sc = std::max(sc, std::abs(v));
          const double small =
              std::max({std::abs(co.m0), std::abs(co.n[0]), std::abs(co.n[1])}) / sc;
          // N_2 must survive; flag it as a failure by reporting residual 1
          const bool n2_alive = std::abs(co.n[2]) > 1e-6 * sc;
          casc.record(n2_alive ? small : 1.0, ctx);
        }
      } catch (const std::exception& e) {
        for (auto* c : {&fz, &fz1, &rec, &swap_c, &casc}) c->record_error(e.what(), ctx);
      }
    }

    try {  // asymptotic sum collapses to f(gamma) at L = 1
      const Draw d = smp.draw(1, dopt);
      const cx a = asy_eval(d.params, AsymptoticSpec{}, d.ev);
      const cx fg = eval_f(d.params.gamma, d.ev);
      asy1.record(std::abs(a - fg) / std::abs(fg), "draw=" + std::to_string(s));
    } catch (const std::exception& e) {
      asy1.record_error(e.what());
    }
  }

  try {  // inversion sets vs. independent bubble-sort swap count, all of S_5
    bool all_ok = true;
    for (int L = 1; L <= 5; ++L) {
      std::vector<int> sigma(L);
      for (int i = 0; i < L; ++i) sigma[i] = i + 1;
      do {
        const InversionSet inv = inversion_vertices(Permutation(sigma));
        std::vector<int> work = sigma;
        int swaps = 0;
        for (bool moved = true; moved;) {
          moved = false;
          for (int k = 0; k + 1 < L; ++k)
            if (work[k] > work[k + 1]) {
              std::swap(work[k], work[k + 1]);
              ++swaps;
              moved = true;
            }
        }
        if ((int)inv.pairs.size() != swaps) all_ok = false;
        for (const auto& [a, b] : inv.pairs)
          if (!(a < b && sigma[a - 1] > sigma[b - 1])) all_ok = false;
      } while (std::next_permutation(sigma.begin(), sigma.end()));
    }
    invc.record(all_ok ? 0.0 : 1.0, "exhaustive S_1..S_5");
  } catch (const std::exception& e) {
    invc.record_error(e.what());
  }

  for (auto* c : {&fz, &fz1, &rec, &swap_c, &casc, &invc, &asy1}) rep.add(c->finish());
}

}  // namespace detail

// One-site extension of the B block:
//   B_{L+1}(lam) |s, up>   = c_+(x, th) A_L^{th+g}(lam)|s> (x) |down>
//                          + b_-(x, th) B_L^{th-g}(lam)|s> (x) |up>
//   B_{L+1}(lam) |s, down> = a_-(x, th) B_L^{th+g}(lam)|s> (x) |down>
// with x = lam - mu_{L+1}.  Returns the worst relative deviation over the
// full (L+1)-site basis.
inline double recursion_step_residual(const ModelParams& big, cx lam, const ThetaEvaluator& ev) {
  big.validate();
  if (big.L < 2) throw DimensionMismatch("recursion_step_residual: needs L + 1 >= 2 sites");
  const int L = big.L - 1;
  const ModelParams small(L, big.gamma, big.theta,
                          std::vector<cx>(big.mu.begin(), big.mu.begin() + L),
                          std::vector<cx>(big.lambda.begin(), big.lambda.begin() + L), big.nome);
  const WeightSet w = boltzmann(lam - big.mu[L], big.theta, big.gamma, ev);
  const std::size_t dlow = std::size_t{1} << L;

  double diff = 0.0, scale = 0.0;
  for (std::size_t s = 0; s < (dlow << 1); ++s) {
    const StateVector lhs = apply_block(BlockTag::B, StateVector::basis(L + 1, s), lam,
                                        big.theta, big, ev);
    std::vector<cx> rhs(dlow << 1);
    const std::size_t low = s & (dlow - 1);
    const StateVector base = StateVector::basis(L, low);
    if ((s >> L) == 0) {  // appended site up
      const StateVector ta =
          apply_block(BlockTag::A, base, lam, big.theta + big.gamma, small, ev);
      const StateVector tb =
          apply_block(BlockTag::B, base, lam, big.theta - big.gamma, small, ev);
      for (std::size_t k = 0; k < dlow; ++k) {
        rhs[k | dlow] += w.c_plus * ta[k];
        rhs[k] += w.b_minus * tb[k];
      }
    } else {  // appended site down
      const StateVector tb =
          apply_block(BlockTag::B, base, lam, big.theta + big.gamma, small, ev);
      for (std::size_t k = 0; k < dlow; ++k) rhs[k | dlow] += w.a_minus * tb[k];
    }
    for (std::size_t k = 0; k < rhs.size(); ++k) {
      diff = std::max(diff, std::abs(lhs[k] - rhs[k]));
      scale = std::max({scale, std::abs(lhs[k]), std::abs(rhs[k])});
    }
  }
  return scale > 0.0 ? diff / scale : 0.0;
}

inline ReportDocument run_verify(Suite suite, const VerifyOptions& opt) {
  ReportDocument rep;
  rep.command = "verify";
  rep.rng_seed = opt.seed;
  rep.input = json{{"suite", suite_name(suite)},
                   {"seed", opt.seed},
                   {"samples", opt.samples},
                   {"l_max", opt.l_max}};
  if (opt.p_override) rep.input["p_override"] = to_json(*opt.p_override);
  if (!opt.tol_overrides.empty()) {
    json t = json::object();
    for (const auto& [k, v] : opt.tol_overrides) t[k] = v;
    rep.input["tol_overrides"] = t;
  }

  if (suite == Suite::theta || suite == Suite::all) detail::suite_theta(rep, opt);
  if (suite == Suite::weights || suite == Suite::all) detail::suite_weights(rep, opt);
  if (suite == Suite::monodromy || suite == Suite::all) detail::suite_monodromy(rep, opt);
  if (suite == Suite::partition || suite == Suite::all) detail::suite_partition(rep, opt);
  if (suite == Suite::relations || suite == Suite::all) detail::suite_relations(rep, opt);
  return rep;
}

}  // namespace ellsos
