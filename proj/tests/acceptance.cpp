// Acceptance gate: ten end-to-end criteria, one line of output each.
// Every tolerance and time budget is pinned here, next to the check it
// governs.  Exits 0 only if all ten pass.  argv[1] must point at the CLI
// binary (criterion 10 drives it as a subprocess).

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ellsos/relations.hpp"
#include "ellsos/sampling.hpp"

using namespace ellsos;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double rel(cx a, cx b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

// ---- 1: theta-function identities ---------------------------------------
// oddness, both quasi-periods, three-term addition rule; 100 draws spread
// over three nomes.
Outcome c1_theta() {
  constexpr double tol = 1e-12;
  ParameterSampler smp(401);
  DrawOptions dopt;
  double worst = 0.0;
  for (double p : {0.05, 0.2, 0.4}) {
    const Nome nome = Nome::from_p(cx{p, 0.0});
    const ThetaEvaluator ev(nome);
    for (int k = 0; k < 34; ++k) {
      const cx lam = smp.scalar(dopt);
      const cx f = eval_f(lam, ev);
      const double mag = std::max(std::abs(f), ev.scale());
      worst = std::max(worst, std::abs(eval_f(-lam, ev) + f) / mag);
      worst = std::max(worst, std::abs(eval_f(lam - i_pi, ev) + f) / mag);
      const cx mult = std::exp(2.0 * lam - i_pi * nome.tau);
      worst = std::max(worst, std::abs(eval_f(lam - i_pi * nome.tau, ev) + mult * f) /
                                  std::max(std::abs(mult * f), ev.scale()));
      const cx l2 = smp.scalar(dopt), l3 = smp.scalar(dopt), l4 = smp.scalar(dopt);
      const auto t = addition_terms(lam, l2, l3, l4, ev);
      const double ts =
          std::max({std::abs(t[0]), std::abs(t[1]), std::abs(t[2]), ev.scale()});
      worst = std::max(worst, std::abs(t[0] - t[1] - t[2]) / ts);
    }
  }
  return {worst < tol, fmt("max residual %.1e (tol %.0e)", worst, tol)};
}

// ---- 2: trigonometric limit ----------------------------------------------
// deviation from the p -> 0 profile obeys a linear bound in p and decays
// with slope >= 0.9 (measured: quadratic).
Outcome c2_trig() {
  const cx lam{0.7, 0.0};
  const double p0 = 1e-4;
  const double d0 = trig_limit_deviation(lam, p0);
  const double C = d0 / p0;  // calibrated at the largest nome
  bool ok = true;
  double worst_ratio = 0.0;
  for (double p : {1e-4, 1e-5, 1e-6}) {
    const double ratio = trig_limit_deviation(lam, p) / (1.05 * C * p);
    worst_ratio = std::max(worst_ratio, ratio);
    ok = ok && ratio <= 1.0;
  }
  const double slope =
      std::log(d0 / trig_limit_deviation(lam, 1e-6)) / std::log(p0 / 1e-6);
  ok = ok && slope >= 0.9;
  return {ok, fmt("bound ratio %.2f (<= 1), decay slope %.2f (>= 0.9)", worst_ratio, slope)};
}

// ---- 3: Yang-Baxter and spin conservation --------------------------------
Outcome c3_dybe() {
  constexpr double tol = 1e-12;
  ParameterSampler smp(403);
  DrawOptions dopt;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Draw d = smp.draw(1, dopt);
    const cx l2 = smp.scalar(dopt), l3 = smp.scalar(dopt);
    worst = std::max(worst,
                     dybe_residual(d.params.lambda[0], l2, l3, d.params.theta,
                                   d.params.gamma, d.ev));
    worst = std::max(worst, weight_zero_residual(d.params.lambda[0], d.params.theta,
                                                 d.params.gamma, d.ev));
  }
  return {worst < tol, fmt("max residual %.1e (tol %.0e)", worst, tol)};
}

// ---- 4: action of the row operators --------------------------------------
// diagonal action on the extremal states (L <= 5) and the two exchange
// relations (L <= 3).
Outcome c4_algebra() {
  constexpr double tol_action = 1e-12, tol_comm = 1e-11;
  ParameterSampler smp(405);
  DrawOptions dopt;
  double worst_a = 0.0, worst_c = 0.0;
  for (int L = 1; L <= 5; ++L)
    for (int k = 0; k < 20; ++k) {
      const Draw d = smp.draw(L, dopt);
      const cx lam = smp.scalar(dopt);
      {
        const StateVector v =
            apply_block(BlockTag::A, StateVector::basis(L, 0), lam, d.params.theta,
                        d.params, d.ev);
        cx want{1.0, 0.0};
        for (const cx& m : d.params.mu) want *= eval_f(lam - m + d.params.gamma, d.ev);
        double off = 0.0;
        for (std::size_t s = 1; s < v.dim(); ++s) off = std::max(off, std::abs(v[s]));
        worst_a = std::max(worst_a,
                           std::max(std::abs(v[0] - want), off) / std::abs(want));
      }
      {
        const std::size_t bot = (std::size_t{1} << L) - 1;
        const StateVector v = apply_block(BlockTag::A, StateVector::basis(L, bot), lam,
                                          d.params.theta, d.params, d.ev);
        cx want = eval_f(d.params.theta - d.params.gamma, d.ev) /
                  eval_f(d.params.theta + double(L - 1) * d.params.gamma, d.ev);
        for (const cx& m : d.params.mu) want *= eval_f(lam - m, d.ev);
        double off = 0.0;
        for (std::size_t s = 0; s < bot; ++s) off = std::max(off, std::abs(v[s]));
        worst_a = std::max(worst_a,
                           std::max(std::abs(v[bot] - want), off) / std::abs(want));
      }
      if (L <= 3 && k < 10) {
        const cx l2 = smp.scalar(dopt);
        worst_c = std::max(worst_c,
                           commutation_residual_BB(lam, l2, d.params.theta, d.params, d.ev));
        worst_c = std::max(worst_c,
                           commutation_residual_AB(lam, l2, d.params.theta, d.params, d.ev));
      }
    }
  return {worst_a < tol_action && worst_c < tol_comm,
          fmt("action %.1e (tol %.0e), exchange %.1e (tol %.0e)", worst_a, tol_action,
              worst_c, tol_comm)};
}

// ---- 5: four independent evaluations agree --------------------------------
Outcome c5_methods() {
  constexpr double tol_exact = 1e-10;  // permsum / bruteforce / residues
  constexpr double tol_quad2 = 1e-8, tol_quad3 = 1e-7;
  ParameterSampler smp(407);
  DrawOptions dopt;
  double worst_pb = 0.0, worst_rp = 0.0, worst_q = 0.0;
  for (int L = 1; L <= 5; ++L)
    for (int k = 0; k < 25; ++k) {
      const Draw d = smp.draw(L, dopt);
      const cx zp = z_perm_sum(d.params, d.ev);
      worst_pb = std::max(worst_pb, rel(zp, z_bruteforce(d.params, d.ev)));
      if (L <= 4) worst_rp = std::max(worst_rp, rel(zp, z_residues(d.params, d.ev)));
    }
  bool ok_quad = true;
  for (int L = 1; L <= 3; ++L)
    for (int k = 0; k < 25; ++k) {
      DrawOptions cl = dopt;
      cl.lambda_cluster_radius = 0.3;
      const Draw d = smp.draw(L, cl);
      const cx zq = z_quadrature(d.params, make_contour_balanced(d.params, 64), d.ev);
      const double r = rel(zq, z_residues(d.params, d.ev));
      worst_q = std::max(worst_q, r);
      ok_quad = ok_quad && r < (L <= 2 ? tol_quad2 : tol_quad3);
    }
  const bool ok = worst_pb < tol_exact && worst_rp < tol_exact && ok_quad;
  return {ok, fmt("sum/transfer %.1e, residue %.1e (tol %.0e), quadrature %.1e (tol %.0e)",
                  worst_pb, worst_rp, tol_exact, worst_q, tol_quad3)};
}

// ---- 6: mixed functional equation -----------------------------------------
Outcome c6_functional() {
  constexpr double tol = 1e-9, tol_l1 = 1e-13;
  ParameterSampler smp(409);
  DrawOptions dopt;
  double worst = 0.0, worst_l1 = 0.0;
  for (int L = 1; L <= 4; ++L)
    for (int k = 0; k < 25; ++k) {
      const Draw d = smp.draw(L, dopt);
      const cx lam0 = smp.scalar(dopt);
      for (Method m : {Method::permsum, Method::bruteforce, Method::residues})
        worst = std::max(worst, std::abs(functional_residual(d.params, lam0, m, d.ev)));
      if (L == 1)
        worst_l1 = std::max(
            worst_l1, std::abs(functional_residual(d.params, lam0, Method::closed_l1, d.ev)));
    }
  return {worst < tol && worst_l1 < tol_l1,
          fmt("max residual %.1e (tol %.0e), closed form %.1e (tol %.0e)", worst, tol,
              worst_l1, tol_l1)};
}

// ---- 7: recursion in the system size --------------------------------------
Outcome c7_recursion() {
  constexpr double tol = 1e-9;
  ParameterSampler smp(411);
  DrawOptions dopt;
  double worst = 0.0;
  for (int L = 2; L <= 4; ++L)
    for (int k = 0; k < 25; ++k) {
      const Draw d = smp.draw(L, dopt);
      worst = std::max(worst, std::abs(recursion_residual(d.params, d.ev)));
    }
  return {worst < tol, fmt("max residual %.1e (tol %.0e)", worst, tol)};
}

// ---- 8: exchange symmetry and the special zeroes ---------------------------
Outcome c8_symmetry() {
  constexpr double tol_sym = 1e-11, tol_zero = 1e-10;
  ParameterSampler smp(413);
  DrawOptions dopt;
  double worst_s = 0.0, worst_z = 0.0;
  for (int L = 2; L <= 5; ++L)
    for (int k = 0; k < 10; ++k) {
      const Draw d = smp.draw(L, dopt);
      const int i = 1 + int(smp.uniform(0.0, L - 1e-9));
      int j = 1 + int(smp.uniform(0.0, L - 1e-9));
      if (j == i) j = (i % L) + 1;
      worst_s = std::max(worst_s, std::abs(symmetry_residual(d.params, std::min(i, j),
                                                             std::max(i, j), d.ev)));
    }
  for (int L = 2; L <= 5; ++L) {
    const Draw d = smp.draw(L, dopt);
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j) {
        if (i == j) continue;
        ModelParams mp = d.params;
        mp.lambda[i] = mp.mu[0];
        mp.lambda[j] = mp.mu[0] - mp.gamma;
        const double z0 = std::abs(z_perm_sum(mp, d.ev));
        std::vector<double> mags;
        for (int t = 0; t < 5; ++t) {
          ModelParams pert = mp;
          pert.lambda[i] += 0.25 * smp.scalar(dopt);
          pert.lambda[j] += 0.25 * smp.scalar(dopt);
          mags.push_back(std::abs(z_perm_sum(pert, d.ev)));
        }
        std::nth_element(mags.begin(), mags.begin() + 2, mags.end());
        worst_z = std::max(worst_z, z0 / mags[2]);
      }
  }
  return {worst_s < tol_sym && worst_z < tol_zero,
          fmt("exchange %.1e (tol %.0e), zero/median %.1e (tol %.0e)", worst_s, tol_sym,
              worst_z, tol_zero)};
}

// ---- 9: large-argument limit series ----------------------------------------
Outcome c9_asymptotics() {
  constexpr double tol_l2 = 1e-13;
  ParameterSampler smp(419);
  DrawOptions dopt;
  bool l1_exact = true;
  for (int k = 0; k < 50; ++k) {
    const Draw d = smp.draw(1, dopt);
    l1_exact = l1_exact &&
               asy_eval(d.params, AsymptoticSpec{}, d.ev) == eval_f(d.params.gamma, d.ev);
  }
  double worst2 = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Draw d = smp.draw(2, dopt);
    const cx got = asy_eval(d.params, AsymptoticSpec{.n_cut = 3}, d.ev);
    // independent transcription of the two-row double sum
    const cx fg = eval_f(d.params.gamma, d.ev);
    const auto pn = [&](int n) {
      return std::exp(i_pi * d.params.nome.tau * ((n + 0.5) * (n + 0.5)));
    };
    const auto qn = [&](int n) { return std::exp(-(2.0 * n + 1.0) * d.params.gamma); };
    const auto en = [&](int n, cx x) { return std::exp(-(2.0 * n + 1.0) * x); };
    cx s{};
    for (int n1 = -3; n1 <= 3; ++n1)
      for (int n2 = -3; n2 <= 3; ++n2) {
        const double sgn = ((n1 + n2 - 1) % 2 + 2) % 2 ? -1.0 : 1.0;
        cx term = sgn * pn(n1) * qn(n1) * en(n1, d.params.lambda[0] - d.params.mu[1]) *
                  pn(n2) * qn(n2) * en(n2, d.params.lambda[1] - d.params.mu[0]);
        term *= cx{1.0, 0.0} + 1.0 / (qn(n1) * qn(n2));
        s += term;
      }
    worst2 = std::max(worst2, std::abs(got - fg * fg / 4.0 * s) / std::abs(got));
  }
  bool inv_ok = true;
  for (int L = 1; L <= 5; ++L) {
    std::vector<int> sigma(L);
    for (int i = 0; i < L; ++i) sigma[i] = i + 1;
    do {
      const InversionSet vs = inversion_vertices(Permutation(sigma));
      int count = 0;
      for (int a = 0; a < L; ++a)
        for (int b = a + 1; b < L; ++b)
          if (sigma[a] > sigma[b]) ++count;
      inv_ok = inv_ok && (int)vs.pairs.size() == count;
      for (const auto& [a, b] : vs.pairs)
        inv_ok = inv_ok && a < b && sigma[a - 1] > sigma[b - 1];
    } while (std::next_permutation(sigma.begin(), sigma.end()));
  }
  return {l1_exact && worst2 < tol_l2 && inv_ok,
          fmt("one-row exact: %s, two-row %.1e (tol %.0e), inversions %s",
              l1_exact ? "yes" : "NO", worst2, tol_l2, inv_ok ? "ok" : "WRONG")};
}

// ---- 10: command-line interface --------------------------------------------
struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& cmd) {
  RunResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string strip_timings(const std::string& s) {
  std::istringstream in(s);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("\"timings_ms\"") == std::string::npos &&
        line.find("\"total\"") == std::string::npos)
      out << line << "\n";
  return out.str();
}

Outcome c10_cli(const std::string& cli) {
  if (cli.empty()) return {false, "no CLI binary path supplied"};
  std::vector<std::string> bad;
  const auto expect = [&](bool ok, const char* what) {
    if (!ok) bad.emplace_back(what);
  };

  const auto tmp = std::filesystem::temp_directory_path() /
                   ("ellsos_acceptance_" + std::to_string(getpid()));
  std::filesystem::create_directories(tmp);

  {  // a report computed through the config file matches the library
    const auto cfg = tmp / "params.json";
    std::ofstream(cfg) << R"({
      "params": {"gamma": 0.31, "theta": 1.07, "p": 0.1,
                 "mu": [[0.12, 0.02], [-0.2, 0.1]],
                 "lambda": [[0.55, -0.04], [0.1, 0.2]]},
      "method": "permsum"
    })";
    const ModelParams mp(2, cx{0.31, 0}, cx{1.07, 0}, {cx{0.12, 0.02}, cx{-0.2, 0.1}},
                         {cx{0.55, -0.04}, cx{0.1, 0.2}}, Nome::from_p(cx{0.1, 0}));
    const cx want = z_perm_sum(mp, ThetaEvaluator(mp.nome));
    const RunResult r = run(cli + " compute --config \"" + cfg.string() + "\"");
    expect(r.code == 0, "compute exit 0");
    const auto doc = nlohmann::json::parse(r.out, nullptr, false);
    if (doc.is_discarded() || !doc.contains("results")) {
      expect(false, "compute JSON report");
    } else {
      const cx got{doc["results"][0]["value"][0].get<double>(),
                   doc["results"][0]["value"][1].get<double>()};
      expect(std::abs(got - want) <= 1e-14 * std::abs(want), "compute value");
    }
  }

  expect(run(cli + " compute --gamma 0.3 --p 0.1 --mu 0.1 --lambda 0.5 2>/dev/null")
             .code == 2,
         "malformed input -> 2");
  expect(run(cli + " compute --gamma 0.3 --theta 1.1 --p 0.1 --mu \"0.1;0.2\""
                   " --lambda \"0.4;0.4\" --method permsum 2>/dev/null")
             .code == 3,
         "coincident spectral parameters -> 3");
  expect(run(cli + " verify --suite weights --samples 4 --tol dybe=1e-30 2>/dev/null")
             .code == 1,
         "failed check -> 1");

  {  // same seed twice: identical bytes once timings are removed
    const std::string vcmd =
        cli + " verify --suite relations --seed 31 --samples 3 2>/dev/null";
    const RunResult a = run(vcmd), b = run(vcmd);
    expect(a.code == 0 && b.code == 0, "verify exit 0");
    expect(strip_timings(a.out) == strip_timings(b.out), "deterministic report");
  }

  {  // sweeping lambda_1 through mu_1 (with lambda_2 = mu_1 - gamma held)
     // exposes the special zero as a sharp dip at the nearest grid point
    const RunResult r =
        run(cli + " table --gamma 0.33 --theta 1.1 --p 0.1 --mu \"0.15;0.02;0.27\""
                  " --lambda \"0.0;-0.18;0.42\" --method permsum"
                  " --sweep lambda1:-0.35:0.65:11");
    expect(r.code == 0, "table exit 0");
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> absz;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string v, re, im;
      std::getline(ls, v, ',');
      std::getline(ls, re, ',');
      std::getline(ls, im, ',');
      if (re.empty())
        absz.push_back(-1.0);  // singular rows must not happen here
      else
        absz.push_back(std::hypot(std::stod(re), std::stod(im)));
    }
    if ((int)absz.size() != 11) {
      expect(false, "table row count");
    } else {
      int arg_min = 0;
      std::vector<double> sorted;
      for (int k = 0; k < 11; ++k) {
        expect(absz[k] >= 0.0, "row evaluates");
        sorted.push_back(absz[k]);
        if (absz[k] < absz[arg_min]) arg_min = k;
      }
      std::sort(sorted.begin(), sorted.end());
      // grid point 5 sits on top of mu_1 = 0.15
      expect(arg_min == 5, "dip at the nearest grid point to mu_1");
      expect(absz[5] < 1e-10 * sorted[5], "dip depth below 1e-10 of the median");
    }
  }

  std::filesystem::remove_all(tmp);
  if (bad.empty()) return {true, "compute/verify/table exit codes, report determinism, sweep dip"};
  std::string d = "failed:";
  for (const std::string& b : bad) d += " [" + b + "]";
  return {false, d};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  struct Row {
    const char* name;
    Outcome (*fn)();
    double budget_ms;
  };
  const Row rows[] = {
      {"theta-function identities", c1_theta, 1000},
      {"trigonometric limit", c2_trig, 1000},
      {"yang-baxter and spin conservation", c3_dybe, 1000},
      {"row-operator actions", c4_algebra, 5000},
      {"four-method agreement", c5_methods, 60000},
      {"functional equation", c6_functional, 30000},
      {"size recursion", c7_recursion, 10000},
      {"symmetry and special zeroes", c8_symmetry, 10000},
      {"asymptotic series", c9_asymptotics, 5000},
  };

  bool all = true;
  int id = 0;
  for (const Row& row : rows) {
    ++id;
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = row.fn();
    const double ms = ms_since(t0);
    const bool ok = o.pass && ms <= row.budget_ms;
    all = all && ok;
    std::printf("[%s] %2d %-36s %s, %.0f ms (budget %.0f ms)\n", ok ? "PASS" : "FAIL", id,
                row.name, o.detail.c_str(), ms, row.budget_ms);
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = c10_cli(cli);
    const double ms = ms_since(t0);
    constexpr double budget = 5000;
    const bool ok = o.pass && ms <= budget;
    all = all && ok;
    std::printf("[%s] %2d %-36s %s, %.0f ms (budget %.0f ms)\n", ok ? "PASS" : "FAIL", 10,
                "command-line interface", o.detail.c_str(), ms, budget);
  }
  return all ? 0 : 1;
}
