// Command-line front end.
//
//   ellsos compute  --config params.json            evaluate Z, JSON report
//   ellsos compute  --gamma 0.31 --theta 1.1 ...    same, parameters inline
//   ellsos verify   --suite all --seed 7            run self-check suites
//   ellsos table    --config p.json --sweep ...     CSV sweep over one knob
//
// Exit codes: 0 success, 1 a verification check failed, 2 malformed input,
// 3 the requested point is singular or an evaluation failed to converge.
//
// Reports go to stdout; human-readable progress and diagnostics to stderr.
// Set ELLSOS_THREADS=<n> to compute table rows concurrently; output order
// and bytes are identical to a sequential run.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ellsos/verify.hpp"
#include "ellsos/version.hpp"

namespace {

using namespace ellsos;

// ------------------------------------------------------------- parsing ---

// "re" or "re,im" -> complex
cx parse_complex(const std::string& s, const std::string& what) {
  const auto bad = [&] {
    throw InvalidParameter(what + ": expected 're' or 're,im', got '" + s + "'");
  };
  std::size_t pos = 0;
  double re = 0.0, im = 0.0;
  try {
    re = std::stod(s, &pos);
  } catch (const std::exception&) {
    bad();
  }
  if (pos < s.size()) {
    if (s[pos] != ',') bad();
    std::size_t pos2 = 0;
    const std::string rest = s.substr(pos + 1);
    try {
      im = std::stod(rest, &pos2);
    } catch (const std::exception&) {
      bad();
    }
    if (pos2 != rest.size()) bad();
  }
  return cx{re, im};
}

// "re,im;re,im;..." -> list
std::vector<cx> parse_complex_list(const std::string& s, const std::string& what) {
  std::vector<cx> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) out.push_back(parse_complex(item, what));
  if (out.empty()) throw InvalidParameter(what + ": empty list");
  return out;
}

cx cx_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return cx{j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return cx{j[0].get<double>(), j[1].get<double>()};
  throw InvalidParameter(what + ": expected a number or [re, im] pair");
}

std::vector<cx> cx_list_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw InvalidParameter(what + ": expected a non-empty array");
  std::vector<cx> out;
  for (std::size_t k = 0; k < j.size(); ++k)
    out.push_back(cx_from_json(j[k], what + "[" + std::to_string(k) + "]"));
  return out;
}

// ------------------------------------------------- assembling the model ---

// Raw option values as typed on the command line; validated in build_spec.
struct RawParams {
  std::string config;
  int L = -1;
  std::string gamma, theta, p, tau, mu, lambda;
  std::string method = "auto";
  double epsilon_target = 1e-16;
  int n_max = 64;
  int nodes = 64;
  double radius = 0.0;
  bool has_radius = false;  // set from option counts after parse
  bool has_method = false, has_eps = false, has_nmax = false, has_nodes = false;
};

void add_model_flags(CLI::App* cmd, RawParams& rp) {
  cmd->add_option("--config", rp.config, "JSON parameter file (see README for the schema)");
  cmd->add_option("--L", rp.L, "system size; must match the length of --mu/--lambda");
  cmd->add_option("--gamma", rp.gamma, "crossing parameter, 're' or 're,im'");
  cmd->add_option("--theta", rp.theta, "dynamical parameter, 're' or 're,im'");
  cmd->add_option("--p", rp.p, "elliptic nome, 0 < |p| < 1 (exclusive with --tau)");
  cmd->add_option("--tau", rp.tau, "modular parameter with Im tau > 0 (exclusive with --p)");
  cmd->add_option("--mu", rp.mu, "column inhomogeneities, 're,im;re,im;...'");
  cmd->add_option("--lambda", rp.lambda, "spectral parameters, 're,im;re,im;...'");
  cmd->add_option("--method", rp.method,
                  "bruteforce | permsum | residues | quadrature | closed_l1 | auto");
  cmd->add_option("--epsilon-target", rp.epsilon_target, "theta series truncation target");
  cmd->add_option("--n-max", rp.n_max, "theta series term ceiling");
  cmd->add_option("--nodes", rp.nodes, "quadrature nodes per contour");
  cmd->add_option("--radius", rp.radius, "quadrature contour radius override");
}

void note_presence(const CLI::App* cmd, RawParams& rp) {
  rp.has_radius = cmd->count("--radius") > 0;
  rp.has_method = cmd->count("--method") > 0;
  rp.has_eps = cmd->count("--epsilon-target") > 0;
  rp.has_nmax = cmd->count("--n-max") > 0;
  rp.has_nodes = cmd->count("--nodes") > 0;
}

struct ComputeSpec {
  ModelParams params;
  Method method = Method::automatic;
  double epsilon_target = 1e-16;
  int n_max = 64;
  QuadratureOptions quad{};
};

Method method_or_throw(const std::string& s) {
  const auto m = method_from_name(s);
  if (!m) throw InvalidParameter("unknown method '" + s + "'");
  return *m;
}

ComputeSpec build_spec(const RawParams& rp, const CLI::App* cmd) {
  std::optional<cx> gamma, theta;
  std::optional<Nome> nome;
  std::vector<cx> mu, lambda;
  int L = rp.L;
  std::string method_str = rp.method;
  double eps = rp.epsilon_target;
  int n_max = rp.n_max;
  QuadratureOptions quad;
  quad.nodes = rp.nodes;
  if (rp.has_radius) quad.radius_override = rp.radius;

  if (!rp.config.empty()) {
    for (const char* flag : {"--gamma", "--theta", "--p", "--tau", "--mu", "--lambda", "--L"})
      if (cmd->count(flag) > 0)
        throw InvalidParameter(std::string("--config is exclusive with ") + flag +
                               "; edit the file or drop --config");
    std::ifstream in(rp.config);
    if (!in) throw InvalidParameter("cannot open config file '" + rp.config + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw InvalidParameter("config '" + rp.config + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("params") || !doc["params"].is_object())
      throw InvalidParameter("config must be an object with a 'params' object");
    const json& pj = doc["params"];
    for (const char* key : {"gamma", "theta", "mu", "lambda"})
      if (!pj.contains(key))
        throw InvalidParameter(std::string("config params missing '") + key + "'");
    gamma = cx_from_json(pj["gamma"], "params.gamma");
    theta = cx_from_json(pj["theta"], "params.theta");
    mu = cx_list_from_json(pj["mu"], "params.mu");
    lambda = cx_list_from_json(pj["lambda"], "params.lambda");
    if (pj.contains("p") == pj.contains("tau"))
      throw InvalidParameter("config params: exactly one of 'p' or 'tau' is required");
    nome = pj.contains("p") ? Nome::from_p(cx_from_json(pj["p"], "params.p"))
                            : Nome::from_tau(cx_from_json(pj["tau"], "params.tau"));
    if (pj.contains("L")) {
      if (!pj["L"].is_number_integer()) throw InvalidParameter("params.L must be an integer");
      L = pj["L"].get<int>();
    }
    if (doc.contains("method")) {
      if (!doc["method"].is_string()) throw InvalidParameter("'method' must be a string");
      if (!rp.has_method) method_str = doc["method"].get<std::string>();
    }
    if (doc.contains("theta_opts")) {
      const json& t = doc["theta_opts"];
      if (!t.is_object()) throw InvalidParameter("'theta_opts' must be an object");
      if (t.contains("epsilon_target") && !rp.has_eps) eps = t["epsilon_target"].get<double>();
      if (t.contains("n_max") && !rp.has_nmax) n_max = t["n_max"].get<int>();
    }
    if (doc.contains("quadrature_opts")) {
      const json& q = doc["quadrature_opts"];
      if (!q.is_object()) throw InvalidParameter("'quadrature_opts' must be an object");
      if (q.contains("nodes") && !rp.has_nodes) quad.nodes = q["nodes"].get<int>();
      if (q.contains("radius_override") && !rp.has_radius)
        quad.radius_override = q["radius_override"].get<double>();
    }
  } else {
    const std::pair<const char*, const std::string*> required[] = {
        {"--gamma", &rp.gamma}, {"--theta", &rp.theta}, {"--mu", &rp.mu},
        {"--lambda", &rp.lambda}};
    for (const auto& [flag, val] : required)
      if (val->empty())
        throw InvalidParameter(std::string(flag) + " is required when no --config is given");
    if (rp.p.empty() == rp.tau.empty())
      throw InvalidParameter("exactly one of --p or --tau is required");
    gamma = parse_complex(rp.gamma, "--gamma");
    theta = parse_complex(rp.theta, "--theta");
    mu = parse_complex_list(rp.mu, "--mu");
    lambda = parse_complex_list(rp.lambda, "--lambda");
    nome = rp.p.empty() ? Nome::from_tau(parse_complex(rp.tau, "--tau"))
                        : Nome::from_p(parse_complex(rp.p, "--p"));
  }

  const int n_lambda = int(lambda.size());
  if (L >= 0 && L != n_lambda)
    throw InvalidParameter("L = " + std::to_string(L) + " but " +
                           std::to_string(n_lambda) + " spectral parameters were given");
  if (quad.nodes < 4) throw InvalidParameter("--nodes must be at least 4");
  if (quad.radius_override && *quad.radius_override <= 0.0)
    throw InvalidParameter("--radius must be positive");

  return ComputeSpec{
      ModelParams(n_lambda, *gamma, *theta, std::move(mu), std::move(lambda), *nome),
      method_or_throw(method_str), eps, n_max, quad};
}

json echo_input(const ComputeSpec& s) {
  json p;
  p["L"] = s.params.L;
  p["gamma"] = to_json(s.params.gamma);
  p["theta"] = to_json(s.params.theta);
  p["tau"] = to_json(s.params.nome.tau);
  p["p"] = to_json(s.params.nome.p);
  p["mu"] = json::array();
  for (const cx& m : s.params.mu) p["mu"].push_back(to_json(m));
  p["lambda"] = json::array();
  for (const cx& l : s.params.lambda) p["lambda"].push_back(to_json(l));
  json root;
  root["params"] = p;
  root["method"] = method_name(s.method);
  root["theta_opts"] = {{"epsilon_target", s.epsilon_target}, {"n_max", s.n_max}};
  root["quadrature_opts"] = {{"nodes", s.quad.nodes}};
  if (s.quad.radius_override) root["quadrature_opts"]["radius_override"] = *s.quad.radius_override;
  return root;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ------------------------------------------------------------- compute ---

int cmd_compute(const ComputeSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  ReportDocument rep;
  rep.command = "compute";
  rep.input = echo_input(spec);

  const ThetaEvaluator ev(spec.params.nome, spec.n_max, spec.epsilon_target);
  const cx z = evaluate_z(spec.params, spec.method, ev, spec.quad);

  CheckResult r;
  r.name = "z";
  r.context = method_name(resolve_method(spec.method, spec.params.L));
  r.value = z;
  rep.add(std::move(r));
  rep.total_ms = elapsed_ms(t0);
  std::cout << rep.to_json_obj().dump(2) << "\n";
  return 0;
}

// -------------------------------------------------------------- verify ---

std::map<std::string, double> parse_tols(const std::vector<std::string>& raw) {
  std::map<std::string, double> out;
  for (const std::string& s : raw) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InvalidParameter("--tol expects name=value, got '" + s + "'");
    const std::string name = s.substr(0, eq);
    const auto& known = known_check_names();
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw InvalidParameter("--tol: unknown check '" + name + "'");
    try {
      out[name] = std::stod(s.substr(eq + 1));
    } catch (const std::exception&) {
      throw InvalidParameter("--tol " + s + ": value is not a number");
    }
  }
  return out;
}

int cmd_verify(Suite suite, const VerifyOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  ReportDocument rep = run_verify(suite, opt);
  rep.total_ms = elapsed_ms(t0);

  for (const CheckResult& r : rep.results) {
    std::string detail;
    if (r.residual) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%10.3e (tol %.1e)", *r.residual,
                    r.tolerance ? *r.tolerance : 0.0);
      detail = buf;
    }
    std::fprintf(stderr, "[%s] %-32s %s %s%s\n", r.pass ? " ok " : "FAIL", r.name.c_str(),
                 detail.c_str(), r.context.c_str(),
                 r.note.empty() ? "" : ("  [" + r.note + "]").c_str());
  }
  std::fprintf(stderr, "%s: %zu checks, %s\n", rep.command.c_str(), rep.results.size(),
               rep.pass ? "all passed" : "FAILURES above");
  std::cout << rep.to_json_obj().dump(2) << "\n";
  return rep.pass ? 0 : 1;
}

// --------------------------------------------------------------- table ---

struct SweepSpec {
  std::string param;  // gamma | theta | p | lambda<j> | mu<j>
  double start = 0.0, stop = 0.0;
  int count = 0;
};

SweepSpec parse_sweep(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4)
    throw InvalidParameter("--sweep expects param:start:stop:count, got '" + s + "'");
  SweepSpec sw;
  sw.param = parts[0];
  try {
    sw.start = std::stod(parts[1]);
    sw.stop = std::stod(parts[2]);
    sw.count = std::stoi(parts[3]);
  } catch (const std::exception&) {
    throw InvalidParameter("--sweep '" + s + "': start/stop/count must be numeric");
  }
  if (sw.count < 1) throw InvalidParameter("--sweep count must be >= 1");
  return sw;
}

// Index into lambda/mu for "lambda3"-style names; 0 when param is scalar.
int sweep_slot(const SweepSpec& sw, const ModelParams& params) {
  const auto tail_index = [&](std::size_t prefix_len, int limit, const char* kind) {
    int j = 0;
    try {
      std::size_t pos = 0;
      j = std::stoi(sw.param.substr(prefix_len), &pos);
      if (pos != sw.param.size() - prefix_len) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw InvalidParameter("--sweep: bad parameter name '" + sw.param + "'");
    }
    if (j < 1 || j > limit)
      throw InvalidParameter("--sweep: " + std::string(kind) + " index " + std::to_string(j) +
                             " out of range 1.." + std::to_string(limit));
    return j;
  };
  if (sw.param == "gamma" || sw.param == "theta" || sw.param == "p") return 0;
  if (sw.param.rfind("lambda", 0) == 0) return tail_index(6, params.L, "lambda");
  if (sw.param.rfind("mu", 0) == 0) return tail_index(2, params.L, "mu");
  throw InvalidParameter("--sweep: unknown parameter '" + sw.param +
                         "' (gamma, theta, p, lambda<j>, mu<j>)");
}

// Move one knob to real part v, keeping its imaginary part.
ModelParams at_sweep_value(const ModelParams& base, const SweepSpec& sw, int slot, double v) {
  ModelParams p = base;
  if (sw.param == "gamma") p.gamma = cx{v, base.gamma.imag()};
  else if (sw.param == "theta") p.theta = cx{v, base.theta.imag()};
  else if (sw.param == "p") p.nome = Nome::from_p(cx{v, base.nome.p.imag()});
  else if (sw.param[0] == 'l') p.lambda[slot - 1] = cx{v, base.lambda[slot - 1].imag()};
  else p.mu[slot - 1] = cx{v, base.mu[slot - 1].imag()};
  return p;
}

std::string csv_row(const ComputeSpec& base, const SweepSpec& sw, int slot, double v,
                    std::optional<Method> cross) {
  char buf[256];
  std::string status = "ok";
  std::optional<cx> z;
  std::optional<double> cross_resid;
  try {
    const ModelParams params = at_sweep_value(base.params, sw, slot, v);
    const ThetaEvaluator ev(params.nome, base.n_max, base.epsilon_target);
    const cx zv = evaluate_z(params, base.method, ev, base.quad);
    z = zv;
    if (cross) {
      const cx z2 = evaluate_z(params, *cross, ev, base.quad);
      const double sc = std::max(std::abs(zv), std::abs(z2));
      cross_resid = sc > 0.0 ? std::abs(zv - z2) / sc : 0.0;
    }
  } catch (const SingularDynamicalParameter&) {
    status = "singular";
  } catch (const SingularCoefficient&) {
    status = "singular";
  } catch (const ContourTooTight&) {
    status = "singular";
  } catch (const NonConvergent&) {
    status = "nonconvergent";
  } catch (const TermBudgetExceeded&) {
    status = "nonconvergent";
  } catch (const std::invalid_argument&) {
    status = "invalid";
  }

  std::string row;
  std::snprintf(buf, sizeof buf, "%.17g", v);
  row += buf;
  if (z) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g", z->real(), z->imag());
    row += buf;
  } else {
    row += ",,";
  }
  row += ",";
  row += method_name(resolve_method(base.method, base.params.L));
  row += "," + status;
  if (cross) {
    if (cross_resid) {
      std::snprintf(buf, sizeof buf, ",%.17g", *cross_resid);
      row += buf;
    } else {
      row += ",";
    }
  }
  row += "\n";
  return row;
}

int cmd_table(const ComputeSpec& spec, const SweepSpec& sw, std::optional<Method> cross) {
  const int slot = sweep_slot(sw, spec.params);

  std::string header = "value,re_z,im_z,method,status";
  if (cross) header += ",cross_residual";
  std::vector<std::string> rows(sw.count);

  const auto value_at = [&](int k) {
    return sw.count == 1 ? sw.start
                         : sw.start + (sw.stop - sw.start) * double(k) / double(sw.count - 1);
  };

  int n_threads = 1;
  if (const char* env = std::getenv("ELLSOS_THREADS")) n_threads = std::max(1, std::atoi(env));
  n_threads = std::min<int>(n_threads, sw.count);

  if (n_threads > 1) {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (int k = next.fetch_add(1); k < sw.count; k = next.fetch_add(1))
          rows[k] = csv_row(spec, sw, slot, value_at(k), cross);
      });
    for (std::thread& t : pool) t.join();
  } else {
    for (int k = 0; k < sw.count; ++k) rows[k] = csv_row(spec, sw, slot, value_at(k), cross);
  }

  std::cout << header << "\n";
  for (const std::string& r : rows) std::cout << r;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"domain-wall partition function of the elliptic SOS model"};
  app.set_version_flag("--version", std::string("ellsos ") + ellsos::version);
  app.require_subcommand(1);

  RawParams comp_raw, tab_raw;
  CLI::App* comp = app.add_subcommand("compute", "evaluate Z once and emit a JSON report");
  add_model_flags(comp, comp_raw);

  CLI::App* verf = app.add_subcommand("verify", "run randomized self-check suites");
  std::string suite_str = "all";
  VerifyOptions vopt;
  std::vector<std::string> tol_raw;
  std::string p_override_str;
  verf->add_option("--suite", suite_str, "theta | weights | monodromy | partition | relations | all");
  verf->add_option("--seed", vopt.seed, "RNG seed (same seed => identical report)");
  verf->add_option("--samples", vopt.samples, "random draws per suite")->check(CLI::PositiveNumber);
  verf->add_option("--l-max", vopt.l_max, "largest system size exercised")
      ->check(CLI::Range(1, 8));
  verf->add_option("--tol", tol_raw, "override a check tolerance, name=value")
      ->take_all();
  verf->add_option("--p", p_override_str, "force the elliptic nome for every draw");
  verf->add_option("--n-max", vopt.n_max, "theta series term ceiling");
  verf->add_option("--epsilon-target", vopt.epsilon_target, "theta series truncation target");

  CLI::App* tab = app.add_subcommand("table", "sweep one parameter, emit CSV");
  add_model_flags(tab, tab_raw);
  std::string sweep_str, cross_str;
  tab->add_option("--sweep", sweep_str, "param:start:stop:count (moves the real part)")
      ->required();
  tab->add_option("--cross", cross_str, "also evaluate with this method, report |diff|/|Z|");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (comp->parsed()) {
      note_presence(comp, comp_raw);
      const ComputeSpec spec = build_spec(comp_raw, comp);
      return cmd_compute(spec);
    }
    if (verf->parsed()) {
      const auto suite = suite_from_name(suite_str);
      if (!suite) throw InvalidParameter("unknown suite '" + suite_str + "'");
      vopt.tol_overrides = parse_tols(tol_raw);
      if (!p_override_str.empty())
        vopt.p_override = parse_complex(p_override_str, "--p");
      if (vopt.n_max < 1) throw InvalidParameter("--n-max must be positive");
      return cmd_verify(*suite, vopt);
    }
    note_presence(tab, tab_raw);
    const ComputeSpec spec = build_spec(tab_raw, tab);
    std::optional<Method> cross;
    if (!cross_str.empty()) cross = method_or_throw(cross_str);
    return cmd_table(spec, parse_sweep(sweep_str), cross);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "ellsos: %s\n", e.what());
    return 2;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "ellsos: config: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ellsos: %s\n", e.what());
    return 3;
  }
}
