#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "prpoint/errors.hpp"
#include "prpoint/padic_height.hpp"
#include "prpoint/verify.hpp"

using namespace prpoint;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitInput = 3;
constexpr int kExitInconclusive = 2;

struct Args {
  std::string curve;
  Int N = 0;
  Int p = 0;
  int M = 8;
  int depth = 0;    // 0: M + 2
  int moments = 0;  // 0: M + 3
  Int height_bound = 1000;
  Int generator_bound = 1000;
  std::string point;
  std::string cache;
  bool no_cache = false;
  bool json = false;
  bool corrupt_delta = false;
  bool swap_roots = false;
};

std::string default_cache_dir() {
  if (const char* env = std::getenv("PRPOINT_CACHE")) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME")) return std::string(xdg) + "/prpoint";
  if (const char* home = std::getenv("HOME")) return std::string(home) + "/.cache/prpoint";
  return ".prpoint-cache";
}

PipelineOptions options_for(const Args& a) {
  PipelineOptions o;
  o.cache_dir = a.no_cache ? "" : (a.cache.empty() ? default_cache_dir() : a.cache);
  o.generator_bound = a.generator_bound;
  if (a.moments > 0) {
    if (a.moments < a.M) throw InvalidInput("--moments must be at least --prec");
    o.extra_digits = a.moments - a.M;
  }
  return o;
}

CurveQ curve_of(const Args& a) {
  if (a.curve.empty() || a.N <= 0) throw InvalidInput("--curve and --N are required");
  return CurveQ::parse(a.curve, a.N);
}

// Key/value report for the informational subcommands.
struct Table {
  explicit Table(std::string t) : title(std::move(t)) {}
  std::string title;
  std::vector<std::pair<std::string, std::string>> rows;
  void add(const std::string& k, const std::string& v) { rows.emplace_back(k, v); }
  void add(const std::string& k, const PadicNumber& v) { rows.emplace_back(k, v.to_string()); }
  void add(const std::string& k, Int v) { rows.emplace_back(k, std::to_string(v)); }
};

void print(const Table& t, bool json) {
  if (json) {
    Json j;
    j["command"] = t.title;
    for (const auto& [k, v] : t.rows) j[k] = v;
    std::cout << j.dump(2) << "\n";
    return;
  }
  size_t w = 0;
  for (const auto& kv : t.rows) w = std::max(w, kv.first.size());
  std::cout << t.title << "\n";
  for (const auto& [k, v] : t.rows) std::cout << "  " << std::left << std::setw(static_cast<int>(w)) << k << "  " << v << "\n";
}

std::string real_text(const RealScalar& x) {
  std::ostringstream o;
  o << std::setprecision(15) << x.value;
  if (x.exact) return o.str() + " (exact)";
  o << " +- " << std::setprecision(2) << x.error;
  return o.str();
}

// Smallest odd prime of good reduction, for commands whose output does not
// depend on p.
Int good_prime(const CurveQ& E) {
  for (Int q = 3;; q += 2)
    if (modarith::is_prime(q) && E.has_good_reduction(q)) return q;
}

void warn_rank(const CurveQ& E) {
  if (functional_equation_sign(E) != -1)
    std::cerr << "warning: root number +1; the curve is not of analytic rank one\n";
}

int cmd_ap(const Args& a) {
  const CurveQ E = curve_of(a);
  Table t{"ap"};
  t.add("curve", E.to_string());
  t.add("p", a.p);
  if (!modarith::is_prime(a.p)) throw InvalidInput("p must be prime");
  if (!E.has_good_reduction(a.p)) {
    t.add("reduction", "bad");
  } else {
    const Int ap = count_points_ap(E, a.p);
    t.add("a_p", ap);
    t.add("#E(F_p)", count_points(E, a.p));
    t.add("reduction", ap % a.p == 0 ? "supersingular" : (count_points(E, a.p) % a.p == 0 ? "ordinary, anomalous" : "ordinary"));
  }
  print(t, a.json);
  return 0;
}

int cmd_roots(const Args& a) {
  const CurveQ E = curve_of(a);
  const HeckeRoots r = hecke_roots(E, a.p, a.M);
  Table t{"roots"};
  t.add("a_p", r.ap);
  t.add("alpha", r.alpha);
  t.add("beta", r.beta);
  print(t, a.json);
  return 0;
}

int cmd_frobenius(const Args& a) {
  Pipeline pipe(curve_of(a), a.p, a.M, options_for(a));
  const FrobeniusData& F = pipe.frobenius();
  Table t{"frobenius"};
  t.add("precision", F.precision);
  t.add("F[0][0]", F.F[0][0]);
  t.add("F[0][1]", F.F[0][1]);
  t.add("F[1][0]", F.F[1][0]);
  t.add("F[1][1]", F.F[1][1]);
  t.add("trace", F.trace);
  t.add("det", F.det);
  if (F.alpha.prime() != 0) {
    const DcrisSplit& s = pipe.split();
    t.add("alpha", s.alpha);
    t.add("beta", s.beta);
    t.add("s2", s.s2);
    t.add("e2", s.e2);
    t.add("[omega_beta,omega_alpha]", s.pairing_beta_alpha);
  } else {
    t.add("alpha", "none (supersingular)");
  }
  print(t, a.json);
  return 0;
}

int cmd_symbol(const Args& a) {
  const CurveQ E = curve_of(a);
  PipelineOptions o = options_for(a);
  Pipeline pipe(E, a.p == 0 ? good_prime(E) : a.p, a.M, o);
  const EigenSymbol& phi = pipe.symbol();
  Table t{"symbol"};
  t.add("level", phi.level);
  t.add("sign", phi.sign);
  t.add("manin_symbols", static_cast<Int>(phi.values.size()));
  t.add("c_cal", phi.c_cal ? phi.c_cal->get_str() : "none");
  t.add("calibration_discriminant", phi.calibration_discriminant);
  t.add("phi{0->oo} (calibrated)", calibrated_value(phi, Rational(0)).get_str());
  for (Int r = 1; r < std::min<Int>(E.conductor(), 6); ++r)
    t.add("phi{1/" + std::to_string(r + 1) + "->oo} (calibrated)", calibrated_value(phi, make_rational(1, r + 1)).get_str());
  print(t, a.json);
  return 0;
}

int cmd_lp_ordinary(const Args& a) {
  const CurveQ E = curve_of(a);
  warn_rank(E);
  Pipeline pipe(E, a.p, a.M, options_for(a));
  const int depth = a.depth > 0 ? a.depth : a.M + 2;
  const PadicMeasure mu = stabilized_measure(pipe.symbol(), pipe.roots(), depth, a.M);
  const LJet jet = lp_jet(mu, 2, a.M);
  Table t{"lp-ordinary"};
  t.add("depth", depth);
  t.add("mu(Z_p^x)", mu.total());
  for (size_t j = 0; j < jet.coeffs.size(); ++j) t.add("c" + std::to_string(j), jet.coeffs[j]);
  print(t, a.json);
  return 0;
}

int cmd_lp_critical(const Args& a) {
  const CurveQ E = curve_of(a);
  warn_rank(E);
  Pipeline pipe(E, a.p, a.M, options_for(a));
  const OCSymbol& theta = pipe.beta_symbol();
  const LJet& jet = pipe.beta_jet();
  Table t{"lp-critical"};
  t.add("beta", pipe.roots().beta);
  t.add("ledger", theta.ledger.to_string());
  for (size_t j = 0; j < jet.coeffs.size(); ++j) t.add("c" + std::to_string(j), jet.coeffs[j]);
  print(t, a.json);
  return 0;
}

int cmd_heights(const Args& a) {
  const CurveQ E = curve_of(a);
  Pipeline pipe(E, a.p, a.M, options_for(a));
  const PointQ P = a.point.empty() ? pipe.generator() : PointQ::parse(a.point);
  if (!on_curve(E, P)) throw InvalidInput("point is not on the curve");
  Table t{"heights"};
  t.add("point", P.to_string());
  t.add("multiplier", static_cast<Int>(height_multiplier(E, P, a.p)));
  t.add("e2", pipe.split().e2);
  t.add("h_alpha(P)", height_alpha(E, P, a.p, a.M));
  t.add("log_omega(P)", formal_group_log(E, P, a.p, a.M));
  print(t, a.json);
  return 0;
}

int cmd_archimedean(const Args& a) {
  const CurveQ E = curve_of(a);
  Table t{"archimedean"};
  t.add("Omega", real_text(real_period(E)));
  const int w = functional_equation_sign(E);
  t.add("root_number", w);
  if (w == -1) {
    Pipeline pipe(E, a.p == 0 ? good_prime(E) : a.p, a.M, options_for(a));
    const PointQ P = a.point.empty() ? pipe.generator() : PointQ::parse(a.point);
    const CfResult cf = compute_c_f(E, P);
    t.add("point", P.to_string());
    t.add("L'(E,1)", real_text(lprime_complex(E)));
    t.add("hhat(P)", real_text(neron_tate_height(E, P)));
    t.add("c_f", cf.c.get_str());
    t.add("c_f_raw", real_text(cf.raw));
    t.add("c_f_square_factor", cf.square_factor.get_str());
  }
  print(t, a.json);
  return 0;
}

void print(const VerificationReport& r, bool json) { std::cout << (json ? r.to_json() + "\n" : r.to_text()); }

int cmd_verify(const Args& a, const std::string& which) {
  Pipeline pipe(curve_of(a), a.p, a.M, options_for(a));
  const NegativeControl control{a.corrupt_delta, a.swap_roots};
  std::vector<VerificationReport> reports;
  if (which == "pr-verify" || which == "all") reports.push_back(run_pr_verify(pipe, control));
  if (which == "gz-alpha" || which == "all") reports.push_back(run_gz_alpha_check(pipe, control));
  if (which == "recover" || which == "all") reports.push_back(run_recover(pipe, a.height_bound));
  if (a.json && reports.size() > 1) {
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(Json::parse(r.to_json()));
    std::cout << arr.dump(2) << "\n";
  } else {
    for (const auto& r : reports) print(r, a.json);
  }
  int code = 0;
  for (const auto& r : reports) code = std::max(code, exit_code(r.verdict));
  return code;
}

// Maps the error taxonomy to exit codes; `out` receives the message.
int classify(const std::exception_ptr& e, std::string& out) {
  try {
    std::rethrow_exception(e);
  } catch (const InvalidInput& x) {
    out = std::string("input error: ") + x.what();
    return kExitInput;
  } catch (const BadReductionError& x) {
    out = std::string("input error: ") + x.what();
    return kExitInput;
  } catch (const NotOrdinaryError& x) {
    out = std::string("input error: ") + x.what();
    return kExitInput;
  } catch (const WrongRankError& x) {
    out = std::string("input error: ") + x.what();
    return kExitInput;
  } catch (const PrecisionError& x) {
    out = std::string("inconclusive: ") + x.what();
    if (x.required_precision > 0) out += " (try --prec " + std::to_string(x.required_precision) + ")";
    return kExitInconclusive;
  } catch (const DepthError& x) {
    out = std::string("inconclusive: ") + x.what() + " (try --depth " + std::to_string(x.required_depth) + ")";
    return kExitInconclusive;
  } catch (const Error& x) {
    out = std::string("inconclusive: ") + x.what();
    return kExitInconclusive;
  } catch (const std::exception& x) {
    out = std::string("input error: ") + x.what();
    return kExitInput;
  }
}

int dispatch(const std::string& cmd, const Args& a) {
  if (cmd == "ap") return cmd_ap(a);
  if (cmd == "roots") return cmd_roots(a);
  if (cmd == "frobenius") return cmd_frobenius(a);
  if (cmd == "symbol") return cmd_symbol(a);
  if (cmd == "lp-ordinary") return cmd_lp_ordinary(a);
  if (cmd == "lp-critical") return cmd_lp_critical(a);
  if (cmd == "heights") return cmd_heights(a);
  if (cmd == "archimedean") return cmd_archimedean(a);
  return cmd_verify(a, cmd);
}

// One `all` run per grid line "a1,a2,a3,a4,a6 N p M", in parallel workers
// with a private cache directory each; results print in input order.
int cmd_batch(const std::string& grid, int jobs, const Args& base) {
  std::ifstream in(grid);
  if (!in) throw InvalidInput("cannot read grid file " + grid);
  std::vector<Args> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Args a = base;
    if (!(ls >> a.curve >> a.N >> a.p >> a.M)) throw InvalidInput("bad grid line: " + line);
    rows.push_back(a);
  }
  std::vector<std::string> lines(rows.size());
  std::vector<int> codes(rows.size(), 0);
  const std::string root = base.no_cache ? "" : (base.cache.empty() ? default_cache_dir() : base.cache);
  size_t next = 0;
  std::mutex m;
  auto worker = [&] {
    for (;;) {
      size_t i;
      {
        std::lock_guard<std::mutex> lock(m);
        if (next >= rows.size()) return;
        i = next++;
      }
      const Args& a = rows[i];
      std::ostringstream o;
      o << a.curve << " N=" << a.N << " p=" << a.p << " M=" << a.M;
      try {
        PipelineOptions opt = options_for(a);
        if (!root.empty()) opt.cache_dir = root + "/worker-" + std::to_string(i);
        Pipeline pipe(curve_of(a), a.p, a.M, opt);
        int code = 0;
        for (const VerificationReport& r : {run_pr_verify(pipe), run_gz_alpha_check(pipe), run_recover(pipe, a.height_bound)}) {
          o << "  " << r.check << "=" << to_string(r.verdict) << "(p^" << r.verified_digits << ")";
          code = std::max(code, exit_code(r.verdict));
        }
        codes[i] = code;
      } catch (...) {
        std::string msg;
        codes[i] = classify(std::current_exception(), msg);
        o << "  " << msg;
      }
      lines[i] = o.str();
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < std::max(1, jobs); ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& l : lines) std::cout << l << "\n";
  return codes.empty() ? 0 : *std::max_element(codes.begin(), codes.end());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-adic L-functions, heights and the Perrin-Riou point of a rank-one elliptic curve"};
  app.require_subcommand(1);
  Args args;
  std::string grid;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto common = [&](CLI::App* sub, bool needs_p) {
    sub->add_option("--curve", args.curve, "a-invariants a1,a2,a3,a4,a6 of a minimal model")->required();
    sub->add_option("--N", args.N, "conductor")->required();
    auto* p = sub->add_option("--p", args.p, "prime");
    if (needs_p) p->required();
    sub->add_option("--prec", args.M, "p-adic precision M")->capture_default_str();
    sub->add_option("--depth", args.depth, "Riemann-sum depth (default M+2)");
    sub->add_option("--moments", args.moments, "distribution moments (default M+3)");
    sub->add_option("--height-bound", args.height_bound, "bound on numerator and denominator in point recovery")
        ->capture_default_str();
    sub->add_option("--generator-bound", args.generator_bound, "naive-height bound of the generator search")
        ->capture_default_str();
    sub->add_option("--point", args.point, "point x,y (default: the searched generator)");
    sub->add_option("--cache", args.cache, "artifact cache directory (default $PRPOINT_CACHE or ~/.cache/prpoint)");
    sub->add_flag("--no-cache", args.no_cache, "do not read or write cached artifacts");
    sub->add_flag("--json", args.json, "machine-readable report");
  };

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"ap", "a_p, #E(F_p) and the reduction type"},
      {"roots", "roots alpha, beta of X^2 - a_p X + p"},
      {"frobenius", "Frobenius on de Rham cohomology and the unit-root splitting"},
      {"symbol", "calibrated plus modular symbol"},
      {"lp-ordinary", "jet of the ordinary p-adic L-function (Riemann sums)"},
      {"lp-critical", "jet of the critical-slope p-adic L-function (overconvergent)"},
      {"heights", "unit-root p-adic height and formal logarithm of a point"},
      {"archimedean", "period, L'(E,1), canonical height and c(f)"},
      {"pr-verify", "square test of the Perrin-Riou combination"},
      {"gz-alpha", "p-adic Gross-Zagier identity for the unit root"},
      {"recover", "rebuild the rational point from the L-derivatives"},
      {"all", "pr-verify, gz-alpha and recover"},
  };
  for (const auto& [name, desc] : subs) {
    CLI::App* sub = app.add_subcommand(name, desc);
    common(sub, name != "symbol" && name != "archimedean");
    if (name == "pr-verify" || name == "all") sub->add_flag("--corrupt-delta", args.corrupt_delta, "negative control: scale delta_A by a non-square");
    if (name == "gz-alpha" || name == "all") sub->add_flag("--swap-roots", args.swap_roots, "negative control: use beta in place of alpha");
  }
  CLI::App* batch = app.add_subcommand("batch", "run `all` over a grid file of lines 'a1,a2,a3,a4,a6 N p M'");
  batch->add_option("--grid", grid, "grid file")->required();
  batch->add_option("--jobs", jobs, "parallel workers")->capture_default_str();
  batch->add_option("--height-bound", args.height_bound, "recovery bound")->capture_default_str();
  batch->add_option("--cache", args.cache, "cache root; each worker gets its own subdirectory");
  batch->add_flag("--no-cache", args.no_cache, "disable caching");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (batch->parsed()) return cmd_batch(grid, jobs, args);
    for (CLI::App* sub : app.get_subcommands()) return dispatch(sub->get_name(), args);
  } catch (...) {
    std::string msg;
    const int code = classify(std::current_exception(), msg);
    std::cerr << "prpoint: " << msg << "\n";
    return code;
  }
  return kExitInput;
}
