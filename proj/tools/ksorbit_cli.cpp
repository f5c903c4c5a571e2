// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

// ksorbit command-line driver. Talks to the library through the C API only.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "ksorbit/ksorbit.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMethod = 1;
constexpr int kExitUsage = 2;

struct CliFailure {
  int exit_code;
  std::string message;
};

int exit_for(ks_status s) {
  switch (s) {
    case KS_OK:
      return kExitOk;
    case KS_ERR_INVALID_ARGUMENT:
    case KS_ERR_PARSE:
    case KS_ERR_IO:
      return kExitUsage;
    default:
      return kExitMethod;
  }
}

void check(ks_status s) {
  if (s != KS_OK)
    throw CliFailure{exit_for(s), std::string(ks_status_name(s)) + ": " + ks_last_error()};
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const CLI::Validator kFinitePositive(
    [](std::string& s) -> std::string {
      double v = 0.0;
      try {
        std::size_t pos = 0;
        v = std::stod(s, &pos);
        if (pos != s.size()) return "not a number: " + s;
      } catch (const std::exception&) {
        return "not a number: " + s;
      }
      if (!std::isfinite(v) || v <= 0.0) return "must be finite and positive: " + s;
      return {};
    },
    "POSITIVE");

// Resolved configuration of the running subcommand as "key=value" lines.
std::string resolved_config(const CLI::App* sub) {
  std::string out = "ksorbit_version=" + std::string(ks_version()) + "\ncommand=" + sub->get_name() + "\n";
  for (const CLI::Option* o : sub->get_options()) {
    const std::string name = o->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    std::string value;
    if (o->count() > 0) {
      const auto& r = o->reduced_results();  // after the multi-option policy
      for (std::size_t i = 0; i < r.size(); ++i) value += (i ? "," : "") + r[i];
    } else {
      value = o->get_default_str();
    }
    out += name + "=" + value + "\n";
  }
  return out;
}

// key=value config file to flags. Keys may use '_' or '-'; '#' starts a comment.
std::vector<std::string> config_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliFailure{kExitUsage, "cannot read config file " + path};
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CliFailure{kExitUsage, path + ":" + std::to_string(lineno) + ": expected key=value"};
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    for (char& c : key)
      if (c == '_') c = '-';
    if (value == "true") {
      args.push_back("--" + key);
    } else if (value != "false") {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

struct WeightOpt {
  std::vector<double> w;
  explicit WeightOpt(double d) : w{d, d, d} {}
  void add(CLI::App* app, const char* name = "--weights") {
    app->add_option(name, w, "Norm weights r,s1,s2")
        ->delimiter(',')
        ->expected(3)
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  }
};

struct NuOpt {
  double inv_nu = 0.0;
  double nu = 0.0;
  void add(CLI::App* app) {
    auto* a = app->add_option("--inv-nu", inv_nu, "Parameter 1/nu")->check(kFinitePositive);
    auto* b = app->add_option("--nu", nu, "Parameter nu (alternative to --inv-nu)")->check(kFinitePositive);
    a->excludes(b);
  }
  bool given() const { return inv_nu > 0.0 || nu > 0.0; }
  double value() const { return inv_nu > 0.0 ? inv_nu : 1.0 / nu; }
};

struct Handle {
  ks_orbit* o = nullptr;
  Handle() = default;
  explicit Handle(ks_orbit* p) : o(p) {}
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { ks_orbit_free(o); }
};

void print_orbit_line(const char* tag, const ks_orbit* o) {
  double nu = 0, f = 0;
  int d1 = 0, d2 = 0;
  check(ks_orbit_info(o, &nu, &f, &d1, &d2));
  std::printf("%s inv_nu=%.10g period=%.14g d1=%d d2=%d\n", tag, 1.0 / nu, 2.0 * M_PI / f, d1, d2);
}

// ---- explore ---------------------------------------------------------------

struct ExploreCmd {
  double lo = 32.5, hi = 33.6;
  int steps = 200;
  ks_explore_options opt{};
  int threads = 1;
  std::string out = "cascade.csv";

  void add(CLI::App& app) {
    ks_explore_options_default(&opt);
    auto* c = app.add_subcommand("explore", "Scan 1/nu and count energy-minimum clusters");
    c->add_option("--inv-nu-min", lo, "Lower end of the 1/nu range")->check(kFinitePositive)->capture_default_str();
    c->add_option("--inv-nu-max", hi, "Upper end of the 1/nu range")->check(kFinitePositive)->capture_default_str();
    c->add_option("--steps", steps, "Grid intervals")->check(CLI::Range(0, 1000000))->capture_default_str();
    c->add_option("--order", opt.order, "Galerkin truncation N")->check(CLI::Range(1, 4096))->capture_default_str();
    c->add_option("--transient", opt.transient, "Discarded transient time")->check(kFinitePositive)->capture_default_str();
    c->add_option("--window", opt.window, "Minima collection time")->check(kFinitePositive)->capture_default_str();
    c->add_option("--tol", opt.tol, "Integrator tolerance")->check(kFinitePositive)->capture_default_str();
    c->add_option("--cluster-gap", opt.cluster_gap, "Relative cluster gap")->check(kFinitePositive)->capture_default_str();
    c->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
    c->add_option("--out", out, "Cascade CSV")->capture_default_str();
    c->callback([this, c] { run(c); });
  }

  void run(const CLI::App* c) {
    if (lo > hi) throw CliFailure{kExitUsage, "--inv-nu-min must not exceed --inv-nu-max"};
    ks_cascade* cas = nullptr;
    check(ks_cascade_scan(lo, hi, steps, &opt, threads, &cas));
    const std::string meta = resolved_config(c);
    const ks_status ws = ks_cascade_write_csv(cas, out.c_str(), meta.c_str());
    std::size_t failed = 0;
    for (std::size_t i = 0; i < ks_cascade_size(cas); ++i) {
      int f = 0;
      ks_cascade_point(cas, i, nullptr, nullptr, &f);
      failed += f;
    }
    ks_cascade_free(cas);
    check(ws);
    std::printf("explore points=%zu failed=%zu out=%s\n", static_cast<std::size_t>(steps) + 1, failed, out.c_str());
    if (failed) throw CliFailure{kExitMethod, std::to_string(failed) + " point(s) failed; see the error column"};
  }
};

// ---- solve -----------------------------------------------------------------

struct NewtonFlags {
  ks_newton_options opt{};
  WeightOpt weights{0.0};
  bool grow = false;
  void add(CLI::App* c) {
    ks_newton_options_default(&opt);
    opt.log = 1;
    c->add_option("--tol", opt.tol, "Newton residual tolerance")->check(kFinitePositive)->capture_default_str();
    c->add_option("--max-iter", opt.max_iter, "Newton iteration cap")->check(CLI::Range(1, 10000))->capture_default_str();
    c->add_option("--shift", opt.c, "Preconditioner shift c (default 1/nu)")->check(kFinitePositive);
    weights.add(c);
    c->add_flag("--grow", grow, "Grow degrees while mode tails exceed 1e-8")->capture_default_str();
  }
  const ks_newton_options* get() {
    opt.r = weights.w[0];
    opt.s1 = weights.w[1];
    opt.s2 = weights.w[2];
    opt.grow = grow ? 1 : 0;
    return &opt;
  }
};

// Seed from a file (resized when degrees are given) or from the flow.
ks_orbit* load_seed(const std::string& seed_file, const NuOpt& nu, int d1, int d2, bool degrees_given) {
  if (!seed_file.empty()) {
    Handle h;
    check(ks_orbit_read(seed_file.c_str(), &h.o));
    if (!degrees_given) return std::exchange(h.o, nullptr);
    ks_orbit* r = nullptr;
    check(ks_orbit_resize(h.o, d1, d2, &r));
    return r;
  }
  if (!nu.given()) throw CliFailure{kExitUsage, "one of --inv-nu, --nu or --seed-file is required"};
  ks_explore_options eo;
  ks_explore_options_default(&eo);
  ks_orbit* o = nullptr;
  check(ks_orbit_from_flow(nu.value(), d1, d2, &eo, &o));
  return o;
}

struct SolveCmd {
  NuOpt nu;
  std::string seed_file;
  int d1 = 32, d2 = 16;
  NewtonFlags newton;
  std::string out = "orbit.ksorb";
  std::string report;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("solve", "Newton solve for a periodic orbit");
    nu.add(c);
    auto* sf = c->add_option("--seed-file", seed_file, "Refine an existing orbit file")->check(CLI::ExistingFile);
    sf->excludes("--inv-nu")->excludes("--nu");
    c->add_option("--d1", d1, "x degree")->check(CLI::Range(1, 4096))->capture_default_str();
    c->add_option("--d2", d2, "theta degree")->check(CLI::Range(0, 4096))->capture_default_str();
    newton.add(c);
    c->add_option("--out", out, "Orbit file (.ksorb binary, otherwise JSON text)")->capture_default_str();
    c->add_option("--report", report, "Newton report (default <out>.newton.txt)");
    c->callback([this, c] { run(c); });
  }

  void run(const CLI::App* c) {
    const bool degrees_given = c->count("--d1") + c->count("--d2") > 0;
    Handle seed(load_seed(seed_file, nu, d1, d2, degrees_given));
    if (!seed_file.empty()) print_orbit_line("seed", seed.o);
    Handle sol;
    ks_newton_report* rep = nullptr;
    const ks_status s = ks_newton_solve(seed.o, newton.get(), &sol.o, &rep);
    if (s != KS_OK) check(s);
    const std::string meta = resolved_config(c);
    const std::string rpath = report.empty() ? out + ".newton.txt" : report;
    const ks_status w1 = ks_newton_report_write(rep, rpath.c_str(), meta.c_str());
    int it = 0;
    double res = 0, C = 0;
    ks_newton_report_summary(rep, &it, &res, &C);
    ks_newton_report_free(rep);
    check(w1);
    check(ks_orbit_write(sol.o, out.c_str(), meta.c_str()));
    print_orbit_line("solved", sol.o);
    std::printf("iterations=%d residual=%.3e quadratic_constant=%.3g out=%s\n", it, res, C, out.c_str());
    if (!(res < newton.opt.tol))
      std::fprintf(stderr, "ksorbit: warning: stopped on a small step with residual %.3e above --tol; "
                   "the degrees limit the accuracy (raise --d1/--d2 or pass --grow)\n", res);
  }
};

// ---- validate --------------------------------------------------------------

struct ValidationFlags {
  ks_validation_options opt{};
  WeightOpt weights{1e-12};
  std::string k3 = "sup";
  void add(CLI::App* c) {
    weights.add(c);
    c->add_option("--shift", opt.c, "Shift c (default 1/nu rounded up)")->check(kFinitePositive);
    add_knobs(c);
  }
  // everything except the weights and the shift
  void add_knobs(CLI::App* c) {
    ks_validation_options_default(&opt);
    opt.log = 1;
    c->add_option("--dt1", opt.dt1, "Matrix-stage x degree (default automatic)")->check(CLI::Range(1, 4096));
    c->add_option("--dt2", opt.dt2, "Matrix-stage theta degree (default automatic)")->check(CLI::Range(0, 4096));
    c->add_option("--k3", k3, "Bound on the orbit in the tail estimate")
        ->check(CLI::IsMember({"sup", "conservative"}))
        ->capture_default_str();
    c->add_option("--max-dim", opt.max_dimension, "Largest bordered matrix size")
        ->check(CLI::Range(std::size_t{2}, std::size_t{100000}))
        ->capture_default_str();
    c->add_option("--threads", opt.threads, "Worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
  }
  const ks_validation_options* get() {
    opt.r = weights.w[0];
    opt.s1 = weights.w[1];
    opt.s2 = weights.w[2];
    opt.k3_conservative = k3 == "conservative";
    return &opt;
  }
};

// Writes the certificate; returns true when validated.
bool validate_to(const ks_orbit* o, ValidationFlags& vf, bool improve, bool timings, const std::string& path,
                 const std::string& meta) {
  ks_certificate* cert = nullptr;
  const ks_status s = ks_validate(o, vf.get(), &cert);
  if (s != KS_OK && s != KS_ERR_VALIDATION_FAILED) check(s);
  const std::string fail_msg = s == KS_OK ? "" : ks_last_error();
  int ok = 0;
  double alpha = 0, E = 0;
  const char* stage = "";
  ks_certificate_summary(cert, &ok, &alpha, &E, &stage);
  if (ok && improve) {
    int d1 = 0, d2 = 0;
    ks_orbit_info(o, nullptr, nullptr, &d1, &d2);
    double r = 0, Er = 0;
    const ks_status is = ks_certificate_improve(cert, d1, d2, &r, &Er);
    if (is == KS_OK) std::printf("improved r_hat=%.6e E_r_hat=%.6e\n", r, Er);
    else std::fprintf(stderr, "ksorbit: warning: %s: %s\n", ks_status_name(is), ks_last_error());
  }
  const ks_status ws = ks_certificate_write(cert, path.c_str(), meta.c_str(), timings ? 1 : 0);
  ks_certificate_free(cert);
  check(ws);
  if (ok) std::printf("VALIDATED alpha=%.6e E=%.6e certificate=%s\n", alpha, E, path.c_str());
  else std::printf("FAILED stage=%s certificate=%s (%s)\n", stage, path.c_str(), fail_msg.c_str());
  return ok != 0;
}

struct ValidateCmd {
  std::string orbit;
  ValidationFlags vf;
  bool improve = false;
  bool timings = false;
  std::string out = "certificate.txt";

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("validate", "Rigorous validation of an orbit");
    c->add_option("orbit,--orbit", orbit, "Orbit file")->required();
    vf.add(c);
    c->add_flag("--improve-radius", improve, "Also certify an improved analyticity radius")->capture_default_str();
    c->add_flag("--timings", timings, "Record stage wall times in the certificate (not reproducible)")
        ->capture_default_str();
    c->add_option("--out", out, "Certificate file")->capture_default_str();
    c->callback([this, c] { run(c); });
  }

  void run(const CLI::App* c) {
    Handle o;
    check(ks_orbit_read(orbit.c_str(), &o.o));
    if (!validate_to(o.o, vf, improve, timings, out, resolved_config(c)))
      throw CliFailure{kExitMethod, "validation failed"};
  }
};

// ---- stability -------------------------------------------------------------

struct StabilityFlags {
  int n_x = 32, op_d1 = 24, op_d2 = 16;
  double margin = 1e-6;
  double strip_offset = std::numeric_limits<double>::quiet_NaN();
  void add(CLI::App* c) {
    c->add_option("--n-x", n_x, "Sine modes in the variational equation")->check(CLI::Range(1, 1024))->capture_default_str();
    c->add_option("--op-d1", op_d1, "Operator truncation, x degree")->check(CLI::Range(1, 1024))->capture_default_str();
    c->add_option("--op-d2", op_d2, "Operator truncation, theta degree")->check(CLI::Range(0, 1024))->capture_default_str();
    c->add_option("--margin", margin, "Multiplier margin around |lambda| = 1")->check(CLI::NonNegativeNumber)->capture_default_str();
    c->add_option("--strip-offset", strip_offset, "Strip [a, a+f) offset a (default -f/2)");
  }
};

struct StabilityCmd {
  std::string orbit;
  StabilityFlags sf;
  std::string out = "stability";

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("stability", "Floquet stability by monodromy and operator spectrum");
    c->add_option("orbit,--orbit", orbit, "Orbit file")->required();
    sf.add(c);
    c->add_option("--out", out, "Output prefix (<out>.txt, <out>_monodromy.csv, <out>_operator.csv)")->capture_default_str();
    c->callback([this, c] { run(c); });
  }

  void run(const CLI::App* c) {
    Handle o;
    check(ks_orbit_read(orbit.c_str(), &o.o));
    ks_stability* s = nullptr;
    check(ks_stability_run(o.o, sf.n_x, sf.op_d1, sf.op_d2, sf.strip_offset, sf.margin, &s));
    int mu = 0, ou = 0, agree = 0;
    ks_stability_summary(s, &mu, &ou, &agree);
    const std::string meta = resolved_config(c);
    const std::string rep = out + ".txt", mc = out + "_monodromy.csv", oc = out + "_operator.csv";
    const std::string warning = ks_stability_warning(s);
    const ks_status ws = ks_stability_write(s, rep.c_str(), mc.c_str(), oc.c_str(), meta.c_str());
    ks_stability_free(s);
    check(ws);
    std::printf("unstable_dim monodromy=%d operator=%d report=%s\n", mu, ou, rep.c_str());
    if (!agree) std::fprintf(stderr, "ksorbit: warning: %s\n", warning.c_str());
  }
};

// ---- continue --------------------------------------------------------------

struct ContinueCmd {
  NuOpt nu;
  std::string seed_file;
  double target = 0.0;
  double dinv = 0.05;
  int d1 = 32, d2 = 16;
  NewtonFlags newton;
  StabilityFlags sf;
  bool no_stability = false;
  bool validate_each = false;
  ValidationFlags vf;
  std::string out = "family";

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("continue", "Natural-parameter continuation in 1/nu");
    nu.add(c);
    auto* s = c->add_option("--seed-file", seed_file, "Start from an orbit file")->check(CLI::ExistingFile);
    s->excludes("--inv-nu")->excludes("--nu");
    c->add_option("--inv-nu-end", target, "Target 1/nu")->required()->check(kFinitePositive);
    c->add_option("--dinv-nu", dinv, "Largest 1/nu step")->check(kFinitePositive)->capture_default_str();
    c->add_option("--d1", d1, "x degree")->check(CLI::Range(1, 4096))->capture_default_str();
    c->add_option("--d2", d2, "theta degree")->check(CLI::Range(0, 4096))->capture_default_str();
    newton.add(c);
    sf.add(c);
    c->add_flag("--no-stability", no_stability, "Skip the per-point stability tags")->capture_default_str();
    c->add_flag("--validate-each", validate_each, "Write a certificate for every accepted point")->capture_default_str();
    vf.weights.add(c, "--val-weights");
    vf.add_knobs(c);
    c->add_option("--out", out, "Family directory")->capture_default_str();
    c->callback([this, c] { run(c); });
  }

  void run(const CLI::App* c) {
    newton.opt.log = 0;
    const bool degrees_given = c->count("--d1") + c->count("--d2") > 0;
    Handle seed(load_seed(seed_file, nu, d1, d2, degrees_given));
    Handle start;
    check(ks_newton_solve(seed.o, newton.get(), &start.o, nullptr));
    double nu0 = 0;
    ks_orbit_info(start.o, &nu0, nullptr, nullptr, nullptr);
    // a zero-length range is a single point
    ks_family* fam = nullptr;
    check(ks_continue(start.o, target, std::abs(target - 1.0 / nu0) > 0 ? dinv : 0.0, newton.get(), &fam));

    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) {
      ks_family_free(fam);
      throw CliFailure{kExitUsage, "cannot create " + out + ": " + ec.message()};
    }
    const std::string meta = resolved_config(c);
    std::string csv;
    {
      std::istringstream m(meta);
      std::string line;
      while (std::getline(m, line)) csv += "# " + line + "\n";
    }
    csv += "index,inv_nu,period,unstable_dim,operator_unstable_dim,validated\n";
    std::size_t not_validated = 0;
    const std::size_t n = ks_family_size(fam);
    for (std::size_t i = 0; i < n; ++i) {
      Handle o;
      check(ks_family_get(fam, i, &o.o));
      char name[64];
      std::snprintf(name, sizeof name, "orbit_%04zu.ksorb", i);
      const std::string path = (std::filesystem::path(out) / name).string();
      check(ks_orbit_write(o.o, path.c_str(), meta.c_str()));
      double nu_i = 0, f_i = 0;
      ks_orbit_info(o.o, &nu_i, &f_i, nullptr, nullptr);
      std::string mu = "", ou = "";
      if (!no_stability) {
        ks_stability* s = nullptr;
        check(ks_stability_run(o.o, sf.n_x, sf.op_d1, sf.op_d2, sf.strip_offset, sf.margin, &s));
        int a = 0, b = 0, agree = 0;
        ks_stability_summary(s, &a, &b, &agree);
        if (!agree) std::fprintf(stderr, "ksorbit: warning: point %zu: %s\n", i, ks_stability_warning(s));
        ks_stability_free(s);
        mu = std::to_string(a);
        ou = std::to_string(b);
      }
      std::string validated = "";
      if (validate_each) {
        std::snprintf(name, sizeof name, "certificate_%04zu.txt", i);
        const bool ok = validate_to(o.o, vf, false, false, (std::filesystem::path(out) / name).string(), meta);
        validated = ok ? "1" : "0";
        not_validated += !ok;
      }
      csv += std::to_string(i) + "," + fmt(1.0 / nu_i) + "," + fmt(2.0 * M_PI / f_i) + "," + mu + "," + ou + "," +
             validated + "\n";
      std::printf("point %zu inv_nu=%.10g period=%.14g unstable_dim=%s\n", i, 1.0 / nu_i, 2.0 * M_PI / f_i,
                  mu.empty() ? "-" : mu.c_str());
    }
    const bool underflow = ks_family_step_underflow(fam) != 0;
    const std::string msg = ks_family_message(fam);
    ks_family_free(fam);

    const std::string branch = (std::filesystem::path(out) / "branch.csv").string();
    std::ofstream f(branch, std::ios::binary);
    f << csv;
    if (!f) throw CliFailure{kExitUsage, "cannot write " + branch};
    std::printf("family points=%zu out=%s\n", n, out.c_str());
    if (underflow) std::fprintf(stderr, "ksorbit: warning: family is partial: %s\n", msg.c_str());
    if (not_validated) throw CliFailure{kExitMethod, std::to_string(not_validated) + " point(s) failed validation"};
  }
};

// ---- plotdata --------------------------------------------------------------

struct PlotCmd {
  std::string orbit;
  int n_theta = 128, n_x = 128;
  std::string out = "heatmap.csv";

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("plotdata", "Dump u(theta, x) on a grid");
    c->add_option("orbit,--orbit", orbit, "Orbit file")->required();
    c->add_option("--n-theta", n_theta, "Grid points in theta")->check(CLI::Range(1, 1 << 16))->capture_default_str();
    c->add_option("--n-x", n_x, "Grid points in x")->check(CLI::Range(1, 1 << 16))->capture_default_str();
    c->add_option("--out", out, "Heatmap CSV")->capture_default_str();
    c->callback([this, c] { run(c); });
  }

  void run(const CLI::App* c) {
    Handle o;
    check(ks_orbit_read(orbit.c_str(), &o.o));
    check(ks_orbit_write_heatmap(o.o, n_theta, n_x, out.c_str(), resolved_config(c).c_str()));
    std::printf("rows=%d out=%s\n", n_theta * n_x, out.c_str());
  }
};

// Splices "--config FILE" contents in right after the subcommand name, so
// flags given later on the command line take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string file;
    std::size_t span = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      span = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      span = 1;
    } else {
      continue;
    }
    args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i + span));
    const auto extra = config_args(file);
    std::size_t at = 1;
    while (at < args.size() && args[at].rfind("-", 0) == 0) ++at;  // global flags
    if (at < args.size()) ++at;                                     // subcommand
    args.insert(args.begin() + static_cast<long>(at), extra.begin(), extra.end());
    break;
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ksorbit: periodic orbits of the Kuramoto-Sivashinsky equation"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", ks_version());
  app.add_option("--config", "key=value file; flags given on the command line override it");

  ExploreCmd explore;
  SolveCmd solve;
  ValidateCmd validate;
  StabilityCmd stability;
  ContinueCmd cont;
  PlotCmd plot;
  explore.add(app);
  solve.add(app);
  cont.add(app);
  validate.add(app);
  stability.add(app);
  plot.add(app);

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    // vector form: program name dropped, arguments in reverse order
    args.erase(args.begin());
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const CliFailure& f) {
    std::fprintf(stderr, "ksorbit: error: %s\n", f.message.c_str());
    return f.exit_code;
  }
  return kExitOk;
}
