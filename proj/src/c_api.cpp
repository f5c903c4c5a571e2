// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ksorbit/ksorbit.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "ksorbit/flow.hpp"
#include "ksorbit/io.hpp"
#include "ksorbit/newton.hpp"
#include "ksorbit/stability.hpp"
#include "ksorbit/validator.hpp"

struct ks_orbit {
  ks::OrbitCandidate cand;
};
struct ks_cascade {
  std::vector<ks::CascadePoint> points;
};
struct ks_newton_report {
  ks::NewtonReport rep;
};
struct ks_family {
  ks::ContinuationResult res;
};
struct ks_certificate {
  ks::ValidationCertificate cert;
};
struct ks_stability {
  ks::StabilityReport mono;
  ks::StabilityReport op;
  ks::StabilityCrossCheck check;
};

namespace {

thread_local std::string g_last_error;

ks_status set_error(ks_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
ks_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const ks::Error& e) {
    return set_error(static_cast<ks_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(KS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(KS_ERR_INTERNAL, e.what());
  }
}

ks::Metadata parse_metadata(const char* text) {
  ks::Metadata m;
  if (!text) return m;
  std::string s(text);
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t end = s.find('\n', pos);
    if (end == std::string::npos) end = s.size();
    const std::string line = s.substr(pos, end - pos);
    const std::size_t eq = line.find('=');
    if (eq != std::string::npos) m[line.substr(0, eq)] = line.substr(eq + 1);
    pos = end + 1;
  }
  return m;
}

ks::ExploreOptions to_explore(const ks_explore_options* o) {
  ks::ExploreOptions e;
  if (!o) return e;
  e.order = o->order;
  e.transient = o->transient;
  e.window = o->window;
  e.budget = o->budget;
  e.tol = o->tol;
  e.recurrence_tol = o->recurrence_tol;
  e.cluster_gap = o->cluster_gap;
  e.noise_floor = o->noise_floor;
  e.samples = o->samples;
  return e;
}

ks::NewtonOptions to_newton(const ks_newton_options* o) {
  ks::NewtonOptions n;
  if (!o) return n;
  n.tol = o->tol;
  n.max_iter = o->max_iter;
  n.c = o->c;
  n.weights = {o->r, o->s1, o->s2};
  n.degenerate_tol = o->degenerate_tol;
  n.fix_phase = o->fix_phase != 0;
  n.log = o->log != 0;
  return n;
}

#define KS_REQUIRE_PTR(p)                                                   \
  do {                                                                      \
    if (!(p)) return set_error(KS_ERR_INVALID_ARGUMENT, #p " is null");     \
  } while (0)

}  // namespace

extern "C" {

const char* ks_version(void) { return "1.0.0"; }

const char* ks_status_name(ks_status s) {
  if (s == KS_ERR_INTERNAL) return "Internal";
  return ks::error_code_name(static_cast<ks::ErrorCode>(static_cast<int>(s)));
}

const char* ks_last_error(void) { return g_last_error.c_str(); }

void ks_explore_options_default(ks_explore_options* opt) {
  if (!opt) return;
  const ks::ExploreOptions e;
  *opt = {e.order, e.transient, e.window, e.budget, e.tol, e.recurrence_tol, e.cluster_gap, e.noise_floor, e.samples};
}

ks_status ks_cascade_scan(double inv_nu_min, double inv_nu_max, int steps, const ks_explore_options* opt,
                          int threads, ks_cascade** out) {
  KS_REQUIRE_PTR(out);
  return guarded([&] {
    auto c = std::make_unique<ks_cascade>();
    c->points = ks::cascade_scan(inv_nu_min, inv_nu_max, steps, to_explore(opt), threads);
    *out = c.release();
    return KS_OK;
  });
}

size_t ks_cascade_size(const ks_cascade* c) { return c ? c->points.size() : 0; }

ks_status ks_cascade_point(const ks_cascade* c, size_t i, double* inv_nu, size_t* clusters, int* failed) {
  KS_REQUIRE_PTR(c);
  if (i >= c->points.size()) return set_error(KS_ERR_INVALID_ARGUMENT, "cascade index out of range");
  const auto& p = c->points[i];
  if (inv_nu) *inv_nu = p.inv_nu;
  if (clusters) *clusters = p.minima.size();
  if (failed) *failed = p.failed ? 1 : 0;
  return KS_OK;
}

ks_status ks_cascade_write_csv(const ks_cascade* c, const char* path, const char* metadata) {
  KS_REQUIRE_PTR(c);
  KS_REQUIRE_PTR(path);
  return guarded([&] {
    ks::write_file(path, ks::cascade_csv(c->points, parse_metadata(metadata)));
    return KS_OK;
  });
}

void ks_cascade_free(ks_cascade* c) { delete c; }

ks_status ks_orbit_from_flow(double inv_nu, int d1, int d2, const ks_explore_options* opt, ks_orbit** out) {
  KS_REQUIRE_PTR(out);
  return guarded([&] {
    ks::require(std::isfinite(inv_nu) && inv_nu > 0.0, "inv_nu must be positive");
    ks::ExploreOptions e = to_explore(opt);
    e.samples = std::max(e.samples, 4 * d2 + 4);
    const ks::OrbitSeed seed = ks::find_attracting_orbit(1.0 / inv_nu, e);
    auto o = std::make_unique<ks_orbit>();
    o->cand = ks::seed_to_orbit_candidate(seed, d1, d2);
    *out = o.release();
    return KS_OK;
  });
}

ks_status ks_orbit_read(const char* path, ks_orbit** out) {
  KS_REQUIRE_PTR(path);
  KS_REQUIRE_PTR(out);
  return guarded([&] {
    auto o = std::make_unique<ks_orbit>();
    o->cand = ks::read_orbit(path);
    *out = o.release();
    return KS_OK;
  });
}

ks_status ks_orbit_write(const ks_orbit* o, const char* path, const char* metadata) {
  KS_REQUIRE_PTR(o);
  KS_REQUIRE_PTR(path);
  return guarded([&] {
    ks::write_orbit(path, o->cand, parse_metadata(metadata));
    return KS_OK;
  });
}

ks_status ks_orbit_info(const ks_orbit* o, double* nu, double* f, int* d1, int* d2) {
  KS_REQUIRE_PTR(o);
  if (nu) *nu = o->cand.nu;
  if (f) *f = o->cand.f;
  if (d1) *d1 = o->cand.u.d1();
  if (d2) *d2 = o->cand.u.d2();
  return KS_OK;
}

ks_status ks_orbit_resize(const ks_orbit* o, int d1, int d2, ks_orbit** out) {
  KS_REQUIRE_PTR(o);
  KS_REQUIRE_PTR(out);
  return guarded([&] {
    ks::require(d1 >= 1 && d2 >= 0, "invalid degrees");
    auto r = std::make_unique<ks_orbit>();
    r->cand = o->cand;
    r->cand.u = ks::resize(o->cand.u, d1, d2);
    *out = r.release();
    return KS_OK;
  });
}

ks_status ks_orbit_perturb(ks_orbit* o, int k1, int k2, int sine, double delta) {
  KS_REQUIRE_PTR(o);
  return guarded([&] {
    ks::require(o->cand.u.contains(k1, k2) && !(sine && k2 == 0), "coefficient index out of range");
    o->cand.u.at({k1, k2, sine != 0}) += delta;
    return KS_OK;
  });
}

ks_status ks_orbit_residual(const ks_orbit* o, double r, double s1, double s2, double* out) {
  KS_REQUIRE_PTR(o);
  KS_REQUIRE_PTR(out);
  return guarded([&] {
    const ks::WeightParams w{r, s1, s2};
    w.validate();
    *out = ks::norm_M(ks::preconditioned_residual(o->cand), w);
    return KS_OK;
  });
}

ks_status ks_orbit_write_heatmap(const ks_orbit* o, int n_theta, int n_x, const char* path, const char* metadata) {
  KS_REQUIRE_PTR(o);
  KS_REQUIRE_PTR(path);
  return guarded([&] {
    ks::write_file(path, ks::heatmap_csv(o->cand.u, n_theta, n_x, parse_metadata(metadata)));
    return KS_OK;
  });
}

void ks_orbit_free(ks_orbit* o) { delete o; }

void ks_newton_options_default(ks_newton_options* opt) {
  if (!opt) return;
  const ks::NewtonOptions n;
  *opt = {n.tol, n.max_iter, n.c, n.weights.r, n.weights.s1, n.weights.s2, n.degenerate_tol, n.fix_phase ? 1 : 0,
          n.log ? 1 : 0, 0};
}

ks_status ks_newton_solve(const ks_orbit* seed, const ks_newton_options* opt, ks_orbit** out,
                          ks_newton_report** report) {
  KS_REQUIRE_PTR(seed);
  KS_REQUIRE_PTR(out);
  return guarded([&] {
    const ks::NewtonOptions n = to_newton(opt);
    auto r = std::make_unique<ks_newton_report>();
    r->rep = (opt && opt->grow) ? ks::newton_solve_with_growth(seed->cand, n) : ks::newton_solve(seed->cand, n);
    auto o = std::make_unique<ks_orbit>();
    o->cand = r->rep.final;
    *out = o.release();
    if (report) *report = r.release();
    return KS_OK;
  });
}

ks_status ks_newton_report_summary(const ks_newton_report* r, int* iterations, double* final_residual,
                                   double* quadratic_constant) {
  KS_REQUIRE_PTR(r);
  if (iterations) *iterations = r->rep.iterates.empty() ? 0 : static_cast<int>(r->rep.iterates.size()) - 1;
  if (final_residual) *final_residual = r->rep.final_residual;
  if (quadratic_constant) *quadratic_constant = r->rep.quadratic_constant;
  return KS_OK;
}

ks_status ks_newton_report_write(const ks_newton_report* r, const char* path, const char* metadata) {
  KS_REQUIRE_PTR(r);
  KS_REQUIRE_PTR(path);
  return guarded([&] {
    ks::write_file(path, ks::newton_report_text(r->rep, parse_metadata(metadata)));
    return KS_OK;
  });
}

void ks_newton_report_free(ks_newton_report* r) { delete r; }

ks_status ks_continue(const ks_orbit* start, double inv_nu_target, double dinv_nu_max, const ks_newton_options* opt,
                      ks_family** out) {
  KS_REQUIRE_PTR(start);
  KS_REQUIRE_PTR(out);
  return guarded([&] {
    ks::require(std::isfinite(inv_nu_target) && inv_nu_target > 0.0, "target 1/nu must be positive");
    ks::require(std::isfinite(dinv_nu_max) && dinv_nu_max >= 0.0, "step must be >= 0");
    const double inv0 = start->cand.inv_nu();
    const double nu_target = 1.0 / inv_nu_target;
    // the largest nu step that corresponds to dinv_nu_max anywhere on the path
    const double inv_lo = std::min(inv0, inv_nu_target);
    const double dnu_max = dinv_nu_max == 0.0 ? 0.0 : 1.0 / inv_lo - 1.0 / (inv_lo + dinv_nu_max);
    ks::ContinuationOptions c;
    c.newton = to_newton(opt);
    auto f = std::make_unique<ks_family>();
    f->res = ks::continue_orbit(start->cand, nu_target, dnu_max, c);
    *out = f.release();
    return KS_OK;
  });
}

size_t ks_family_size(const ks_family* f) { return f ? f->res.family.size() : 0; }

ks_status ks_family_get(const ks_family* f, size_t i, ks_orbit** out) {
  KS_REQUIRE_PTR(f);
  KS_REQUIRE_PTR(out);
  if (i >= f->res.family.size()) return set_error(KS_ERR_INVALID_ARGUMENT, "family index out of range");
  return guarded([&] {
    auto o = std::make_unique<ks_orbit>();
    o->cand = f->res.family[i];
    *out = o.release();
    return KS_OK;
  });
}

int ks_family_step_underflow(const ks_family* f) { return f && f->res.step_underflow ? 1 : 0; }

const char* ks_family_message(const ks_family* f) { return f ? f->res.message.c_str() : ""; }

void ks_family_free(ks_family* f) { delete f; }

void ks_validation_options_default(ks_validation_options* opt) {
  if (!opt) return;
  const ks::ValidationInput v;
  *opt = {v.w.r, v.w.s1, v.w.s2, v.dt1, v.dt2, v.c, v.k3 == ks::K3Mode::kConservative ? 1 : 0, v.max_dimension,
          v.threads, v.log ? 1 : 0};
}

ks_status ks_validate(const ks_orbit* o, const ks_validation_options* opt, ks_certificate** out) {
  KS_REQUIRE_PTR(o);
  KS_REQUIRE_PTR(out);
  *out = nullptr;
  ks::ValidationInput in;
  in.cand = o->cand;
  if (opt) {
    in.w = {opt->r, opt->s1, opt->s2};
    in.dt1 = opt->dt1;
    in.dt2 = opt->dt2;
    in.c = opt->c;
    in.k3 = opt->k3_conservative ? ks::K3Mode::kConservative : ks::K3Mode::kSup;
    in.max_dimension = opt->max_dimension;
    in.threads = opt->threads;
    in.log = opt->log != 0;
  }
  return guarded([&] {
    auto c = std::make_unique<ks_certificate>();
    try {
      c->cert = ks::validate(in);
    } catch (const ks::ValidationFailed& e) {
      c->cert = e.certificate();
      *out = c.release();
      return set_error(KS_ERR_VALIDATION_FAILED, e.what());
    }
    *out = c.release();
    return KS_OK;
  });
}

ks_status ks_certificate_improve(ks_certificate* c, int d1, int d2, double* r_hat, double* E_r_hat) {
  KS_REQUIRE_PTR(c);
  return guarded([&] {
    const auto [r, E] = ks::improve_analyticity(c->cert, d1, d2);
    if (r_hat) *r_hat = r;
    if (E_r_hat) *E_r_hat = E;
    return KS_OK;
  });
}

ks_status ks_certificate_summary(const ks_certificate* c, int* success, double* alpha, double* E, const char** stage) {
  KS_REQUIRE_PTR(c);
  if (success) *success = c->cert.success ? 1 : 0;
  if (alpha) *alpha = c->cert.alpha;
  if (E) *E = c->cert.E;
  if (stage) *stage = c->cert.failed_stage.c_str();
  return KS_OK;
}

ks_status ks_certificate_write(const ks_certificate* c, const char* path, const char* metadata, int with_timings) {
  KS_REQUIRE_PTR(c);
  KS_REQUIRE_PTR(path);
  return guarded([&] {
    ks::write_file(path, ks::certificate_text(c->cert, parse_metadata(metadata), with_timings != 0));
    return KS_OK;
  });
}

void ks_certificate_free(ks_certificate* c) { delete c; }

ks_status ks_stability_run(const ks_orbit* o, int n_x, int d1, int d2, double strip_offset, double margin,
                           ks_stability** out) {
  KS_REQUIRE_PTR(o);
  KS_REQUIRE_PTR(out);
  return guarded([&] {
    const std::vector<double> flat = o->cand.u.to_flat();
    if (std::all_of(flat.begin(), flat.end(), [](double v) { return v == 0.0; }))
      ks::fail(ks::ErrorCode::kDegenerateSeed, "stability: u = 0 is not a periodic orbit");
    auto s = std::make_unique<ks_stability>();
    ks::MonodromyOptions mo;
    mo.margin = margin;
    s->mono = ks::monodromy(o->cand, n_x, mo);
    std::optional<double> a;
    if (!std::isnan(strip_offset)) a = strip_offset;
    s->op = ks::operator_spectrum(o->cand, d1, d2, a, margin);
    s->check = ks::cross_check(s->mono, s->op);
    *out = s.release();
    return KS_OK;
  });
}

ks_status ks_stability_summary(const ks_stability* s, int* monodromy_unstable, int* operator_unstable, int* agree) {
  KS_REQUIRE_PTR(s);
  if (monodromy_unstable) *monodromy_unstable = s->check.monodromy_unstable;
  if (operator_unstable) *operator_unstable = s->check.operator_unstable;
  if (agree) *agree = s->check.agree ? 1 : 0;
  return KS_OK;
}

const char* ks_stability_warning(const ks_stability* s) { return s ? s->check.warning.c_str() : ""; }

ks_status ks_stability_write(const ks_stability* s, const char* report_path, const char* monodromy_csv,
                             const char* operator_csv, const char* metadata) {
  KS_REQUIRE_PTR(s);
  return guarded([&] {
    const ks::Metadata m = parse_metadata(metadata);
    if (report_path) ks::write_file(report_path, ks::stability_report_text(s->mono, s->op, s->check, m));
    if (monodromy_csv) ks::write_file(monodromy_csv, ks::eigenvalues_csv(s->mono, m));
    if (operator_csv) ks::write_file(operator_csv, ks::eigenvalues_csv(s->op, m));
    return KS_OK;
  });
}

void ks_stability_free(ks_stability* s) { delete s; }

}  // extern "C"
