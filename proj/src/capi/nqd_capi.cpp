#include "nqd/nqd.h"

#include "core/commands.hpp"
#include "core/geometry.hpp"
#include "core/kernels.hpp"
#include "core/potential.hpp"
#include "core/report.hpp"
#include "core/schwarz.hpp"

#include <exception>
#include <new>
#include <string>

struct nqd_domain {
  nqd::geometry::DomainPtr spec;
  std::string json;
};

struct nqd_report {
  nqd::report::Report report;
  std::string text[2];
  bool rendered[2] = {false, false};
};

namespace {

thread_local std::string g_last_error;

nqd_status to_status(nqd::ErrorCode c) { return static_cast<nqd_status>(static_cast<int>(c)); }

template <class F>
nqd_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return NQD_OK;
  } catch (const nqd::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return NQD_E_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return NQD_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NQD_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return NQD_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw nqd::Error(nqd::ErrorCode::InvalidArgument, what);
}

nqd::Vec point(const double* x, int n) {
  require(x != nullptr && n >= 1 && n <= nqd::kMaxDim, "point: null pointer or bad dimension");
  nqd::Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = x[i];
  return v;
}

std::vector<double> array(const double* p, size_t n) {
  require(n == 0 || p != nullptr, "options: array pointer missing");
  return std::vector<double>(p, p + n);
}

}  // namespace

extern "C" {

const char* nqd_version(void) { return "0.1.0"; }

const char* nqd_last_error(void) { return g_last_error.c_str(); }

void nqd_options_init(nqd_options* opt) {
  if (!opt) return;
  const nqd::commands::RunConfig d;
  *opt = nqd_options{};
  opt->tol = d.tol;
  opt->grid_h = d.grid_h;
  opt->box = d.box;
  opt->seed = d.seed;
  opt->count = d.count;
  opt->samples = d.samples;
  opt->axis = d.axis;
  opt->jmax = d.jmax;
  opt->omega = d.omega;
  opt->series = "decay";
  opt->closed_forms = 1;
}

nqd_status nqd_domain_from_json(const char* json, nqd_domain** out) {
  return guarded([&] {
    require(json != nullptr && out != nullptr, "nqd_domain_from_json: null argument");
    *out = nullptr;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      throw nqd::Error(nqd::ErrorCode::Parse, std::string("malformed JSON: ") + e.what());
    }
    auto spec = nqd::geometry::domain_from_json(doc);
    auto* d = new nqd_domain{spec, nqd::geometry::domain_to_json(*spec).dump()};
    *out = d;
  });
}

nqd_status nqd_domain_from_file(const char* path, nqd_domain** out) {
  std::string text;
  const nqd_status s = guarded([&] {
    require(path != nullptr && out != nullptr, "nqd_domain_from_file: null argument");
    text = nqd::report::read_text(path);
  });
  if (s != NQD_OK) return s;
  return nqd_domain_from_json(text.c_str(), out);
}

void nqd_domain_free(nqd_domain* d) { delete d; }

nqd_status nqd_domain_dim(const nqd_domain* d, int* out) {
  return guarded([&] {
    require(d != nullptr && out != nullptr, "nqd_domain_dim: null argument");
    *out = d->spec->dim();
  });
}

nqd_status nqd_domain_contains(const nqd_domain* d, const double* x, int n, int* out) {
  return guarded([&] {
    require(d != nullptr && out != nullptr, "nqd_domain_contains: null argument");
    if (n != d->spec->dim()) throw nqd::Error(nqd::ErrorCode::DimensionMismatch, "nqd_domain_contains: dimension mismatch");
    *out = d->spec->contains(point(x, n)) ? 1 : 0;
  });
}

nqd_status nqd_domain_to_json(const nqd_domain* d, const char** out) {
  return guarded([&] {
    require(d != nullptr && out != nullptr, "nqd_domain_to_json: null argument");
    *out = d->json.c_str();
  });
}

nqd_status nqd_v2(const nqd_domain* d, const double* x, int n, double tol, double* value, double* grad) {
  return guarded([&] {
    require(d != nullptr && value != nullptr, "nqd_v2: null argument");
    if (n != d->spec->dim()) throw nqd::Error(nqd::ErrorCode::DimensionMismatch, "nqd_v2: dimension mismatch");
    const nqd::potential::Evaluator ev(nqd::Measure::indicator(d->spec), tol);
    const nqd::Vec p = point(x, n);
    *value = ev.value(p);
    if (grad) {
      const nqd::Vec g = ev.gradient(p);
      for (int i = 0; i < n; ++i) grad[i] = g[i];
    }
  });
}

nqd_status nqd_newton_kernel(int n, const double* x, double* out) {
  return guarded([&] {
    require(out != nullptr, "nqd_newton_kernel: null argument");
    *out = nqd::kernels::newton_kernel(n, point(x, n));
  });
}

double nqd_ball_constant(int n) { return n >= 2 ? nqd::potential::ball_constant(n) : 0.0; }

nqd_status nqd_verify_null_qd(const nqd_domain* omega, double tol, int* is_null, double* residual) {
  return guarded([&] {
    require(omega != nullptr && is_null != nullptr, "nqd_verify_null_qd: null argument");
    const auto r = nqd::schwarz::verify_null_qd(omega->spec, tol);
    *is_null = r.is_null_qd ? 1 : 0;
    if (residual) *residual = r.residual;
  });
}

nqd_status nqd_run(const char* command, const nqd_domain* domain, const nqd_options* opt, nqd_report** out) {
  return guarded([&] {
    require(command != nullptr && out != nullptr, "nqd_run: null argument");
    *out = nullptr;
    nqd_options defaults;
    nqd_options_init(&defaults);
    const nqd_options& o = opt ? *opt : defaults;
    nqd::commands::RunConfig cfg;
    cfg.command = command;
    cfg.domain = domain ? domain->spec : nullptr;
    cfg.tol = o.tol;
    cfg.radii = array(o.radii, o.n_radii);
    cfg.rho = array(o.rho, o.n_rho);
    cfg.grid_h = o.grid_h;
    cfg.box = o.box;
    cfg.seed = o.seed;
    cfg.count = o.count;
    cfg.samples = o.samples;
    cfg.axis = o.axis;
    cfg.jmax = o.jmax;
    cfg.omega = o.omega;
    cfg.direction = array(o.direction, o.n_direction);
    cfg.series = o.series ? o.series : "decay";
    cfg.closed_forms = o.closed_forms != 0;
    auto* r = new nqd_report;
    try {
      r->report = nqd::commands::run(cfg);
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
  });
}

nqd_status nqd_report_render(const nqd_report* r, nqd_format format, const char** text) {
  return guarded([&] {
    require(r != nullptr && text != nullptr, "nqd_report_render: null argument");
    require(format == NQD_FORMAT_JSON || format == NQD_FORMAT_CSV, "nqd_report_render: unknown format");
    auto* m = const_cast<nqd_report*>(r);
    const int i = format == NQD_FORMAT_CSV ? 1 : 0;
    if (!m->rendered[i]) {
      m->text[i] = m->report.render(i ? nqd::report::Format::Csv : nqd::report::Format::Json);
      m->rendered[i] = true;
    }
    *text = m->text[i].c_str();
  });
}

int nqd_report_verdict(const nqd_report* r) { return r ? r->report.verdict : -1; }

void nqd_report_free(nqd_report* r) { delete r; }

size_t nqd_command_count(void) { return nqd::commands::command_names().size(); }

const char* nqd_command_name(size_t i) {
  const auto& names = nqd::commands::command_names();
  return i < names.size() ? names[i].c_str() : nullptr;
}

}  // extern "C"
