/* C interface to the null quadrature domain toolkit. All handles are opaque; functions
 * return NQD_OK or an error code, with a message available from nqd_last_error(). */
#ifndef NQD_NQD_H
#define NQD_NQD_H

#include <stddef.h>
#include <stdint.h>

#if defined(NQD_BUILDING_LIBRARY)
#define NQD_API __attribute__((visibility("default")))
#else
#define NQD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nqd_status {
  NQD_OK = 0,
  NQD_E_INVALID_ARGUMENT = 1,
  NQD_E_DIMENSION = 2,
  NQD_E_SINGULAR = 3,
  NQD_E_NOT_CONVERGED = 4,
  NQD_E_RANK_DEFICIENT = 5,
  NQD_E_PARSE = 6,
  NQD_E_IO = 7,
  NQD_E_INTERNAL = 8,
  NQD_E_NOT_QUADRATIC = 9
} nqd_status;

typedef enum nqd_format { NQD_FORMAT_JSON = 0, NQD_FORMAT_CSV = 1 } nqd_format;

typedef struct nqd_domain nqd_domain;
typedef struct nqd_report nqd_report;

/* Pipeline options. Initialise with nqd_options_init; arrays are borrowed for the call. */
typedef struct nqd_options {
  double tol;
  const double* radii;
  size_t n_radii;
  const double* rho;
  size_t n_rho;
  double grid_h;
  double box;
  uint64_t seed;
  int count;
  long samples;
  int axis;
  int jmax;
  double omega;
  const double* direction;
  size_t n_direction;
  const char* series; /* blowup: "decay", "dyadic", "rescale" or "balayage" */
  int closed_forms;
} nqd_options;

NQD_API const char* nqd_version(void);
/* Message of the last failure on this thread; empty when none. */
NQD_API const char* nqd_last_error(void);

NQD_API void nqd_options_init(nqd_options* opt);

NQD_API nqd_status nqd_domain_from_json(const char* json, nqd_domain** out);
NQD_API nqd_status nqd_domain_from_file(const char* path, nqd_domain** out);
NQD_API void nqd_domain_free(nqd_domain* d);
NQD_API nqd_status nqd_domain_dim(const nqd_domain* d, int* out);
NQD_API nqd_status nqd_domain_contains(const nqd_domain* d, const double* x, int n, int* out);
/* Normalised JSON of the parsed domain; the string lives as long as the handle. */
NQD_API nqd_status nqd_domain_to_json(const nqd_domain* d, const char** out);

/* V₂ of the indicator of d at x, and its gradient (grad may be NULL). */
NQD_API nqd_status nqd_v2(const nqd_domain* d, const double* x, int n, double tol, double* value, double* grad);
NQD_API nqd_status nqd_newton_kernel(int n, const double* x, double* out);
NQD_API double nqd_ball_constant(int n);

/* Null quadrature check of the domain (taken as Ω). */
NQD_API nqd_status nqd_verify_null_qd(const nqd_domain* omega, double tol, int* is_null, double* residual);

/* Runs one named pipeline: verify, potential, schwarz, quadrature, acf, blowup, density,
 * obstacle or cone. `domain` may be NULL only for commands that do not need one. */
NQD_API nqd_status nqd_run(const char* command, const nqd_domain* domain, const nqd_options* opt, nqd_report** out);
NQD_API nqd_status nqd_report_render(const nqd_report* r, nqd_format format, const char** text);
/* 1 positive, 0 negative, -1 when the command has no verdict. */
NQD_API int nqd_report_verdict(const nqd_report* r);
NQD_API void nqd_report_free(nqd_report* r);

NQD_API size_t nqd_command_count(void);
NQD_API const char* nqd_command_name(size_t i);

#ifdef __cplusplus
}
#endif

#endif
