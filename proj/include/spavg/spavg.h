/* C interface to the spavg library. All functions are safe to call from any
 * thread; the last error message is kept per thread. */
#ifndef SPAVG_H
#define SPAVG_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SPAVG_API __declspec(dllexport)
#else
#define SPAVG_API __attribute__((visibility("default")))
#endif

typedef enum spavg_status {
    SPAVG_OK = 0,
    SPAVG_ERR_DOMAIN = 1,     /* state left the domain or hit the excluded region */
    SPAVG_ERR_ASSUMPTION = 2, /* a standing hypothesis failed on the data */
    SPAVG_ERR_CONFIG = 3,     /* bad configuration, key or command */
    SPAVG_ERR_NUMERIC = 4,    /* solver exhaustion or overflow */
    SPAVG_ERR_ARGUMENT = 5,   /* invalid argument */
    SPAVG_ERR_INTERNAL = 6
} spavg_status;

typedef struct spavg_config spavg_config;
typedef struct spavg_result spavg_result;

SPAVG_API const char* spavg_version(void);
/* Message of the last failed call on this thread, "" if none. */
SPAVG_API const char* spavg_last_error(void);
SPAVG_API const char* spavg_status_name(spavg_status s);

SPAVG_API spavg_status spavg_config_create(spavg_config** out);
SPAVG_API void spavg_config_free(spavg_config* cfg);
SPAVG_API spavg_status spavg_config_load_file(spavg_config* cfg, const char* path);
SPAVG_API spavg_status spavg_config_load_string(spavg_config* cfg, const char* text);
/* key is "section.name" (or "seed"); replaces any earlier value. */
SPAVG_API spavg_status spavg_config_set(spavg_config* cfg, const char* key, const char* value);

/* command: simulate, average, grid, bounds, sweep, figures or estimate. */
SPAVG_API spavg_status spavg_run(const spavg_config* cfg, const char* command, spavg_result** out);
SPAVG_API void spavg_result_free(spavg_result* res);
SPAVG_API const char* spavg_result_summary(const spavg_result* res);
/* 1 pass, 0 fail, -1 no verdict. */
SPAVG_API int spavg_result_verdict(const spavg_result* res);
SPAVG_API size_t spavg_result_artifact_count(const spavg_result* res);
SPAVG_API const char* spavg_result_artifact_name(const spavg_result* res, size_t i);
SPAVG_API const char* spavg_result_artifact_data(const spavg_result* res, size_t i, size_t* len);
/* Writes every artifact into dir (created if missing). */
SPAVG_API spavg_status spavg_result_write(const spavg_result* res, const char* dir);

SPAVG_API spavg_status spavg_solve_seps(double L, double T, double eps, double* S_out);

/* Field callback: writes k outputs to out; nonzero return marks (x, z) as
 * outside the region where the field is defined. */
typedef int (*spavg_field_fn)(const double* x, size_t n, const double* z, size_t m, double eps, double* out,
                              void* user);
typedef double (*spavg_dist_fn)(const double* z, size_t m, void* user);

typedef enum spavg_fast_shape { SPAVG_FAST_BOX = 0, SPAVG_FAST_ANNULUS = 1 } spavg_fast_shape;

typedef struct spavg_system_desc {
    size_t n;
    size_t m;
    spavg_field_fn f; /* n outputs */
    spavg_field_fn g; /* m outputs */
    spavg_dist_fn dist;
    void* user;       /* passed to every callback; must outlive the registration */
    double R;
    double eps1;
    spavg_fast_shape shape;
    const double* lo;     /* box: m values */
    const double* hi;     /* box: m values */
    const double* center; /* annulus: m values */
    double inner;
    double outer;
} spavg_system_desc;

SPAVG_API spavg_status spavg_register_system(const char* name, const spavg_system_desc* desc);

#ifdef __cplusplus
}
#endif

#endif
