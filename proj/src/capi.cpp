#include "spavg/spavg.h"

#include "spavg/commands.hpp"
#include "spavg/config.hpp"
#include "spavg/error.hpp"
#include "spavg/model.hpp"
#include "spavg/numfmt.hpp"
#include "spavg/scheme.hpp"

#include <filesystem>
#include <fstream>
#include <string>

struct spavg_config {
    spavg::ConfigMap map;
};

struct spavg_result {
    spavg::CommandOutput out;
};

namespace {

thread_local std::string g_last_error;

spavg_status status_of(spavg::ErrorKind k) {
    switch (k) {
        case spavg::ErrorKind::Domain: return SPAVG_ERR_DOMAIN;
        case spavg::ErrorKind::Assumption: return SPAVG_ERR_ASSUMPTION;
        case spavg::ErrorKind::Config: return SPAVG_ERR_CONFIG;
        case spavg::ErrorKind::Numeric: return SPAVG_ERR_NUMERIC;
        case spavg::ErrorKind::Argument: return SPAVG_ERR_ARGUMENT;
    }
    return SPAVG_ERR_INTERNAL;
}

template <class F>
spavg_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return SPAVG_OK;
    } catch (const spavg::Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return SPAVG_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SPAVG_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return SPAVG_ERR_INTERNAL;
    }
}

spavg_status null_arg(const char* what) {
    g_last_error = std::string(what) + " is null";
    return SPAVG_ERR_ARGUMENT;
}

spavg::VectorField wrap_field(spavg_field_fn fn, std::size_t k, void* user) {
    return [fn, k, user](std::span<const double> x, std::span<const double> z, double eps) {
        spavg::Vec out(k);
        if (fn(x.data(), x.size(), z.data(), z.size(), eps, out.data(), user) != 0)
            throw spavg::DomainError("plug-in field undefined at z = (" + spavg::join_csv(z) + ")",
                                     spavg::Vec(z.begin(), z.end()));
        return out;
    };
}

}  // namespace

extern "C" {

const char* spavg_version(void) { return "1.0.0"; }

const char* spavg_last_error(void) { return g_last_error.c_str(); }

const char* spavg_status_name(spavg_status s) {
    switch (s) {
        case SPAVG_OK: return "ok";
        case SPAVG_ERR_DOMAIN: return "domain";
        case SPAVG_ERR_ASSUMPTION: return "assumption";
        case SPAVG_ERR_CONFIG: return "config";
        case SPAVG_ERR_NUMERIC: return "numeric";
        case SPAVG_ERR_ARGUMENT: return "argument";
        case SPAVG_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

spavg_status spavg_config_create(spavg_config** out) {
    if (!out) return null_arg("out");
    return guarded([&] { *out = new spavg_config{}; });
}

void spavg_config_free(spavg_config* cfg) { delete cfg; }

spavg_status spavg_config_load_file(spavg_config* cfg, const char* path) {
    if (!cfg) return null_arg("cfg");
    if (!path) return null_arg("path");
    return guarded([&] { cfg->map.load_file(path); });
}

spavg_status spavg_config_load_string(spavg_config* cfg, const char* text) {
    if (!cfg) return null_arg("cfg");
    if (!text) return null_arg("text");
    return guarded([&] { cfg->map.load_string(text); });
}

spavg_status spavg_config_set(spavg_config* cfg, const char* key, const char* value) {
    if (!cfg) return null_arg("cfg");
    if (!key) return null_arg("key");
    if (!value) return null_arg("value");
    return guarded([&] { cfg->map.set(key, value); });
}

spavg_status spavg_run(const spavg_config* cfg, const char* command, spavg_result** out) {
    if (!cfg) return null_arg("cfg");
    if (!command) return null_arg("command");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guarded([&] { *out = new spavg_result{spavg::run_command(cfg->map, command)}; });
}

void spavg_result_free(spavg_result* res) { delete res; }

const char* spavg_result_summary(const spavg_result* res) { return res ? res->out.summary.c_str() : ""; }

int spavg_result_verdict(const spavg_result* res) { return res ? res->out.verdict : -1; }

size_t spavg_result_artifact_count(const spavg_result* res) { return res ? res->out.artifacts.size() : 0; }

const char* spavg_result_artifact_name(const spavg_result* res, size_t i) {
    if (!res || i >= res->out.artifacts.size()) return nullptr;
    return res->out.artifacts[i].first.c_str();
}

const char* spavg_result_artifact_data(const spavg_result* res, size_t i, size_t* len) {
    if (!res || i >= res->out.artifacts.size()) {
        if (len) *len = 0;
        return nullptr;
    }
    const std::string& d = res->out.artifacts[i].second;
    if (len) *len = d.size();
    return d.c_str();
}

spavg_status spavg_result_write(const spavg_result* res, const char* dir) {
    if (!res) return null_arg("res");
    if (!dir) return null_arg("dir");
    return guarded([&] {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) spavg::fail(spavg::ErrorKind::Config, "cannot create output directory '" + std::string(dir) + "'");
        for (const auto& [name, data] : res->out.artifacts) {
            const fs::path p = fs::path(dir) / name;
            std::ofstream f(p, std::ios::binary);
            f.write(data.data(), static_cast<std::streamsize>(data.size()));
            if (!f) spavg::fail(spavg::ErrorKind::Config, "cannot write '" + p.string() + "'");
        }
    });
}

spavg_status spavg_solve_seps(double L, double T, double eps, double* S_out) {
    if (!S_out) return null_arg("S_out");
    return guarded([&] { *S_out = spavg::solve_seps(L, T, eps); });
}

spavg_status spavg_register_system(const char* name, const spavg_system_desc* desc) {
    if (!name) return null_arg("name");
    if (!desc) return null_arg("desc");
    return guarded([&] {
        const spavg_system_desc d = *desc;
        spavg::require(d.n > 0 && d.m > 0, "register_system: dimensions must be positive");
        spavg::require(d.f && d.g && d.dist, "register_system: f, g and dist are required");
        spavg::require(d.R > 0.0 && d.eps1 > 0.0, "register_system: R and eps1 must be positive");
        spavg::FastDomain M;
        if (d.shape == SPAVG_FAST_BOX) {
            spavg::require(d.lo && d.hi, "register_system: box bounds are required");
            M = spavg::FastDomain::box(spavg::Vec(d.lo, d.lo + d.m), spavg::Vec(d.hi, d.hi + d.m));
        } else {
            spavg::require(d.center != nullptr, "register_system: annulus center is required");
            M = spavg::FastDomain::annulus(spavg::Vec(d.center, d.center + d.m), d.inner, d.outer);
        }
        const std::string sys_name = name;
        spavg::register_system(sys_name, [d, M, sys_name] {
            spavg::SystemBundle b;
            b.sys.name = sys_name;
            b.sys.n = d.n;
            b.sys.m = d.m;
            b.sys.f = wrap_field(d.f, d.n, d.user);
            b.sys.g = wrap_field(d.g, d.m, d.user);
            b.dom.R = d.R;
            b.dom.eps1 = d.eps1;
            b.dom.M = M;
            b.att.dist = [d](std::span<const double> z) { return d.dist(z.data(), z.size(), d.user); };
            b.att.description = "plug-in";
            return b;
        });
    });
}

}  // extern "C"
