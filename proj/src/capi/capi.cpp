// capi.cpp - extern "C" shim over the C++ core.  Exceptions are mapped to
// status codes; the message is stashed per thread for mpf_last_error().
#include "mpf/mpf.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/io.hpp"
#include "core/pipeline.hpp"
#include "core/volume.hpp"

using namespace mpf;

struct mpf_volume {
    Volume v;
};

struct mpf_sinogram {
    Sinogram s;
};

namespace {

thread_local std::string g_last_error;

mpf_status code_of(ErrorCode c) {
    switch (c) {
    case ErrorCode::Config:
        return MPF_ERR_CONFIG;
    case ErrorCode::Usage:
        return MPF_ERR_USAGE;
    case ErrorCode::Dimension:
        return MPF_ERR_DIMENSION;
    case ErrorCode::InvalidTransform:
        return MPF_ERR_INVALID_TRANSFORM;
    case ErrorCode::InvalidWeights:
        return MPF_ERR_INVALID_WEIGHTS;
    case ErrorCode::Solver:
        return MPF_ERR_SOLVER;
    case ErrorCode::Io:
        return MPF_ERR_IO;
    case ErrorCode::Numeric:
        return MPF_ERR_NUMERIC;
    }
    return MPF_ERR_NUMERIC;
}

template <typename Fn>
mpf_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return MPF_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return code_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MPF_ERR_NUMERIC;
    } catch (...) {
        g_last_error = "unknown error";
        return MPF_ERR_NUMERIC;
    }
}

mpf_status require_arg(bool ok, const char* what) {
    if (ok)
        return MPF_OK;
    g_last_error = std::string("null or invalid argument: ") + what;
    return MPF_ERR_USAGE;
}

} // namespace

extern "C" {

const char* mpf_version(void) { return "1.0.0"; }

const char* mpf_last_error(void) { return g_last_error.c_str(); }

mpf_status mpf_volume_create(const int64_t dims[3], const double spacing_mm[3],
                             mpf_volume** out) {
    if (auto rc = require_arg(dims && spacing_mm && out, "mpf_volume_create"))
        return rc;
    return guarded([&] {
        GridSpec g;
        for (int a = 0; a < 3; ++a) {
            g.dims[a] = static_cast<int>(dims[a]);
            g.spacing[a] = spacing_mm[a];
        }
        g.validate("mpf_volume_create");
        *out = new mpf_volume{Volume(g)};
    });
}

mpf_status mpf_volume_read(const char* path, mpf_volume** out) {
    if (auto rc = require_arg(path && out, "mpf_volume_read"))
        return rc;
    return guarded([&] { *out = new mpf_volume{read_volume(path)}; });
}

mpf_status mpf_volume_write(const mpf_volume* v, const char* path) {
    if (auto rc = require_arg(v && path, "mpf_volume_write"))
        return rc;
    return guarded([&] { write_volume(v->v, path); });
}

void mpf_volume_free(mpf_volume* v) { delete v; }

mpf_status mpf_volume_dims(const mpf_volume* v, int64_t out[3]) {
    if (auto rc = require_arg(v && out, "mpf_volume_dims"))
        return rc;
    for (int a = 0; a < 3; ++a)
        out[a] = v->v.grid.dims[a];
    return MPF_OK;
}

mpf_status mpf_volume_spacing(const mpf_volume* v, double out_mm[3]) {
    if (auto rc = require_arg(v && out_mm, "mpf_volume_spacing"))
        return rc;
    for (int a = 0; a < 3; ++a)
        out_mm[a] = v->v.grid.spacing[a];
    return MPF_OK;
}

mpf_status mpf_volume_value_count(const mpf_volume* v, size_t* out) {
    if (auto rc = require_arg(v && out, "mpf_volume_value_count"))
        return rc;
    *out = v->v.size();
    return MPF_OK;
}

const double* mpf_volume_values(const mpf_volume* v) {
    return v ? v->v.values.data() : nullptr;
}

double* mpf_volume_values_mut(mpf_volume* v) {
    return v ? v->v.values.data() : nullptr;
}

mpf_status mpf_sinogram_read(const char* path, mpf_sinogram** out) {
    if (auto rc = require_arg(path && out, "mpf_sinogram_read"))
        return rc;
    return guarded([&] { *out = new mpf_sinogram{read_sinogram(path)}; });
}

mpf_status mpf_sinogram_write(const mpf_sinogram* s, const char* path) {
    if (auto rc = require_arg(s && path, "mpf_sinogram_write"))
        return rc;
    return guarded([&] { write_sinogram(s->s, path); });
}

void mpf_sinogram_free(mpf_sinogram* s) { delete s; }

mpf_status mpf_sinogram_shape(const mpf_sinogram* s, int64_t out[3]) {
    if (auto rc = require_arg(s && out, "mpf_sinogram_shape"))
        return rc;
    out[0] = s->s.geom.n_views;
    out[1] = s->s.geom.n_det_rows;
    out[2] = s->s.geom.n_det_cols;
    return MPF_OK;
}

mpf_status mpf_sinogram_pitch(const mpf_sinogram* s, double* out_mm) {
    if (auto rc = require_arg(s && out_mm, "mpf_sinogram_pitch"))
        return rc;
    *out_mm = s->s.geom.det_pitch;
    return MPF_OK;
}

mpf_status mpf_sinogram_angles(const mpf_sinogram* s, const double** out,
                               size_t* count) {
    if (auto rc = require_arg(s && out && count, "mpf_sinogram_angles"))
        return rc;
    *out = s->s.geom.angles.data();
    *count = s->s.geom.angles.size();
    return MPF_OK;
}

const double* mpf_sinogram_values(const mpf_sinogram* s) {
    return s ? s->s.values.data() : nullptr;
}

const double* mpf_sinogram_weights(const mpf_sinogram* s) {
    return s ? s->s.weights.data() : nullptr;
}

mpf_status mpf_simulate(const char* config_path, const char* out_dir,
                        const uint64_t* seed_override) {
    if (auto rc = require_arg(config_path != nullptr, "mpf_simulate"))
        return rc;
    return guarded([&] {
        ExperimentConfig cfg = load_config(config_path);
        std::optional<std::uint64_t> seed;
        if (seed_override)
            seed = *seed_override;
        run_simulate(cfg, out_dir ? out_dir : "", seed);
    });
}

mpf_status mpf_reconstruct(const char* config_path, const char* method, int pose,
                           const char* out_dir, const uint64_t* seed_override) {
    if (auto rc = require_arg(config_path && method, "mpf_reconstruct"))
        return rc;
    return guarded([&] {
        ExperimentConfig cfg = load_config(config_path);
        Method m = parse_method(method);
        std::optional<std::uint64_t> seed;
        if (seed_override)
            seed = *seed_override;
        run_reconstruct(cfg, m, pose < 0 ? 0 : pose, out_dir ? out_dir : "", seed);
    });
}

mpf_status mpf_metrics(const char* truth_path, const char* labels_path,
                       const char* const* recon_paths, size_t n_recons,
                       const char* report_path, char** report_out) {
    if (auto rc = require_arg(truth_path && labels_path && (recon_paths || n_recons == 0),
                              "mpf_metrics"))
        return rc;
    return guarded([&] {
        std::vector<std::string> recons;
        recons.reserve(n_recons);
        for (size_t i = 0; i < n_recons; ++i) {
            if (!recon_paths[i])
                fail(ErrorCode::Usage, "mpf_metrics: recon path " + std::to_string(i) +
                                           " is null");
            recons.emplace_back(recon_paths[i]);
        }
        MetricsReport report = run_metrics(truth_path, labels_path, recons,
                                           report_path ? report_path : "");
        if (report_out) {
            std::string table = report.table();
            char* buf = static_cast<char*>(std::malloc(table.size() + 1));
            if (!buf)
                fail(ErrorCode::Numeric, "mpf_metrics: out of memory");
            std::memcpy(buf, table.c_str(), table.size() + 1);
            *report_out = buf;
        }
    });
}

mpf_status mpf_export_png(const char* volume_path, const char* axis,
                          int64_t slice_index, double window_min, double window_max,
                          const char* png_path) {
    if (auto rc = require_arg(volume_path && axis && png_path, "mpf_export_png"))
        return rc;
    return guarded([&] {
        run_export_png(volume_path, axis, static_cast<int>(slice_index), window_min,
                       window_max, png_path);
    });
}

void mpf_string_free(char* s) { std::free(s); }

} // extern "C"
