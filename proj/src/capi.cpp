#include "crossview_c.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "crossview/config.hpp"
#include "crossview/pipeline.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_text(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (out) std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

std::string opt(const char* s) { return s ? s : ""; }

/// Runs fn, routing exceptions into (status, cvx_last_error).
template <typename Fn>
cvx_status guarded(Fn&& fn) {
    try {
        fn();
        return CVX_OK;
    } catch (const crossview::IoError& e) {
        g_last_error = e.what();
        return CVX_E_IO;
    } catch (const crossview::Error& e) {
        g_last_error = e.what();
        return CVX_E_VALIDATION;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CVX_E_VALIDATION;
    }
}

}  // namespace

struct cvx_config {
    crossview::PipelineConfig cfg;
};

extern "C" {

const char* cvx_last_error(void) { return g_last_error.c_str(); }

const char* cvx_version(void) { return "1.0.0"; }

void cvx_string_free(char* text) { std::free(text); }

cvx_status cvx_config_create(cvx_config** out) {
    return guarded([&] {
        crossview::PipelineConfig cfg;
        cfg.validate();
        *out = new cvx_config{std::move(cfg)};
    });
}

cvx_status cvx_config_resolve(cvx_config** out, const char* path, const char* const* overrides,
                              int override_count) {
    return guarded([&] {
        std::vector<std::string> sets;
        for (int i = 0; i < override_count; ++i) sets.emplace_back(overrides[i]);
        *out = new cvx_config{crossview::resolve_config(opt(path), sets)};
    });
}

cvx_status cvx_config_json(const cvx_config* cfg, char** out_text) {
    return guarded([&] { *out_text = dup_text(cfg->cfg.to_json_text()); });
}

void cvx_config_free(cvx_config* cfg) { delete cfg; }

cvx_status cvx_run_voxelize(const cvx_config* cfg, const char* out_path, int threads,
                            char** report) {
    return guarded([&] {
        *report = dup_text(crossview::pipeline::cmd_voxelize(cfg->cfg, opt(out_path), threads));
    });
}

cvx_status cvx_run_extract(const cvx_config* cfg, const char* out_dir, int threads,
                           char** report) {
    return guarded([&] {
        *report = dup_text(crossview::pipeline::cmd_extract(cfg->cfg, opt(out_dir), threads));
    });
}

cvx_status cvx_run_render(const cvx_config* cfg, const char* extract_dir, const char* out_dir,
                          int threads, char** report) {
    return guarded([&] {
        *report = dup_text(
            crossview::pipeline::cmd_render(cfg->cfg, opt(extract_dir), opt(out_dir), threads));
    });
}

cvx_status cvx_run_gt_video(const cvx_config* cfg, const char* center_dir, const char* out_dir,
                            int threads, char** report) {
    return guarded([&] {
        *report = dup_text(
            crossview::pipeline::cmd_gt_video(cfg->cfg, opt(center_dir), opt(out_dir), threads));
    });
}

cvx_status cvx_run_warp(const cvx_config* cfg, const char* extract_dir, const char* out_dir,
                        int threads, char** report) {
    return guarded([&] {
        *report = dup_text(
            crossview::pipeline::cmd_warp(cfg->cfg, opt(extract_dir), opt(out_dir), threads));
    });
}

cvx_status cvx_run_metrics(const char* dir_a, const char* dir_b, const char* weights_dir,
                           const char* report_path, char** report) {
    return guarded([&] {
        *report = dup_text(crossview::pipeline::cmd_metrics(opt(dir_a), opt(dir_b),
                                                            opt(weights_dir), opt(report_path)));
    });
}

cvx_status cvx_run_uturn(const cvx_config* cfg, const char* out_dir, int frames_override,
                         int threads, char** report) {
    return guarded([&] {
        *report = dup_text(
            crossview::pipeline::cmd_uturn(cfg->cfg, opt(out_dir), frames_override, threads));
    });
}

cvx_status cvx_run_sample_scene(const char* out_dir, uint64_t seed, char** report) {
    return guarded([&] {
        *report = dup_text(crossview::pipeline::cmd_sample_scene(opt(out_dir), seed));
    });
}

}  // extern "C"
