// Command-line front end. Everything flows through the C API in
// crossview_c.h; this file only parses flags, forwards calls, and prints.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crossview_c.h"

namespace {

struct StringOut {
    char* text = nullptr;
    ~StringOut() { cvx_string_free(text); }
    std::string str() const { return text ? text : ""; }
};

struct ConfigHandle {
    cvx_config* cfg = nullptr;
    ~ConfigHandle() { cvx_config_free(cfg); }
};

[[noreturn]] void fail(cvx_status status) {
    std::fprintf(stderr, "error: %s\n", cvx_last_error());
    std::exit(status == CVX_E_IO ? 2 : 1);
}

void check(cvx_status status) {
    if (status != CVX_OK) fail(status);
}

/// Shared flags: every pipeline command resolves one config the same way.
struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
    int threads = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "pipeline config JSON");
        cmd->add_option("--set", sets, "override a config key (key.path=value)");
        cmd->add_option("--threads", threads, "worker thread cap (0 = hardware)")
            ->envname("CROSSVIEW_THREADS");
    }

    cvx_config* resolve(ConfigHandle& handle) const {
        std::vector<const char*> ptrs;
        for (const std::string& s : sets) ptrs.push_back(s.c_str());
        check(cvx_config_resolve(&handle.cfg, config_path.c_str(),
                                 ptrs.empty() ? nullptr : ptrs.data(),
                                 static_cast<int>(ptrs.size())));
        return handle.cfg;
    }
};

void print_report(const std::string& report) { std::fputs(report.c_str(), stdout); }

/// Metric commands show the aligned table; the JSON lives in the report file.
void print_table(const std::string& report) {
    auto doc = nlohmann::json::parse(report);
    std::fputs(doc.at("table").get<std::string>().c_str(), stdout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"satellite-to-street-view geometry pipeline"};
    app.require_subcommand(1);

    CommonOpts vox_opts, ext_opts, ren_opts, gtv_opts, warp_opts, ut_opts;
    std::string vox_out, ext_out, ren_extract, ren_out, gtv_center, gtv_out;
    std::string warp_extract, warp_out, ut_out, met_a, met_b, met_weights, met_out, samp_out;
    int ut_frames = 0;
    std::uint64_t samp_seed = 0;

    CLI::App* vox = app.add_subcommand("voxelize", "build the semantic occupancy grid");
    vox_opts.attach(vox);
    vox->add_option("--out", vox_out, "output CVGX path")->required();

    CLI::App* ext = app.add_subcommand("extract", "run visible-point extraction");
    ext_opts.attach(ext);
    ext->add_option("--out", ext_out, "output directory")->required();

    CLI::App* ren = app.add_subcommand("render", "render the stylized trajectory video");
    ren_opts.attach(ren);
    ren->add_option("--extract", ren_extract, "extraction directory")->required();
    ren->add_option("--out", ren_out, "output directory")->required();

    CLI::App* gtv = app.add_subcommand("gt-video", "build the ground-truth video");
    gtv_opts.attach(gtv);
    gtv->add_option("--center", gtv_center, "center-frame data directory")->required();
    gtv->add_option("--out", gtv_out, "output directory")->required();

    CLI::App* wrp = app.add_subcommand("warp", "warp the satellite image along the path");
    warp_opts.attach(wrp);
    wrp->add_option("--extract", warp_extract, "extraction directory")->required();
    wrp->add_option("--out", warp_out, "output directory")->required();

    CLI::App* met = app.add_subcommand("metrics", "compare two frame directories");
    met->add_option("a", met_a, "first frame directory")->required();
    met->add_option("b", met_b, "second frame directory")->required();
    met->add_option("--weights", met_weights, "per-frame weight mask directory");
    met->add_option("--out", met_out, "write the JSON report here");

    CLI::App* ut = app.add_subcommand("uturn", "u-turn self-consistency protocol");
    ut_opts.attach(ut);
    ut->add_option("--out", ut_out, "output directory")->required();
    ut->add_option("--frames", ut_frames, "frame count (default 60)");

    CLI::App* samp = app.add_subcommand("sample-scene", "generate the bundled synthetic scene");
    samp->add_option("--out", samp_out, "output directory")->required();
    samp->add_option("--seed", samp_seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    StringOut report;
    if (vox->parsed()) {
        ConfigHandle cfg;
        check(cvx_run_voxelize(vox_opts.resolve(cfg), vox_out.c_str(), vox_opts.threads,
                               &report.text));
        print_report(report.str());
    } else if (ext->parsed()) {
        ConfigHandle cfg;
        check(cvx_run_extract(ext_opts.resolve(cfg), ext_out.c_str(), ext_opts.threads,
                              &report.text));
        print_report(report.str());
    } else if (ren->parsed()) {
        ConfigHandle cfg;
        check(cvx_run_render(ren_opts.resolve(cfg), ren_extract.c_str(), ren_out.c_str(),
                             ren_opts.threads, &report.text));
        print_report(report.str());
    } else if (gtv->parsed()) {
        ConfigHandle cfg;
        check(cvx_run_gt_video(gtv_opts.resolve(cfg), gtv_center.c_str(), gtv_out.c_str(),
                               gtv_opts.threads, &report.text));
        print_report(report.str());
    } else if (wrp->parsed()) {
        ConfigHandle cfg;
        check(cvx_run_warp(warp_opts.resolve(cfg), warp_extract.c_str(), warp_out.c_str(),
                           warp_opts.threads, &report.text));
        print_report(report.str());
    } else if (met->parsed()) {
        check(cvx_run_metrics(met_a.c_str(), met_b.c_str(), met_weights.c_str(), met_out.c_str(),
                              &report.text));
        print_table(report.str());
    } else if (ut->parsed()) {
        ConfigHandle cfg;
        check(cvx_run_uturn(ut_opts.resolve(cfg), ut_out.c_str(), ut_frames, ut_opts.threads,
                            &report.text));
        print_table(report.str());
    } else if (samp->parsed()) {
        check(cvx_run_sample_scene(samp_out.c_str(), samp_seed, &report.text));
        print_report(report.str());
    }
    return 0;
}
