// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors
//
// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "celltrack/celltrack.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

// Carries the exit code of a failed C call up to main.
struct CommandError : std::runtime_error {
    CommandError(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
    int code;
};

int exit_code_for(ct_status s) { return s == CT_ERR_INTERNAL ? kExitInternal : kExitUsage; }

void check(ct_status s, const std::string& context) {
    if (s == CT_OK) return;
    throw CommandError(exit_code_for(s), context + ": " + ct_status_name(s) + ": " + ct_last_error());
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
    void operator()(T* p) const { Destroy(p); }
};
using Config = std::unique_ptr<ct_config, Deleter<ct_config, ct_config_destroy>>;
using Detections = std::unique_ptr<ct_detections, Deleter<ct_detections, ct_detections_destroy>>;
using Forest = std::unique_ptr<ct_forest, Deleter<ct_forest, ct_forest_destroy>>;
using Report = std::unique_ptr<ct_report, Deleter<ct_report, ct_report_destroy>>;

struct CommonOptions {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out;
    int workers = 1;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "key=value config file (a previous manifest works too)");
    cmd->add_option("--seed", o.seed, "random seed")->each([&o](const std::string&) { o.seed_given = true; });
    cmd->add_option("--out", o.out, "output directory")->required();
    cmd->add_option("--workers", o.workers, "parallel videos")->check(CLI::PositiveNumber);
    cmd->add_option("--set", o.overrides, "override a config key, key=value (repeatable)");
}

Config build_config(const CommonOptions& o) {
    ct_config* raw = nullptr;
    check(ct_config_create(&raw), "config");
    Config cfg(raw);
    if (!o.config_path.empty()) check(ct_config_load(cfg.get(), o.config_path.c_str()), "config");
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw CommandError(kExitUsage, "--set expects key=value, got '" + kv + "'");
        check(ct_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()), "--set " + kv);
    }
    if (o.seed_given) check(ct_config_set(cfg.get(), "seed", std::to_string(o.seed).c_str()), "--seed");
    check(ct_config_validate(cfg.get()), "config");
    return cfg;
}

std::string config_value(const ct_config* cfg, const char* key) {
    size_t needed = 0;
    check(ct_config_get(cfg, key, nullptr, 0, &needed), key);
    std::string buf(needed, '\0');
    check(ct_config_get(cfg, key, buf.data(), buf.size(), &needed), key);
    buf.resize(needed - 1);
    return buf;
}

std::uint64_t config_seed(const ct_config* cfg) { return std::stoull(config_value(cfg, "seed")); }

// The manifest is the config snapshot plus run.* bookkeeping lines, which
// the config loader skips; feeding it back through --config reruns the command.
void write_manifest(const ct_config* cfg, const fs::path& out, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& inputs, int workers) {
    fs::create_directories(out);
    const fs::path path = out / "manifest.txt";
    check(ct_config_save(cfg, path.string().c_str()), "manifest");
    std::ofstream m(path, std::ios::app);
    m << "run.command=" << command << '\n';
    m << "run.version=" << ct_version() << '\n';
    for (const auto& [k, v] : inputs) m << "run." << k << '=' << v << '\n';
    m << "run.out=" << out.string() << '\n';
    m << "run.workers=" << workers << '\n';
    if (!m) throw CommandError(kExitUsage, "cannot write manifest '" + path.string() + "'");
}

void require_file(const std::string& path, const char* what) {
    if (!fs::exists(path)) throw CommandError(kExitUsage, std::string(what) + " '" + path + "' does not exist");
}

void cmd_simulate(const CommonOptions& o, int videos_flag) {
    Config cfg = build_config(o);
    if (videos_flag > 0) check(ct_config_set(cfg.get(), "sim.videos", std::to_string(videos_flag).c_str()), "--videos");
    const int videos = std::stoi(config_value(cfg.get(), "sim.videos"));
    const std::uint64_t seed = config_seed(cfg.get());
    const fs::path out(o.out);
    write_manifest(cfg.get(), out, "simulate", {}, o.workers);

    auto one = [&](int i) {
        char name[32];
        std::snprintf(name, sizeof name, "video_%03d", i);
        const fs::path dir = videos == 1 ? out : out / name;
        ct_config* raw = nullptr;
        check(ct_config_clone(cfg.get(), &raw), "config");
        Config local(raw);
        if (videos > 1) check(ct_config_set(local.get(), "sim.video_id", dir.filename().string().c_str()), "video id");
        ct_forest* gt = nullptr;
        ct_detections *clean = nullptr, *noisy = nullptr;
        check(ct_simulate(local.get(), seed + static_cast<std::uint64_t>(i), &gt, &clean, &noisy), "simulate");
        Forest g(gt);
        Detections c(clean), n(noisy);
        check(ct_forest_save(g.get(), (dir / "gt").string().c_str()), "write ground truth");
        check(ct_detections_save(c.get(), (dir / "clean.det").string().c_str()), "write clean detections");
        check(ct_detections_save(n.get(), (dir / "noisy.det").string().c_str()), "write noisy detections");
    };

    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (int i = next++; i < videos; i = next++) {
            try {
                one(i);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < std::min(o.workers, videos); ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

void cmd_track(const CommonOptions& o, const std::string& detections_path) {
    Config cfg = build_config(o);
    require_file(detections_path, "detection file");
    const fs::path out(o.out);
    write_manifest(cfg.get(), out, "track", {{"detections", detections_path}}, o.workers);
    ct_detections* raw = nullptr;
    check(ct_detections_load(detections_path.c_str(), &raw), "load detections");
    Detections dets(raw);
    ct_forest* forest = nullptr;
    check(ct_track(cfg.get(), dets.get(), &forest), "track");
    Forest f(forest);
    check(ct_forest_save(f.get(), out.string().c_str()), "write forest");
}

void cmd_evaluate(const CommonOptions& o, const std::string& pred_dir, const std::string& gt_dir) {
    Config cfg = build_config(o);
    require_file(pred_dir, "prediction directory");
    require_file(gt_dir, "ground-truth directory");
    const fs::path out(o.out);
    write_manifest(cfg.get(), out, "evaluate", {{"pred", pred_dir}, {"gt", gt_dir}}, o.workers);
    ct_forest *p = nullptr, *g = nullptr;
    check(ct_forest_load(pred_dir.c_str(), 0, &p), "load prediction");
    Forest pred(p);
    check(ct_forest_load(gt_dir.c_str(), 1, &g), "load ground truth");
    Forest gt(g);
    ct_report* r = nullptr;
    check(ct_evaluate(cfg.get(), pred.get(), gt.get(), &r), "evaluate");
    Report report(r);
    check(ct_report_save_kv(report.get(), (out / "metrics.txt").string().c_str()), "write metrics");
    check(ct_report_save_json(report.get(), (out / "metrics.json").string().c_str()), "write metrics");
    for (const char* key : {"det", "lnk", "tra", "hota", "mota", "idf1"}) {
        double v = 0.0;
        check(ct_report_get(report.get(), key, &v), key);
        std::cout << key << '=' << v << '\n';
    }
}

void cmd_ablate(const CommonOptions& o, const std::string& corpus, const std::string& det_file) {
    Config cfg = build_config(o);
    require_file(corpus, "corpus directory");
    const fs::path out(o.out);
    write_manifest(cfg.get(), out, "ablate", {{"corpus", corpus}, {"detections", det_file}}, o.workers);
    const fs::path csv = out / "ablation.csv";
    check(ct_ablate(cfg.get(), corpus.c_str(), det_file.c_str(), o.workers, csv.string().c_str()), "ablate");
    std::ifstream in(csv);
    std::cout << in.rdbuf();
}

void cmd_analyze(const CommonOptions& o, const std::vector<std::string>& forests) {
    Config cfg = build_config(o);
    for (const auto& f : forests) require_file(f, "forest directory");
    const fs::path out(o.out);
    std::string joined;
    for (const auto& f : forests) joined += (joined.empty() ? "" : ";") + f;
    write_manifest(cfg.get(), out, "analyze", {{"forests", joined}}, o.workers);
    std::vector<const char*> paths;
    for (const auto& f : forests) paths.push_back(f.c_str());
    check(ct_analyze(cfg.get(), paths.data(), paths.size(), config_seed(cfg.get()), out.string().c_str()), "analyze");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"celltrack: lineage tracking, evaluation and analysis for live-cell detections"};
    app.set_version_flag("--version", std::string(ct_version()));
    app.require_subcommand(1);

    CommonOptions sim_o, track_o, eval_o, abl_o, an_o;
    int videos = 0;
    auto* sim = app.add_subcommand("simulate", "generate ground truth plus clean and noisy detections");
    add_common(sim, sim_o);
    sim->add_option("--videos", videos, "number of videos (overrides sim.videos)")->check(CLI::PositiveNumber);

    std::string detections;
    auto* track = app.add_subcommand("track", "track a detection file into a lineage forest");
    add_common(track, track_o);
    track->add_option("detections", detections, "detection file")->required();

    std::string pred, gt;
    auto* eval = app.add_subcommand("evaluate", "score a predicted forest against ground truth");
    add_common(eval, eval_o);
    eval->add_option("--pred", pred, "predicted forest directory")->required();
    eval->add_option("--gt", gt, "ground-truth forest directory")->required();

    std::string corpus, det_file = "noisy.det";
    auto* abl = app.add_subcommand("ablate", "ablation table and memory sweep over a corpus");
    add_common(abl, abl_o);
    abl->add_option("corpus", corpus, "corpus directory")->required();
    abl->add_option("--detections", det_file, "detection file name inside each video directory");

    std::vector<std::string> forests;
    auto* an = app.add_subcommand("analyze", "lineage statistics over one or more forests");
    add_common(an, an_o);
    an->add_option("forests", forests, "forest directories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*sim) cmd_simulate(sim_o, videos);
        else if (*track) cmd_track(track_o, detections);
        else if (*eval) cmd_evaluate(eval_o, pred, gt);
        else if (*abl) cmd_ablate(abl_o, corpus, det_file);
        else if (*an) cmd_analyze(an_o, forests);
    } catch (const CommandError& e) {
        std::cerr << "celltrack: " << e.what() << '\n';
        return e.code;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "celltrack: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "celltrack: internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitOk;
}
