// maestro_sim: engine micro-benchmarks, the wearable-ultrasound pipeline,
// oracle-differential sweeps and report generation.
//
//   maestro_sim fft     --points 1024 --width c32 --input impulse
//   maestro_sim gemm    --m 96 --n 64 --k 64 --engine vtu
//   maestro_sim buffers --json
//   maestro_sim wus     --frames 39 --seed 7 --oracle
//
// Every artifact embeds the fully resolved run configuration; reruns with
// the same configuration and seed are byte-identical. Wall-clock metadata
// goes only to the run_meta.json sidecar. Exit codes: 0 ok, 2 configuration
// error, 3 numerical threshold exceeded, 4 I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <thread>

#include "maestro/io.hpp"
#include "maestro/perf.hpp"
#include "maestro/pipeline.hpp"
#include "maestro/reference.hpp"
#include "maestro/thresholds.hpp"

using json = nlohmann::ordered_json;
using namespace maestro;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitThreshold = 3;
constexpr int kExitIo = 4;

json load_strict_json(const std::string& path,
                      const std::set<std::string>& known) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config parse: ") + e.what());
    }
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            throw std::invalid_argument("config: unknown key '" + key + "'");
    return j;
}

// true when the flag was not given on the command line (config may fill it)
bool unset(CLI::App* cmd, const std::string& flag) {
    return cmd->get_option(flag)->count() == 0;
}

void write_artifact(const fs::path& dir, const std::string& name,
                    const std::string& bytes) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    io::write_file(dir / name, bytes);
}

void write_run_meta(const fs::path& dir, const std::string& subcommand) {
    json meta;
    meta["subcommand"] = subcommand;
    meta["wall_clock_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    write_artifact(dir, "run_meta.json", meta.dump(2) + "\n");
}

unsigned thread_budget(size_t jobs) {
    unsigned t = 1;
    if (const char* env = std::getenv("MAESTRO_SIM_THREADS"))
        t = static_cast<unsigned>(std::max(1L, std::atol(env)));
    return static_cast<unsigned>(std::min<size_t>(t, jobs));
}

json trace_json(const fft::FftCycleTrace& t) {
    return {{"butterflies", t.butterflies},
            {"stage_butterflies", t.stage_butterflies},
            {"stage_cycles", t.stage_cycles},
            {"stall_cycles_final", t.stall_cycles_final},
            {"overhead_cycles", t.overhead_cycles},
            {"total_cycles", t.total_cycles},
            {"flops", t.flops},
            {"flop_per_cycle", t.flop_per_cycle()}};
}

json trace_json(const gemm::GemmCycleTrace& t) {
    return {{"total_cycles", t.total_cycles},
            {"fma_issued", t.fma_issued},
            {"peak_fma_per_cycle", t.peak_fma_per_cycle},
            {"utilization", t.utilization()},
            {"utilization_compute_only", t.utilization_compute_only()},
            {"vrf_load_cycles", t.vrf_load_cycles},
            {"compute_cycles", t.compute_cycles},
            {"writeback_cycles", t.writeback_cycles},
            {"pointer_swap_cycles", t.pointer_swap_cycles},
            {"overhead_cycles", t.overhead_cycles},
            {"port_conflict_stalls", t.port_conflict_stalls},
            {"flops", t.flops()}};
}

// --- fft subcommand ----------------------------------------------------------

struct FftOptions {
    size_t points = 1024;
    std::string width = "c32";
    bool inverse = false;
    std::string input = "impulse";  // impulse | constant | random | <file.bin>
    uint64_t seed = 1;
    double scale = 1.0;
    uint64_t overhead = 16;
    bool compare_oracle = false;
    std::string out = "out/fft";
};

void apply_config(FftOptions& o, CLI::App* cmd, const std::string& path) {
    const json j = load_strict_json(
        path, {"points", "width", "inverse", "input", "seed", "scale",
               "overhead", "compare_oracle", "out"});
    if (j.contains("points") && unset(cmd, "--points")) o.points = j["points"];
    if (j.contains("width") && unset(cmd, "--width")) o.width = j["width"];
    if (j.contains("inverse") && unset(cmd, "--inverse"))
        o.inverse = j["inverse"];
    if (j.contains("input") && unset(cmd, "--input")) o.input = j["input"];
    if (j.contains("seed") && unset(cmd, "--seed")) o.seed = j["seed"];
    if (j.contains("scale") && unset(cmd, "--scale")) o.scale = j["scale"];
    if (j.contains("overhead") && unset(cmd, "--overhead"))
        o.overhead = j["overhead"];
    if (j.contains("compare_oracle") && unset(cmd, "--compare-oracle"))
        o.compare_oracle = j["compare_oracle"];
    if (j.contains("out") && unset(cmd, "--out"))
        o.out = j["out"].get<std::string>();
}

json resolved_config(const FftOptions& o) {
    return {{"points", o.points},     {"width", o.width},
            {"inverse", o.inverse},   {"input", o.input},
            {"seed", o.seed},         {"scale", o.scale},
            {"overhead", o.overhead}, {"compare_oracle", o.compare_oracle},
            {"out", o.out}};
}

int run_fft(const FftOptions& o) {
    fft::Width w;
    if (o.width == "c32")
        w = fft::Width::C32;
    else if (o.width == "c64")
        w = fft::Width::C64;
    else
        throw std::invalid_argument("width: c32|c64");
    const Format f = fft::part_format(w);

    fft::FftJob job;
    job.points = o.points;
    job.width = w;
    job.inverse = o.inverse;
    if (o.input == "impulse") {
        job.input.assign(o.points, fft::complex_from(0, 0, f));
        job.input[0] = fft::complex_from(o.scale, 0, f);
    } else if (o.input == "constant") {
        job.input.assign(o.points, fft::complex_from(o.scale, 0, f));
    } else if (o.input == "random") {
        std::mt19937_64 g(o.seed);
        job.input.resize(o.points);
        for (auto& c : job.input) {
            const double re = static_cast<double>(g() >> 11) * 0x1.0p-52 - 1;
            const double im = static_cast<double>(g() >> 11) * 0x1.0p-52 - 1;
            c = fft::complex_from(o.scale * re, o.scale * im, f);
        }
    } else {
        job.input = io::decode_samples(io::read_file(o.input), w);
        if (job.input.size() != o.points)
            throw InvalidLength("input file holds " +
                                std::to_string(job.input.size()) +
                                " samples, expected --points");
    }

    fft::FftCycleConfig cfg{o.overhead};
    auto res = fft::fft(job, fft::default_tables(), cfg);

    const fs::path dir(o.out);
    write_artifact(dir, "fft_output.bin", io::encode_samples(res.output, w));
    write_artifact(dir, "fft_output.csv", io::samples_csv(res.output));

    json report;
    report["config"] = resolved_config(o);
    report["trace"] = trace_json(res.trace);

    int exit_code = kExitOk;
    if (o.compare_oracle) {
        auto want = ref::to_cd(job.input);
        ref::fft_radix2(want, o.inverse);
        const double err = ref::rel_l2_error(ref::to_cd(res.output), want);
        const double thr = w == fft::Width::C64 ? thresholds::kFftC64RelL2
                                                : thresholds::kFftC32RelL2;
        report["oracle"] = {{"rel_l2", err}, {"threshold", thr}};
        std::string csv = "bin,abs_err\n";
        auto got = ref::to_cd(res.output);
        char line[64];
        for (size_t i = 0; i < got.size(); ++i) {
            std::snprintf(line, sizeof line, "%zu,%.9g\n", i,
                          std::abs(got[i] - want[i]));
            csv += line;
        }
        write_artifact(dir, "oracle_diff.csv", csv);
        if (err >= thr) exit_code = kExitThreshold;
    }
    write_artifact(dir, "fft_trace.json", report.dump(2) + "\n");
    write_run_meta(dir, "fft");
    std::cout << report["trace"].dump(2) << "\n";
    if (exit_code == kExitThreshold)
        std::cerr << "oracle threshold exceeded\n";
    return exit_code;
}

// --- gemm subcommand ---------------------------------------------------------

struct GemmOptions {
    size_t m = 12, n = 16, k = 16;
    std::string fmt = "fp16";
    std::string acc = "fp16";
    std::string engine = "vtu";
    uint64_t seed = 1;
    double freq_mhz = 210.0;
    std::string out = "out/gemm";
};

void apply_config(GemmOptions& o, CLI::App* cmd, const std::string& path) {
    const json j = load_strict_json(
        path, {"m", "n", "k", "fmt", "acc", "engine", "seed", "freq_mhz",
               "out"});
    if (j.contains("m") && unset(cmd, "--m")) o.m = j["m"];
    if (j.contains("n") && unset(cmd, "--n")) o.n = j["n"];
    if (j.contains("k") && unset(cmd, "--k")) o.k = j["k"];
    if (j.contains("fmt") && unset(cmd, "--fmt")) o.fmt = j["fmt"];
    if (j.contains("acc") && unset(cmd, "--acc")) o.acc = j["acc"];
    if (j.contains("engine") && unset(cmd, "--engine")) o.engine = j["engine"];
    if (j.contains("seed") && unset(cmd, "--seed")) o.seed = j["seed"];
    if (j.contains("freq_mhz") && unset(cmd, "--freq-mhz"))
        o.freq_mhz = j["freq_mhz"];
    if (j.contains("out") && unset(cmd, "--out"))
        o.out = j["out"].get<std::string>();
}

Format parse_format(const std::string& s) {
    if (s == "fp16") return Format::FP16;
    if (s == "fp32") return Format::FP32;
    if (s == "fp8e4m3") return Format::FP8E4M3;
    if (s == "fp8e5m2") return Format::FP8E5M2;
    throw std::invalid_argument("format: fp16|fp32|fp8e4m3|fp8e5m2");
}

json resolved_config(const GemmOptions& o) {
    return {{"m", o.m},       {"n", o.n},
            {"k", o.k},       {"fmt", o.fmt},
            {"acc", o.acc},   {"engine", o.engine},
            {"seed", o.seed}, {"freq_mhz", o.freq_mhz},
            {"out", o.out}};
}

int run_gemm(const GemmOptions& o) {
    gemm::GemmShape shape{o.m, o.n, o.k, parse_format(o.fmt),
                          parse_format(o.acc)};
    std::mt19937_64 g(o.seed);
    auto rand_matrix = [&](size_t r, size_t c, Format f) {
        Matrix m(r, c, f);
        for (size_t i = 0; i < m.size(); ++i) {
            const double v = static_cast<double>(g() >> 11) * 0x1.0p-52 - 1.0;
            m[i] = from_double(v, f);
        }
        return m;
    };
    Matrix x = rand_matrix(o.m, o.k, shape.in_format);
    Matrix w = rand_matrix(o.k, o.n, shape.in_format);
    Matrix y = rand_matrix(o.m, o.n, shape.acc_format);

    gemm::GemmResult res;
    if (o.engine == "vtu")
        res = gemm::vtu_gemm(x, w, y, shape);
    else if (o.engine == "vau")
        res = gemm::vau_gemm(x, w, y, shape);
    else
        throw std::invalid_argument("engine: vtu|vau");

    const fs::path dir(o.out);
    write_artifact(dir, "gemm_z.bin", io::encode_matrix(res.z));
    write_artifact(dir, "gemm_z.csv", io::matrix_csv(res.z));

    json report;
    report["config"] = resolved_config(o);
    report["trace"] = trace_json(res.trace);
    report["gflops_at_freq"] = res.trace.flops() /
                               static_cast<double>(res.trace.total_cycles) *
                               o.freq_mhz * 1e6 / 1e9;
    write_artifact(dir, "gemm_trace.json", report.dump(2) + "\n");
    write_run_meta(dir, "gemm");
    std::cout << report.dump(2) << "\n";
    return kExitOk;
}

// --- buffers subcommand --------------------------------------------------------

json buffers_json() {
    auto orig = gemm::buffer_accounting(gemm::BufferVariant::Original);
    auto red = gemm::buffer_accounting(gemm::BufferVariant::Reduced);
    json j;
    j["original"] = {{"x_bytes", orig.x_bytes},
                     {"y_bytes", orig.y_bytes},
                     {"w_bytes", orig.w_bytes},
                     {"total_bytes", orig.total_bytes}};
    j["reduced"] = {{"x_bytes", red.x_bytes},
                    {"y_bytes", red.y_bytes},
                    {"w_bytes", red.w_bytes},
                    {"total_bytes", red.total_bytes}};
    j["reduction_pct"] = {{"x", red.x_reduction_pct},
                          {"y", red.y_reduction_pct},
                          {"w", red.w_reduction_pct},
                          {"total", red.total_reduction_pct}};
    return j;
}

std::string buffers_text() {
    auto orig = gemm::buffer_accounting(gemm::BufferVariant::Original);
    auto red = gemm::buffer_accounting(gemm::BufferVariant::Reduced);
    char line[128];
    std::string s = "tensor-unit buffer capacity (standalone -> integrated)\n";
    auto row = [&](const char* name, unsigned a, unsigned b, double pct) {
        std::snprintf(line, sizeof line, "%-8s %5u B -> %4u B  (%.1f%%)\n",
                      name, a, b, pct);
        s += line;
    };
    row("X buffer", orig.x_bytes, red.x_bytes, red.x_reduction_pct);
    row("Y buffer", orig.y_bytes, red.y_bytes, red.y_reduction_pct);
    row("W buffer", orig.w_bytes, red.w_bytes, red.w_reduction_pct);
    row("total", orig.total_bytes, red.total_bytes, red.total_reduction_pct);
    return s;
}

int run_buffers(bool as_json, const std::string& out) {
    const std::string text = buffers_text();
    const json j = buffers_json();
    std::cout << (as_json ? j.dump(2) + "\n" : text);
    const fs::path dir(out);
    write_artifact(dir, "buffers.txt", text);
    write_artifact(dir, "buffers.json", j.dump(2) + "\n");
    write_run_meta(dir, "buffers");
    return kExitOk;
}

// --- wus subcommand --------------------------------------------------------------

struct WusOptions {
    size_t frames = 1;
    uint64_t seed = 7;
    std::string scenario;  // optional JSON file
    std::string model = "random";
    uint64_t model_seed = 7;
    size_t classes = 10;
    std::vector<size_t> cnn_channels = {32, 64, 128};
    bool oracle = false;
    double freq_mhz = 210.0;
    double power_mw = 12.0;
    double battery_mah = 320.0;
    double battery_v = 3.7;
    double eta = 0.95;
    std::string out = "out/wus";
};

void apply_config(WusOptions& o, CLI::App* cmd, const std::string& path) {
    const json j = load_strict_json(
        path, {"frames", "seed", "scenario", "model", "model_seed", "classes",
               "cnn_channels", "oracle", "freq_mhz", "power_mw",
               "battery_mah", "battery_v", "eta", "out"});
    if (j.contains("frames") && unset(cmd, "--frames")) o.frames = j["frames"];
    if (j.contains("seed") && unset(cmd, "--seed")) o.seed = j["seed"];
    if (j.contains("scenario") && unset(cmd, "--scenario"))
        o.scenario = j["scenario"].get<std::string>();
    if (j.contains("model") && unset(cmd, "--model"))
        o.model = j["model"].get<std::string>();
    if (j.contains("model_seed") && unset(cmd, "--model-seed"))
        o.model_seed = j["model_seed"];
    if (j.contains("classes") && unset(cmd, "--classes"))
        o.classes = j["classes"];
    if (j.contains("cnn_channels") && unset(cmd, "--cnn-channels"))
        o.cnn_channels = j["cnn_channels"].get<std::vector<size_t>>();
    if (j.contains("oracle") && unset(cmd, "--oracle")) o.oracle = j["oracle"];
    if (j.contains("freq_mhz") && unset(cmd, "--freq-mhz"))
        o.freq_mhz = j["freq_mhz"];
    if (j.contains("power_mw") && unset(cmd, "--power-mw"))
        o.power_mw = j["power_mw"];
    if (j.contains("battery_mah") && unset(cmd, "--battery-mah"))
        o.battery_mah = j["battery_mah"];
    if (j.contains("battery_v") && unset(cmd, "--battery-v"))
        o.battery_v = j["battery_v"];
    if (j.contains("eta") && unset(cmd, "--eta")) o.eta = j["eta"];
    if (j.contains("out") && unset(cmd, "--out"))
        o.out = j["out"].get<std::string>();
}

wus::Scenario parse_scenario(const std::string& path) {
    const json j = load_strict_json(
        path, {"center_freq", "attenuation_db_per_sample", "noise_sigma",
               "channel_depth_jitter", "amplitude_scale", "reflectors"});
    wus::Scenario sc;
    sc.center_freq = j.value("center_freq", sc.center_freq);
    sc.attenuation_db_per_sample =
        j.value("attenuation_db_per_sample", sc.attenuation_db_per_sample);
    sc.noise_sigma = j.value("noise_sigma", sc.noise_sigma);
    sc.channel_depth_jitter =
        j.value("channel_depth_jitter", sc.channel_depth_jitter);
    sc.amplitude_scale = j.value("amplitude_scale", sc.amplitude_scale);
    if (j.contains("reflectors")) {
        sc.reflectors.clear();
        for (const auto& r : j["reflectors"]) {
            for (const auto& [k, v] : r.items())
                if (k != "depth" && k != "amplitude" && k != "width")
                    throw std::invalid_argument("reflector: unknown key '" +
                                                k + "'");
            sc.reflectors.push_back({r.at("depth").get<double>(),
                                     r.at("amplitude").get<double>(),
                                     r.at("width").get<double>()});
        }
    }
    return sc;
}

json resolved_config(const WusOptions& o, const wus::Scenario& sc) {
    json reflectors = json::array();
    for (const auto& r : sc.reflectors)
        reflectors.push_back({{"depth", r.depth_samples},
                              {"amplitude", r.amplitude},
                              {"width", r.width_samples}});
    return {{"frames", o.frames},
            {"seed", o.seed},
            {"model", o.model},
            {"model_seed", o.model_seed},
            {"classes", o.classes},
            {"cnn_channels", o.cnn_channels},
            {"oracle", o.oracle},
            {"freq_mhz", o.freq_mhz},
            {"power_mw", o.power_mw},
            {"battery_mah", o.battery_mah},
            {"battery_v", o.battery_v},
            {"eta", o.eta},
            {"scenario",
             {{"center_freq", sc.center_freq},
              {"attenuation_db_per_sample", sc.attenuation_db_per_sample},
              {"noise_sigma", sc.noise_sigma},
              {"channel_depth_jitter", sc.channel_depth_jitter},
              {"amplitude_scale", sc.amplitude_scale},
              {"reflectors", reflectors}}},
            {"out", o.out}};
}

int run_wus(const WusOptions& o) {
    if (o.frames == 0) throw std::invalid_argument("frames must be >= 1");
    if (o.cnn_channels.size() != 3 || o.cnn_channels[2] != 128)
        throw std::invalid_argument(
            "cnn-channels: three values ending at 128");

    wus::PipelineConfig cfg;
    cfg.scenario =
        o.scenario.empty() ? wus::Scenario{} : parse_scenario(o.scenario);
    cfg.n_classes = o.classes;
    cfg.cnn_channels = {o.cnn_channels[0], o.cnn_channels[1],
                        o.cnn_channels[2]};
    cfg.model_seed = o.model_seed;

    const cnn::CnnModel model =
        o.model == "random"
            ? cnn::CnnModel::random(o.model_seed, o.classes, cfg.cnn_channels)
            : io::decode_model(io::read_file(o.model));

    // frame-level parallelism with deterministic output order
    std::vector<wus::FrameOutput> outputs(o.frames);
    const unsigned threads = thread_budget(o.frames);
    auto worker = [&](size_t begin, size_t step) {
        for (size_t i = begin; i < o.frames; i += step)
            outputs[i] = wus::run_frame(o.seed + i, model, cfg);
    };
    if (threads <= 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker, t, threads);
        for (auto& t : pool) t.join();
    }

    const json config = resolved_config(o, cfg.scenario);
    const fs::path dir(o.out);

    std::string lines;
    uint64_t fft_cycles = 0, vtu_cycles = 0, vau_cycles = 0, fft_flops = 0,
             vtu_fma = 0;
    for (size_t i = 0; i < o.frames; ++i) {
        const auto& fo = outputs[i];
        json rec;
        rec["frame"] = i;
        rec["label"] = fo.gesture.label;
        json probs = json::array();
        for (const auto& p : fo.gesture.probabilities)
            probs.push_back(to_double(p));
        rec["probabilities"] = probs;
        rec["cycles"] = {{"fft", fo.fft_cycles},
                         {"vtu", fo.vtu_cycles},
                         {"vau", fo.vau_cycles},
                         {"total", fo.total_cycles()}};
        lines += rec.dump() + "\n";
        fft_cycles += fo.fft_cycles;
        vtu_cycles += fo.vtu_cycles;
        vau_cycles += fo.vau_cycles;
        fft_flops += fo.pre.fft_flops;
        vtu_fma += fo.gesture.vtu_fma;
    }
    write_artifact(dir, "results.jsonl", lines);
    write_artifact(dir, "model.bin", io::encode_model(model));

    json stages = json::array();
    for (const auto& s : outputs[0].gesture.stages)
        stages.push_back({{"name", s.name},
                          {"engine", s.engine},
                          {"cycles", s.cycles},
                          {"flops", s.flops}});
    json stage_table;
    stage_table["config"] = config;
    stage_table["preprocess"] = {{"fft_jobs", outputs[0].pre.fft_jobs},
                                 {"fft_cycles", outputs[0].pre.fft_cycles},
                                 {"fft_flops", outputs[0].pre.fft_flops},
                                 {"vau_cycles", outputs[0].pre.vau_cycles}};
    stage_table["cnn_stages"] = stages;
    write_artifact(dir, "stage_latency.json", stage_table.dump(2) + "\n");

    const perf::OperatingPoint op{o.freq_mhz * 1e6, 1.2};
    const std::vector<perf::TraceEntry> entries = {
        {"fft_preprocess", "fft", fft_cycles, static_cast<double>(fft_flops),
         20.0},
        {"cnn_vtu", "vtu", vtu_cycles, 2.0 * static_cast<double>(vtu_fma),
         96.0},
        {"elementwise_vau", "vau", vau_cycles, 0.0, 32.0},
    };
    auto rep = perf::report(entries, op);
    json perf_json;
    perf_json["config"] = config;
    perf_json["engines"] = json::array();
    for (const auto& e : rep.engines) {
        json ej = {{"name", e.name},
                   {"engine", e.engine},
                   {"cycles", e.cycles},
                   {"flops", e.flops},
                   {"flop_per_cycle", e.flop_per_cycle},
                   {"gflops_at_f", e.gflops_at_f}};
        if (e.utilization) ej["utilization"] = *e.utilization;
        perf_json["engines"].push_back(ej);
    }

    const perf::BatteryModel battery{o.battery_mah, o.battery_v, o.power_mw,
                                     o.eta};
    const uint64_t cycles_per_frame = outputs[0].total_cycles();
    const auto views = perf::energy_views(o.power_mw, 39.0, cycles_per_frame,
                                          op.frequency_hz);
    perf_json["battery"] = {
        {"lifetime_hours", perf::battery_lifetime_hours(battery)},
        {"frame_period_ms", views.frame_period_ms},
        {"energy_per_frame_period_mj", views.energy_per_frame_period_mj},
        {"processing_latency_ms", views.processing_latency_ms},
        {"energy_per_processing_window_mj",
         views.energy_per_processing_window_mj}};
    write_artifact(dir, "perf_report.json", perf_json.dump(2) + "\n");

    int exit_code = kExitOk;
    if (o.oracle) {
        auto frame = wus::synthesize_echo(o.seed, cfg.scenario,
                                          cfg.preproc_precision);
        auto mine = wus::preprocess(frame, cfg.preproc);
        auto want =
            ref::preprocess(ref::frame_to_doubles(frame), cfg.preproc);
        auto rel = [](const std::vector<double>& a,
                      const std::vector<double>& b) {
            double num = 0, den = 0;
            for (size_t i = 0; i < a.size(); ++i) {
                num += (a[i] - b[i]) * (a[i] - b[i]);
                den += b[i] * b[i];
            }
            return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
        };
        double w_tgc = 0, w_filt = 0, w_env = 0, w_log = 0;
        for (size_t ch = 0; ch < wus::EchoFrame::kChannels; ++ch) {
            std::vector<double> t(wus::EchoFrame::kSamples),
                fl(wus::EchoFrame::kSamples), en(wus::EchoFrame::kSamples),
                lg(wus::EchoFrame::kSamples);
            for (size_t i = 0; i < wus::EchoFrame::kSamples; ++i) {
                t[i] = to_double(mine.tgc_out.at(ch, i));
                fl[i] = to_double(mine.filtered.at(ch, i));
                en[i] = to_double(mine.envelope.at(ch, i));
                lg[i] = to_double(mine.compressed.at(ch, i));
            }
            w_tgc = std::max(w_tgc, rel(t, want.tgc_out[ch]));
            w_filt = std::max(w_filt, rel(fl, want.filtered[ch]));
            w_env = std::max(w_env, rel(en, want.envelope[ch]));
            w_log = std::max(w_log, rel(lg, want.compressed[ch]));
        }
        const json err = {
            {"config", config},
            {"tgc",
             {{"rel_l2", w_tgc}, {"threshold", thresholds::kWusTgcRelL2}}},
            {"gaussian",
             {{"rel_l2", w_filt},
              {"threshold", thresholds::kWusGaussianRelL2}}},
            {"envelope",
             {{"rel_l2", w_env},
              {"threshold", thresholds::kWusEnvelopeRelL2}}},
            {"log",
             {{"rel_l2", w_log}, {"threshold", thresholds::kWusLogRelL2}}}};
        write_artifact(dir, "stage_errors.json", err.dump(2) + "\n");
        if (w_tgc >= thresholds::kWusTgcRelL2 ||
            w_filt >= thresholds::kWusGaussianRelL2 ||
            w_env >= thresholds::kWusEnvelopeRelL2 ||
            w_log >= thresholds::kWusLogRelL2) {
            std::cerr << "stage error threshold exceeded\n";
            exit_code = kExitThreshold;
        }
    }

    write_run_meta(dir, "wus");
    std::cout << "frames " << o.frames << ", labels:";
    for (const auto& fo : outputs) std::cout << ' ' << fo.gesture.label;
    std::cout << "\ncycles/frame " << cycles_per_frame << "\n";
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Maestro cluster engine models and the wearable-ultrasound "
                 "pipeline"};
    app.require_subcommand(1);

    FftOptions fo;
    std::string fft_config;
    auto* fft_cmd = app.add_subcommand("fft", "run the FFT engine model");
    fft_cmd->add_option("--points", fo.points, "transform size (power of 2)");
    fft_cmd->add_option("--width", fo.width, "c32 | c64");
    fft_cmd->add_flag("--inverse", fo.inverse, "inverse transform");
    fft_cmd->add_option("--input", fo.input,
                        "impulse | constant | random | <samples.bin>");
    fft_cmd->add_option("--seed", fo.seed, "rng seed for random input");
    fft_cmd->add_option("--scale", fo.scale, "input amplitude");
    fft_cmd->add_option("--overhead", fo.overhead,
                        "configuration overhead cycles");
    fft_cmd->add_flag("--compare-oracle", fo.compare_oracle,
                      "diff against the double-precision reference");
    fft_cmd->add_option("--out", fo.out, "artifact directory");
    fft_cmd->add_option("--config", fft_config, "JSON config file");

    GemmOptions go;
    std::string gemm_config;
    auto* gemm_cmd = app.add_subcommand("gemm", "run the GEMM engine models");
    gemm_cmd->add_option("--m", go.m, "rows of X");
    gemm_cmd->add_option("--n", go.n, "columns of W");
    gemm_cmd->add_option("--k", go.k, "inner dimension");
    gemm_cmd->add_option("--fmt", go.fmt, "input format");
    gemm_cmd->add_option("--acc", go.acc, "accumulate format");
    gemm_cmd->add_option("--engine", go.engine, "vtu | vau");
    gemm_cmd->add_option("--seed", go.seed, "rng seed");
    gemm_cmd->add_option("--freq-mhz", go.freq_mhz, "operating frequency");
    gemm_cmd->add_option("--out", go.out, "artifact directory");
    gemm_cmd->add_option("--config", gemm_config, "JSON config file");

    bool buffers_json_flag = false;
    std::string buffers_out = "out/buffers";
    auto* buf_cmd =
        app.add_subcommand("buffers", "tensor-unit buffer capacity report");
    buf_cmd->add_flag("--json", buffers_json_flag, "print JSON");
    buf_cmd->add_option("--out", buffers_out, "artifact directory");

    WusOptions wo;
    std::string wus_config;
    auto* wus_cmd =
        app.add_subcommand("wus", "end-to-end wearable-ultrasound pipeline");
    wus_cmd->add_option("--frames", wo.frames, "number of frames");
    wus_cmd->add_option("--seed", wo.seed, "first frame seed");
    wus_cmd->add_option("--scenario", wo.scenario, "scenario JSON file");
    wus_cmd->add_option("--model", wo.model, "'random' or a weights file");
    wus_cmd->add_option("--model-seed", wo.model_seed, "random-model seed");
    wus_cmd->add_option("--classes", wo.classes, "gesture classes");
    wus_cmd->add_option("--cnn-channels", wo.cnn_channels,
                        "three conv output channels (last must be 128)");
    wus_cmd->add_flag("--oracle", wo.oracle, "per-stage oracle error table");
    wus_cmd->add_option("--freq-mhz", wo.freq_mhz, "operating frequency");
    wus_cmd->add_option("--power-mw", wo.power_mw, "average platform power");
    wus_cmd->add_option("--battery-mah", wo.battery_mah, "battery capacity");
    wus_cmd->add_option("--battery-v", wo.battery_v, "battery voltage");
    wus_cmd->add_option("--eta", wo.eta, "battery efficiency derating");
    wus_cmd->add_option("--out", wo.out, "artifact directory");
    wus_cmd->add_option("--config", wus_config, "JSON config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*fft_cmd) {
            if (!fft_config.empty()) apply_config(fo, fft_cmd, fft_config);
            return run_fft(fo);
        }
        if (*gemm_cmd) {
            if (!gemm_config.empty()) apply_config(go, gemm_cmd, gemm_config);
            return run_gemm(go);
        }
        if (*buf_cmd) return run_buffers(buffers_json_flag, buffers_out);
        if (*wus_cmd) {
            if (!wus_config.empty()) apply_config(wo, wus_cmd, wus_config);
            return run_wus(wo);
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
