#pragma once

// End-to-end frame driver: synthesize (or accept) an echo frame, run the
// preprocessing chain at FP32, hand the compressed 8x512 image to the FP16
// CNN, and collect per-engine cycle totals.

#include "maestro/cnn.hpp"
#include "maestro/wus.hpp"

namespace maestro::wus {

struct PipelineConfig {
    size_t channels = EchoFrame::kChannels;  // fixed by the frame layout
    size_t samples = EchoFrame::kSamples;
    double frame_rate_hz = 39.0;
    Scenario scenario;
    PreprocConfig preproc;
    size_t n_classes = 10;
    std::array<size_t, 3> cnn_channels = {32, 64, 128};
    uint64_t model_seed = 7;
    Format preproc_precision = Format::FP32;
    Format cnn_precision = Format::FP16;

    void validate() const {
        if (channels != EchoFrame::kChannels ||
            samples != EchoFrame::kSamples)
            throw ShapeMismatch("pipeline: frame geometry is 8x512");
        if (preproc_precision != Format::FP32 ||
            cnn_precision != Format::FP16)
            throw UnsupportedFormat(
                "pipeline: preprocessing runs FP32, the model FP16");
    }
};

struct FrameOutput {
    PreprocResult pre;
    cnn::GestureResult gesture;
    uint64_t fft_cycles = 0;
    uint64_t vtu_cycles = 0;
    uint64_t vau_cycles = 0;

    uint64_t total_cycles() const {
        return fft_cycles + vtu_cycles + vau_cycles;
    }
};

inline Matrix to_cnn_input(const Matrix& compressed) {
    Matrix in(compressed.rows(), compressed.cols(), Format::FP16);
    for (size_t i = 0; i < compressed.size(); ++i)
        in[i] = cast(compressed[i], Format::FP16);
    return in;
}

inline FrameOutput run_frame(const EchoFrame& frame, const cnn::CnnModel& model,
                             const PipelineConfig& cfg) {
    cfg.validate();
    FrameOutput out;
    out.pre = preprocess(frame, cfg.preproc);
    out.gesture = cnn::cnn_infer(to_cnn_input(out.pre.compressed), model);
    out.fft_cycles = out.pre.fft_cycles;
    out.vtu_cycles = out.gesture.vtu_cycles;
    out.vau_cycles = out.pre.vau_cycles + out.gesture.vau_cycles;
    return out;
}

inline FrameOutput run_frame(uint64_t seed, const cnn::CnnModel& model,
                             const PipelineConfig& cfg) {
    return run_frame(synthesize_echo(seed, cfg.scenario,
                                     cfg.preproc_precision),
                     model, cfg);
}

}  // namespace maestro::wus
