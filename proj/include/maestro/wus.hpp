#pragma once

// A-mode wearable-ultrasound preprocessing chain: time-gain compensation,
// frequency-domain Gaussian filtering, analytic-signal envelope extraction
// and log compression. Eight transducer channels of 512 samples per frame;
// the working precision is FP32, with all transforms running through the
// FFT engine model as C64 jobs and elementwise work through the softfloat
// core. Scalar transcendentals (gain curve, log) are evaluated at reference
// precision and rounded once into the working format.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "maestro/errors.hpp"
#include "maestro/fft.hpp"
#include "maestro/matrix.hpp"

namespace maestro::wus {

struct EchoFrame {
    static constexpr size_t kChannels = 8;
    static constexpr size_t kSamples = 512;

    Format fmt = Format::FP32;
    double frame_rate_hz = 39.0;  // acquisition metadata
    std::vector<Packed> data;     // channel-major, kChannels * kSamples

    EchoFrame() : data(kChannels * kSamples, packed(0, Format::FP32)) {}
    explicit EchoFrame(Format f)
        : fmt(f), data(kChannels * kSamples, packed(0, f)) {}

    Packed& at(size_t ch, size_t i) { return data[ch * kSamples + i]; }
    const Packed& at(size_t ch, size_t i) const {
        return data[ch * kSamples + i];
    }
};

// --- synthetic echo source -------------------------------------------------

struct Reflector {
    double depth_samples;  // round-trip arrival time in samples
    double amplitude;
    double width_samples;  // Gaussian window sigma
};

struct Scenario {
    double center_freq = 0.125;              // cycles per sample
    double attenuation_db_per_sample = 0.02;
    double noise_sigma = 0.005;
    double channel_depth_jitter = 6.0;       // per-channel reflector shift
    double amplitude_scale = 1.0;
    std::vector<Reflector> reflectors = {
        {96.0, 1.0, 10.0}, {224.0, 0.6, 14.0}, {384.0, 0.35, 18.0}};
};

namespace detail {

// Box-Muller on the raw mt19937_64 stream; avoids distribution objects so
// frames are identical across standard libraries.
inline double gaussian_sample(std::mt19937_64& g) {
    const double u1 =
        (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(g() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace detail

// Deterministic synthetic A-mode frame: Gaussian-windowed tone bursts at the
// reflector depths, depth-dependent attenuation, seeded noise.
inline EchoFrame synthesize_echo(uint64_t seed, const Scenario& sc,
                                 Format fmt = Format::FP32) {
    EchoFrame frame(fmt);
    std::mt19937_64 g(seed);
    for (size_t ch = 0; ch < EchoFrame::kChannels; ++ch) {
        // per-channel anatomy: jittered reflector depths
        std::vector<double> depth(sc.reflectors.size());
        for (size_t r = 0; r < sc.reflectors.size(); ++r)
            depth[r] = sc.reflectors[r].depth_samples +
                       sc.channel_depth_jitter * detail::gaussian_sample(g);
        for (size_t i = 0; i < EchoFrame::kSamples; ++i) {
            double v = 0;
            for (size_t r = 0; r < sc.reflectors.size(); ++r) {
                const auto& rf = sc.reflectors[r];
                const double t = static_cast<double>(i) - depth[r];
                const double win =
                    std::exp(-t * t / (2.0 * rf.width_samples *
                                       rf.width_samples));
                v += rf.amplitude * win *
                     std::cos(2.0 * M_PI * sc.center_freq * t);
            }
            v *= std::pow(10.0, -sc.attenuation_db_per_sample *
                                    static_cast<double>(i) / 20.0);
            v = sc.amplitude_scale *
                (v + sc.noise_sigma * detail::gaussian_sample(g));
            frame.at(ch, i) = from_double(v, fmt);
        }
    }
    return frame;
}

// --- stage configs -----------------------------------------------------------

struct TgcConfig {
    double gain0_db = 0.0;
    double slope_db_per_sample = 0.02;  // undoes the scenario attenuation
};

struct GaussianConfig {
    double center_bin = 64.0;   // 0.125 cycles/sample * 512
    double sigma_bins = 76.8;   // 0.15 * N
};

struct PreprocConfig {
    TgcConfig tgc;
    GaussianConfig gaussian;
    double log_epsilon = 1.0e-3;
    Format working = Format::FP32;
};

// --- stages ------------------------------------------------------------------

// Depth-dependent gain g[i] = 10^((g0 + slope*i)/20); one rounding for the
// gain value, one for the product.
inline EchoFrame tgc(const EchoFrame& in, const TgcConfig& cfg) {
    EchoFrame out = in;
    std::vector<Packed> gain(EchoFrame::kSamples);
    for (size_t i = 0; i < EchoFrame::kSamples; ++i) {
        const double g_db =
            cfg.gain0_db + cfg.slope_db_per_sample * static_cast<double>(i);
        gain[i] = from_double(std::pow(10.0, g_db / 20.0), in.fmt);
    }
    for (size_t ch = 0; ch < EchoFrame::kChannels; ++ch)
        for (size_t i = 0; i < EchoFrame::kSamples; ++i)
            out.at(ch, i) = fp_mul(in.at(ch, i), gain[i]);
    return out;
}

// Real symmetric Gaussian kernel over DFT bins, mirrored across conjugate
// bins so the filtered time signal stays real.
inline std::vector<Packed> gaussian_kernel(const GaussianConfig& cfg, size_t n,
                                           Format fmt) {
    std::vector<Packed> kern(n);
    for (size_t k = 0; k <= n / 2; ++k) {
        const double d = (static_cast<double>(k) - cfg.center_bin) /
                         cfg.sigma_bins;
        const Packed g = from_double(std::exp(-0.5 * d * d), fmt);
        kern[k] = g;
        if (k != 0 && k != n / 2) kern[n - k] = g;
    }
    return kern;
}

struct GaussianFilterResult {
    EchoFrame filtered;                              // iFFT of the product
    std::vector<std::vector<fft::Complex>> spectra;  // retained per channel
    uint64_t fft_jobs = 0;
    uint64_t fft_cycles = 0;
    uint64_t fft_flops = 0;
};

inline fft::Width working_width(Format f) {
    return f == Format::FP32 ? fft::Width::C64 : fft::Width::C32;
}

// FFT -> kernel multiply -> iFFT; the product spectrum is retained for the
// envelope stage, mirroring the fused dataflow.
inline GaussianFilterResult gaussian_filter(const EchoFrame& in,
                                            const GaussianConfig& cfg) {
    const size_t n = EchoFrame::kSamples;
    const Format f = in.fmt;
    const fft::Width w = working_width(f);
    GaussianFilterResult out;
    out.filtered = in;
    out.spectra.resize(EchoFrame::kChannels);
    const auto kern = gaussian_kernel(cfg, n, f);

    for (size_t ch = 0; ch < EchoFrame::kChannels; ++ch) {
        fft::FftJob job;
        job.points = n;
        job.width = w;
        job.input.resize(n);
        for (size_t i = 0; i < n; ++i)
            job.input[i] = {in.at(ch, i), fp_zero(f)};
        auto spec = fft::fft(job);
        out.fft_jobs += 1;
        out.fft_cycles += spec.trace.total_cycles;
        out.fft_flops += spec.trace.flops;

        auto& s = spec.output;
        for (size_t k = 0; k < n; ++k) {
            s[k].re = fp_mul(s[k].re, kern[k]);
            s[k].im = fp_mul(s[k].im, kern[k]);
        }
        out.spectra[ch] = s;

        fft::FftJob inv;
        inv.points = n;
        inv.width = w;
        inv.inverse = true;
        inv.input = s;
        auto time = fft::fft(inv);
        out.fft_jobs += 1;
        out.fft_cycles += time.trace.total_cycles;
        out.fft_flops += time.trace.flops;
        for (size_t i = 0; i < n; ++i)
            out.filtered.at(ch, i) = time.output[i].re;
    }
    return out;
}

struct EnvelopeResult {
    std::vector<Packed> envelope;  // one channel, kSamples
    uint64_t fft_cycles = 0;
    uint64_t fft_flops = 0;
};

// Analytic-signal construction: positive-frequency bins doubled, negative
// zeroed, DC and Nyquist kept; iFFT; magnitude via one fused dot product per
// sample plus a square root in the working precision.
inline EnvelopeResult hilbert_envelope(const std::vector<fft::Complex>& spectrum) {
    const size_t n = spectrum.size();
    if (n != EchoFrame::kSamples)
        throw InvalidLength("hilbert_envelope: expected one 512-bin spectrum");
    const Format f = spectrum[0].re.fmt;
    const Packed two = from_double(2.0, f);
    std::vector<fft::Complex> analytic(n);
    analytic[0] = spectrum[0];
    analytic[n / 2] = spectrum[n / 2];
    for (size_t k = 1; k < n / 2; ++k) {
        analytic[k] = {fp_mul(spectrum[k].re, two),
                       fp_mul(spectrum[k].im, two)};
        analytic[n - k] = {fp_zero(f), fp_zero(f)};
    }

    fft::FftJob inv;
    inv.points = n;
    inv.width = working_width(f);
    inv.inverse = true;
    inv.input = std::move(analytic);
    auto time = fft::fft(inv);

    EnvelopeResult out;
    out.fft_cycles = time.trace.total_cycles;
    out.fft_flops = time.trace.flops;
    out.envelope.resize(n);
    const Packed zero = fp_zero(f);
    for (size_t i = 0; i < n; ++i) {
        const Packed mag2 = do_sdotp(time.output[i].re, time.output[i].re,
                                     time.output[i].im, time.output[i].im,
                                     zero, false, f)
                                .sum;
        out.envelope[i] = fp_sqrt(mag2);
    }
    return out;
}

// log(1 + env/eps) normalized by the frame maximum; order-preserving.
inline std::vector<Packed> log_compress(const std::vector<Packed>& env,
                                        double epsilon, Format fmt) {
    if (epsilon <= 0) throw std::invalid_argument("log_compress: epsilon <= 0");
    std::vector<Packed> out(env.size());
    Packed max_val = fp_zero(fmt);
    for (size_t i = 0; i < env.size(); ++i) {
        const double e = to_double(env[i]);
        out[i] = from_double(std::log1p(e / epsilon), fmt);
        if (fp_less(max_val, out[i])) max_val = out[i];
    }
    if (to_double(max_val) > 0)
        for (auto& v : out) v = fp_div(v, max_val);
    return out;
}

// --- whole preprocessing chain ------------------------------------------------

struct PreprocResult {
    EchoFrame tgc_out;
    EchoFrame filtered;
    Matrix envelope;    // kChannels x kSamples, working format
    Matrix compressed;  // kChannels x kSamples, working format
    uint64_t fft_jobs = 0;
    uint64_t fft_cycles = 0;
    uint64_t fft_flops = 0;
    uint64_t vau_cycles = 0;  // elementwise work mapped on the vector unit
};

inline PreprocResult preprocess(const EchoFrame& frame,
                                const PreprocConfig& cfg) {
    const size_t n = EchoFrame::kSamples;
    PreprocResult r;
    r.tgc_out = tgc(frame, cfg.tgc);
    auto gf = gaussian_filter(r.tgc_out, cfg.gaussian);
    r.filtered = gf.filtered;
    r.fft_jobs = gf.fft_jobs;
    r.fft_cycles = gf.fft_cycles;
    r.fft_flops = gf.fft_flops;

    r.envelope = Matrix(EchoFrame::kChannels, n, cfg.working);
    r.compressed = Matrix(EchoFrame::kChannels, n, cfg.working);
    for (size_t ch = 0; ch < EchoFrame::kChannels; ++ch) {
        auto env = hilbert_envelope(gf.spectra[ch]);
        r.fft_jobs += 1;
        r.fft_cycles += env.fft_cycles;
        r.fft_flops += env.fft_flops;
        auto comp = log_compress(env.envelope, cfg.log_epsilon, cfg.working);
        for (size_t i = 0; i < n; ++i) {
            r.envelope.at(ch, i) = env.envelope[i];
            r.compressed.at(ch, i) = comp[i];
        }
    }
    // vector-unit elementwise work at 256 bits/cycle: TGC multiply, kernel
    // multiply, analytic-signal scaling, magnitude+sqrt, log compression
    const uint64_t elems = EchoFrame::kChannels * n;
    const uint64_t lanes = 256 / format_info(cfg.working).width;
    r.vau_cycles = 5 * elems / lanes;
    return r;
}

}  // namespace maestro::wus
