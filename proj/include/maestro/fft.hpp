#pragma once

// Radix-2 DIT FFT engine model: C32 (FP16 parts, up to 1024 points) and C64
// (FP32 parts, up to 512 points). Butterflies are computed with the fused
// dual-output sum-of-dot-products, four roundings per butterfly. Stages run
// natural-order in, bit-reversed out; the final reordering applies an
// explicit bit-reversal permutation, mirroring the write-limited last stage.

#include <cstdint>
#include <utility>
#include <vector>

#include "maestro/errors.hpp"
#include "maestro/softfloat.hpp"

namespace maestro::fft {

enum class Width : uint8_t { C32, C64 };

constexpr Format part_format(Width w) {
    return w == Width::C32 ? Format::FP16 : Format::FP32;
}
constexpr size_t max_points(Width w) { return w == Width::C32 ? 1024 : 512; }
constexpr const char* width_name(Width w) {
    return w == Width::C32 ? "c32" : "c64";
}

struct Complex {
    Packed re, im;
};

inline Complex complex_from(double re, double im, Format f) {
    return {from_double(re, f), from_double(im, f)};
}

// --- twiddle factor LUTs -------------------------------------------------

// The LUT block stores one octant (k = 0 .. n_max/8 inclusive) of
// e^{-2*pi*i*k/n_max}; remaining twiddles come from sign/swap symmetry so
// every reconstructed value is still the correctly rounded exponential
// (zero components canonicalize to +0).
struct TwiddleTable {
    std::vector<Complex> c64_lut;                  // 65 entries, n_max = 512
    std::array<std::vector<Complex>, 2> c32_luts;  // 2 x 129 entries, n_max = 1024

    const std::vector<Complex>& lut(Width w) const {
        return w == Width::C32 ? c32_luts[0] : c64_lut;
    }
};

namespace detail {

inline std::vector<Complex> build_octant_lut(Format f, size_t n_max) {
    std::vector<Complex> lut(n_max / 8 + 1);
    for (size_t k = 0; k < lut.size(); ++k) {
        const double theta = 2.0 * M_PI * static_cast<double>(k) /
                             static_cast<double>(n_max);
        lut[k] = complex_from(std::cos(theta), -std::sin(theta), f);
    }
    return lut;
}

inline Packed canon_zero(Packed p) {
    Decoded d = decode(p);
    return d.is_zero() ? fp_zero(p.fmt) : p;
}

}  // namespace detail

inline TwiddleTable twiddle_table_build(Width w, size_t n_max) {
    if (n_max != max_points(w))
        throw InvalidLength("twiddle_table_build: n_max must match the width's cap");
    TwiddleTable t;
    if (w == Width::C64) {
        t.c64_lut = detail::build_octant_lut(Format::FP32, n_max);
    } else {
        auto lut = detail::build_octant_lut(Format::FP16, n_max);
        t.c32_luts[0] = lut;
        t.c32_luts[1] = std::move(lut);  // hardware carries two identical LUTs
    }
    return t;
}

inline const TwiddleTable& default_tables() {
    static const TwiddleTable t = [] {
        TwiddleTable full = twiddle_table_build(Width::C64, 512);
        TwiddleTable c32 = twiddle_table_build(Width::C32, 1024);
        full.c32_luts = std::move(c32.c32_luts);
        return full;
    }();
    return t;
}

// Twiddle for index k of an n_max-point table (k < n_max/2), reconstructed
// from the octant LUT. conj selects the inverse-transform direction.
inline Complex twiddle_lookup(const std::vector<Complex>& lut, size_t n_max,
                              size_t k, bool conj) {
    const size_t q = n_max / 8;
    Packed re, im;
    if (k <= q) {
        re = lut[k].re;
        im = lut[k].im;
    } else if (k <= 2 * q) {
        const size_t j = 2 * q - k;
        re = fp_neg(lut[j].im);  // cos -> sin of the mirrored angle
        im = fp_neg(lut[j].re);
    } else if (k <= 3 * q) {
        const size_t j = k - 2 * q;
        re = lut[j].im;
        im = fp_neg(lut[j].re);
    } else {
        const size_t j = 4 * q - k;
        re = fp_neg(lut[j].re);
        im = lut[j].im;
    }
    re = detail::canon_zero(re);
    im = detail::canon_zero(im);
    if (conj) im = detail::canon_zero(fp_neg(im));
    return {re, im};
}

// --- butterfly -----------------------------------------------------------

// (l + t*r, l - t*r); each scalar output gets exactly one rounding:
//   re+- = e +- (t.re*r.re - t.im*r.im)   (MOD = 1)
//   im+- = e +- (t.re*r.im + t.im*r.re)   (MOD = 0)
inline std::pair<Complex, Complex> butterfly_r2(const Complex& l,
                                                const Complex& r,
                                                const Complex& t) {
    const Format f = l.re.fmt;
    SdotpResult re = do_sdotp(t.re, r.re, t.im, r.im, l.re, true, f);
    SdotpResult im = do_sdotp(t.re, r.im, t.im, r.re, l.im, false, f);
    return {{re.sum, im.sum}, {re.diff, im.diff}};
}

// --- bit reversal --------------------------------------------------------

inline size_t bit_reverse(size_t x, int bits) {
    size_t r = 0;
    for (int i = 0; i < bits; ++i) r |= ((x >> i) & 1) << (bits - 1 - i);
    return r;
}

template <typename T>
void bit_reverse_permute(std::vector<T>& v) {
    const int bits = __builtin_ctzll(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        const size_t j = bit_reverse(i, bits);
        if (i < j) std::swap(v[i], v[j]);
    }
}

// --- cycle model ---------------------------------------------------------

struct FftCycleConfig {
    uint64_t overhead_cycles = 16;  // job configuration / pipeline fill
};

struct FftCycleTrace {
    std::vector<uint64_t> stage_butterflies;
    std::vector<uint64_t> stage_cycles;
    uint64_t butterflies = 0;
    uint64_t stall_cycles_final = 0;
    uint64_t overhead_cycles = 0;
    uint64_t total_cycles = 0;
    uint64_t flops = 0;

    double flop_per_cycle() const {
        return total_cycles ? static_cast<double>(flops) / total_cycles : 0.0;
    }
};

struct FftJob {
    size_t points = 0;
    Width width = Width::C64;
    bool inverse = false;
    bool cycle_model_enabled = true;
    std::vector<Complex> input;
};

inline void validate_shape(size_t points, Width width) {
    if (points < 2 || (points & (points - 1)) != 0)
        throw InvalidLength("fft: points must be a power of two >= 2");
    if (points > max_points(width))
        throw InvalidLength("fft: points above the width's cap");
}

// Event-level stage walk. Non-final stages issue one C64 or two C32
// butterflies per cycle; the final stage writes bit-reversed pairs at two
// samples per cycle, halving C32 throughput there. One drain cycle empties
// the output register.
inline FftCycleTrace fft_cycle_model(size_t points, Width width,
                                     const FftCycleConfig& cfg = {}) {
    validate_shape(points, width);
    const int stages = __builtin_ctzll(points);
    const uint64_t per_stage = points / 2;
    const uint64_t rate = width == Width::C32 ? 2 : 1;

    FftCycleTrace t;
    t.overhead_cycles = cfg.overhead_cycles;
    for (int s = 0; s < stages; ++s) {
        const bool final_stage = s == stages - 1;
        // final stage: 2 samples/cycle writeback = 1 butterfly/cycle
        const uint64_t stage_rate = final_stage ? 1 : rate;
        const uint64_t cycles = (per_stage + stage_rate - 1) / stage_rate;
        t.stage_butterflies.push_back(per_stage);
        t.stage_cycles.push_back(cycles);
        t.butterflies += per_stage;
        t.total_cycles += cycles;
        if (final_stage)
            t.stall_cycles_final = cycles - (per_stage + rate - 1) / rate;
    }
    t.total_cycles += 1;  // output register drain
    t.total_cycles += cfg.overhead_cycles;
    t.flops = 10 * t.butterflies;  // 4 mul + 6 add/sub per butterfly
    return t;
}

// --- transform -----------------------------------------------------------

struct FftResult {
    std::vector<Complex> output;
    FftCycleTrace trace;
};

inline FftResult fft(const FftJob& job, const TwiddleTable& tables,
                     const FftCycleConfig& cfg = {}) {
    validate_shape(job.points, job.width);
    if (job.input.size() != job.points)
        throw InvalidLength("fft: input size != points");

    const size_t n = job.points;
    const size_t n_max = max_points(job.width);
    const auto& lut = tables.lut(job.width);
    const Format f = part_format(job.width);

    FftResult res;
    res.output = job.input;
    auto& a = res.output;

    // DIT stages, natural-order input. Stage m combines sub-FFTs of size
    // m/2; twiddle indices within a stage appear bit-reversed.
    for (size_t m = 2; m <= n; m <<= 1) {
        const size_t stride = n / m;
        const size_t half = m / 2;
        const int half_bits = __builtin_ctzll(half);
        for (size_t r = 0; r < half; ++r) {
            const size_t k = bit_reverse(r, half_bits);
            const Complex t =
                twiddle_lookup(lut, n_max, k * (n_max / m), job.inverse);
            for (size_t o = 0; o < stride; ++o) {
                const size_t i1 = o + 2 * stride * r;
                const size_t i2 = i1 + stride;
                auto [hi, lo] = butterfly_r2(a[i1], a[i2], t);
                a[i1] = hi;
                a[i2] = lo;
            }
        }
    }
    bit_reverse_permute(a);

    if (job.inverse) {
        // 1/N is a power of two; the per-sample multiply is exact unless it
        // underflows, one rounding either way
        const Packed inv_n = from_double(1.0 / static_cast<double>(n), f);
        for (auto& c : a) {
            c.re = fp_mul(c.re, inv_n);
            c.im = fp_mul(c.im, inv_n);
        }
    }
    if (job.cycle_model_enabled)
        res.trace = fft_cycle_model(n, job.width, cfg);
    return res;
}

inline FftResult fft(const FftJob& job) { return fft(job, default_tables()); }

}  // namespace maestro::fft
