#pragma once

// Double-precision reference paths for oracle-differential checks: a radix-2
// FFT with per-index trigonometric twiddles, a brute-force DFT, a plain
// triple-loop GEMM, and error metrics. Deliberately independent of the
// engine models (no shared twiddle tables, no fused arithmetic).

#include <cmath>
#include <complex>
#include <vector>

#include "maestro/fft.hpp"

namespace maestro::ref {

using cd = std::complex<double>;

inline void fft_radix2(std::vector<cd>& a, bool inverse) {
    const size_t n = a.size();
    const int bits = __builtin_ctzll(n);
    for (size_t i = 0; i < n; ++i) {
        size_t j = fft::bit_reverse(i, bits);
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        for (size_t i = 0; i < n; i += len) {
            for (size_t j = 0; j < len / 2; ++j) {
                const cd w = std::polar(1.0, ang * static_cast<double>(j));
                const cd u = a[i + j];
                const cd v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

inline std::vector<cd> dft(const std::vector<cd>& x, bool inverse) {
    const size_t n = x.size();
    std::vector<cd> out(n);
    for (size_t k = 0; k < n; ++k) {
        cd acc = 0;
        for (size_t j = 0; j < n; ++j) {
            const double ang = (inverse ? 2.0 : -2.0) * M_PI *
                               static_cast<double>(k * j % n) /
                               static_cast<double>(n);
            acc += x[j] * std::polar(1.0, ang);
        }
        out[k] = inverse ? acc / static_cast<double>(n) : acc;
    }
    return out;
}

inline std::vector<cd> to_cd(const std::vector<fft::Complex>& v) {
    std::vector<cd> out(v.size());
    for (size_t i = 0; i < v.size(); ++i)
        out[i] = {to_double(v[i].re), to_double(v[i].im)};
    return out;
}

inline std::vector<fft::Complex> from_cd(const std::vector<cd>& v, Format f) {
    std::vector<fft::Complex> out(v.size());
    for (size_t i = 0; i < v.size(); ++i)
        out[i] = fft::complex_from(v[i].real(), v[i].imag(), f);
    return out;
}

inline double rel_l2_error(const std::vector<cd>& got,
                           const std::vector<cd>& want) {
    double num = 0, den = 0;
    for (size_t i = 0; i < got.size(); ++i) {
        num += std::norm(got[i] - want[i]);
        den += std::norm(want[i]);
    }
    return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double energy(const std::vector<cd>& v) {
    double e = 0;
    for (const auto& x : v) e += std::norm(x);
    return e;
}

// Plain row-major GEMM: Z = X*W + Y, all in double.
inline std::vector<double> gemm(const std::vector<double>& x,
                                const std::vector<double>& w,
                                const std::vector<double>& y, size_t m,
                                size_t k, size_t n) {
    std::vector<double> z(m * n);
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) {
            double acc = y.empty() ? 0.0 : y[i * n + j];
            for (size_t l = 0; l < k; ++l)
                acc += x[i * k + l] * w[l * n + j];
            z[i * n + j] = acc;
        }
    return z;
}

// Worst element-wise error of z against the double reference, measured as a
// fraction of the FMA-chain bound k * (2^-p * S_ij + q) with
// S_ij = sum_l |x w| + |y|. Ratios stay below a small constant slack for a
// correct one-rounding-per-FMA chain, independent of cancellation.
inline double gemm_chain_bound_ratio(const std::vector<double>& x,
                                     const std::vector<double>& w,
                                     const std::vector<double>& y,
                                     const std::vector<double>& z, size_t m,
                                     size_t k, size_t n, Format acc_fmt) {
    const FormatInfo fi = format_info(acc_fmt);
    const double step_rel = std::ldexp(1.0, -(fi.man_bits + 1));
    const double step_abs = std::ldexp(1.0, 1 - fi.bias - fi.man_bits - 1);
    double worst = 0;
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) {
            double acc = y[i * n + j], s = std::abs(acc);
            for (size_t l = 0; l < k; ++l) {
                const double t = x[i * k + l] * w[l * n + j];
                acc += t;
                s += std::abs(t);
            }
            const double bound =
                static_cast<double>(k) * (step_rel * s + step_abs);
            worst = std::max(worst,
                             std::abs(z[i * n + j] - acc) / bound);
        }
    return worst;
}

}  // namespace maestro::ref

#include "maestro/cnn.hpp"
#include "maestro/wus.hpp"

namespace maestro::ref {

// --- wearable-ultrasound pipeline, all in double ---------------------------

using Channel = std::vector<double>;
using Frame = std::vector<Channel>;  // [channel][sample]

inline Frame frame_to_doubles(const wus::EchoFrame& f) {
    Frame out(wus::EchoFrame::kChannels,
              Channel(wus::EchoFrame::kSamples));
    for (size_t ch = 0; ch < out.size(); ++ch)
        for (size_t i = 0; i < out[ch].size(); ++i)
            out[ch][i] = to_double(f.at(ch, i));
    return out;
}

inline Frame tgc(const Frame& in, const wus::TgcConfig& cfg) {
    Frame out = in;
    for (auto& ch : out)
        for (size_t i = 0; i < ch.size(); ++i)
            ch[i] *= std::pow(10.0, (cfg.gain0_db +
                                     cfg.slope_db_per_sample *
                                         static_cast<double>(i)) /
                                        20.0);
    return out;
}

struct PreprocRef {
    Frame tgc_out, filtered, envelope, compressed;
};

inline PreprocRef preprocess(const Frame& frame, const wus::PreprocConfig& cfg) {
    const size_t n = frame[0].size();
    PreprocRef r;
    r.tgc_out = tgc(frame, cfg.tgc);
    r.filtered.assign(frame.size(), Channel(n));
    r.envelope.assign(frame.size(), Channel(n));
    r.compressed.assign(frame.size(), Channel(n));

    std::vector<double> kern(n);
    for (size_t k = 0; k <= n / 2; ++k) {
        const double d = (static_cast<double>(k) - cfg.gaussian.center_bin) /
                         cfg.gaussian.sigma_bins;
        kern[k] = std::exp(-0.5 * d * d);
        if (k != 0 && k != n / 2) kern[n - k] = kern[k];
    }
    for (size_t ch = 0; ch < frame.size(); ++ch) {
        std::vector<cd> spec(n);
        for (size_t i = 0; i < n; ++i) spec[i] = r.tgc_out[ch][i];
        fft_radix2(spec, false);
        for (size_t k = 0; k < n; ++k) spec[k] *= kern[k];
        std::vector<cd> time = spec;
        fft_radix2(time, true);
        for (size_t i = 0; i < n; ++i) r.filtered[ch][i] = time[i].real();

        std::vector<cd> analytic(n, cd(0));
        analytic[0] = spec[0];
        analytic[n / 2] = spec[n / 2];
        for (size_t k = 1; k < n / 2; ++k) analytic[k] = 2.0 * spec[k];
        fft_radix2(analytic, true);
        double maxv = 0;
        for (size_t i = 0; i < n; ++i) {
            r.envelope[ch][i] = std::abs(analytic[i]);
            r.compressed[ch][i] =
                std::log1p(r.envelope[ch][i] / cfg.log_epsilon);
            maxv = std::max(maxv, r.compressed[ch][i]);
        }
        if (maxv > 0)
            for (auto& v : r.compressed[ch]) v /= maxv;
    }
    return r;
}

// --- double-precision CNN (direct convolutions, no im2col) -----------------

struct CnnRef {
    std::vector<double> logits, probabilities;
    size_t label = 0;
    double margin = 0.0;  // top-1 minus top-2 logit
};

inline CnnRef cnn_infer(const std::vector<double>& input, size_t h, size_t w,
                        const cnn::CnnModel& model) {
    std::vector<double> fm = input;  // channel-major (1, h, w)
    size_t ch = 1, cur_w = w;
    for (const auto& blk : model.blocks) {
        std::vector<double> wts = blk.weights.to_doubles();
        std::vector<double> conv(blk.out_ch * h * cur_w);
        for (size_t oc = 0; oc < blk.out_ch; ++oc)
            for (size_t y = 0; y < h; ++y)
                for (size_t x = 0; x < cur_w; ++x) {
                    double acc = to_double(blk.bias[oc]);
                    for (size_t ic = 0; ic < ch; ++ic)
                        for (int dy = -1; dy <= 1; ++dy)
                            for (int dx = -1; dx <= 1; ++dx) {
                                const long sy = static_cast<long>(y) + dy;
                                const long sx = static_cast<long>(x) + dx;
                                if (sy < 0 || sy >= static_cast<long>(h) ||
                                    sx < 0 || sx >= static_cast<long>(cur_w))
                                    continue;
                                const size_t widx =
                                    (ic * 9 + (dy + 1) * 3 + (dx + 1)) *
                                        blk.out_ch +
                                    oc;
                                acc += fm[(ic * h + sy) * cur_w + sx] *
                                       wts[widx];
                            }
                    conv[(oc * h + y) * cur_w + x] = acc;
                }
        const size_t w_out = cur_w / blk.pool;
        std::vector<double> pooled(blk.out_ch * h * w_out);
        for (size_t oc = 0; oc < blk.out_ch; ++oc)
            for (size_t y = 0; y < h; ++y)
                for (size_t x = 0; x < w_out; ++x) {
                    double best = 0;
                    for (size_t p = 0; p < blk.pool; ++p)
                        best = std::max(
                            best, std::max(0.0, conv[(oc * h + y) * cur_w +
                                                     x * blk.pool + p]));
                    pooled[(oc * h + y) * w_out + x] = best;
                }
        fm = std::move(pooled);
        ch = blk.out_ch;
        cur_w = w_out;
    }

    const size_t positions = h * cur_w;
    std::vector<double> gap(ch);
    for (size_t c = 0; c < ch; ++c) {
        double acc = 0;
        for (size_t i = 0; i < positions; ++i) acc += fm[c * positions + i];
        gap[c] = acc / static_cast<double>(positions);
    }

    std::vector<double> fcw = model.fc_weights.to_doubles();
    std::vector<double> hidden(128);
    for (size_t j = 0; j < 128; ++j) {
        double acc = to_double(model.fc_bias[j]);
        for (size_t i = 0; i < 128; ++i) acc += gap[i] * fcw[i * 128 + j];
        hidden[j] = std::max(0.0, acc);
    }

    CnnRef out;
    std::vector<double> hw = model.head_weights.to_doubles();
    out.logits.resize(model.n_classes);
    for (size_t j = 0; j < model.n_classes; ++j) {
        double acc = to_double(model.head_bias[j]);
        for (size_t i = 0; i < 128; ++i)
            acc += hidden[i] * hw[i * model.n_classes + j];
        out.logits[j] = acc;
    }
    double best = out.logits[0], second = -1e300;
    out.label = 0;
    for (size_t j = 1; j < out.logits.size(); ++j) {
        if (out.logits[j] > best) {
            second = best;
            best = out.logits[j];
            out.label = j;
        } else if (out.logits[j] > second) {
            second = out.logits[j];
        }
    }
    out.margin = out.logits.size() > 1 ? best - second : best;

    double maxl = best, sum = 0;
    out.probabilities.resize(out.logits.size());
    for (size_t j = 0; j < out.logits.size(); ++j) {
        out.probabilities[j] = std::exp(out.logits[j] - maxl);
        sum += out.probabilities[j];
    }
    for (auto& p : out.probabilities) p /= sum;
    return out;
}

}  // namespace maestro::ref
