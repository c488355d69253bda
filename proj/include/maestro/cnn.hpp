#pragma once

// FP16 CNN for gesture classification over the preprocessed 8x512 frame.
// Three conv blocks (3x3, same padding, batch-norm folded into weights and
// bias) with ReLU and 1x4 max pooling along the echo dimension, feature maps
// growing to 128; global average pooling, one fused FC+BN+ReLU layer and a
// linear head with FP32 softmax. Convolutions lower to im2col GEMMs on the
// tensor array (FP16 inputs, FP32 accumulation); pooling, reductions and the
// dense layers map onto the vector unit.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "maestro/errors.hpp"
#include "maestro/gemm.hpp"
#include "maestro/matrix.hpp"

namespace maestro::cnn {

struct FeatureMap {
    size_t ch = 0, h = 0, w = 0;
    Format fmt = Format::FP16;
    std::vector<Packed> data;  // channel-major

    FeatureMap() = default;
    FeatureMap(size_t c, size_t hh, size_t ww, Format f)
        : ch(c), h(hh), w(ww), fmt(f), data(c * hh * ww, packed(0, f)) {}
    Packed& at(size_t c, size_t y, size_t x) {
        return data[(c * h + y) * w + x];
    }
    const Packed& at(size_t c, size_t y, size_t x) const {
        return data[(c * h + y) * w + x];
    }
};

struct ConvBlock {
    size_t in_ch = 0, out_ch = 0;
    size_t pool = 4;            // 1x4 max pooling along the echo dimension
    Matrix weights;             // (in_ch*9) x out_ch, FP16, BN pre-folded
    std::vector<Packed> bias;   // out_ch, FP32 (accumulate format)
};

struct CnnModel {
    size_t n_classes = 10;
    std::vector<ConvBlock> blocks;  // three, feature maps ending at 128
    Matrix fc_weights;              // 128 x 128, FP16, BN pre-folded
    std::vector<Packed> fc_bias;    // 128, FP32
    Matrix head_weights;            // 128 x n_classes, FP16
    std::vector<Packed> head_bias;  // n_classes, FP32

    void validate() const {
        if (blocks.size() != 3)
            throw ShapeMismatch("cnn: expected three conv blocks");
        if (blocks.back().out_ch != 128)
            throw ShapeMismatch("cnn: feature maps must end at 128");
        for (size_t b = 0; b < blocks.size(); ++b) {
            const auto& blk = blocks[b];
            const size_t expect_in = b == 0 ? 1 : blocks[b - 1].out_ch;
            if (blk.in_ch != expect_in || blk.weights.rows() != blk.in_ch * 9 ||
                blk.weights.cols() != blk.out_ch ||
                blk.bias.size() != blk.out_ch)
                throw ShapeMismatch("cnn: conv block shape");
        }
        if (fc_weights.rows() != 128 || fc_weights.cols() != 128 ||
            fc_bias.size() != 128)
            throw ShapeMismatch("cnn: fc shape");
        if (head_weights.rows() != 128 || head_weights.cols() != n_classes ||
            head_bias.size() != n_classes || n_classes < 2)
            throw ShapeMismatch("cnn: head shape");
    }

    static CnnModel random(uint64_t seed, size_t n_classes = 10,
                           std::array<size_t, 3> channels = {32, 64, 128});
};

namespace detail {

inline double unit_draw(std::mt19937_64& g) {  // [0, 1)
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline Matrix random_weights(std::mt19937_64& g, size_t rows, size_t cols,
                             double scale) {
    Matrix m(rows, cols, Format::FP16);
    for (size_t i = 0; i < m.size(); ++i)
        m[i] = from_double((2.0 * unit_draw(g) - 1.0) * scale, Format::FP16);
    return m;
}

inline std::vector<Packed> random_bias(std::mt19937_64& g, size_t n) {
    std::vector<Packed> b(n);
    for (auto& v : b)
        v = from_double((2.0 * unit_draw(g) - 1.0) * 0.05, Format::FP32);
    return b;
}

}  // namespace detail

inline CnnModel CnnModel::random(uint64_t seed, size_t n_classes,
                                 std::array<size_t, 3> channels) {
    std::mt19937_64 g(seed);
    CnnModel m;
    m.n_classes = n_classes;
    size_t in_ch = 1;
    for (size_t b = 0; b < 3; ++b) {
        ConvBlock blk;
        blk.in_ch = in_ch;
        blk.out_ch = channels[b];
        const double scale = 1.0 / std::sqrt(static_cast<double>(in_ch * 9));
        blk.weights = detail::random_weights(g, in_ch * 9, blk.out_ch, scale);
        blk.bias = detail::random_bias(g, blk.out_ch);
        m.blocks.push_back(std::move(blk));
        in_ch = channels[b];
    }
    m.fc_weights = detail::random_weights(g, 128, 128, 1.0 / std::sqrt(128.0));
    m.fc_bias = detail::random_bias(g, 128);
    m.head_weights =
        detail::random_weights(g, 128, n_classes, 1.0 / std::sqrt(128.0));
    m.head_bias = detail::random_bias(g, n_classes);
    m.validate();
    return m;
}

// --- inference ----------------------------------------------------------------

struct StageTrace {
    std::string name;
    std::string engine;  // "vtu" or "vau"
    uint64_t cycles = 0;
    uint64_t flops = 0;
};

struct GestureResult {
    std::vector<Packed> logits;         // FP32
    std::vector<Packed> probabilities;  // FP32
    size_t label = 0;
    std::vector<StageTrace> stages;
    uint64_t vtu_cycles = 0;
    uint64_t vtu_fma = 0;
    uint64_t vau_cycles = 0;
};

namespace detail {

// 3x3 same-padding im2col over an (h, w) grid.
inline Matrix im2col(const FeatureMap& in) {
    Matrix x(in.h * in.w, in.ch * 9, in.fmt);
    for (size_t y = 0; y < in.h; ++y)
        for (size_t xx = 0; xx < in.w; ++xx) {
            const size_t row = y * in.w + xx;
            size_t col = 0;
            for (size_t c = 0; c < in.ch; ++c)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx, ++col) {
                        const long sy = static_cast<long>(y) + dy;
                        const long sx = static_cast<long>(xx) + dx;
                        if (sy >= 0 && sy < static_cast<long>(in.h) &&
                            sx >= 0 && sx < static_cast<long>(in.w))
                            x.at(row, col) = in.at(c, sy, sx);
                    }
        }
    return x;
}

inline Packed relu(Packed v) {
    return fp_less(v, fp_zero(v.fmt)) || decode(v).is_zero() ? fp_zero(v.fmt)
                                                             : v;
}

// elementwise vector-unit cycles at 256 bits per cycle
inline uint64_t vau_elem_cycles(uint64_t elems, Format f, uint64_t passes) {
    const uint64_t lanes = 256 / format_info(f).width;
    return passes * ((elems + lanes - 1) / lanes);
}

}  // namespace detail

// Runs one preprocessed frame (8 x 512, FP16) through the model.
inline GestureResult cnn_infer(const Matrix& input, const CnnModel& model) {
    model.validate();
    if (input.rows() != 8 || input.cols() != 512 ||
        input.fmt() != Format::FP16)
        throw ShapeMismatch("cnn_infer: input must be 8x512 FP16");

    GestureResult res;
    FeatureMap fm(1, input.rows(), input.cols(), Format::FP16);
    for (size_t y = 0; y < input.rows(); ++y)
        for (size_t x = 0; x < input.cols(); ++x)
            fm.at(0, y, x) = input.at(y, x);

    for (size_t b = 0; b < model.blocks.size(); ++b) {
        const auto& blk = model.blocks[b];
        Matrix x = detail::im2col(fm);
        Matrix y(x.rows(), blk.out_ch, Format::FP32);
        for (size_t r = 0; r < y.rows(); ++r)
            for (size_t c = 0; c < blk.out_ch; ++c) y.at(r, c) = blk.bias[c];
        gemm::GemmShape shape{x.rows(), blk.out_ch, x.cols(), Format::FP16,
                              Format::FP32};
        auto conv = gemm::vtu_gemm(x, blk.weights, y, shape);
        res.vtu_cycles += conv.trace.total_cycles;
        res.vtu_fma += conv.trace.fma_issued;
        res.stages.push_back({"conv" + std::to_string(b + 1), "vtu",
                              conv.trace.total_cycles,
                              static_cast<uint64_t>(conv.trace.flops())});

        // ReLU then 1x4 max pool along the echo dimension, then narrow to
        // FP16 activations for the next block
        const size_t w_out = fm.w / blk.pool;
        FeatureMap next(blk.out_ch, fm.h, w_out, Format::FP16);
        for (size_t c = 0; c < blk.out_ch; ++c)
            for (size_t yy = 0; yy < fm.h; ++yy)
                for (size_t xx = 0; xx < w_out; ++xx) {
                    Packed best = fp_zero(Format::FP32);
                    for (size_t p = 0; p < blk.pool; ++p) {
                        const size_t row = yy * fm.w + xx * blk.pool + p;
                        Packed v = detail::relu(conv.z.at(row, c));
                        if (fp_less(best, v)) best = v;
                    }
                    next.at(c, yy, xx) = cast(best, Format::FP16);
                }
        const uint64_t pool_elems = conv.z.size();
        const uint64_t pool_cycles =
            detail::vau_elem_cycles(pool_elems, Format::FP32, 2);
        res.vau_cycles += pool_cycles;
        res.stages.push_back({"relu_pool" + std::to_string(b + 1), "vau",
                              pool_cycles, pool_elems * 2});
        fm = std::move(next);
    }

    // global average pooling: exact FP32 sums, scale by 1/(h*w)
    const size_t positions = fm.h * fm.w;
    std::vector<Packed> gap(fm.ch);
    const Packed inv_n =
        from_double(1.0 / static_cast<double>(positions), Format::FP32);
    for (size_t c = 0; c < fm.ch; ++c) {
        Packed acc = fp_zero(Format::FP32);
        for (size_t y = 0; y < fm.h; ++y)
            for (size_t x = 0; x < fm.w; ++x)
                acc = fp_add(acc, cast(fm.at(c, y, x), Format::FP32));
        gap[c] = fp_mul(acc, inv_n);
    }
    const uint64_t gap_cycles =
        detail::vau_elem_cycles(fm.ch * positions, Format::FP32, 1);
    res.vau_cycles += gap_cycles;
    res.stages.push_back({"gap", "vau", gap_cycles, fm.ch * positions});

    // FC 128->128 with fused BN and ReLU on the vector unit
    Matrix fc_in(1, 128, Format::FP16);
    for (size_t c = 0; c < 128; ++c) fc_in[c] = cast(gap[c], Format::FP16);
    Matrix fc_y(1, 128, Format::FP32);
    for (size_t c = 0; c < 128; ++c) fc_y[c] = model.fc_bias[c];
    gemm::GemmShape fc_shape{1, 128, 128, Format::FP16, Format::FP32};
    auto fc = gemm::vau_gemm(fc_in, model.fc_weights, fc_y, fc_shape);
    res.vau_cycles += fc.trace.total_cycles;
    res.stages.push_back({"fc", "vau", fc.trace.total_cycles,
                          static_cast<uint64_t>(fc.trace.flops())});

    Matrix head_in(1, 128, Format::FP16);
    for (size_t c = 0; c < 128; ++c)
        head_in[c] = cast(detail::relu(fc.z[c]), Format::FP16);

    Matrix head_y(1, model.n_classes, Format::FP32);
    for (size_t c = 0; c < model.n_classes; ++c) head_y[c] = model.head_bias[c];
    gemm::GemmShape head_shape{1, model.n_classes, 128, Format::FP16,
                               Format::FP32};
    auto head = gemm::vau_gemm(head_in, model.head_weights, head_y, head_shape);
    res.vau_cycles += head.trace.total_cycles;
    res.stages.push_back({"linear", "vau", head.trace.total_cycles,
                          static_cast<uint64_t>(head.trace.flops())});

    // FP32 softmax: subtract the max, exponentiate at reference precision
    // with one rounding, normalize with the softfloat divide
    res.logits.assign(head.z.data().begin(), head.z.data().end());
    Packed max_logit = res.logits[0];
    for (const auto& l : res.logits)
        if (fp_less(max_logit, l)) max_logit = l;
    std::vector<Packed> exps(res.logits.size());
    Packed sum = fp_zero(Format::FP32);
    for (size_t i = 0; i < res.logits.size(); ++i) {
        const Packed shifted = fp_sub(res.logits[i], max_logit);
        exps[i] = from_double(std::exp(to_double(shifted)), Format::FP32);
        sum = fp_add(sum, exps[i]);
    }
    res.probabilities.resize(exps.size());
    for (size_t i = 0; i < exps.size(); ++i)
        res.probabilities[i] = fp_div(exps[i], sum);
    res.label = 0;
    for (size_t i = 1; i < res.probabilities.size(); ++i)
        if (fp_less(res.probabilities[res.label], res.probabilities[i]))
            res.label = i;
    const uint64_t sm_cycles = detail::vau_elem_cycles(
        3 * model.n_classes, Format::FP32, 1) + 16;  // exp via scalar core
    res.vau_cycles += sm_cycles;
    res.stages.push_back({"softmax", "vau", sm_cycles, 3 * model.n_classes});
    return res;
}

}  // namespace maestro::cnn
