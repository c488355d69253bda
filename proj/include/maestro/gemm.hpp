#pragma once

// Functional and first-order cycle models of the tensor array (12x4 CEs fed
// from the vector register file) and of the vector-unit outer-product GEMM
// baseline. Z = X*W + Y with X,W in the input format and Y,Z in the
// accumulate format; each output element is a strictly sequential FMA chain
// over k, one rounding per FMA.

#include <cstdint>
#include <string>

#include "maestro/errors.hpp"
#include "maestro/matrix.hpp"

namespace maestro::gemm {

// --- shapes and array constants ------------------------------------------

struct GemmShape {
    size_t m = 0, n = 0, k = 0;
    Format in_format = Format::FP16;
    Format acc_format = Format::FP16;
};

constexpr bool shape_formats_ok(Format in, Format acc) {
    return (in == Format::FP16 && acc == Format::FP16) ||
           (in == Format::FP16 && acc == Format::FP32) ||
           (in == Format::FP8E4M3 && acc == Format::FP16) ||
           (in == Format::FP8E5M2 && acc == Format::FP16);
}

struct CeArraySpec {
    static constexpr unsigned rows = 12;
    static constexpr unsigned cols = 4;
    static constexpr unsigned fma_per_cycle = rows * cols;  // 48
    static constexpr unsigned x_hold_cycles = 16;           // one pass
    static constexpr unsigned col_stagger[4] = {0, 4, 8, 12};
    // tile footprint in the LMUL=8 logical registers
    static constexpr unsigned tile_rows = rows;        // 12
    static constexpr unsigned tile_cols = x_hold_cycles;  // 16 Z columns
    static constexpr unsigned tile_k = 16;             // one k window
};

// --- buffer capacity accounting -------------------------------------------

enum class BufferVariant { Original, Reduced };

struct BufferReport {
    unsigned x_sync_slots, x_queue_slots;
    unsigned x_bytes, y_bytes, w_bytes, total_bytes;
    // deltas vs the original standalone tensor unit, percent
    double x_reduction_pct, y_reduction_pct, w_reduction_pct,
        total_reduction_pct;
};

// (sync + queue) slots * 48 CEs * 16-bit elements; Y and W are unchanged by
// the register-file integration.
inline BufferReport buffer_accounting(BufferVariant v) {
    const unsigned ces = CeArraySpec::fma_per_cycle;
    const unsigned element_bits = 16;
    BufferReport r{};
    r.x_sync_slots = v == BufferVariant::Original ? 2 : 1;
    r.x_queue_slots = v == BufferVariant::Original ? 4 : 2;
    r.x_bytes = (r.x_sync_slots + r.x_queue_slots) * ces * element_bits / 8;
    r.y_bytes = 384;
    r.w_bytes = 128;
    r.total_bytes = r.x_bytes + r.y_bytes + r.w_bytes;

    const unsigned x_orig = (2 + 4) * ces * element_bits / 8;
    const unsigned total_orig = x_orig + r.y_bytes + r.w_bytes;
    auto pct = [](unsigned now, unsigned orig) {
        return 100.0 * (static_cast<double>(now) - orig) / orig;
    };
    r.x_reduction_pct = pct(r.x_bytes, x_orig);
    r.y_reduction_pct = 0.0;
    r.w_reduction_pct = 0.0;
    r.total_reduction_pct = pct(r.total_bytes, total_orig);
    return r;
}

// --- cycle trace -----------------------------------------------------------

struct GemmCycleConfig {
    uint64_t job_overhead_cycles = 8;    // TCSR config + trigger handshake
    uint64_t tile_boundary_cycles = 3;   // calibrated outer-loop stall per tile
};

struct GemmCycleTrace {
    uint64_t total_cycles = 0;
    uint64_t fma_issued = 0;
    uint64_t peak_fma_per_cycle = CeArraySpec::fma_per_cycle;
    // phase attribution
    uint64_t vrf_load_cycles = 0;      // exposed loads (initial + excess)
    uint64_t compute_cycles = 0;       // array busy window incl. stagger tail
    uint64_t writeback_cycles = 0;
    uint64_t pointer_swap_cycles = 0;  // tile-boundary stalls
    uint64_t overhead_cycles = 0;
    uint64_t port_conflict_stalls = 0;

    double utilization() const {
        return total_cycles ? static_cast<double>(fma_issued) /
                                  (static_cast<double>(peak_fma_per_cycle) *
                                   total_cycles)
                            : 0.0;
    }
    double utilization_compute_only() const {
        return compute_cycles ? static_cast<double>(fma_issued) /
                                    (static_cast<double>(peak_fma_per_cycle) *
                                     compute_cycles)
                              : 0.0;
    }
    double flops() const { return 2.0 * static_cast<double>(fma_issued); }
};

struct GemmResult {
    Matrix z;
    GemmCycleTrace trace;
};

// --- functional core -------------------------------------------------------

namespace detail {

inline void validate(const Matrix& x, const Matrix& w, const Matrix& y,
                     const GemmShape& s) {
    if (!shape_formats_ok(s.in_format, s.acc_format))
        throw UnsupportedFormat("gemm: unsupported format pair");
    if (s.m == 0 || s.n == 0 || s.k == 0)
        throw ShapeMismatch("gemm: zero dimension");
    if (x.rows() != s.m || x.cols() != s.k || w.rows() != s.k ||
        w.cols() != s.n || y.rows() != s.m || y.cols() != s.n)
        throw ShapeMismatch("gemm: operand dimensions disagree with shape");
    if (x.fmt() != s.in_format || w.fmt() != s.in_format ||
        y.fmt() != s.acc_format)
        throw UnsupportedFormat("gemm: operand formats disagree with shape");
}

inline Matrix widen(const Matrix& m, Format accf) {
    if (m.fmt() == accf) return m;
    Matrix out(m.rows(), m.cols(), accf);
    for (size_t i = 0; i < m.size(); ++i) out[i] = cast(m[i], accf);  // exact
    return out;
}

// Z = X*W + Y element-wise as sequential FMA chains in the accumulate
// format, one rounding per FMA. Widening from the input format is exact, so
// this is the mixed-precision CE datapath (G8-16 / G16-32) as well as the
// same-format one.
inline Matrix functional_gemm(const Matrix& x, const Matrix& w,
                              const Matrix& y, const GemmShape& s) {
    const Matrix xw = widen(x, s.acc_format);
    const Matrix ww = widen(w, s.acc_format);
    Matrix z(s.m, s.n, s.acc_format);
    for (size_t i = 0; i < s.m; ++i)
        for (size_t j = 0; j < s.n; ++j) {
            Packed acc = y.at(i, j);
            for (size_t l = 0; l < s.k; ++l)
                acc = fp_fma(xw.at(i, l), ww.at(l, j), acc);
            z.at(i, j) = acc;
        }
    return z;
}

inline uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

// VLSU cycles to move n elements of a format through the 256-bit port.
inline uint64_t move_cycles(uint64_t elems, Format f) {
    const uint64_t per_cycle = 256 / format_info(f).width;
    return ceil_div(elems, per_cycle);
}

}  // namespace detail

// --- tensor-array cycle model ----------------------------------------------

// Tiled dataflow: 12x16 Z tiles, k consumed in 16-wide windows of four-step
// passes (one X value held 16 cycles per CE, columns staggered 0/4/8/12).
// The VLSU refills the next tile's registers during compute and is exposed
// only when its traffic exceeds the tile's compute window. Pipeline stays
// primed across chunk and tile boundaries; one stagger tail drains the job.
inline GemmCycleTrace vtu_cycle_model(const GemmShape& s,
                                      const GemmCycleConfig& cfg = {}) {
    using detail::ceil_div;
    using detail::move_cycles;
    const uint64_t mt = ceil_div(s.m, CeArraySpec::tile_rows);
    const uint64_t nt = ceil_div(s.n, CeArraySpec::tile_cols);
    const uint64_t kc = ceil_div(s.k, CeArraySpec::tile_k);
    const Format inf = s.in_format, accf = s.acc_format;

    GemmCycleTrace t;
    t.fma_issued = static_cast<uint64_t>(s.m) * s.n * s.k;
    t.overhead_cycles = cfg.job_overhead_cycles;

    auto tile_rows_at = [&](uint64_t ti) {
        return std::min<uint64_t>(CeArraySpec::tile_rows,
                                  s.m - ti * CeArraySpec::tile_rows);
    };
    auto tile_cols_at = [&](uint64_t tj) {
        return std::min<uint64_t>(CeArraySpec::tile_cols,
                                  s.n - tj * CeArraySpec::tile_cols);
    };
    auto chunk_k_at = [&](uint64_t c) {
        return std::min<uint64_t>(CeArraySpec::tile_k,
                                  s.k - c * CeArraySpec::tile_k);
    };

    // initial fill: first chunk of X and W plus the first Y tile
    const uint64_t r0 = tile_rows_at(0), c0 = tile_cols_at(0),
                   k0 = chunk_k_at(0);
    const uint64_t initial_load = move_cycles(r0 * k0, inf) +
                                  move_cycles(k0 * c0, inf) +
                                  move_cycles(r0 * c0, accf);
    t.vrf_load_cycles = initial_load;

    uint64_t tile_index = 0;
    const uint64_t tiles = mt * nt;
    for (uint64_t ti = 0; ti < mt; ++ti) {
        for (uint64_t tj = 0; tj < nt; ++tj, ++tile_index) {
            const uint64_t rows = tile_rows_at(ti);
            const uint64_t cols = tile_cols_at(tj);
            uint64_t compute = 0, vlsu = 0;
            for (uint64_t c = 0; c < kc; ++c) {
                const uint64_t kcur = chunk_k_at(c);
                compute += ceil_div(kcur, CeArraySpec::cols) *
                           CeArraySpec::x_hold_cycles;
                if (tile_index != 0 || c != 0) {
                    vlsu += move_cycles(rows * kcur, inf) +
                            move_cycles(kcur * cols, inf);
                }
            }
            if (tile_index + 1 < tiles)  // next tile's Y preload
                vlsu += move_cycles(rows * cols, accf);
            if (tile_index != 0)  // previous tile's Z drain
                vlsu += move_cycles(rows * cols, accf);
            const uint64_t window = std::max(compute, vlsu);
            t.compute_cycles += compute;
            if (vlsu > compute) t.vrf_load_cycles += vlsu - compute;
            t.total_cycles += window;
            t.pointer_swap_cycles += cfg.tile_boundary_cycles;
        }
    }
    t.compute_cycles += CeArraySpec::col_stagger[3];  // last column drains
    const uint64_t last_store =
        detail::move_cycles(tile_rows_at(mt - 1) * tile_cols_at(nt - 1), accf);
    t.writeback_cycles = last_store;
    t.total_cycles += cfg.job_overhead_cycles + initial_load +
                      CeArraySpec::col_stagger[3] + t.pointer_swap_cycles +
                      last_store;
    return t;
}

// --- vector-unit baseline ----------------------------------------------------

// Outer-product schedule: for each (row, k) a scalar-by-vector FMA across n.
// Four 64-bit FPU lanes move 256 bits of elements per cycle; short vectors
// bottom out at the issue/dependency floor.
inline GemmCycleTrace vau_cycle_model(const GemmShape& s,
                                      const GemmCycleConfig& cfg = {}) {
    const uint64_t lanes = 256 / format_info(s.in_format).width;
    GemmCycleTrace t;
    t.fma_issued = static_cast<uint64_t>(s.m) * s.n * s.k;
    t.peak_fma_per_cycle = lanes;
    t.overhead_cycles = cfg.job_overhead_cycles;
    const uint64_t per_op =
        std::max<uint64_t>(detail::ceil_div(s.n, lanes), 2);
    t.compute_cycles = static_cast<uint64_t>(s.m) * s.k * per_op;
    t.pointer_swap_cycles = 2 * s.m;  // per-row pointer/setup work
    t.total_cycles =
        cfg.job_overhead_cycles + t.compute_cycles + t.pointer_swap_cycles;
    return t;
}

// --- public entry points -----------------------------------------------------

inline GemmResult vtu_gemm(const Matrix& x, const Matrix& w, const Matrix& y,
                           const GemmShape& s, const GemmCycleConfig& cfg = {}) {
    detail::validate(x, w, y, s);
    return {detail::functional_gemm(x, w, y, s), vtu_cycle_model(s, cfg)};
}

// Same arithmetic and k-order as the tensor path, so results are bit-identical;
// only the schedule differs.
inline GemmResult vau_gemm(const Matrix& x, const Matrix& w, const Matrix& y,
                           const GemmShape& s, const GemmCycleConfig& cfg = {}) {
    detail::validate(x, w, y, s);
    return {detail::functional_gemm(x, w, y, s), vau_cycle_model(s, cfg)};
}

}  // namespace maestro::gemm
