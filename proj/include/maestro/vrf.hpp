#pragma once

// Vector register file model: 32x512-bit registers in four banks with three
// 256-bit read ports and one 256-bit write port per bank, priority-based
// arbitration between the functional units, and the LMUL=8 operand image
// the tensor array consumes (X in V0, Y in V8, W in V16, Z in V24).

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "maestro/errors.hpp"
#include "maestro/matrix.hpp"

namespace maestro::vrf {

struct VrfLayout {
    static constexpr unsigned registers = 32;
    static constexpr unsigned register_bits = 512;
    static constexpr unsigned banks = 4;
    static constexpr unsigned read_ports_per_bank = 3;
    static constexpr unsigned write_ports_per_bank = 1;
    static constexpr unsigned lmul = 8;
    // role bases, 8-aligned
    static constexpr unsigned x_base = 0;   // V0
    static constexpr unsigned y_base = 8;   // V8
    static constexpr unsigned w_base = 16;  // V16
    static constexpr unsigned z_base = 24;  // V24
};

// --- port arbitration ------------------------------------------------------

enum class Unit : uint8_t { VauVtu, Vlsu, Vsldu };
enum class PortRole : uint8_t { Read0, Read1, Read2, Write };

constexpr const char* unit_name(Unit u) {
    switch (u) {
        case Unit::VauVtu: return "vau";
        case Unit::Vlsu: return "vlsu";
        case Unit::Vsldu: return "vsldu";
    }
    return "?";
}

struct PortRequest {
    Unit unit;
    unsigned bank;  // 0..3
    PortRole port;
};

struct ArbitrationResult {
    std::vector<bool> granted;  // parallel to the request list
    // winner per (bank, port); -1 when idle
    std::array<std::array<int, 4>, VrfLayout::banks> winner;
};

// Read port 0 serves the VAU's VS2 then the VLSU; port 1 the VAU's VS1 then
// the VSLDU; port 2 the VAU's VD then the VLSU. The single write port goes
// VAU > VLSU > VSLDU. Losers stall this cycle and re-request.
inline bool unit_allowed(Unit u, PortRole p) {
    switch (p) {
        case PortRole::Read0:
        case PortRole::Read2: return u == Unit::VauVtu || u == Unit::Vlsu;
        case PortRole::Read1: return u == Unit::VauVtu || u == Unit::Vsldu;
        case PortRole::Write: return true;
    }
    return false;
}

inline int unit_priority(Unit u) {
    switch (u) {
        case Unit::VauVtu: return 0;
        case Unit::Vlsu: return 1;
        case Unit::Vsldu: return 2;
    }
    return 3;
}

inline ArbitrationResult vrf_arbitrate(std::span<const PortRequest> requests) {
    ArbitrationResult r;
    r.granted.assign(requests.size(), false);
    for (auto& bank : r.winner) bank.fill(-1);
    for (size_t i = 0; i < requests.size(); ++i) {
        const auto& q = requests[i];
        if (q.bank >= VrfLayout::banks || !unit_allowed(q.unit, q.port))
            continue;
        int& win = r.winner[q.bank][static_cast<int>(q.port)];
        if (win < 0 || unit_priority(q.unit) <
                           unit_priority(requests[win].unit))
            win = static_cast<int>(i);
    }
    for (const auto& bank : r.winner)
        for (int idx : bank)
            if (idx >= 0) r.granted[idx] = true;
    return r;
}

// --- LMUL=8 operand image ----------------------------------------------------

// One register image: 32 registers x 512 bits, as 16-bit element lanes.
struct RegisterImage {
    std::array<std::array<uint16_t, 32>, VrfLayout::registers> lanes{};

    uint16_t& word(unsigned logical_base, unsigned word256, unsigned elem) {
        return lanes[logical_base + word256 / 2][(word256 % 2) * 16 + elem];
    }
    const uint16_t& word(unsigned logical_base, unsigned word256,
                         unsigned elem) const {
        return lanes[logical_base + word256 / 2][(word256 % 2) * 16 + elem];
    }
    // physical bank of a 256-bit word
    static unsigned bank_of(unsigned reg, unsigned half) {
        return (reg * 2 + half) % VrfLayout::banks;
    }
};

// X layout: 256-bit word (t*3 + g) carries the values CE(4g+i, c) uses at
// k-substep t, element order row-major over the 4x4 block:
//   word[t*3+g][i*4 + c] = X[4g+i][4t + c]
// W follows the shift-register stream: word (t*4 + q), beat jj, lane c:
//   word[t*4+q][jj*4 + c] = W[4t+c][4q + jj]
// Y and Z are row-major 12x16.
inline RegisterImage vrf_pack(const Matrix& x, const Matrix& w,
                              const Matrix& y) {
    if (x.rows() > 12 || x.cols() > 16 || w.rows() > 16 || w.cols() > 16 ||
        y.rows() > 12 || y.cols() > 16)
        throw TileTooLarge("vrf_pack: tile exceeds one LMUL=8 register");
    if (format_info(x.fmt()).width != 16 || format_info(y.fmt()).width != 16)
        throw UnsupportedFormat("vrf_pack: image lanes are 16-bit");
    RegisterImage img;
    for (unsigned t = 0; t < 4; ++t)
        for (unsigned g = 0; g < 3; ++g)
            for (unsigned i = 0; i < 4; ++i)
                for (unsigned c = 0; c < 4; ++c) {
                    const unsigned row = 4 * g + i, kk = 4 * t + c;
                    if (row < x.rows() && kk < x.cols())
                        img.word(VrfLayout::x_base, t * 3 + g, i * 4 + c) =
                            static_cast<uint16_t>(x.at(row, kk).bits);
                }
    for (unsigned t = 0; t < 4; ++t)
        for (unsigned q = 0; q < 4; ++q)
            for (unsigned jj = 0; jj < 4; ++jj)
                for (unsigned c = 0; c < 4; ++c) {
                    const unsigned kk = 4 * t + c, col = 4 * q + jj;
                    if (kk < w.rows() && col < w.cols())
                        img.word(VrfLayout::w_base, t * 4 + q, jj * 4 + c) =
                            static_cast<uint16_t>(w.at(kk, col).bits);
                }
    for (unsigned r = 0; r < y.rows(); ++r)
        for (unsigned c = 0; c < y.cols(); ++c)
            img.word(VrfLayout::y_base, r, c) =
                static_cast<uint16_t>(y.at(r, c).bits);
    return img;
}

struct UnpackedTile {
    Matrix x, w, y;
};

inline UnpackedTile vrf_unpack(const RegisterImage& img, size_t m, size_t k,
                               size_t n, Format xf, Format yf) {
    UnpackedTile t{Matrix(m, k, xf), Matrix(k, n, xf), Matrix(m, n, yf)};
    for (unsigned tt = 0; tt < 4; ++tt)
        for (unsigned g = 0; g < 3; ++g)
            for (unsigned i = 0; i < 4; ++i)
                for (unsigned c = 0; c < 4; ++c) {
                    const unsigned row = 4 * g + i, kk = 4 * tt + c;
                    if (row < m && kk < k)
                        t.x.at(row, kk) = packed(
                            img.word(VrfLayout::x_base, tt * 3 + g, i * 4 + c),
                            xf);
                }
    for (unsigned tt = 0; tt < 4; ++tt)
        for (unsigned q = 0; q < 4; ++q)
            for (unsigned jj = 0; jj < 4; ++jj)
                for (unsigned c = 0; c < 4; ++c) {
                    const unsigned kk = 4 * tt + c, col = 4 * q + jj;
                    if (kk < k && col < n)
                        t.w.at(kk, col) = packed(
                            img.word(VrfLayout::w_base, tt * 4 + q,
                                     jj * 4 + c),
                            xf);
                }
    for (unsigned r = 0; r < m; ++r)
        for (unsigned c = 0; c < n; ++c)
            t.y.at(r, c) =
                packed(img.word(VrfLayout::y_base, r, c), yf);
    return t;
}

}  // namespace maestro::vrf
