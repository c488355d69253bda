#pragma once

// Floating-point format descriptors and the packed scalar type shared by all
// engine models. Supported encodings: FP8 E4M3 (no infinities, 0x7F NaN,
// saturating overflow), FP8 E5M2, BF16, IEEE binary16/32/64.

#include <cstdint>
#include <string_view>

namespace maestro {

enum class Format : uint8_t { FP8E4M3, FP8E5M2, BF16, FP16, FP32, FP64 };

struct FormatInfo {
    int width;          // total storage bits
    int exp_bits;
    int man_bits;
    int bias;           // 2^(exp_bits-1) - 1
    bool has_inf;       // E4M3 reuses the top exponent for normals
    uint64_t qnan;      // canonical quiet-NaN bit pattern
};

constexpr FormatInfo format_info(Format f) {
    switch (f) {
        case Format::FP8E4M3: return {8, 4, 3, 7, false, 0x7Full};
        case Format::FP8E5M2: return {8, 5, 2, 15, true, 0x7Eull};
        case Format::BF16:    return {16, 8, 7, 127, true, 0x7FC0ull};
        case Format::FP16:    return {16, 5, 10, 15, true, 0x7E00ull};
        case Format::FP32:    return {32, 8, 23, 127, true, 0x7FC00000ull};
        case Format::FP64:    return {64, 11, 52, 1023, true, 0x7FF8000000000000ull};
    }
    return {};
}

constexpr std::string_view format_name(Format f) {
    switch (f) {
        case Format::FP8E4M3: return "fp8e4m3";
        case Format::FP8E5M2: return "fp8e5m2";
        case Format::BF16:    return "bf16";
        case Format::FP16:    return "fp16";
        case Format::FP32:    return "fp32";
        case Format::FP64:    return "fp64";
    }
    return "?";
}

constexpr uint64_t width_mask(Format f) {
    int w = format_info(f).width;
    return w == 64 ? ~0ull : ((1ull << w) - 1);
}

// A bit pattern tagged with its format. Everything in the simulator carries
// values in this form; arithmetic goes through softfloat.hpp.
struct Packed {
    uint64_t bits = 0;
    Format fmt = Format::FP32;

    friend bool operator==(const Packed& a, const Packed& b) {
        return a.bits == b.bits && a.fmt == b.fmt;
    }
};

inline Packed packed(uint64_t bits, Format f) { return {bits & width_mask(f), f}; }

// Unpacked scalar: value = (-1)^neg * mant * 2^exp with integer mant.
// Subnormals carry mant < 2^man_bits, normals 2^man_bits <= mant < 2^(man_bits+1).
struct Decoded {
    enum class Cls : uint8_t { Finite, Inf, Nan };
    Cls cls = Cls::Finite;
    bool neg = false;
    int32_t exp = 0;
    uint64_t mant = 0;      // 0 encodes zero (with neg giving the zero's sign)

    bool is_zero() const { return cls == Cls::Finite && mant == 0; }
    bool is_finite() const { return cls == Cls::Finite; }
    bool is_inf() const { return cls == Cls::Inf; }
    bool is_nan() const { return cls == Cls::Nan; }
};

inline Decoded decode(Packed p) {
    const FormatInfo fi = format_info(p.fmt);
    const uint64_t bits = p.bits & width_mask(p.fmt);
    Decoded d;
    d.neg = (bits >> (fi.width - 1)) & 1;
    const uint64_t efield = (bits >> fi.man_bits) & ((1ull << fi.exp_bits) - 1);
    const uint64_t mfield = bits & ((1ull << fi.man_bits) - 1);
    const uint64_t emax_field = (1ull << fi.exp_bits) - 1;

    if (p.fmt == Format::FP8E4M3) {
        // All-ones exponent stays normal except the 0x7F/0xFF NaN pattern.
        if (efield == emax_field && mfield == ((1ull << fi.man_bits) - 1)) {
            d.cls = Decoded::Cls::Nan;
            return d;
        }
    } else if (efield == emax_field) {
        d.cls = (mfield == 0) ? Decoded::Cls::Inf : Decoded::Cls::Nan;
        return d;
    }

    if (efield == 0) {
        d.mant = mfield;                       // subnormal or zero
        d.exp = 1 - fi.bias - fi.man_bits;
    } else {
        d.mant = mfield | (1ull << fi.man_bits);
        d.exp = static_cast<int32_t>(efield) - fi.bias - fi.man_bits;
    }
    return d;
}

// Largest finite value of a format, as (mant, exp) of the Decoded convention.
constexpr uint64_t max_finite_bits(Format f) {
    const FormatInfo fi = format_info(f);
    if (f == Format::FP8E4M3) return 0x7Eull;  // 448
    // exponent field emax-1 alias all-ones-1, mantissa all ones
    const uint64_t e = (1ull << fi.exp_bits) - 2;
    return (e << fi.man_bits) | ((1ull << fi.man_bits) - 1);
}

}  // namespace maestro
