#pragma once

// Exact fixed-point accumulation used by the softfloat core. Finite operands
// become integer-mantissa terms (mant * 2^exp); terms are shifted onto a wide
// two's-complement-free accumulator (separate positive/negative unsigned
// sums), so no intermediate rounding can occur. A single RNE rounding maps
// the resolved magnitude back to a target format.
//
// Accumulator widths cover the worst-case alignment span of each family:
//   16-bit family (FP8/FP16 inputs, FP16/FP32 accumulator)  ->  4 limbs
//   FP32 family                                             -> 10 limbs
//   FP64 (reference/plumbing only)                          -> 70 limbs

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>

#include "maestro/formats.hpp"

namespace maestro {
namespace detail {

using u128 = unsigned __int128;

inline int top_bit(uint64_t x) { return 63 - __builtin_clzll(x); }

// One finite addend: value = (-1)^neg * mag * 2^exp. mag fits 128 bits
// (largest case: product of two FP64 mantissas).
struct Term {
    u128 mag = 0;
    int32_t exp = 0;
    bool neg = false;

    static Term from(const Decoded& d) {
        return {static_cast<u128>(d.mant), d.exp, d.neg};
    }
    // Exact product; zero keeps the XOR sign.
    static Term product(const Decoded& a, const Decoded& b) {
        return {static_cast<u128>(a.mant) * b.mant,
                a.exp + b.exp,
                a.neg != b.neg};
    }
    bool is_zero() const { return mag == 0; }
};

// Resolved exact magnitude: value = (-1)^neg * (limbs as little-endian
// integer) * 2^scale.
template <int Limbs>
struct Resolved {
    std::array<uint64_t, Limbs> mag{};
    int32_t scale = 0;
    bool neg = false;
    bool zero = true;
};

template <int Limbs>
class FixedAcc {
public:
    explicit FixedAcc(int32_t scale) : scale_(scale) {}

    void add(const Term& t) {
        if (t.mag == 0) return;
        assert(t.exp >= scale_);
        add_shifted(t.neg ? neg_ : pos_, t.mag,
                    static_cast<uint32_t>(t.exp - scale_));
    }

    // Subtracts the smaller unsigned sum from the larger one.
    Resolved<Limbs> resolve() const {
        Resolved<Limbs> r;
        r.scale = scale_;
        int cmp = 0;
        for (int i = Limbs - 1; i >= 0 && cmp == 0; --i) {
            if (pos_[i] != neg_[i]) cmp = pos_[i] > neg_[i] ? 1 : -1;
        }
        if (cmp == 0) return r;  // exact zero; sign decided by the caller
        const auto& big = cmp > 0 ? pos_ : neg_;
        const auto& small = cmp > 0 ? neg_ : pos_;
        uint64_t borrow = 0;
        for (int i = 0; i < Limbs; ++i) {
            uint64_t s = small[i] + borrow;
            borrow = (s < borrow) || (big[i] < s);
            r.mag[i] = big[i] - s;
        }
        r.neg = cmp < 0;
        r.zero = false;
        return r;
    }

private:
    static void add_shifted(std::array<uint64_t, Limbs>& acc, u128 mag,
                            uint32_t shift) {
        const uint32_t limb = shift >> 6;
        const uint32_t off = shift & 63;
        uint64_t part[3] = {static_cast<uint64_t>(mag),
                            static_cast<uint64_t>(mag >> 64), 0};
        if (off != 0) {
            part[2] = part[1] >> (64 - off);
            part[1] = (part[1] << off) | (part[0] >> (64 - off));
            part[0] <<= off;
        }
        uint64_t carry = 0;
        for (uint32_t k = 0; k < 3; ++k) {
            if (part[k] == 0 && carry == 0) continue;
            const uint32_t i = limb + k;
            assert(i < static_cast<uint32_t>(Limbs));
            u128 s = static_cast<u128>(acc[i]) + part[k] + carry;
            acc[i] = static_cast<uint64_t>(s);
            carry = static_cast<uint64_t>(s >> 64);
        }
        for (uint32_t i = limb + 3; carry; ++i) {
            assert(i < static_cast<uint32_t>(Limbs));
            u128 s = static_cast<u128>(acc[i]) + carry;
            acc[i] = static_cast<uint64_t>(s);
            carry = static_cast<uint64_t>(s >> 64);
        }
    }

    std::array<uint64_t, Limbs> pos_{}, neg_{};
    int32_t scale_;
};

// --- bit probes over a limb array ---------------------------------------

inline int highest_bit(const uint64_t* limbs, int n) {
    for (int i = n - 1; i >= 0; --i)
        if (limbs[i]) return i * 64 + top_bit(limbs[i]);
    return -1;
}

inline bool bit_at(const uint64_t* limbs, int n, int64_t pos) {
    if (pos < 0 || pos >= int64_t(n) * 64) return false;
    return (limbs[pos >> 6] >> (pos & 63)) & 1;
}

inline bool any_below(const uint64_t* limbs, int n, int64_t pos) {
    if (pos <= 0) return false;
    if (pos > int64_t(n) * 64) pos = int64_t(n) * 64;
    const int64_t limb = pos >> 6;
    const int64_t off = pos & 63;
    for (int64_t i = 0; i < limb; ++i)
        if (limbs[i]) return true;
    if (off && limb < n && (limbs[limb] & ((1ull << off) - 1))) return true;
    return false;
}

// value >> pos, for results known to fit 64 bits.
inline uint64_t bits_from(const uint64_t* limbs, int n, int64_t pos) {
    if (pos <= -64) return 0;  // caller guarantees no overflow
    if (pos < 0) {
        uint64_t v = bits_from(limbs, n, 0);
        return v << (-pos);
    }
    const int64_t limb = pos >> 6;
    const int64_t off = pos & 63;
    uint64_t lo = limb < n ? limbs[limb] : 0;
    uint64_t hi = limb + 1 < n ? limbs[limb + 1] : 0;
    uint64_t v = off ? (lo >> off) | (hi << (64 - off)) : lo;
    assert(highest_bit(limbs, n) - pos < 63);
    return v;
}

// --- single RNE rounding of a resolved exact value ----------------------

inline uint64_t encode_special(Format fmt, Decoded::Cls cls, bool neg) {
    const FormatInfo fi = format_info(fmt);
    if (cls == Decoded::Cls::Nan) return fi.qnan;
    const uint64_t sign = neg ? (1ull << (fi.width - 1)) : 0;
    // E4M3 has no infinities: infinite-valued results saturate to the max
    if (!fi.has_inf) return sign | max_finite_bits(fmt);
    const uint64_t einf = ((1ull << fi.exp_bits) - 1) << fi.man_bits;
    return sign | einf;
}

inline uint64_t zero_bits(Format fmt, bool neg) {
    return neg ? (1ull << (format_info(fmt).width - 1)) : 0;
}

// Rounds (-1)^neg * limbs * 2^scale (finite, nonzero) to fmt under RNE with
// gradual underflow. Overflow gives inf, or +-448 for E4M3.
inline uint64_t round_finite(bool neg, const uint64_t* limbs, int n,
                             int32_t scale, Format fmt) {
    const FormatInfo fi = format_info(fmt);
    const int h = highest_bit(limbs, n);
    assert(h >= 0);
    const int64_t top_exp = int64_t(scale) + h;           // value in [2^E, 2^{E+1})
    const int64_t min_ulp = 1 - fi.bias - fi.man_bits;    // subnormal ulp exponent
    int64_t ulp_exp = top_exp - fi.man_bits;
    if (ulp_exp < min_ulp) ulp_exp = min_ulp;

    const int64_t pos = ulp_exp - scale;                  // ulp bit position
    uint64_t keep = bits_from(limbs, n, pos);
    const bool guard = bit_at(limbs, n, pos - 1);
    const bool sticky = pos >= 1 && any_below(limbs, n, pos - 1);
    if (guard && (sticky || (keep & 1))) keep += 1;

    if (keep == 0) return zero_bits(fmt, neg);            // underflow to zero
    if (keep >> (fi.man_bits + 1)) {                      // rounding carry
        keep >>= 1;
        ulp_exp += 1;
    }

    const uint64_t sign = neg ? (1ull << (fi.width - 1)) : 0;
    if (keep < (1ull << fi.man_bits)) {
        // subnormal (ulp_exp == min_ulp by construction)
        return sign | keep;
    }
    const int64_t efield = ulp_exp + fi.man_bits + fi.bias;
    const int64_t efield_max = (1ll << fi.exp_bits) - 1;
    if (fmt == Format::FP8E4M3) {
        // top exponent is normal; only the NaN pattern and beyond saturate
        if (efield > efield_max ||
            (efield == efield_max && (keep & ((1ull << fi.man_bits) - 1)) ==
                                         ((1ull << fi.man_bits) - 1)))
            return sign | max_finite_bits(fmt);
        return sign | (uint64_t(efield) << fi.man_bits) |
               (keep & ((1ull << fi.man_bits) - 1));
    }
    if (efield >= efield_max)
        return encode_special(fmt, Decoded::Cls::Inf, neg);
    return sign | (uint64_t(efield) << fi.man_bits) |
           (keep & ((1ull << fi.man_bits) - 1));
}

template <int Limbs>
uint64_t round_resolved(const Resolved<Limbs>& r, bool zero_neg, Format fmt) {
    if (r.zero) return zero_bits(fmt, zero_neg);
    return round_finite(r.neg, r.mag.data(), Limbs, r.scale, fmt);
}

constexpr int kLimbs16 = 4;    // FP8/FP16 inputs, FP16/FP32 accumulate
constexpr int kLimbs32 = 10;   // FP32 inputs
constexpr int kLimbs64 = 70;   // FP64 reference ops

constexpr int limbs_for(Format f) {
    switch (f) {
        case Format::FP64: return kLimbs64;
        case Format::FP32: return kLimbs32;
        case Format::BF16: return kLimbs32;  // FP32-sized exponent range
        default: return kLimbs16;
    }
}

}  // namespace detail

// Public exact-value hook: a wide fixed-point snapshot of a scalar or a
// product, plus the reference rounding entry point. Used for differential
// testing and by reference paths; not a hot type.
class Exact {
public:
    enum class Cls : uint8_t { Finite, Inf, Nan };

    static Exact from(Packed p) {
        Decoded d = decode(p);
        Exact e;
        e.cls_ = d.is_nan() ? Cls::Nan : d.is_inf() ? Cls::Inf : Cls::Finite;
        e.neg_ = d.neg;
        if (d.is_finite()) e.term_ = detail::Term::from(d);
        return e;
    }

    static Exact product(Packed a, Packed b) {
        Decoded da = decode(a), db = decode(b);
        Exact e;
        e.neg_ = da.neg != db.neg;
        if (da.is_nan() || db.is_nan() ||
            (da.is_inf() && db.is_zero()) || (db.is_inf() && da.is_zero())) {
            e.cls_ = Cls::Nan;
        } else if (da.is_inf() || db.is_inf()) {
            e.cls_ = Cls::Inf;
        } else {
            e.cls_ = Cls::Finite;
            e.term_ = detail::Term::product(da, db);
        }
        return e;
    }

    Exact negated() const {
        Exact e = *this;
        e.neg_ = !e.neg_;
        e.term_.neg = e.neg_;
        return e;
    }

    Cls cls() const { return cls_; }
    bool negative() const { return neg_; }
    const detail::Term& term() const { return term_; }

private:
    Cls cls_ = Cls::Finite;
    bool neg_ = false;
    detail::Term term_{};
};

// Correctly rounded (RNE) sum of exact addends, one rounding total. This is
// the reference path every fused operation is tested against.
inline Packed round_from_exact(const Exact* addends, int count, Format fmt) {
    bool any_nan = false, pos_inf = false, neg_inf = false;
    for (int i = 0; i < count; ++i) {
        if (addends[i].cls() == Exact::Cls::Nan) any_nan = true;
        if (addends[i].cls() == Exact::Cls::Inf)
            (addends[i].negative() ? neg_inf : pos_inf) = true;
    }
    if (any_nan || (pos_inf && neg_inf))
        return packed(format_info(fmt).qnan, fmt);
    if (pos_inf || neg_inf)
        return packed(detail::encode_special(fmt, Decoded::Cls::Inf, neg_inf), fmt);

    int32_t scale = 0;
    bool have = false, all_neg_zero = count > 0;
    for (int i = 0; i < count; ++i) {
        const auto& t = addends[i].term();
        if (!t.is_zero()) {
            scale = have ? std::min(scale, t.exp) : t.exp;
            have = true;
        }
        if (!(addends[i].term().is_zero() && addends[i].negative()))
            all_neg_zero = false;
    }
    detail::FixedAcc<detail::kLimbs64> acc(scale);
    for (int i = 0; i < count; ++i) acc.add(addends[i].term());
    auto r = acc.resolve();
    // exact zero: -0 only when every addend is a negative zero
    return packed(detail::round_resolved(r, all_neg_zero, fmt), fmt);
}

inline Packed round_from_exact(const Exact& v, Format fmt) {
    return round_from_exact(&v, 1, fmt);
}

}  // namespace maestro
