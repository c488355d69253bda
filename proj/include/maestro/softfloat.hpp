#pragma once

// Multi-precision softfloat core. Every operation applies exactly one RNE
// rounding to the exactly-computed result; NaN outputs are canonicalized.
// Hardware float/double serve as fast paths only where the result is provably
// identical to the wide fixed-point path (exact embedding, or a guarded
// double rounding that falls back on detected ties).

#include <bit>
#include <cmath>
#include <cstdint>

#include "maestro/errors.hpp"
#include "maestro/exact.hpp"
#include "maestro/formats.hpp"

namespace maestro {

namespace detail {

// RNE rounding of (-1)^neg * mag * 2^scale (mag in a u128). exact_tie, when
// requested, reports that the discarded fraction was exactly one half ulp;
// callers rounding an already-rounded double must retry exactly in that case.
inline uint64_t round_u128(bool neg, u128 mag, int32_t scale, Format fmt,
                           bool* exact_tie = nullptr) {
    if (exact_tie) *exact_tie = false;
    if (mag == 0) return zero_bits(fmt, neg);
    const FormatInfo fi = format_info(fmt);
    const uint64_t hi = static_cast<uint64_t>(mag >> 64);
    const int h = hi ? 64 + top_bit(hi) : top_bit(static_cast<uint64_t>(mag));
    const int64_t top_exp = int64_t(scale) + h;
    const int64_t min_ulp = 1 - fi.bias - fi.man_bits;
    int64_t ulp_exp = std::max<int64_t>(top_exp - fi.man_bits, min_ulp);

    const int64_t pos = ulp_exp - scale;
    uint64_t keep;
    bool guard = false, sticky = false;
    if (pos <= 0) {
        keep = static_cast<uint64_t>(mag) << (-pos);  // h - pos < 63 by range
    } else {
        keep = pos <= h ? static_cast<uint64_t>(mag >> pos) : 0;
        const int64_t g = pos - 1;
        guard = g <= h && ((mag >> g) & 1);
        sticky = g > 0 && (g >= 128 ? mag != 0
                                    : (mag & ((u128(1) << g) - 1)) != 0);
    }
    if (guard && !sticky) {
        if (exact_tie) {
            *exact_tie = true;
            return 0;
        }
    }
    if (guard && (sticky || (keep & 1))) keep += 1;

    if (keep == 0) return zero_bits(fmt, neg);
    if (keep >> (fi.man_bits + 1)) {
        keep >>= 1;
        ulp_exp += 1;
    }
    const uint64_t sign = neg ? (1ull << (fi.width - 1)) : 0;
    if (keep < (1ull << fi.man_bits)) return sign | keep;
    const int64_t efield = ulp_exp + fi.man_bits + fi.bias;
    const int64_t efield_max = (1ll << fi.exp_bits) - 1;
    if (fmt == Format::FP8E4M3) {
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

inline uint64_t round_term(const Term& t, Format fmt) {
    if (t.mag == 0) return zero_bits(fmt, t.neg);
    return round_u128(t.neg, t.mag, t.exp, fmt);
}

// Symbolic value while combining products and the accumulator operand.
struct Sym {
    enum class Cls : uint8_t { Fin, Inf, Nan } cls = Cls::Fin;
    Term term{};

    bool neg() const { return term.neg; }
    static Sym nan() { return {Cls::Nan, {}}; }
    static Sym inf(bool neg) { return {Cls::Inf, {0, 0, neg}}; }
    static Sym fin(const Term& t) { return {Cls::Fin, t}; }

    Sym negated() const {
        Sym s = *this;
        s.term.neg = !s.term.neg;
        return s;
    }
};

inline Sym sym_product(const Decoded& a, const Decoded& b) {
    if (a.is_nan() || b.is_nan()) return Sym::nan();
    const bool neg = a.neg != b.neg;
    if (a.is_inf() || b.is_inf()) {
        if (a.is_zero() || b.is_zero()) return Sym::nan();
        return Sym::inf(neg);
    }
    return Sym::fin(Term::product(a, b));
}

// Correctly rounded sum of symbolic addends, one rounding. zero_neg is the
// sign the caller determined for an exactly-zero total (IEEE signed-zero
// rules depend on the operation's nesting, so it cannot be derived here).
template <int Limbs>
Packed sym_sum(const Sym* s, int count, Format fmt, bool zero_neg) {
    bool pos_inf = false, neg_inf = false;
    for (int i = 0; i < count; ++i) {
        if (s[i].cls == Sym::Cls::Nan)
            return packed(format_info(fmt).qnan, fmt);
        if (s[i].cls == Sym::Cls::Inf) (s[i].neg() ? neg_inf : pos_inf) = true;
    }
    if (pos_inf && neg_inf) return packed(format_info(fmt).qnan, fmt);
    if (pos_inf || neg_inf)
        return packed(encode_special(fmt, Decoded::Cls::Inf, neg_inf), fmt);

    int32_t scale = 0;
    bool have = false;
    for (int i = 0; i < count; ++i) {
        const Term& t = s[i].term;
        if (!t.is_zero()) {
            scale = have ? std::min(scale, t.exp) : t.exp;
            have = true;
        }
    }
    FixedAcc<Limbs> acc(scale);
    for (int i = 0; i < count; ++i) acc.add(s[i].term);
    return packed(round_resolved(acc.resolve(), zero_neg, fmt), fmt);
}

inline bool is_zero_sym(const Sym& s) {
    return s.cls == Sym::Cls::Fin && s.term.is_zero();
}

// Sign of an exactly-zero x + y under RNE: negative only when both addends
// are negative zeros; cancellation of nonzeros gives +0.
inline bool zero_sign_add(const Sym& x, const Sym& y) {
    return is_zero_sym(x) && x.neg() && is_zero_sym(y) && y.neg();
}

// Rounds an already-correctly-rounded double to fmt. Returns false when the
// discarded fraction is an exact tie, where the pre-rounding is not provably
// innocuous and the caller must take the wide path.
inline bool try_round_double(double v, Format fmt, uint64_t* out) {
    const uint64_t dbits = std::bit_cast<uint64_t>(v);
    Decoded d = decode(Packed{dbits, Format::FP64});
    if (!d.is_finite()) return false;
    bool tie = false;
    uint64_t bits = round_u128(d.neg, d.mant, d.exp, fmt, &tie);
    if (tie) return false;
    *out = bits;
    return true;
}

}  // namespace detail

// --- conversions ---------------------------------------------------------

inline double to_double(Packed p) {
    if (p.fmt == Format::FP64) return std::bit_cast<double>(p.bits);
    if (p.fmt == Format::FP32)
        return std::bit_cast<float>(static_cast<uint32_t>(p.bits));
    Decoded d = decode(p);
    if (d.is_nan()) return std::numeric_limits<double>::quiet_NaN();
    if (d.is_inf())
        return d.neg ? -std::numeric_limits<double>::infinity()
                     : std::numeric_limits<double>::infinity();
    double v = std::ldexp(static_cast<double>(d.mant), d.exp);  // exact
    return d.neg ? -v : v;
}

inline float to_float(Packed p) { return static_cast<float>(to_double(p)); }

// Correctly rounded conversion between formats (exact when widening).
inline Packed cast(Packed x, Format to) {
    Decoded d = decode(x);
    const FormatInfo fi = format_info(to);
    if (d.is_nan()) return packed(fi.qnan, to);
    if (d.is_inf())
        return packed(detail::encode_special(to, Decoded::Cls::Inf, d.neg), to);
    return packed(detail::round_term(detail::Term::from(d), to), to);
}

inline Packed from_double(double v, Format fmt) {
    return cast(Packed{std::bit_cast<uint64_t>(v), Format::FP64}, fmt);
}

inline Packed fp_neg(Packed x) {
    const int w = format_info(x.fmt).width;
    return packed(x.bits ^ (1ull << (w - 1)), x.fmt);
}

inline Packed fp_abs(Packed x) {
    const int w = format_info(x.fmt).width;
    return packed(x.bits & ~(1ull << (w - 1)), x.fmt);
}

inline Packed fp_zero(Format fmt) { return packed(0, fmt); }
inline Packed fp_one(Format fmt) { return from_double(1.0, fmt); }

inline bool fp_is_nan(Packed x) { return decode(x).is_nan(); }

// Total order helper for pooling and maxima; NaN compares greater-than-none.
inline bool fp_less(Packed a, Packed b) { return to_double(a) < to_double(b); }

// --- arithmetic ----------------------------------------------------------

namespace detail {

template <int Limbs>
Packed add_impl(Packed a, Packed b) {
    Decoded da = decode(a), db = decode(b);
    const Format fmt = a.fmt;
    if (da.is_nan() || db.is_nan()) return packed(format_info(fmt).qnan, fmt);
    Sym s[2] = {da.is_inf() ? Sym::inf(da.neg) : Sym::fin(Term::from(da)),
                db.is_inf() ? Sym::inf(db.neg) : Sym::fin(Term::from(db))};
    return sym_sum<Limbs>(s, 2, fmt, zero_sign_add(s[0], s[1]));
}

template <int Limbs>
Packed fma_impl(Packed a, Packed b, Packed c) {
    Decoded da = decode(a), db = decode(b), dc = decode(c);
    const Format fmt = a.fmt;
    if (da.is_nan() || db.is_nan() || dc.is_nan())
        return packed(format_info(fmt).qnan, fmt);
    Sym s[2] = {sym_product(da, db),
                dc.is_inf() ? Sym::inf(dc.neg) : Sym::fin(Term::from(dc))};
    return sym_sum<Limbs>(s, 2, fmt, zero_sign_add(s[0], s[1]));
}

}  // namespace detail

inline Packed fp_add(Packed a, Packed b) {
    if (a.fmt != b.fmt) throw UnsupportedFormat("fp_add: mixed formats");
    switch (a.fmt) {
        case Format::FP32: {
            // native single addition is the correctly rounded FP32 result
            float r = to_float(a) + to_float(b);
            if (std::isnan(r)) return packed(format_info(a.fmt).qnan, a.fmt);
            return packed(std::bit_cast<uint32_t>(r), a.fmt);
        }
        case Format::FP64: {
            double r = to_double(a) + to_double(b);
            if (std::isnan(r)) return packed(format_info(a.fmt).qnan, a.fmt);
            return packed(std::bit_cast<uint64_t>(r), a.fmt);
        }
        case Format::FP16:
        case Format::FP8E4M3:
        case Format::FP8E5M2: {
            // the double sum is exact for these ranges; round once from it
            Decoded da = decode(a), db = decode(b);
            if (da.is_nan() || db.is_nan() || da.is_inf() || db.is_inf())
                return detail::add_impl<detail::kLimbs16>(a, b);
            double r = to_double(a) + to_double(b);
            return from_double(r, a.fmt);
        }
        case Format::BF16:
            return detail::add_impl<detail::kLimbs32>(a, b);
    }
    return detail::add_impl<detail::kLimbs64>(a, b);
}

inline Packed fp_sub(Packed a, Packed b) { return fp_add(a, fp_neg(b)); }

inline Packed fp_mul(Packed a, Packed b) {
    if (a.fmt != b.fmt) throw UnsupportedFormat("fp_mul: mixed formats");
    Decoded da = decode(a), db = decode(b);
    const Format fmt = a.fmt;
    if (da.is_nan() || db.is_nan()) return packed(format_info(fmt).qnan, fmt);
    if (da.is_inf() || db.is_inf()) {
        if (da.is_zero() || db.is_zero())
            return packed(format_info(fmt).qnan, fmt);
        return packed(
            detail::encode_special(fmt, Decoded::Cls::Inf, da.neg != db.neg),
            fmt);
    }
    return packed(detail::round_term(detail::Term::product(da, db), fmt), fmt);
}

inline Packed fp_fma(Packed a, Packed b, Packed c) {
    if (a.fmt != b.fmt || a.fmt != c.fmt)
        throw UnsupportedFormat("fp_fma: mixed formats");
    switch (a.fmt) {
        case Format::FP32: {
            float r = std::fmaf(to_float(a), to_float(b), to_float(c));
            if (std::isnan(r)) return packed(format_info(a.fmt).qnan, a.fmt);
            return packed(std::bit_cast<uint32_t>(r), a.fmt);
        }
        case Format::FP64: {
            double r = std::fma(to_double(a), to_double(b), to_double(c));
            if (std::isnan(r)) return packed(format_info(a.fmt).qnan, a.fmt);
            return packed(std::bit_cast<uint64_t>(r), a.fmt);
        }
        default: {
            double r = std::fma(to_double(a), to_double(b), to_double(c));
            uint64_t bits;
            if (std::isfinite(r) && detail::try_round_double(r, a.fmt, &bits))
                return packed(bits, a.fmt);
            if (a.fmt == Format::BF16)
                return detail::fma_impl<detail::kLimbs32>(a, b, c);
            return detail::fma_impl<detail::kLimbs16>(a, b, c);
        }
    }
}

inline Packed fp_div(Packed a, Packed b) {
    if (a.fmt != b.fmt) throw UnsupportedFormat("fp_div: mixed formats");
    const Format fmt = a.fmt;
    if (fmt == Format::FP32) {
        float r = to_float(a) / to_float(b);
        if (std::isnan(r)) return packed(format_info(fmt).qnan, fmt);
        return packed(std::bit_cast<uint32_t>(r), fmt);
    }
    if (fmt == Format::FP64) {
        double r = to_double(a) / to_double(b);
        if (std::isnan(r)) return packed(format_info(fmt).qnan, fmt);
        return packed(std::bit_cast<uint64_t>(r), fmt);
    }
    Decoded da = decode(a), db = decode(b);
    if (da.is_nan() || db.is_nan()) return packed(format_info(fmt).qnan, fmt);
    const bool neg = da.neg != db.neg;
    if (da.is_inf()) {
        if (db.is_inf()) return packed(format_info(fmt).qnan, fmt);
        return packed(detail::encode_special(fmt, Decoded::Cls::Inf, neg), fmt);
    }
    if (db.is_inf()) return packed(detail::zero_bits(fmt, neg), fmt);
    if (db.is_zero()) {
        if (da.is_zero()) return packed(format_info(fmt).qnan, fmt);
        return packed(detail::encode_special(fmt, Decoded::Cls::Inf, neg), fmt);
    }
    if (da.is_zero()) return packed(detail::zero_bits(fmt, neg), fmt);
    // integer long division with a sticky remainder bit
    const FormatInfo fi = format_info(fmt);
    const int shift_up =
        fi.man_bits + 4 + detail::top_bit(db.mant) - detail::top_bit(da.mant);
    const int sh = std::max(shift_up, 0);
    detail::u128 num = static_cast<detail::u128>(da.mant) << sh;
    detail::u128 q = num / db.mant;
    const bool rem = (num % db.mant) != 0;
    return packed(detail::round_u128(neg, (q << 1) | (rem ? 1 : 0),
                                     da.exp - db.exp - sh - 1, fmt),
                  fmt);
}

inline Packed fp_sqrt(Packed x) {
    const Format fmt = x.fmt;
    Decoded d = decode(x);
    if (d.is_nan() || (d.neg && !d.is_zero()))
        return packed(format_info(fmt).qnan, fmt);
    if (d.is_inf() || d.is_zero()) return x;
    // integer square root on a widened mantissa; result is never subnormal
    const FormatInfo fi = format_info(fmt);
    const int prec = fi.man_bits + 1;
    int e = d.exp;
    detail::u128 m = d.mant;
    int want = 2 * (prec + 2) - detail::top_bit(d.mant);
    if ((e - want) & 1) want += 1;  // keep the residual exponent even
    if (want > 0) {
        m <<= want;
        e -= want;
    }
    // integer sqrt: double seed corrected to the exact floor
    uint64_t s = static_cast<uint64_t>(std::sqrt(static_cast<double>(m)));
    while (static_cast<detail::u128>(s) * s > m) --s;
    while (static_cast<detail::u128>(s + 1) * (s + 1) <= m) ++s;
    const bool exact = static_cast<detail::u128>(s) * s == m;
    return packed(detail::round_u128(false, (detail::u128(s) << 1) | (exact ? 0 : 1),
                                     e / 2 - 1, fmt),
                  fmt);
}

// --- fused dual-output sum of dot products -------------------------------

struct SdotpResult {
    Packed sum;   // e + (a*b +/- c*d)
    Packed diff;  // e - (a*b +/- c*d)
};

namespace detail {

constexpr bool sdotp_pair_ok(Format in, Format acc) {
    return (in == Format::FP8E4M3 && acc == Format::FP16) ||
           (in == Format::FP8E5M2 && acc == Format::FP16) ||
           (in == Format::FP16 && acc == Format::FP32) ||
           (in == Format::FP16 && acc == Format::FP16) ||
           (in == Format::FP32 && acc == Format::FP32);
}

// Exact magnitude equality of two nonzero terms.
inline bool equal_mag(Term x, Term y) {
    auto normalize = [](u128& m, int32_t& e) {
        if (static_cast<uint64_t>(m) == 0) {
            m >>= 64;
            e += 64;
        }
        const int tz = __builtin_ctzll(static_cast<uint64_t>(m));
        m >>= tz;
        e += tz;
    };
    normalize(x.mag, x.exp);
    normalize(y.mag, y.exp);
    return x.mag == y.mag && x.exp == y.exp;
}

template <int Limbs>
SdotpResult sdotp_impl(const Decoded& da, const Decoded& db, const Decoded& dc,
                       const Decoded& dd, const Decoded& de, bool mod,
                       Format accf) {
    Sym p1 = sym_product(da, db);
    Sym p2 = sym_product(dc, dd);
    if (mod) p2 = p2.negated();
    Sym e = de.is_inf() ? Sym::inf(de.neg) : Sym::fin(Term::from(de));

    // Signed-zero semantics follow the nesting e +/- (p1 + p2): resolve the
    // inner sum's zero sign first, then the outer addition's.
    bool s_zero = false, s_neg = false;
    if (p1.cls == Sym::Cls::Fin && p2.cls == Sym::Cls::Fin) {
        if (p1.term.is_zero() && p2.term.is_zero()) {
            s_zero = true;
            s_neg = p1.neg() && p2.neg();
        } else if (!p1.term.is_zero() && !p2.term.is_zero() &&
                   p1.neg() != p2.neg() && equal_mag(p1.term, p2.term)) {
            s_zero = true;  // exact cancellation: +0
        }
    }
    const bool e_nzero = is_zero_sym(e) && e.neg();
    const bool sum_zero_neg = e_nzero && s_zero && s_neg;
    const bool diff_zero_neg = e_nzero && s_zero && !s_neg;

    Sym sum_terms[3] = {e, p1, p2};
    Sym diff_terms[3] = {e, p1.negated(), p2.negated()};
    return {sym_sum<Limbs>(sum_terms, 3, accf, sum_zero_neg),
            sym_sum<Limbs>(diff_terms, 3, accf, diff_zero_neg)};
}

}  // namespace detail

// Five-operand fused primitive: both outputs receive exactly one rounding in
// the accumulate format; the products and their sum are never rounded.
// mod inverts the sign of the c*d term.
inline SdotpResult do_sdotp(Packed a, Packed b, Packed c, Packed d, Packed e,
                            bool mod, Format acc_fmt) {
    const Format in = a.fmt;
    if (b.fmt != in || c.fmt != in || d.fmt != in)
        throw UnsupportedFormat("do_sdotp: inputs must share one format");
    if (e.fmt != acc_fmt || !detail::sdotp_pair_ok(in, acc_fmt))
        throw UnsupportedFormat("do_sdotp: unsupported format pair");

    Decoded da = decode(a), db = decode(b), dc = decode(c), dd = decode(d),
            de = decode(e);
    if (da.is_nan() || db.is_nan() || dc.is_nan() || dd.is_nan() ||
        de.is_nan()) {
        Packed n = packed(format_info(acc_fmt).qnan, acc_fmt);
        return {n, n};
    }
    if (in == Format::FP32)
        return detail::sdotp_impl<detail::kLimbs32>(da, db, dc, dd, de, mod,
                                                    acc_fmt);
    return detail::sdotp_impl<detail::kLimbs16>(da, db, dc, dd, de, mod,
                                                acc_fmt);
}

}  // namespace maestro
