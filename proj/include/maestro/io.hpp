#pragma once

// External file formats.
//
// Sample buffers (no header, little-endian):
//   C32: 4 bytes/sample, uint16 re | uint16 im
//   C64: 8 bytes/sample, uint32 re | uint32 im
// Matrices ("MAEM"): magic, u16 version, u8 format tag, u8 pad,
//   u32 rows, u32 cols, payload row-major at the format's width.
// CNN weights ("MAEW"): magic, u16 version, u16 n_classes, u16 n_blocks,
//   u16 pad, per block {u16 in_ch, u16 out_ch, u16 pool, u16 pad}; payload:
//   per block FP16 weights ((in_ch*9) x out_ch row-major) then FP32 bias;
//   FP16 fc weights (128x128), FP32 fc bias, FP16 head (128 x n_classes),
//   FP32 head bias.
// CSV variants carry decoded decimal values for debugging.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "maestro/cnn.hpp"
#include "maestro/errors.hpp"
#include "maestro/fft.hpp"
#include "maestro/matrix.hpp"
#include "maestro/vrf.hpp"

namespace maestro::io {

namespace detail {

inline void put_u16(std::string& s, uint16_t v) {
    s.push_back(static_cast<char>(v & 0xFF));
    s.push_back(static_cast<char>(v >> 8));
}
inline void put_u32(std::string& s, uint32_t v) {
    put_u16(s, v & 0xFFFF);
    put_u16(s, v >> 16);
}
inline void put_u64(std::string& s, uint64_t v) {
    put_u32(s, static_cast<uint32_t>(v));
    put_u32(s, static_cast<uint32_t>(v >> 32));
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;
    uint8_t u8() {
        if (pos >= buf.size()) throw IoError("truncated file");
        return static_cast<uint8_t>(buf[pos++]);
    }
    uint16_t u16() { return u8() | (uint16_t(u8()) << 8); }
    uint32_t u32() { return u16() | (uint32_t(u16()) << 16); }
    uint64_t u64() { return u32() | (uint64_t(u32()) << 32); }
    void expect(const char* magic) {
        for (const char* p = magic; *p; ++p)
            if (u8() != static_cast<uint8_t>(*p))
                throw IoError("bad magic, expected " + std::string(magic));
    }
};

inline void put_bits(std::string& s, uint64_t bits, int width) {
    for (int b = 0; b < width; b += 8)
        s.push_back(static_cast<char>((bits >> b) & 0xFF));
}

inline uint64_t get_bits(Reader& r, int width) {
    uint64_t v = 0;
    for (int b = 0; b < width; b += 8) v |= uint64_t(r.u8()) << b;
    return v;
}

}  // namespace detail

inline void write_file(const std::filesystem::path& path,
                       const std::string& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("short write: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// --- sample buffers ----------------------------------------------------------

inline std::string encode_samples(const std::vector<fft::Complex>& v,
                                  fft::Width w) {
    const int bits = w == fft::Width::C32 ? 16 : 32;
    std::string s;
    s.reserve(v.size() * bits / 4);
    for (const auto& c : v) {
        detail::put_bits(s, c.re.bits, bits);
        detail::put_bits(s, c.im.bits, bits);
    }
    return s;
}

inline std::vector<fft::Complex> decode_samples(const std::string& bytes,
                                                fft::Width w) {
    const int bits = w == fft::Width::C32 ? 16 : 32;
    const size_t stride = static_cast<size_t>(bits) / 4;
    if (bytes.size() % stride)
        throw IoError("sample buffer size not a multiple of the sample size");
    const Format f = fft::part_format(w);
    detail::Reader r{bytes};
    std::vector<fft::Complex> v(bytes.size() / stride);
    for (auto& c : v) {
        c.re = packed(detail::get_bits(r, bits), f);
        c.im = packed(detail::get_bits(r, bits), f);
    }
    return v;
}

inline std::string samples_csv(const std::vector<fft::Complex>& v) {
    std::string s = "index,re,im\n";
    char line[96];
    for (size_t i = 0; i < v.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu,%.9g,%.9g\n", i,
                      to_double(v[i].re), to_double(v[i].im));
        s += line;
    }
    return s;
}

// --- matrices ------------------------------------------------------------------

inline std::string encode_matrix(const Matrix& m) {
    std::string s = "MAEM";
    detail::put_u16(s, 1);
    s.push_back(static_cast<char>(m.fmt()));
    s.push_back(0);
    detail::put_u32(s, static_cast<uint32_t>(m.rows()));
    detail::put_u32(s, static_cast<uint32_t>(m.cols()));
    const int w = format_info(m.fmt()).width;
    for (size_t i = 0; i < m.size(); ++i) detail::put_bits(s, m[i].bits, w);
    return s;
}

inline Matrix decode_matrix(const std::string& bytes) {
    detail::Reader r{bytes};
    r.expect("MAEM");
    if (r.u16() != 1) throw IoError("matrix: unknown version");
    const Format f = static_cast<Format>(r.u8());
    r.u8();
    const uint32_t rows = r.u32(), cols = r.u32();
    Matrix m(rows, cols, f);
    const int w = format_info(f).width;
    for (size_t i = 0; i < m.size(); ++i)
        m[i] = packed(detail::get_bits(r, w), f);
    return m;
}

inline std::string matrix_csv(const Matrix& m) {
    std::string s;
    char cell[48];
    for (size_t r = 0; r < m.rows(); ++r) {
        for (size_t c = 0; c < m.cols(); ++c) {
            std::snprintf(cell, sizeof cell, "%.9g%c", to_double(m.at(r, c)),
                          c + 1 == m.cols() ? '\n' : ',');
            s += cell;
        }
    }
    return s;
}

// --- CNN weights ----------------------------------------------------------------

inline std::string encode_model(const cnn::CnnModel& m) {
    m.validate();
    std::string s = "MAEW";
    detail::put_u16(s, 1);
    detail::put_u16(s, static_cast<uint16_t>(m.n_classes));
    detail::put_u16(s, static_cast<uint16_t>(m.blocks.size()));
    detail::put_u16(s, 0);
    for (const auto& b : m.blocks) {
        detail::put_u16(s, static_cast<uint16_t>(b.in_ch));
        detail::put_u16(s, static_cast<uint16_t>(b.out_ch));
        detail::put_u16(s, static_cast<uint16_t>(b.pool));
        detail::put_u16(s, 0);
    }
    auto put_fp16 = [&](const Matrix& w) {
        for (size_t i = 0; i < w.size(); ++i)
            detail::put_bits(s, w[i].bits, 16);
    };
    auto put_fp32 = [&](const std::vector<Packed>& v) {
        for (const auto& p : v) detail::put_bits(s, p.bits, 32);
    };
    for (const auto& b : m.blocks) {
        put_fp16(b.weights);
        put_fp32(b.bias);
    }
    put_fp16(m.fc_weights);
    put_fp32(m.fc_bias);
    put_fp16(m.head_weights);
    put_fp32(m.head_bias);
    return s;
}

inline cnn::CnnModel decode_model(const std::string& bytes) {
    detail::Reader r{bytes};
    r.expect("MAEW");
    if (r.u16() != 1) throw IoError("model: unknown version");
    cnn::CnnModel m;
    m.n_classes = r.u16();
    const uint16_t n_blocks = r.u16();
    r.u16();
    if (n_blocks != 3) throw IoError("model: expected three conv blocks");
    m.blocks.resize(3);
    for (auto& b : m.blocks) {
        b.in_ch = r.u16();
        b.out_ch = r.u16();
        b.pool = r.u16();
        r.u16();
    }
    auto get_fp16 = [&](size_t rows, size_t cols) {
        Matrix w(rows, cols, Format::FP16);
        for (size_t i = 0; i < w.size(); ++i)
            w[i] = packed(detail::get_bits(r, 16), Format::FP16);
        return w;
    };
    auto get_fp32 = [&](size_t n) {
        std::vector<Packed> v(n);
        for (auto& p : v) p = packed(detail::get_bits(r, 32), Format::FP32);
        return v;
    };
    for (auto& b : m.blocks) {
        b.weights = get_fp16(b.in_ch * 9, b.out_ch);
        b.bias = get_fp32(b.out_ch);
    }
    m.fc_weights = get_fp16(128, 128);
    m.fc_bias = get_fp32(128);
    m.head_weights = get_fp16(128, m.n_classes);
    m.head_bias = get_fp32(m.n_classes);
    m.validate();
    return m;
}

// --- register-image hex dump -----------------------------------------------------

inline std::string image_hex(const vrf::RegisterImage& img) {
    std::string s;
    char word[8];
    for (unsigned reg = 0; reg < vrf::VrfLayout::registers; ++reg) {
        std::snprintf(word, sizeof word, "v%02u ", reg);
        s += word;
        // 512 bits as 32 16-bit lanes, highest lane first
        for (int lane = 31; lane >= 0; --lane) {
            std::snprintf(word, sizeof word, "%04x", img.lanes[reg][lane]);
            s += word;
        }
        s += '\n';
    }
    return s;
}

}  // namespace maestro::io
