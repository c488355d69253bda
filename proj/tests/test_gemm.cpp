#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "maestro/gemm.hpp"
#include "maestro/reference.hpp"
#include "maestro/thresholds.hpp"

using namespace maestro;
using gemm::GemmShape;

namespace {

std::mt19937_64 rng(0x6E44);

Matrix random_matrix(size_t r, size_t c, Format f, double scale = 1.0) {
    std::uniform_real_distribution<double> uni(-scale, scale);
    Matrix m(r, c, f);
    for (size_t i = 0; i < m.size(); ++i) m[i] = from_double(uni(rng), f);
    return m;
}

// The contract reference: same sequential FMA chain per element, written as
// the plainest possible triple loop.
Matrix chain_reference(const Matrix& x, const Matrix& w, const Matrix& y,
                       const GemmShape& s) {
    Matrix z(s.m, s.n, s.acc_format);
    for (size_t i = 0; i < s.m; ++i)
        for (size_t j = 0; j < s.n; ++j) {
            Packed acc = y.at(i, j);
            for (size_t l = 0; l < s.k; ++l)
                acc = fp_fma(cast(x.at(i, l), s.acc_format),
                             cast(w.at(l, j), s.acc_format), acc);
            z.at(i, j) = acc;
        }
    return z;
}

gemm::GemmResult run(const Matrix& x, const Matrix& w, const Matrix& y,
                     const GemmShape& s) {
    return gemm::vtu_gemm(x, w, y, s);
}

}  // namespace

TEST_CASE("buffer accounting reproduces the capacity table exactly") {
    auto orig = gemm::buffer_accounting(gemm::BufferVariant::Original);
    CHECK(orig.x_bytes == 576);
    CHECK(orig.y_bytes == 384);
    CHECK(orig.w_bytes == 128);
    CHECK(orig.total_bytes == 1088);

    auto red = gemm::buffer_accounting(gemm::BufferVariant::Reduced);
    CHECK(red.x_bytes == 288);
    CHECK(red.y_bytes == 384);
    CHECK(red.w_bytes == 128);
    CHECK(red.total_bytes == 800);
    CHECK(red.x_reduction_pct == -50.0);
    // -26.5% at one decimal
    CHECK(std::abs(red.total_reduction_pct - (-26.5)) < 0.05);
    // the closed form: (1+2) slots * 48 CEs * 16 bits
    CHECK((red.x_sync_slots + red.x_queue_slots) * 48 * 16 / 8 == 288);
}

TEST_CASE("identity X passes W through bit-exactly") {
    GemmShape s{12, 4, 12, Format::FP16, Format::FP16};
    Matrix x = Matrix::identity(12, Format::FP16);
    Matrix w = random_matrix(12, 4, Format::FP16);
    Matrix y(12, 4, Format::FP16);
    auto res = run(x, w, y, s);
    CHECK(res.z.bits_equal(w));
}

TEST_CASE("1x1x1 gemm is a single fma") {
    GemmShape s{1, 1, 1, Format::FP16, Format::FP16};
    Matrix x = random_matrix(1, 1, Format::FP16);
    Matrix w = random_matrix(1, 1, Format::FP16);
    Matrix y = random_matrix(1, 1, Format::FP16);
    auto res = run(x, w, y, s);
    CHECK(res.z[0].bits == fp_fma(x[0], w[0], y[0]).bits);
    CHECK(res.trace.fma_issued == 1);
}

TEST_CASE("tensor path equals the sequential-chain reference bit-exactly") {
    for (auto [inf, accf] : {std::pair{Format::FP16, Format::FP16},
                             std::pair{Format::FP16, Format::FP32},
                             std::pair{Format::FP8E4M3, Format::FP16},
                             std::pair{Format::FP8E5M2, Format::FP16}}) {
        for (int trial = 0; trial < 40; ++trial) {
            GemmShape s{1 + rng() % 16, 1 + rng() % 16, 1 + rng() % 16, inf,
                        accf};
            Matrix x = random_matrix(s.m, s.k, inf);
            Matrix w = random_matrix(s.k, s.n, inf);
            Matrix y = random_matrix(s.m, s.n, accf);
            auto res = run(x, w, y, s);
            REQUIRE(res.z.bits_equal(chain_reference(x, w, y, s)));
            // the vector path computes the identical chain
            auto vau = gemm::vau_gemm(x, w, y, s);
            REQUIRE(vau.z.bits_equal(res.z));
        }
    }
}

TEST_CASE("gemm stays within the FMA-chain error bound of the reference") {
    for (Format accf : {Format::FP16, Format::FP32}) {
        double worst = 0;
        for (int trial = 0; trial < 40; ++trial) {
            GemmShape s{1 + rng() % 64, 1 + rng() % 64, 1 + rng() % 64,
                        Format::FP16, accf};
            Matrix x = random_matrix(s.m, s.k, Format::FP16);
            Matrix w = random_matrix(s.k, s.n, Format::FP16);
            Matrix y = random_matrix(s.m, s.n, accf);
            auto res = run(x, w, y, s);
            worst = std::max(
                worst, ref::gemm_chain_bound_ratio(
                           x.to_doubles(), w.to_doubles(), y.to_doubles(),
                           res.z.to_doubles(), s.m, s.k, s.n, accf));
        }
        INFO("acc " << format_name(accf) << " worst bound ratio " << worst);
        CHECK(worst < thresholds::kGemmChainSlack);
    }
}

TEST_CASE("utilization calibration points") {
    // near-peak workload
    GemmShape big{96, 64, 64, Format::FP16, Format::FP16};
    auto big_t = gemm::vtu_cycle_model(big);
    INFO("96x64x64 cycles " << big_t.total_cycles << " util "
                            << big_t.utilization());
    CHECK(std::abs(big_t.utilization() - 0.98) <= 0.02);
    // actual FMA/cycle comes out at ~47 of the 48 peak
    CHECK(static_cast<double>(big_t.fma_issued) / big_t.total_cycles ==
          Catch::Approx(47.0).margin(1.0));

    // single-tile workload exposes fill and drain
    GemmShape small{12, 16, 16, Format::FP16, Format::FP16};
    auto small_t = gemm::vtu_cycle_model(small);
    INFO("12x16x16 cycles " << small_t.total_cycles << " util "
                            << small_t.utilization() << " compute-only "
                            << small_t.utilization_compute_only());
    CHECK(std::abs(small_t.utilization() - 0.50) <= 0.05);

    // vector-unit baseline: ~3x slower at the large shape
    auto vau_t = gemm::vau_cycle_model(big);
    const double speedup = static_cast<double>(vau_t.total_cycles) /
                           static_cast<double>(big_t.total_cycles);
    INFO("vau cycles " << vau_t.total_cycles << " speedup " << speedup);
    CHECK(speedup > 3.0 * 0.8);
    CHECK(speedup < 3.0 * 1.2);
}

TEST_CASE("utilization is monotone in m at fixed n, k") {
    double prev = 0.0;
    for (size_t m : {12, 24, 36, 48, 96, 192}) {
        GemmShape s{m, 64, 64, Format::FP16, Format::FP16};
        const double u = gemm::vtu_cycle_model(s).utilization();
        CHECK(u >= prev);
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
        prev = u;
    }
}

TEST_CASE("trace bookkeeping is self-consistent") {
    GemmShape s{30, 50, 70, Format::FP16, Format::FP32};
    auto t = gemm::vtu_cycle_model(s);
    CHECK(t.fma_issued == 30u * 50 * 70);
    CHECK(t.utilization() > 0.0);
    CHECK(t.utilization() <= 1.0);
    CHECK(t.flops() == 2.0 * t.fma_issued);
    CHECK(t.port_conflict_stalls == 0);
    CHECK(t.total_cycles >= t.fma_issued / 48);
}

TEST_CASE("gemm rejects bad shapes and formats") {
    Matrix x(2, 3, Format::FP16), w(3, 4, Format::FP16), y(2, 4, Format::FP16);
    GemmShape s{2, 4, 3, Format::FP16, Format::FP16};
    CHECK_NOTHROW(gemm::vtu_gemm(x, w, y, s));
    s.k = 5;
    CHECK_THROWS_AS(gemm::vtu_gemm(x, w, y, s), ShapeMismatch);
    s.k = 3;
    s.in_format = Format::FP32;
    s.acc_format = Format::FP32;
    CHECK_THROWS_AS(gemm::vtu_gemm(x, w, y, s), UnsupportedFormat);
    GemmShape bad{0, 1, 1, Format::FP16, Format::FP16};
    CHECK_THROWS_AS(
        gemm::vtu_gemm(Matrix(0, 1, Format::FP16), Matrix(1, 1, Format::FP16),
                       Matrix(0, 1, Format::FP16), bad),
        ShapeMismatch);
}

TEST_CASE("gemm bound-ratio survey", "[.calibrate]") {
    for (auto [accf, label] : {std::pair{Format::FP16, "fp16/fp16"},
                               std::pair{Format::FP32, "fp16/fp32"}}) {
        double worst = 0;
        for (int trial = 0; trial < 2000; ++trial) {
            GemmShape s{1 + rng() % 64, 1 + rng() % 64, 1 + rng() % 64,
                        Format::FP16, accf};
            Matrix x = random_matrix(s.m, s.k, Format::FP16);
            Matrix w = random_matrix(s.k, s.n, Format::FP16);
            Matrix y = random_matrix(s.m, s.n, accf);
            auto res = run(x, w, y, s);
            worst = std::max(
                worst, ref::gemm_chain_bound_ratio(
                           x.to_doubles(), w.to_doubles(), y.to_doubles(),
                           res.z.to_doubles(), s.m, s.k, s.n, accf));
        }
        WARN("gemm " << label << " worst chain-bound ratio " << worst);
    }
}
