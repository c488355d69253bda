#pragma once

// Cycle-to-throughput aggregation and the platform battery estimator.
// No power model is fitted: energy figures are closed-form identities over
// caller-supplied power numbers.

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "maestro/errors.hpp"
#include "maestro/fft.hpp"
#include "maestro/gemm.hpp"

namespace maestro::perf {

struct OperatingPoint {
    double frequency_hz = 210.0e6;
    double voltage = 1.2;  // metadata only

    static OperatingPoint low() { return {90.0e6, 0.85}; }
    static OperatingPoint high() { return {210.0e6, 1.2}; }
};

struct TraceEntry {
    std::string name;
    std::string engine;  // "vtu", "vau", "fft"
    uint64_t cycles = 0;
    double flops = 0;
    double peak_flop_per_cycle = 0;
};

inline TraceEntry entry_from(const gemm::GemmCycleTrace& t,
                             const std::string& name,
                             const std::string& engine) {
    return {name, engine, t.total_cycles, t.flops(),
            2.0 * static_cast<double>(t.peak_fma_per_cycle)};
}

inline TraceEntry entry_from(const fft::FftCycleTrace& t,
                             const std::string& name) {
    // peak: two C32 butterflies (or one C64) at 10 real flops each
    return {name, "fft", t.total_cycles, static_cast<double>(t.flops), 20.0};
}

struct EngineStats {
    std::string name;
    std::string engine;
    uint64_t cycles = 0;
    double flops = 0;
    double flop_per_cycle = 0;
    std::optional<double> utilization;  // empty when undefined (no work)
    double gflops_at_f = 0;
};

struct SpeedupEntry {
    std::string name, baseline;
    double speedup = 0;  // baseline cycles / entry cycles
};

struct PerfReport {
    OperatingPoint op;
    std::vector<EngineStats> engines;
    std::vector<SpeedupEntry> speedups;
};

inline PerfReport report(const std::vector<TraceEntry>& traces,
                         const OperatingPoint& op) {
    if (traces.empty()) throw EmptyTraceSet("perf: no traces to aggregate");
    PerfReport r;
    r.op = op;
    for (const auto& t : traces) {
        EngineStats s;
        s.name = t.name;
        s.engine = t.engine;
        s.cycles = t.cycles;
        s.flops = t.flops;
        s.flop_per_cycle = t.cycles ? t.flops / static_cast<double>(t.cycles)
                                    : 0.0;
        if (t.cycles > 0 && t.flops > 0 && t.peak_flop_per_cycle > 0)
            s.utilization = s.flop_per_cycle / t.peak_flop_per_cycle;
        s.gflops_at_f = s.flop_per_cycle * op.frequency_hz * 1e-9;
        r.engines.push_back(std::move(s));
    }
    // speedups of every entry against same-named "*baseline*" entries
    for (const auto& base : traces) {
        if (base.name.find("baseline") == std::string::npos) continue;
        for (const auto& t : traces) {
            if (&t == &base || t.cycles == 0) continue;
            r.speedups.push_back(
                {t.name, base.name,
                 static_cast<double>(base.cycles) /
                     static_cast<double>(t.cycles)});
        }
    }
    return r;
}

inline void print_table(const PerfReport& r, std::ostream& os) {
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %-6s %12s %14s %10s %12s",
                  "trace", "engine", "cycles", "flop", "flop/cyc",
                  "gflops");
    os << line << "\n";
    for (const auto& e : r.engines) {
        std::snprintf(line, sizeof line,
                      "%-24s %-6s %12llu %14.0f %10.3f %12.3f",
                      e.name.c_str(), e.engine.c_str(),
                      static_cast<unsigned long long>(e.cycles), e.flops,
                      e.flop_per_cycle, e.gflops_at_f);
        os << line;
        if (e.utilization)
            os << "   util " << *e.utilization;
        else if (e.cycles)
            os << "   util undefined (no work)";
        os << "\n";
    }
    for (const auto& s : r.speedups)
        os << s.name << " speedup over " << s.baseline << ": " << s.speedup
           << "x\n";
}

// --- battery / energy identities -------------------------------------------

struct BatteryModel {
    double capacity_mah = 320.0;
    double voltage = 3.7;
    double avg_power_mw = 12.0;
    double efficiency = 0.95;  // derating calibrated to the platform figure
};

inline double battery_lifetime_hours(const BatteryModel& m) {
    if (m.avg_power_mw <= 0)
        throw NonPositivePower("battery_lifetime: power must be positive");
    if (m.efficiency <= 0 || m.efficiency > 1 || m.capacity_mah <= 0 ||
        m.voltage <= 0)
        throw std::invalid_argument("battery_lifetime: bad model");
    return m.capacity_mah * m.voltage * m.efficiency / m.avg_power_mw;
}

// mW x ms -> mJ
inline double energy_mj(double avg_power_mw, double window_ms) {
    return avg_power_mw * window_ms * 1e-3;
}

// Two readings of the per-frame energy window: the acquisition period at the
// frame rate, and the measured processing latency.
struct EnergyView {
    double frame_period_ms = 0;
    double energy_per_frame_period_mj = 0;
    double processing_latency_ms = 0;
    double energy_per_processing_window_mj = 0;
};

inline EnergyView energy_views(double avg_power_mw, double frame_rate_hz,
                               uint64_t cycles, double frequency_hz) {
    EnergyView v;
    v.frame_period_ms = 1000.0 / frame_rate_hz;
    v.energy_per_frame_period_mj = energy_mj(avg_power_mw, v.frame_period_ms);
    v.processing_latency_ms =
        1000.0 * static_cast<double>(cycles) / frequency_hz;
    v.energy_per_processing_window_mj =
        energy_mj(avg_power_mw, v.processing_latency_ms);
    return v;
}

}  // namespace maestro::perf
