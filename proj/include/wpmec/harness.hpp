#pragma once

#include <wpmec/baselines.hpp>
#include <wpmec/metrics.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wpmec {

/// A run stopped by a failed physical check; carries the slot index.
class RunAborted : public std::runtime_error {
public:
    RunAborted(int slot, const std::string& what)
        : std::runtime_error("slot " + std::to_string(slot) + ": " + what), slot_(slot) {}
    [[nodiscard]] int slot() const noexcept { return slot_; }

private:
    int slot_;
};

struct RunResult {
    Trace trace;
    RunSummary summary;
};

/// Simulates cfg.horizon slots from all-zero queues and batteries.
RunResult run(const NetworkConfig& cfg, Algorithm algo, std::uint64_t seed,
              const SchedulerOptions& opts = {});

/// Values swept per key; an empty list keeps the base configuration.
struct SweepGrid {
    std::vector<double> control_v;
    std::vector<double> eps_s;
    std::vector<int> interval;
    std::vector<Algorithm> algo;

    /// Adds "key=v1,v2,..." with key one of V, eps, m, algo.
    void add(std::string_view spec);
    [[nodiscard]] std::size_t points() const noexcept;
};

inline constexpr std::size_t kMaxSweepRuns = 10000;

class SweepTooLarge : public std::invalid_argument {
public:
    explicit SweepTooLarge(std::size_t runs)
        : std::invalid_argument("sweep of " + std::to_string(runs) + " runs exceeds " +
                                std::to_string(kMaxSweepRuns)),
          runs_(runs) {}
    [[nodiscard]] std::size_t runs() const noexcept { return runs_; }

private:
    std::size_t runs_;
};

/// One summary per (grid point, seed), sorted by algo, V, eps, m, seed.
/// Runs are spread over `threads` workers (0: hardware concurrency).
std::vector<RunSummary> sweep(const NetworkConfig& base, Algorithm algo, const SweepGrid& grid,
                              std::span<const std::uint64_t> seeds,
                              const SchedulerOptions& opts = {}, unsigned threads = 0);

/// Mean over seeds of one grid point.
struct SeedMean {
    Algorithm algo = Algorithm::ErsRn;
    double control_v = 0.0;
    double eps_s = 0.0;
    int interval = 0;
    std::size_t seeds = 0;
    double avg_delivered = 0.0;
    double sd_delivered = 0.0;
    double avg_admitted = 0.0;
    double avg_utility = 0.0;
    double jain_all = 0.0;
    double jain_t1 = 0.0;
    double jain_t2 = 0.0;
    double avg_queue = 0.0;
    double avg_ap_queue = 0.0;
    long violations = 0;
};

/// Groups consecutive rows of equal grid point; expects sweep() ordering.
std::vector<SeedMean> seed_means(std::span<const RunSummary> rows);

/// %.9g, with "no-traffic" for a missing Jain index.
std::string format_number(double x);

void write_summary_csv(std::ostream& os, std::span<const RunSummary> rows);
void write_seed_mean_csv(std::ostream& os, std::span<const SeedMean> rows);
void write_trace_csv(std::ostream& os, const Trace& trace);

}  // namespace wpmec
