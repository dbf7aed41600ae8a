#pragma once

#include <wpmec/config.hpp>
#include <wpmec/scheduler.hpp>

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace wpmec {

/// One device in one slot. State columns hold values after the slot.
struct TraceRecord {
    int t = 0;
    std::size_t device = 0;
    DeviceKind kind = DeviceKind::TypeI;
    double queue = 0.0;       // Q
    double ap_queue = 0.0;    // S
    double battery = 0.0;     // E
    double collect = 0.0;     // a
    double collectible = 0.0; // A
    double capacity = 0.0;    // c, bits the uplink could carry
    double delivered = 0.0;   // min(c, Q) at offload time
    double energy = 0.0;      // e, uplink Joules spent
    double mu = 0.0;
    double harvested = 0.0;
    double mu0 = 0.0;
    bool in_due = false;      // in M_t
    double believed = 0.0;    // Q-hat used by the scheduler (Q for real-time runs)
    Role role = Role::Silent;
    bool from_battery = false;
};

struct Trace {
    Algorithm algo = Algorithm::ErsRn;
    std::size_t devices = 0;
    std::vector<TraceRecord> records;  // slot-major, then device

    [[nodiscard]] int slots() const noexcept {
        return devices == 0 ? 0 : static_cast<int>(records.size() / devices);
    }
    [[nodiscard]] const TraceRecord& at(int t, std::size_t i) const {
        return records[static_cast<std::size_t>(t) * devices + i];
    }
};

/// ln(1 + a). Throws std::domain_error for a < 0.
double utility(double a);

/// (sum x)^2 / (N sum x^2); std::nullopt ("no traffic") when every entry is 0.
/// Throws std::invalid_argument for an empty vector or negative entries.
std::optional<double> jain_index(std::span<const double> x);

/// Arithmetic mean. Throws std::invalid_argument for an empty series.
double time_average(std::span<const double> series);
/// Mean over the last half of the series (the later ceil(n/2) values).
double steady_state_average(std::span<const double> series);

enum class Invariant {
    QueueBound,       // Q <= V + A_max
    ApQueueBound,     // S <= V + A_max + c_max
    BacklogGap,       // S - Q <= 2 c_max
    EnergyAvailable,  // e <= E + e^H
    PowerCap,         // e <= P_max mu T for battery-powered uplinks
    BatteryRange,     // 0 <= E <= theta
    TimeBudget,       // mu0 + sum mu <= 1
    Collection,       // 0 <= a <= A
    Staleness,        // 0 <= Q - Q-hat <= m A_max
    DataAvailable,    // delivered <= Q
};
inline constexpr std::size_t kInvariantCount = 10;

std::string_view to_string(Invariant inv) noexcept;

struct InvariantReport {
    struct Entry {
        long count = 0;
        int first_slot = -1;
    };
    std::array<Entry, kInvariantCount> entries{};

    [[nodiscard]] const Entry& operator[](Invariant inv) const {
        return entries[static_cast<std::size_t>(inv)];
    }
    [[nodiscard]] long total() const noexcept;
};

/// Checks every slot of a trace. The backlog bounds apply to queue-aware
/// algorithms, the staleness bound to feedback-driven ones.
InvariantReport verify_invariants(const Trace& trace, const NetworkConfig& cfg);

struct RunSummary {
    Algorithm algo = Algorithm::ErsRn;
    double control_v = 0.0;
    double eps_s = 0.0;
    int interval = 0;
    std::uint64_t seed = 0;
    bool no_traffic = true;
    double avg_delivered = 0.0;  // bits per slot, all devices
    double avg_admitted = 0.0;   // bits per slot, all devices
    double avg_utility = 0.0;    // sum_i mean_t ln(1 + a_i)
    std::optional<double> jain_all, jain_t1, jain_t2;
    double avg_queue = 0.0;      // device mean of the steady-state Q_i
    double avg_ap_queue = 0.0;   // device mean of the steady-state S_i
    InvariantReport invariants;
};

RunSummary summarize(const Trace& trace, const NetworkConfig& cfg, std::uint64_t seed);

}  // namespace wpmec
