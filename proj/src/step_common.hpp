#pragma once

// Pieces shared by the ERS schedulers and the baselines.

#include <wpmec/scheduler.hpp>

#include <vector>

namespace wpmec::detail {

/// What a scheduler wants to happen in one slot, before the physics.
struct Plan {
    explicit Plan(std::size_t n)
        : mu(n, 0.0), energy(n, 0.0), role(n, Role::Silent), from_battery(n, false),
          feedback_share(n, 0.0), due(n, false), believed(n, 0.0) {}

    double mu0 = 0.0;
    std::vector<double> mu;
    std::vector<double> energy;        // battery spend, used when from_battery
    std::vector<Role> role;
    std::vector<bool> from_battery;    // otherwise the device spends eta * harvest
    std::vector<double> feedback_share;  // part of mu carrying the L feedback bits
    std::vector<bool> due;
    std::vector<double> believed;
    bool track_feedback = false;
    bool battery_aware = true;         // Type-II batteries evolve; false freezes them
};

/// Applies a plan: harvest, uplink bits, collection, queue/battery updates
/// and, when tracked, feedback bookkeeping.
StepOutcome apply_plan(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                       const Plan& plan);

/// Variants of the outdated-feedback scheduler.
struct OutdatedVariant {
    bool battery_aware = true;  // false: Type-II devices behave as Type-I
    bool equal_time = false;    // all scheduled devices share the uplink equally
};

StepOutcome step_outdated(const SystemState& state, const SlotState& slot,
                          const NetworkConfig& cfg, const SchedulerOptions& opts,
                          OutdatedVariant variant);

std::vector<DeviceKind> kinds(const NetworkConfig& cfg);

}  // namespace wpmec::detail
