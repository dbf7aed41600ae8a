#pragma once

#include <wpmec/scheduler.hpp>

namespace wpmec {

/// Outdated-feedback scheduler that ignores batteries: Type-II devices act
/// like Type-I devices, spending only the current harvest, and their
/// batteries stay empty.
StepOutcome step_hdo_on(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                        const SchedulerOptions& opts = {});

/// Outdated-feedback scheduler giving every scheduled device the same
/// uplink share; only mu0 and the Type-II energies are optimized.
StepOutcome step_eot_on(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                        const SchedulerOptions& opts = {});

/// Maximizes sum_i log(1 + c_i) over all devices, blind to queues.
StepOutcome step_pfn(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                     const SchedulerOptions& opts = {});

/// Maximizes sum_i c_i over all devices, blind to queues.
StepOutcome step_gan(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                     const SchedulerOptions& opts = {});

/// Dispatches to the step function of `algo`.
StepOutcome step(Algorithm algo, const SystemState& state, const SlotState& slot,
                 const NetworkConfig& cfg, const SchedulerOptions& opts = {});

}  // namespace wpmec
