#include <wpmec/baselines.hpp>

#include "step_common.hpp"

namespace wpmec {

StepOutcome step_hdo_on(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                        const SchedulerOptions& opts) {
    return detail::step_outdated(state, slot, cfg, opts, {.battery_aware = false});
}

StepOutcome step_eot_on(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                        const SchedulerOptions& opts) {
    return detail::step_outdated(state, slot, cfg, opts, {.equal_time = true});
}

namespace {

// Every device competes for airtime; batteries are spent freely within
// what they hold. Rates enter in bits: weight T*W.
StepOutcome step_blind(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                       const SchedulerOptions& opts, Utility utility) {
    const std::size_t n = cfg.size();
    detail::Plan plan(n);
    plan.believed = state.queue;

    const double bits = cfg.slot_s * cfg.bandwidth_hz;
    AllocationInstance inst;
    inst.utility = utility;
    for (std::size_t i = 0; i < n; ++i) {
        const DeviceParams& dev = cfg.devices[i];
        const double h = slot.gain[i];
        Link l;
        l.weight = utility == Utility::Weighted ? -bits : bits;
        if (dev.kind == DeviceKind::TypeII) {
            l.kind = LinkKind::Battery;
            l.gain = h / (cfg.noise_w * cfg.slot_s);
            l.power_cap = dev.p_max_w * cfg.slot_s;
            l.supply = EnergySupply{state.battery[i],
                                    dev.harvest_eff * cfg.ap_power_w * h * cfg.slot_s,
                                    dev.e_h_max_j};
        } else {
            l.kind = LinkKind::Harvest;
            l.gain = dev.harvest_eff * cfg.ap_power_w * h * h / cfg.noise_w;
        }
        inst.links.push_back(l);
    }
    const AllocationResult res = solve_joint(inst, opts.solver);

    plan.mu0 = res.point.mu0;
    double used = plan.mu0;
    for (std::size_t i = 0; i < n; ++i) {
        plan.mu[i] = res.point.mu[i];
        plan.energy[i] = res.point.energy[i];
        plan.from_battery[i] = cfg.devices[i].kind == DeviceKind::TypeII;
        plan.role[i] = Role::Data;
        used += plan.mu[i];
    }
    plan.mu0 += std::max(1.0 - used, 0.0);
    return detail::apply_plan(state, slot, cfg, plan);
}

}  // namespace

StepOutcome step_pfn(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                     const SchedulerOptions& opts) {
    return step_blind(state, slot, cfg, opts, Utility::LogRate);
}

StepOutcome step_gan(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                     const SchedulerOptions& opts) {
    return step_blind(state, slot, cfg, opts, Utility::Weighted);
}

StepOutcome step(Algorithm algo, const SystemState& state, const SlotState& slot,
                 const NetworkConfig& cfg, const SchedulerOptions& opts) {
    switch (algo) {
        case Algorithm::ErsRn: return step_ers_rn(state, slot, cfg, opts);
        case Algorithm::ErsOn: return step_ers_on(state, slot, cfg, opts);
        case Algorithm::HdoOn: return step_hdo_on(state, slot, cfg, opts);
        case Algorithm::EotOn: return step_eot_on(state, slot, cfg, opts);
        case Algorithm::Pfn: return step_pfn(state, slot, cfg, opts);
        case Algorithm::Gan: return step_gan(state, slot, cfg, opts);
    }
    throw std::logic_error("step: unknown algorithm");
}

}  // namespace wpmec
