#include "step_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace wpmec {

std::string_view to_string(Algorithm algo) noexcept {
    switch (algo) {
        case Algorithm::ErsRn: return "ers-rn";
        case Algorithm::ErsOn: return "ers-on";
        case Algorithm::HdoOn: return "hdo-on";
        case Algorithm::EotOn: return "eot-on";
        case Algorithm::Pfn: return "pfn";
        case Algorithm::Gan: return "gan";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view name) {
    for (auto a : {Algorithm::ErsRn, Algorithm::ErsOn, Algorithm::HdoOn, Algorithm::EotOn,
                   Algorithm::Pfn, Algorithm::Gan}) {
        if (name == to_string(a)) {
            return a;
        }
    }
    throw ConfigError("algo", "unknown algorithm '" + std::string(name) + "'");
}

bool uses_feedback(Algorithm algo) noexcept {
    return algo == Algorithm::ErsOn || algo == Algorithm::HdoOn || algo == Algorithm::EotOn;
}

bool queue_aware(Algorithm algo) noexcept {
    return algo != Algorithm::Pfn && algo != Algorithm::Gan;
}

double compute_theta(double control_v, double a_max_bits, double c_max_bits, double e_min_j,
                     double p_max_w, double slot_s) {
    if (!(e_min_j > 0.0)) {
        throw ConfigError("e_min", "must be > 0");
    }
    return (control_v + a_max_bits) * c_max_bits / e_min_j + p_max_w * slot_s;
}

std::vector<double> battery_capacity(const NetworkConfig& cfg) {
    std::vector<double> theta(cfg.size(), 0.0);
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const auto& d = cfg.devices[i];
        if (d.kind == DeviceKind::TypeII) {
            theta[i] = compute_theta(cfg.control_v, d.a_max_bits, d.c_max_bits, d.e_min_j,
                                     d.p_max_w, cfg.slot_s);
        }
    }
    return theta;
}

std::vector<std::size_t> due_set(const FeedbackState& fb, int interval) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fb.staleness.size(); ++i) {
        if (fb.staleness[i] >= interval) {
            out.push_back(i);
        }
    }
    return out;
}

FeedbackState feedback_update(const FeedbackState& fb, const std::vector<bool>& transmitted,
                              std::span<const double> reported) {
    FeedbackState out = fb;
    for (std::size_t i = 0; i < out.staleness.size(); ++i) {
        if (transmitted[i]) {
            out.reported[i] = reported[i];
            out.staleness[i] = 0;
        } else {
            ++out.staleness[i];
        }
    }
    return out;
}

double feedback_energy(double bits, double eps, double gain, const NetworkConfig& cfg) {
    const double beta = gain / (cfg.noise_w * cfg.slot_s);
    const double l = bits / (eps * cfg.slot_s * cfg.bandwidth_hz);
    return eps / beta * std::expm1(l * std::numbers::ln2);
}

namespace detail {

std::vector<DeviceKind> kinds(const NetworkConfig& cfg) {
    std::vector<DeviceKind> out;
    out.reserve(cfg.size());
    for (const auto& d : cfg.devices) {
        out.push_back(d.kind);
    }
    return out;
}

StepOutcome apply_plan(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                       const Plan& plan) {
    const std::size_t n = cfg.size();
    const std::vector<double> theta = battery_capacity(cfg);
    StepOutcome out{SlotDecision(n), state, plan.due, plan.believed, plan.from_battery};
    SlotDecision& d = out.decision;
    d.mu0 = plan.mu0;

    std::vector<bool> transmitted(n, false);
    std::vector<double> reported(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const DeviceParams& dev = cfg.devices[i];
        const double h = slot.gain[i];
        const double q = state.queue[i];
        d.harvested[i] = harvested_energy(dev.harvest_eff, cfg.ap_power_w, h, plan.mu0,
                                          cfg.slot_s, dev.e_h_max_j);
        d.collect[i] = optimal_collection(q, slot.collectible[i], cfg.control_v);
        d.role[i] = plan.mu[i] > 0.0 ? plan.role[i] : Role::Silent;

        double spend = 0.0;
        if (d.role[i] != Role::Silent) {
            d.mu[i] = plan.mu[i];
            double power = 0.0;
            if (plan.from_battery[i]) {
                spend = plan.energy[i];
                power = spend / (plan.mu[i] * cfg.slot_s);
            } else {
                spend = dev.eta * d.harvested[i];
                power = type1_power(d.harvested[i], plan.mu[i], cfg.slot_s, dev.eta);
            }
            d.energy[i] = spend;
            const double fb = plan.feedback_share[i];
            if (d.role[i] == Role::Data) {
                d.capacity[i] = offload_bits(std::max(plan.mu[i] - fb, 0.0), cfg.slot_s,
                                             cfg.bandwidth_hz, power, h, cfg.noise_w,
                                             dev.c_max_bits);
            }
            // Any transmission carries the device's backlog report.
            transmitted[i] = fb > 0.0;
        }
        d.delivered[i] = std::min(d.capacity[i], q);

        out.next.queue[i] = update_device_queue(q, d.capacity[i], d.collect[i]);
        // Collection is decided locally at the start of the slot, so the
        // report can carry the backlog the device will enter the next slot with.
        reported[i] = out.next.queue[i];
        out.next.ap_queue[i] =
            update_ap_queue(state.ap_queue[i], slot.processing[i], d.capacity[i], q);
        if (dev.kind == DeviceKind::TypeII && plan.battery_aware) {
            out.next.battery[i] = update_battery(state.battery[i], d.harvested[i],
                                                 plan.from_battery[i] ? spend : 0.0, theta[i]);
        }
    }
    if (plan.track_feedback) {
        out.next.feedback = feedback_update(state.feedback, transmitted, reported);
    }
    return out;
}

namespace {

/// Weights and gains of one device in the per-slot program.
Link make_link(const NetworkConfig& cfg, const SystemState& state, const SlotState& slot,
               std::size_t i, double believed, double theta, bool battery, bool enforce) {
    const DeviceParams& dev = cfg.devices[i];
    const double h = slot.gain[i];
    Link l;
    l.weight = (state.ap_queue[i] - believed) * cfg.slot_s * cfg.bandwidth_hz;
    if (battery) {
        l.kind = LinkKind::Battery;
        l.gain = h / (cfg.noise_w * cfg.slot_s);
        l.energy_price = theta - state.battery[i];
        l.power_cap = dev.p_max_w * cfg.slot_s;
        if (enforce) {
            l.supply = EnergySupply{state.battery[i],
                                    dev.harvest_eff * cfg.ap_power_w * h * cfg.slot_s,
                                    dev.e_h_max_j};
        }
    } else {
        l.kind = LinkKind::Harvest;
        l.gain = dev.harvest_eff * cfg.ap_power_w * h * h / cfg.noise_w;
    }
    return l;
}

/// T * P0 * sum over battery-aware Type-II devices of (E - theta) * xi * h.
double wpt_coefficient(const NetworkConfig& cfg, const SystemState& state, const SlotState& slot,
                       const std::vector<double>& theta) {
    double sum = 0.0;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        if (cfg.devices[i].kind == DeviceKind::TypeII) {
            sum += (state.battery[i] - theta[i]) * cfg.devices[i].harvest_eff * slot.gain[i];
        }
    }
    return cfg.slot_s * cfg.ap_power_w * sum;
}

/// Airtime the allocation left unused goes to power transfer when that
/// cannot raise the objective.
void fill_with_wpt(const AllocationInstance& inst, Plan& plan, double budget_used) {
    if (inst.wpt_weight > 0.0) {
        return;
    }
    plan.mu0 += std::max(1.0 - budget_used, 0.0);
}

double used_airtime(const Plan& plan) {
    return plan.mu0 + std::accumulate(plan.mu.begin(), plan.mu.end(), 0.0);
}

}  // namespace

StepOutcome step_outdated(const SystemState& state, const SlotState& slot,
                          const NetworkConfig& cfg, const SchedulerOptions& opts,
                          OutdatedVariant variant) {
    const std::size_t n = cfg.size();
    const std::vector<double> theta = battery_capacity(cfg);
    const FeedbackState& fb = state.feedback;
    Plan plan(n);
    plan.track_feedback = true;
    plan.battery_aware = variant.battery_aware;
    plan.believed = fb.reported;

    // Compulsory feedback, stalest first, while the slot can hold it.
    std::vector<std::size_t> due = due_set(fb, cfg.compulsory_interval);
    std::stable_sort(due.begin(), due.end(), [&](std::size_t a, std::size_t b) {
        return fb.staleness[a] > fb.staleness[b];
    });
    double reserved = 0.0;
    std::vector<std::size_t> admitted;
    for (std::size_t i : due) {
        plan.due[i] = true;
        const double eps = cfg.devices[i].feedback_eps;
        if (reserved + eps < 1.0) {
            reserved += eps;
            admitted.push_back(i);
        }
    }
    const double budget = 1.0 - reserved;

    // Devices the AP believes worth scheduling.
    const std::vector<DeviceKind> kind = kinds(cfg);
    const Partition part = prune(fb.reported, state.ap_queue, kind);
    std::vector<std::size_t> cand;
    for (const auto* group : {&part.type1, &part.type2}) {
        for (std::size_t i : *group) {
            if (!plan.due[i]) {
                cand.push_back(i);
            }
        }
    }
    std::sort(cand.begin(), cand.end());
    auto floors_needed = [&] {
        double sum = 0.0;
        double mx = 0.0;
        for (std::size_t i : cand) {
            sum += cfg.devices[i].feedback_eps;
            mx = std::max(mx, cfg.devices[i].feedback_eps);
        }
        return variant.equal_time ? mx * static_cast<double>(cand.size()) : sum;
    };
    while (!cand.empty() && floors_needed() >= budget) {
        // Drop the device with the least to gain.
        auto worst = std::min_element(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
            return fb.reported[a] - state.ap_queue[a] < fb.reported[b] - state.ap_queue[b];
        });
        cand.erase(worst);
    }

    AllocationInstance inst;
    inst.budget = budget;
    inst.equal_time = variant.equal_time;
    inst.wpt_weight = variant.battery_aware ? wpt_coefficient(cfg, state, slot, theta) : 0.0;
    for (std::size_t i : cand) {
        const bool battery = variant.battery_aware && kind[i] == DeviceKind::TypeII;
        Link l = make_link(cfg, state, slot, i, fb.reported[i], theta[i], battery,
                           opts.enforce_energy_availability);
        l.floor = cfg.devices[i].feedback_eps;
        inst.links.push_back(l);
    }
    const AllocationResult res = solve_joint(inst, opts.solver);

    plan.mu0 = res.point.mu0;
    for (std::size_t j = 0; j < cand.size(); ++j) {
        const std::size_t i = cand[j];
        plan.mu[i] = res.point.mu[j];
        plan.energy[i] = res.point.energy[j];
        plan.from_battery[i] = inst.links[j].kind == LinkKind::Battery;
        plan.role[i] = Role::Data;
        plan.feedback_share[i] = cfg.devices[i].feedback_eps;
    }
    for (std::size_t i : admitted) {
        plan.mu[i] = cfg.devices[i].feedback_eps;
        plan.role[i] = Role::Feedback;
        plan.feedback_share[i] = plan.mu[i];
    }
    fill_with_wpt(inst, plan, used_airtime(plan));

    // Battery-powered feedback needs affordable energy within the power cap.
    for (std::size_t i : admitted) {
        const DeviceParams& dev = cfg.devices[i];
        if (!(variant.battery_aware && kind[i] == DeviceKind::TypeII)) {
            continue;
        }
        const double e = feedback_energy(cfg.feedback_bits, dev.feedback_eps, slot.gain[i], cfg);
        const double harvest = harvested_energy(dev.harvest_eff, cfg.ap_power_w, slot.gain[i],
                                                plan.mu0, cfg.slot_s, dev.e_h_max_j);
        if (e <= dev.p_max_w * dev.feedback_eps * cfg.slot_s &&
            e <= state.battery[i] + harvest) {
            plan.energy[i] = e;
            plan.from_battery[i] = true;
        } else {
            plan.mu[i] = 0.0;
            plan.role[i] = Role::Silent;
            plan.feedback_share[i] = 0.0;
        }
    }
    return apply_plan(state, slot, cfg, plan);
}

}  // namespace detail

StepOutcome step_ers_rn(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                        const SchedulerOptions& opts) {
    using namespace detail;
    const std::size_t n = cfg.size();
    const std::vector<double> theta = battery_capacity(cfg);
    const std::vector<DeviceKind> kind = kinds(cfg);
    Plan plan(n);
    plan.believed = state.queue;

    const Partition part = prune(state.queue, state.ap_queue, kind);
    std::vector<std::size_t> cand(part.type1);
    cand.insert(cand.end(), part.type2.begin(), part.type2.end());
    std::sort(cand.begin(), cand.end());

    AllocationInstance inst;
    inst.wpt_weight = wpt_coefficient(cfg, state, slot, theta);
    for (std::size_t i : cand) {
        inst.links.push_back(make_link(cfg, state, slot, i, state.queue[i], theta[i],
                                       kind[i] == DeviceKind::TypeII,
                                       opts.enforce_energy_availability));
    }
    const AllocationResult res = solve_joint(inst, opts.solver);

    plan.mu0 = res.point.mu0;
    for (std::size_t j = 0; j < cand.size(); ++j) {
        const std::size_t i = cand[j];
        plan.mu[i] = res.point.mu[j];
        plan.energy[i] = res.point.energy[j];
        plan.from_battery[i] = kind[i] == DeviceKind::TypeII;
        plan.role[i] = Role::Data;
    }
    fill_with_wpt(inst, plan, used_airtime(plan));
    return apply_plan(state, slot, cfg, plan);
}

StepOutcome step_ers_on(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                        const SchedulerOptions& opts) {
    return detail::step_outdated(state, slot, cfg, opts, {});
}

}  // namespace wpmec
