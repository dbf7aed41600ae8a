#include <wpmec/baselines.hpp>
#include <wpmec/harness.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace wpmec;

namespace {

NetworkConfig type_one_only() {
    NetworkConfig cfg = default_config();
    for (auto& d : cfg.devices) {
        d.kind = DeviceKind::TypeI;
    }
    return cfg;
}

NetworkConfig devices(std::size_t n, DeviceKind kind, double distance) {
    NetworkConfig cfg = default_config();
    cfg.devices.resize(n);
    for (auto& d : cfg.devices) {
        d.kind = kind;
        d.distance_m = distance;
    }
    return cfg;
}

SlotState flat_slot(std::size_t n, double gain) {
    SlotState s;
    s.gain.assign(n, gain);
    s.collectible.assign(n, 5e4);
    s.processing.assign(n, 2e3);
    return s;
}

Link harvest(const NetworkConfig& cfg, std::size_t i, double h, double weight) {
    Link l;
    l.kind = LinkKind::Harvest;
    l.weight = weight;
    l.gain = cfg.devices[i].harvest_eff * cfg.ap_power_w * h * h / cfg.noise_w;
    return l;
}

double seed_mean_delivered(Algorithm algo, int seeds) {
    NetworkConfig cfg = default_config();
    cfg.control_v = 300;
    double sum = 0.0;
    for (int s = 1; s <= seeds; ++s) {
        sum += run(cfg, algo, static_cast<std::uint64_t>(s)).summary.avg_delivered;
    }
    return sum / seeds;
}

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

// ---------------------------------------------------------------------------
// HDO-ON
// ---------------------------------------------------------------------------

TEST(StepHdoOn, TypeOneNetworkMatchesErsOn) {
    const NetworkConfig cfg = type_one_only();
    Environment env(cfg, 6);
    SystemState state = SystemState::zero(cfg.size());
    for (int t = 0; t < 60; ++t) {
        const SlotState slot = env.next();
        const StepOutcome hdo = step_hdo_on(state, slot, cfg);
        const StepOutcome ers = step_ers_on(state, slot, cfg);
        ASSERT_EQ(hdo.decision.mu0, ers.decision.mu0) << "slot " << t;
        ASSERT_EQ(hdo.decision.mu, ers.decision.mu) << "slot " << t;
        ASSERT_EQ(hdo.decision.energy, ers.decision.energy) << "slot " << t;
        state = hdo.next;
    }
}

TEST(StepHdoOn, FullBatteryIgnored) {
    const NetworkConfig cfg = devices(1, DeviceKind::TypeII, 3.0);
    SystemState state = SystemState::zero(1);
    state.queue[0] = 8e4;
    state.feedback.reported[0] = 8e4;
    state.battery[0] = battery_capacity(cfg)[0];
    const StepOutcome out = step_hdo_on(state, flat_slot(1, mean_gain(3.0, 2.0)), cfg);
    ASSERT_GT(out.decision.mu[0], 0.0);
    EXPECT_FALSE(out.from_battery[0]);
    EXPECT_DOUBLE_EQ(out.decision.energy[0], cfg.devices[0].eta * out.decision.harvested[0]);
    // The stored energy neither drains nor charges.
    EXPECT_EQ(out.next.battery[0], state.battery[0]);
}

TEST(StepHdoOn, BatteriesStayEmpty) {
    NetworkConfig cfg = default_config();
    cfg.horizon = 200;
    const RunResult r = run(cfg, Algorithm::HdoOn, 3);
    for (const auto& rec : r.trace.records) {
        ASSERT_EQ(rec.battery, 0.0);
    }
}

TEST(StepHdoOn, TrailsErsOnAtV300) {
    EXPECT_LT(seed_mean_delivered(Algorithm::HdoOn, 10), seed_mean_delivered(Algorithm::ErsOn, 10));
}

// ---------------------------------------------------------------------------
// EOT-ON
// ---------------------------------------------------------------------------

TEST(StepEotOn, FourDevicesSplitTheRemainderEqually) {
    // mu0 + 4 mu = 1: mu0 = 0.2 would give every device 0.2.
    const NetworkConfig cfg = devices(4, DeviceKind::TypeI, 3.0);
    SystemState state = SystemState::zero(4);
    for (std::size_t i = 0; i < 4; ++i) {
        state.queue[i] = state.feedback.reported[i] = 6e4 + 1e4 * static_cast<double>(i);
    }
    const StepOutcome out = step_eot_on(state, flat_slot(4, mean_gain(3.0, 2.0)), cfg);
    const auto [lo, hi] = std::minmax_element(out.decision.mu.begin(), out.decision.mu.end());
    EXPECT_LE(*hi - *lo, 1e-9);
    EXPECT_GT(*lo, 0.0);
    EXPECT_NEAR(out.decision.mu0 + 4.0 * *lo, 1.0, 1e-9);
}

TEST(StepEotOn, NothingSchedulable) {
    const NetworkConfig cfg = default_config();
    SystemState state = SystemState::zero(cfg.size());
    std::fill(state.ap_queue.begin(), state.ap_queue.end(), 1e4);
    const StepOutcome out = step_eot_on(state, sample_slot(cfg, 1, 0), cfg);
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        EXPECT_EQ(out.decision.mu[i], 0.0);
        EXPECT_EQ(out.decision.energy[i], 0.0);
    }
}

TEST(StepEotOn, FixedShareInstanceMatchesOracle) {
    const NetworkConfig cfg = devices(2, DeviceKind::TypeI, 3.0);
    AllocationInstance inst;
    inst.equal_time = true;
    inst.links = {harvest(cfg, 0, 1.3e-4, -2e9), harvest(cfg, 1, 0.6e-4, -5e9)};
    const AllocationResult s = solve_joint(inst);
    const AllocationResult o = grid_oracle(inst, 1e-3);
    EXPECT_NEAR(s.point.mu0, o.point.mu0, 1e-3);
    EXPECT_LE(s.objective, o.objective + 1e-3 * (1 + std::abs(o.objective)));
    EXPECT_NEAR(s.point.mu[0], s.point.mu[1], 1e-12);
}

TEST(StepEotOn, EqualSharesEverySlot) {
    const NetworkConfig cfg = default_config();
    Environment env(cfg, 12);
    SystemState state = SystemState::zero(cfg.size());
    for (int t = 0; t < 200; ++t) {
        const StepOutcome out = step_eot_on(state, env.next(), cfg);
        double lo = 1.0;
        double hi = 0.0;
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            if (out.decision.role[i] == Role::Data) {
                lo = std::min(lo, out.decision.mu[i]);
                hi = std::max(hi, out.decision.mu[i]);
            }
        }
        if (hi > 0.0) {
            ASSERT_LE(hi - lo, 1e-9) << "slot " << t;
        }
        state = out.next;
    }
}

// ---------------------------------------------------------------------------
// PFN
// ---------------------------------------------------------------------------

TEST(StepPfn, IdenticalDevicesShareEqually) {
    for (DeviceKind kind : {DeviceKind::TypeI, DeviceKind::TypeII}) {
        const NetworkConfig cfg = devices(2, kind, 5.0);
        SystemState state = SystemState::zero(2);
        state.battery.assign(2, kind == DeviceKind::TypeII ? 1e-4 : 0.0);
        const StepOutcome out = step_pfn(state, flat_slot(2, mean_gain(5.0, 2.0)), cfg);
        EXPECT_NEAR(out.decision.mu[0], out.decision.mu[1], 1e-6);
        EXPECT_GT(out.decision.mu[0], 0.0);
    }
}

TEST(StepPfn, SingleDeviceMatchesOracle) {
    const NetworkConfig cfg = devices(1, DeviceKind::TypeI, 3.0);
    const double h = mean_gain(3.0, 2.0);
    const StepOutcome out = step_pfn(SystemState::zero(1), flat_slot(1, h), cfg);
    AllocationInstance inst;
    inst.utility = Utility::LogRate;
    inst.links = {harvest(cfg, 0, h, cfg.slot_s * cfg.bandwidth_hz)};
    const AllocationResult o = grid_oracle(inst, 1e-4);
    EXPECT_NEAR(out.decision.mu0, o.point.mu0, 1e-3);
    EXPECT_NEAR(out.decision.mu[0], o.point.mu[0], 1e-3);
}

TEST(StepPfn, TrailsErsOnAtV300) {
    EXPECT_LT(seed_mean_delivered(Algorithm::Pfn, 10), seed_mean_delivered(Algorithm::ErsOn, 10));
}

// ---------------------------------------------------------------------------
// GAN
// ---------------------------------------------------------------------------

TEST(StepGan, DominantChannelTakesTheUplink) {
    // The harvest-link rate has an unbounded slope at zero airtime, so the
    // weak devices keep a sliver; the strong one gets practically all of it.
    NetworkConfig cfg = devices(3, DeviceKind::TypeI, 3.0);
    SlotState slot = flat_slot(3, 1e-5);
    slot.gain[1] = 1e-3;
    const StepOutcome out = step_gan(SystemState::zero(3), slot, cfg);
    const double uplink = 1.0 - out.decision.mu0;
    EXPECT_NEAR(out.decision.mu0 + total(out.decision.mu), 1.0, 1e-9);
    EXPECT_GE(out.decision.mu[1], 0.999 * uplink);
    EXPECT_LT(out.decision.mu[0], 1e-3 * uplink);
    EXPECT_LT(out.decision.mu[2], 1e-3 * uplink);
}

TEST(StepGan, SymmetricTypeOneMatchesOracle) {
    const NetworkConfig cfg = devices(2, DeviceKind::TypeI, 5.0);
    const double h = mean_gain(5.0, 2.0);
    const StepOutcome out = step_gan(SystemState::zero(2), flat_slot(2, h), cfg);
    AllocationInstance inst;
    const double w = -cfg.slot_s * cfg.bandwidth_hz;
    inst.links = {harvest(cfg, 0, h, w), harvest(cfg, 1, h, w)};
    const AllocationResult o = grid_oracle(inst, 1e-3);
    AllocationPoint p;
    p.mu0 = out.decision.mu0;
    p.mu = out.decision.mu;
    p.energy.assign(2, 0.0);
    EXPECT_NEAR(p.mu0, o.point.mu0, 1e-3);
    EXPECT_LE(objective_value(inst, p), o.objective + 1e-3 * (1 + std::abs(o.objective)));
}

TEST(StepGan, ApBacklogKeepsGrowing) {
    const RunResult r = run(default_config(), Algorithm::Gan, 1);
    auto window_mean = [&](int from, int to) {
        double sum = 0.0;
        for (int t = from; t < to; ++t) {
            for (std::size_t i = 0; i < r.trace.devices; ++i) {
                sum += r.trace.at(t, i).ap_queue;
            }
        }
        return sum / (to - from);
    };
    EXPECT_GE(window_mean(900, 1000), 2.0 * window_mean(0, 100));
}

TEST(StepGan, SlotThroughputAtLeastErsOn) {
    const NetworkConfig cfg = default_config();
    Environment env(cfg, 21);
    SystemState state = SystemState::zero(cfg.size());
    for (int t = 0; t < 200; ++t) {
        const SlotState slot = env.next();
        const StepOutcome gan = step_gan(state, slot, cfg);
        const StepOutcome ers = step_ers_on(state, slot, cfg);
        const double g = total(gan.decision.capacity);
        const double e = total(ers.decision.capacity);
        ASSERT_GE(g, e - 1e-6 * (1 + e)) << "slot " << t;
        state = ers.next;
    }
}

// ---------------------------------------------------------------------------
// Feasibility of every baseline over a full run
// ---------------------------------------------------------------------------

class BaselineRun : public ::testing::TestWithParam<Algorithm> {};

TEST_P(BaselineRun, PhysicalConstraintsHold) {
    const RunResult r = run(default_config(), GetParam(), 2);
    const InvariantReport& rep = r.summary.invariants;
    for (Invariant inv : {Invariant::EnergyAvailable, Invariant::PowerCap, Invariant::BatteryRange,
                          Invariant::TimeBudget, Invariant::Collection,
                          Invariant::DataAvailable}) {
        EXPECT_EQ(rep[inv].count, 0) << to_string(inv);
    }
}

INSTANTIATE_TEST_SUITE_P(Baselines, BaselineRun,
                         ::testing::Values(Algorithm::HdoOn, Algorithm::EotOn, Algorithm::Pfn,
                                           Algorithm::Gan),
                         [](const auto& info) {
                             std::string name(to_string(info.param));
                             std::erase(name, '-');
                             return name;
                         });
