#include <wpmec/solver.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace wpmec;

namespace {

Link harvest_link(double weight, double gain, double floor = 0.0) {
    Link l;
    l.kind = LinkKind::Harvest;
    l.weight = weight;
    l.gain = gain;
    l.floor = floor;
    return l;
}

Link battery_link(double weight, double gain, double price, double cap, double floor = 0.0) {
    Link l;
    l.kind = LinkKind::Battery;
    l.weight = weight;
    l.gain = gain;
    l.energy_price = price;
    l.power_cap = cap;
    l.floor = floor;
    return l;
}

/// Instances of at most two links shaped like the per-slot programs.
AllocationInstance random_instance(std::mt19937_64& rng, bool allow_supply = true) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    AllocationInstance inst;
    const int k = static_cast<int>(rng() % 3);
    inst.wpt_weight = u(rng) < 0.3 ? 0.0 : -2.0 * u(rng);
    for (int i = 0; i < k; ++i) {
        const double weight = -(0.1 + 5.0 * u(rng));
        const double floor = u(rng) < 0.5 ? 0.0 : 0.1 * u(rng);
        if (u(rng) < 0.5) {
            inst.links.push_back(harvest_link(weight, std::pow(10.0, -1.0 + 3.0 * u(rng)), floor));
        } else {
            Link l = battery_link(weight, std::pow(10.0, 1.0 + 3.0 * u(rng)), 5.0 * u(rng), 0.1,
                                  floor);
            if (allow_supply && u(rng) < 0.5) {
                l.supply = EnergySupply{0.01 * u(rng), 0.05 * u(rng), 0.02 * u(rng)};
            }
            inst.links.push_back(l);
        }
    }
    return inst;
}

}  // namespace

// ---------------------------------------------------------------------------
// Collection and pruning
// ---------------------------------------------------------------------------

TEST(OptimalCollection, EmptyQueueCollectsEverything) {
    EXPECT_DOUBLE_EQ(optimal_collection(0.0, 1e5, 300.0), 1e5);
}

TEST(OptimalCollection, InteriorBranch) {
    EXPECT_DOUBLE_EQ(optimal_collection(100.0, 5.0, 300.0), 2.0);
}

TEST(OptimalCollection, CappedBranch) {
    EXPECT_DOUBLE_EQ(optimal_collection(50.0, 2.0, 300.0), 2.0);
}

TEST(OptimalCollection, MatchesNumericMinimization) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double q = std::pow(10.0, 4.0 * u(rng) - 1.0);
        const double a_max = std::pow(10.0, 5.0 * u(rng));
        const double v = 1.0 + 500.0 * u(rng);
        auto f = [&](double a) { return q * a - v * std::log1p(a); };
        // Golden section on the convex objective.
        double lo = 0.0, hi = a_max;
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int it = 0; it < 300; ++it) {
            const double c = hi - g * (hi - lo);
            const double d = lo + g * (hi - lo);
            (f(c) < f(d) ? hi : lo) = f(c) < f(d) ? d : c;
        }
        const double numeric = 0.5 * (lo + hi);
        EXPECT_NEAR(optimal_collection(q, a_max, v), numeric, 1e-6 * std::max(1.0, numeric))
            << "Q=" << q << " A=" << a_max << " V=" << v;
    }
}

TEST(Prune, SplitsByBacklogComparison) {
    const std::vector<double> s{5, 0};
    const std::vector<double> q{3, 10};
    const std::vector<DeviceKind> k{DeviceKind::TypeI, DeviceKind::TypeII};
    const Partition p = prune(q, s, k);
    EXPECT_EQ(p.pruned, std::vector<std::size_t>{0});
    EXPECT_TRUE(p.type1.empty());
    EXPECT_EQ(p.type2, std::vector<std::size_t>{1});
}

TEST(Prune, EqualBacklogsArePruned) {
    const std::vector<double> v{7, 7, 7};
    const std::vector<DeviceKind> k(3, DeviceKind::TypeI);
    EXPECT_EQ(prune(v, v, k).pruned.size(), 3u);
}

TEST(Prune, ColdAccessPointPrunesNothing) {
    const std::vector<double> s{0, 0, 0};
    const std::vector<double> q{1, 2, 3};
    const std::vector<DeviceKind> k{DeviceKind::TypeI, DeviceKind::TypeII, DeviceKind::TypeI};
    const Partition p = prune(q, s, k);
    EXPECT_TRUE(p.pruned.empty());
    EXPECT_EQ(p.type1, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(p.type2, std::vector<std::size_t>{1});
}

TEST(Prune, RejectsMismatchedLengths) {
    const std::vector<double> s{0, 0};
    const std::vector<double> q{1};
    const std::vector<DeviceKind> k{DeviceKind::TypeI};
    EXPECT_THROW(prune(q, s, k), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

TEST(ObjectiveValue, AllZeroPointIsZero) {
    AllocationInstance inst;
    inst.links = {harvest_link(-1, 1), battery_link(-1, 100, 1, 0.1)};
    AllocationPoint p{0.0, {0.0, 0.0}, {0.0, 0.0}};
    EXPECT_DOUBLE_EQ(objective_value(inst, p), 0.0);
}

TEST(ObjectiveValue, NoHarvestMeansNoRate) {
    AllocationInstance inst;
    inst.links = {harvest_link(-1, 1)};
    AllocationPoint p{0.0, {1.0}, {0.0}};
    EXPECT_DOUBLE_EQ(objective_value(inst, p), 0.0);
}

TEST(ObjectiveValue, HandComputedSingleDevice) {
    AllocationInstance inst;
    inst.links = {harvest_link(-1, 1)};
    AllocationPoint p{0.5, {0.5}, {0.0}};
    EXPECT_DOUBLE_EQ(objective_value(inst, p), -0.5);
}

TEST(ObjectiveValue, RejectsInfeasiblePoint) {
    AllocationInstance inst;
    inst.links = {harvest_link(-1, 1)};
    AllocationPoint p{0.7, {0.5}, {0.0}};
    EXPECT_THROW(objective_value(inst, p), std::domain_error);
}

TEST(PerspectiveRate, VanishesWithAirtime) {
    const double cap = 0.1;
    double prev = perspective_rate(1e4, cap * 1e-2, 1e-2);
    for (double mu = 1e-3; mu > 1e-12; mu /= 10.0) {
        const double r = perspective_rate(1e4, cap * mu, mu);
        EXPECT_GE(r, 0.0);
        EXPECT_LT(r, prev);
        prev = r;
    }
    EXPECT_LT(prev, 1e-9);
    EXPECT_EQ(perspective_rate(1e4, 0.0, 0.0), 0.0);
}

TEST(ObjectiveValue, ConvexAlongRandomSegments) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    while (checked < 1000) {
        AllocationInstance inst = random_instance(rng, false);
        if (inst.links.empty()) {
            continue;
        }
        auto draw = [&] {
            AllocationPoint p;
            double left = inst.budget;
            for (const auto& l : inst.links) {
                left -= l.floor;
            }
            std::vector<double> w(inst.links.size() + 2);
            double sum = 0.0;
            for (auto& x : w) {
                x = -std::log(u(rng));
                sum += x;
            }
            p.mu0 = left * w[0] / sum;
            for (std::size_t i = 0; i < inst.links.size(); ++i) {
                p.mu.push_back(inst.links[i].floor + left * w[i + 1] / sum);
                p.energy.push_back(inst.links[i].kind == LinkKind::Battery
                                       ? u(rng) * inst.links[i].power_cap * p.mu.back()
                                       : 0.0);
            }
            return p;
        };
        const AllocationPoint x = draw();
        const AllocationPoint y = draw();
        AllocationPoint mid;
        mid.mu0 = 0.5 * (x.mu0 + y.mu0);
        for (std::size_t i = 0; i < inst.links.size(); ++i) {
            mid.mu.push_back(0.5 * (x.mu[i] + y.mu[i]));
            mid.energy.push_back(0.5 * (x.energy[i] + y.energy[i]));
        }
        const double fx = objective_value(inst, x);
        const double fy = objective_value(inst, y);
        EXPECT_LE(objective_value(inst, mid), 0.5 * (fx + fy) + 1e-12);
        ++checked;
    }
}

// ---------------------------------------------------------------------------
// Joint allocation
// ---------------------------------------------------------------------------

TEST(SolveJoint, NoLinksAndNegativeWptTakesWholeBudget) {
    AllocationInstance inst;
    inst.wpt_weight = -0.6;
    inst.budget = 0.8;
    const AllocationResult r = solve_joint(inst);
    EXPECT_DOUBLE_EQ(r.point.mu0, 0.8);
    EXPECT_DOUBLE_EQ(r.objective, 0.8 * -0.6);
}

TEST(SolveJoint, NoLinksAndNonNegativeWptIsAllZero) {
    AllocationInstance inst;
    const AllocationResult r = solve_joint(inst);
    EXPECT_EQ(r.point.mu0, 0.0);
    EXPECT_EQ(r.objective, 0.0);
}

TEST(SolveJoint, SingleHarvestLinkMatchesOracle) {
    AllocationInstance inst;
    inst.links = {harvest_link(-1.0, 1.0)};
    const AllocationResult r = solve_joint(inst);
    const AllocationResult o = grid_oracle(inst, 1e-3);
    EXPECT_LE(r.objective, o.objective + 1e-3);
    EXPECT_NEAR(r.objective, o.objective, 1e-3);
    EXPECT_TRUE(is_feasible(inst, r.point));
    EXPECT_LE(r.kkt_residual, 1e-8);
}

TEST(SolveJoint, SingleBatteryLinkMatchesOracle) {
    AllocationInstance inst;
    inst.links = {battery_link(-1.0, 1e5, 50.0, 0.1)};
    inst.wpt_weight = -0.5;
    const AllocationResult r = solve_joint(inst);
    const AllocationResult o = grid_oracle(inst, 1e-3);
    EXPECT_LE(r.objective, o.objective + 1e-3);
    EXPECT_TRUE(is_feasible(inst, r.point));
    // Energy sits at its water-filling level or at the power cap.
    const double mu = r.point.mu[0];
    const double fill = mu * (1.0 / (50.0 * std::numbers::ln2) - 1.0 / 1e5);
    EXPECT_NEAR(r.point.energy[0], std::clamp(fill, 0.0, 0.1 * mu), 1e-6);
}

TEST(SolveJoint, InfeasibleFloorsAreReported) {
    AllocationInstance inst;
    inst.budget = 0.5;
    inst.links = {harvest_link(-1, 1, 0.3), harvest_link(-1, 1, 0.3)};
    try {
        solve_joint(inst);
        FAIL() << "expected InfeasibleAllocation";
    } catch (const InfeasibleAllocation& e) {
        EXPECT_NE(std::string(e.what()).find("budget"), std::string::npos);
    }
}

TEST(SolveJoint, FloorsFillingTheSlotPinShares) {
    AllocationInstance inst;
    for (int i = 0; i < 10; ++i) {
        inst.links.push_back(i % 2 == 0 ? harvest_link(-1.0, 3.0, 0.09999999999999999)
                                        : battery_link(-1.0, 1e5, 50.0, 0.1, 0.09999999999999999));
    }
    const AllocationResult r = solve_joint(inst);
    EXPECT_TRUE(is_feasible(inst, r.point));
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(r.point.mu[i], 0.09999999999999999);
        if (i % 2 == 1) {
            const double fill = 0.1 * (1.0 / (50.0 * std::numbers::ln2) - 1.0 / 1e5);
            EXPECT_NEAR(r.point.energy[i], std::clamp(fill, 0.0, 0.01), 1e-12);
        }
    }
}

TEST(SolveJoint, RespectsFloorsAndBudget) {
    AllocationInstance inst;
    inst.budget = 0.7;
    inst.wpt_weight = -3.0;
    inst.links = {harvest_link(-0.01, 1, 0.05), battery_link(-0.01, 100, 10, 0.1, 0.05)};
    const AllocationResult r = solve_joint(inst);
    EXPECT_TRUE(is_feasible(inst, r.point));
    EXPECT_GE(r.point.mu[0], 0.05);
    EXPECT_GE(r.point.mu[1], 0.05);
}

TEST(SolveJoint, EqualTimeSharesRemainder) {
    AllocationInstance inst;
    inst.equal_time = true;
    inst.wpt_weight = -0.2;
    for (int i = 0; i < 4; ++i) {
        inst.links.push_back(harvest_link(-1.0, 2.0 + i));
    }
    const AllocationResult r = solve_joint(inst);
    for (double mu : r.point.mu) {
        EXPECT_NEAR(mu, (1.0 - r.point.mu0) / 4.0, 1e-12);
    }
    const AllocationResult o = grid_oracle(inst, 1e-3);
    EXPECT_LE(r.objective, o.objective + 1e-3);
}

TEST(SolveJoint, LogRateMatchesOracle) {
    AllocationInstance inst;
    inst.utility = Utility::LogRate;
    inst.links = {harvest_link(2e4, 5.0)};
    Link b = battery_link(2e4, 1e4, 0.0, 0.1);
    b.supply = EnergySupply{1e-3, 0.01, 0.02};
    inst.links.push_back(b);
    const AllocationResult r = solve_joint(inst);
    const AllocationResult o = grid_oracle(inst, 1e-3);
    EXPECT_LE(r.objective, o.objective + 1e-3 * (1 + std::abs(o.objective)));
    EXPECT_TRUE(is_feasible(inst, r.point));
}

TEST(SolveJoint, NeverWorseThanOracleOnRandomInstances) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const AllocationInstance inst = random_instance(rng);
        const AllocationResult r = solve_joint(inst);
        const AllocationResult o = grid_oracle(inst, 5e-3);
        EXPECT_TRUE(is_feasible(inst, r.point)) << "trial " << trial;
        EXPECT_LE(r.objective, o.objective + 1e-3 * (1 + std::abs(o.objective)))
            << "trial " << trial;
    }
}

TEST(SolveJoint, PrunedDeviceNeverHelps) {
    // A link with non-negative weight (S >= Q) forced to airtime eps can only
    // raise the optimum.
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        AllocationInstance base = random_instance(rng);
        const double eps = 0.01 + 0.05 * u(rng);
        AllocationInstance forced = base;
        Link pruned = u(rng) < 0.5 ? harvest_link(3.0 * u(rng), 1.0 + 10 * u(rng), eps)
                                   : battery_link(3.0 * u(rng), 1e3, 1.0, 0.1, eps);
        forced.links.push_back(pruned);
        const double without = solve_joint(base).objective;
        const double with = solve_joint(forced).objective;
        EXPECT_GE(with, without - 1e-7 * (1 + std::abs(without))) << "trial " << trial;
    }
}

// ---------------------------------------------------------------------------
// Grid oracle
// ---------------------------------------------------------------------------

TEST(GridOracle, OnlyWptFreeMatchesSolverExactly) {
    AllocationInstance inst;
    inst.wpt_weight = -1.5;
    inst.budget = 0.9;
    EXPECT_DOUBLE_EQ(grid_oracle(inst, 1e-3).objective, solve_joint(inst).objective);
    inst.wpt_weight = 0.7;
    EXPECT_DOUBLE_EQ(grid_oracle(inst, 1e-3).objective, solve_joint(inst).objective);
}

TEST(GridOracle, RefinementNeverWorsens) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const AllocationInstance inst = random_instance(rng);
        const double coarse = grid_oracle(inst, 2e-2).objective;
        const double fine = grid_oracle(inst, 1e-2).objective;
        EXPECT_LE(fine, coarse + 1e-12);
    }
}

TEST(GridOracle, RefusesLargeInstances) {
    AllocationInstance inst;
    inst.links = {harvest_link(-1, 1), harvest_link(-1, 1), harvest_link(-1, 1)};
    EXPECT_THROW(grid_oracle(inst, 1e-2), std::invalid_argument);
}
