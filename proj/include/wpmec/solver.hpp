#pragma once

#include <wpmec/config.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace wpmec {

// ---------------------------------------------------------------------------
// Data collection and pruning
// ---------------------------------------------------------------------------

/// Minimizer of Q*a - V*log(1+a) over 0 <= a <= A:
/// A when V >= (A+1)*Q, otherwise [V/Q - 1]^+.
double optimal_collection(double queue, double collectible, double control_v);

/// Devices split by whether the joint allocation may give them airtime.
struct Partition {
    std::vector<std::size_t> pruned;  // S_i >= Q_i: kept silent
    std::vector<std::size_t> type1;   // schedulable Type-I devices
    std::vector<std::size_t> type2;   // schedulable Type-II devices
};

/// A device whose AP backlog is at least its own backlog gains nothing from
/// offloading; only devices with S_i < Q_i are scheduled.
Partition prune(std::span<const double> queue, std::span<const double> ap_queue,
                std::span<const DeviceKind> kinds);

// ---------------------------------------------------------------------------
// Joint energy/time allocation
// ---------------------------------------------------------------------------

/// How a link turns airtime into bits.
enum class LinkKind {
    Harvest,  // rate mu*log2(1 + gain*mu0/mu): spends this slot's harvest
    Battery,  // rate mu*log2(1 + gain*e/mu): spends e from its battery
};

/// e <= stored + min(harvest_slope * mu0, harvest_cap).
struct EnergySupply {
    double stored = 0.0;
    double harvest_slope = 0.0;
    double harvest_cap = 0.0;
};

struct Link {
    LinkKind kind = LinkKind::Harvest;
    /// Weighted utility: coefficient of the rate term (negative rewards bits).
    /// LogRate utility: scale inside the logarithm (bits per unit rate).
    double weight = 0.0;
    double gain = 0.0;          // delta_i for Harvest links, beta_i for Battery links
    double energy_price = 0.0;  // cost per Joule spent (Battery)
    double power_cap = 0.0;     // e <= power_cap * mu (Battery), P_max * T
    double floor = 0.0;         // mu >= floor
    std::optional<EnergySupply> supply;
};

enum class Utility {
    Weighted,  // sum_i weight_i * rate_i
    LogRate,   // -sum_i log(1 + weight_i * rate_i)
};

/// One slot's allocation problem over (mu0, mu_i, e_i):
///   minimize  wpt_weight*mu0 + U(rates) + sum_i energy_price_i * e_i
///   s.t.      mu0 + sum_i mu_i <= budget, mu_i >= floor_i, mu0 >= 0,
///             0 <= e_i <= power_cap_i * mu_i, optional supply bounds.
/// With `equal_time` every link shares (budget - mu0) equally.
struct AllocationInstance {
    std::vector<Link> links;
    double budget = 1.0;
    double wpt_weight = 0.0;
    Utility utility = Utility::Weighted;
    bool equal_time = false;
};

struct AllocationPoint {
    double mu0 = 0.0;
    std::vector<double> mu;
    std::vector<double> energy;  // zero for Harvest links
};

struct AllocationResult {
    AllocationPoint point;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
};

struct SolverOptions {
    double tol = 1e-8;       // duality measure and stationarity, objective-normalized
    int max_newton = 2000;   // total Newton steps before giving up
    double snap = 1e-9;      // shares this close to their floor are set to it
};

class InfeasibleAllocation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverDivergence : public std::runtime_error {
public:
    SolverDivergence(const std::string& what, AllocationResult best)
        : std::runtime_error(what), best_(std::move(best)) {}

    [[nodiscard]] const AllocationResult& best() const noexcept { return best_; }

private:
    AllocationResult best_;
};

/// mu * log2(1 + gain * x / mu), continuously extended by 0 at mu = 0.
double perspective_rate(double gain, double x, double mu);

/// Rate of link `i` at `p` (per unit T*W).
double link_rate(const AllocationInstance& inst, const AllocationPoint& p, std::size_t i);

[[nodiscard]] bool is_feasible(const AllocationInstance& inst, const AllocationPoint& p,
                               double tol = 1e-9);

/// Objective at a feasible point; throws std::domain_error otherwise.
double objective_value(const AllocationInstance& inst, const AllocationPoint& p);

/// Log-barrier interior point with damped Newton steps. Throws
/// InfeasibleAllocation when the floors leave no room and SolverDivergence
/// when the Newton budget runs out.
AllocationResult solve_joint(const AllocationInstance& inst, const SolverOptions& opts = {});

/// Exhaustive search for validation. Airtime shares are enumerated on a grid
/// of the given step; each link's energy takes its exact minimizer for the
/// gridded airtime. Refuses instances with more than three free scalars.
AllocationResult grid_oracle(const AllocationInstance& inst, double resolution);

}  // namespace wpmec
