#pragma once

#include <wpmec/config.hpp>
#include <wpmec/env.hpp>
#include <wpmec/model.hpp>
#include <wpmec/solver.hpp>

#include <span>
#include <string_view>
#include <vector>

namespace wpmec {

enum class Algorithm { ErsRn, ErsOn, HdoOn, EotOn, Pfn, Gan };

std::string_view to_string(Algorithm algo) noexcept;
/// Accepts "ers-rn", "ers-on", "hdo-on", "eot-on", "pfn", "gan".
Algorithm parse_algorithm(std::string_view name);

/// Algorithms that schedule from fed-back backlogs.
bool uses_feedback(Algorithm algo) noexcept;
/// Algorithms driven by queue weights and pruning, for which the backlog
/// bounds are expected to hold.
bool queue_aware(Algorithm algo) noexcept;

/// Battery capacity (V + A_max) * c_max / e_min + P_max * T.
/// Throws ConfigError when e_min <= 0.
double compute_theta(double control_v, double a_max_bits, double c_max_bits, double e_min_j,
                     double p_max_w, double slot_s);

/// theta_i for every Type-II device and 0 for Type-I devices.
std::vector<double> battery_capacity(const NetworkConfig& cfg);

/// Devices whose silence reached the compulsory interval, i.e. tau_i >= m.
std::vector<std::size_t> due_set(const FeedbackState& fb, int interval);

/// Devices that delivered their feedback report `reported` and restart
/// their silence counter at zero; everybody else ages by one slot.
FeedbackState feedback_update(const FeedbackState& fb, const std::vector<bool>& transmitted,
                              std::span<const double> reported);

struct SchedulerOptions {
    SolverOptions solver;
    /// Add e_i <= E_i + e_i^H to the per-slot program. Without it the
    /// battery terms alone are relied on to keep spending affordable.
    bool enforce_energy_availability = true;
};

/// One slot of any scheduler: the decision, the resulting state and the
/// feedback view the decision was based on.
struct StepOutcome {
    SlotDecision decision;
    SystemState next;
    std::vector<bool> due;          // device was in M_t
    std::vector<double> believed;   // backlog the scheduler used (Q or Q-hat)
    std::vector<bool> from_battery; // uplink energy came from the battery
};

/// Real-time backlogs: pruning and weights use the true Q.
StepOutcome step_ers_rn(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                        const SchedulerOptions& opts = {});

/// Outdated backlogs with compulsory feedback every m slots.
StepOutcome step_ers_on(const SystemState& state, const SlotState& slot, const NetworkConfig& cfg,
                        const SchedulerOptions& opts = {});

/// Energy a device needs to send `bits` over `eps` of the slot:
/// (eps / beta) * (2^(bits / (eps T W)) - 1) with beta = h / (N0 T).
double feedback_energy(double bits, double eps, double gain, const NetworkConfig& cfg);

}  // namespace wpmec
