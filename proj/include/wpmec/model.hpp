#pragma once

#include <stdexcept>
#include <vector>

namespace wpmec {

/// Raised when a decision would spend more energy than a battery holds
/// after this slot's harvest. Signals a scheduler bug.
class EnergyViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// The AP's view of device backlogs under delayed feedback.
struct FeedbackState {
    std::vector<double> reported;  // latest backlog each device fed back
    std::vector<int> staleness;    // slots since `reported` was sampled
};

/// Queues and batteries at a slot boundary. Vectors are indexed by device.
struct SystemState {
    std::vector<double> queue;     // Q_i, bits waiting at the device
    std::vector<double> battery;   // E_i, Joules (always 0 for Type-I)
    std::vector<double> ap_queue;  // S_i, bits offloaded but not processed
    FeedbackState feedback;

    /// All-zero state of `n` devices.
    static SystemState zero(std::size_t n);
};

enum class Role {
    Silent,    // no uplink airtime
    Data,      // offloads data (and feeds back when the algorithm uses feedback)
    Feedback,  // compulsory feedback only, L bits
};

/// Everything one scheduler decided and one slot physically produced.
struct SlotDecision {
    double mu0 = 0.0;                // WPT share of the slot
    std::vector<double> mu;          // uplink share per device
    std::vector<double> energy;      // uplink energy spent, Joules
    std::vector<double> collect;     // a_i, bits admitted
    std::vector<double> harvested;   // e_i^H, Joules
    std::vector<double> capacity;    // data bits the uplink could carry
    std::vector<double> delivered;   // min(capacity, Q_i) bits that reached the AP
    std::vector<Role> role;

    explicit SlotDecision(std::size_t n = 0)
        : mu(n, 0.0), energy(n, 0.0), collect(n, 0.0), harvested(n, 0.0), capacity(n, 0.0),
          delivered(n, 0.0), role(n, Role::Silent) {}
};

/// min(xi * P0 * h * mu0 * T, e_h_max).
double harvested_energy(double xi, double p0_w, double gain, double mu0, double slot_s,
                        double e_h_max_j);

/// Uplink bits min(mu * T * W * log2(1 + P h / N0), c_max); zero when mu = 0.
double offload_bits(double mu, double slot_s, double bandwidth_hz, double power_w, double gain,
                    double noise_w, double c_max_bits);

/// Transmit power of a device that spends eta of its harvest over mu*T.
/// Throws std::domain_error for mu <= 0; silent devices transmit at 0 W.
double type1_power(double harvest_j, double mu, double slot_s, double eta);

/// [Q - c]^+ + a.
double update_device_queue(double queue, double capacity, double collect);

/// [S - r]^+ + min(c, Q).
double update_ap_queue(double ap_queue, double processing, double capacity, double queue);

/// min(E + e_H, theta) - e. Throws EnergyViolation when e exceeds E + e_H.
double update_battery(double battery, double harvest_j, double spend_j, double theta);

}  // namespace wpmec
