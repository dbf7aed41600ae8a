#include <wpmec/model.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wpmec {

SystemState SystemState::zero(std::size_t n) {
    SystemState s;
    s.queue.assign(n, 0.0);
    s.battery.assign(n, 0.0);
    s.ap_queue.assign(n, 0.0);
    s.feedback.reported.assign(n, 0.0);
    s.feedback.staleness.assign(n, 0);
    return s;
}

double harvested_energy(double xi, double p0_w, double gain, double mu0, double slot_s,
                        double e_h_max_j) {
    return std::min(xi * p0_w * gain * mu0 * slot_s, e_h_max_j);
}

double offload_bits(double mu, double slot_s, double bandwidth_hz, double power_w, double gain,
                    double noise_w, double c_max_bits) {
    if (mu <= 0.0) {
        return 0.0;
    }
    const double snr = power_w * gain / noise_w;
    return std::min(mu * slot_s * bandwidth_hz * std::log2(1.0 + snr), c_max_bits);
}

double type1_power(double harvest_j, double mu, double slot_s, double eta) {
    if (!(mu > 0.0)) {
        throw std::domain_error("type1_power: uplink share must be > 0");
    }
    return eta * harvest_j / (mu * slot_s);
}

double update_device_queue(double queue, double capacity, double collect) {
    return std::max(queue - capacity, 0.0) + collect;
}

double update_ap_queue(double ap_queue, double processing, double capacity, double queue) {
    return std::max(ap_queue - processing, 0.0) + std::min(capacity, queue);
}

double update_battery(double battery, double harvest_j, double spend_j, double theta) {
    const double available = battery + harvest_j;
    // Relative slack absorbs rounding in the solver's last digits.
    if (spend_j > available * (1.0 + 1e-12) + 1e-300) {
        std::ostringstream msg;
        msg << "energy-availability violated: spend " << spend_j << " J > stored " << battery
            << " J + harvest " << harvest_j << " J";
        throw EnergyViolation(msg.str());
    }
    return std::max(std::min(available, theta) - spend_j, 0.0);
}

}  // namespace wpmec
