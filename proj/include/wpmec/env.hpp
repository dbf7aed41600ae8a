#pragma once

#include <wpmec/config.hpp>

#include <cstdint>
#include <random>
#include <vector>

namespace wpmec {

/// Random draws of one slot. Channels are reciprocal: `gain` serves both the
/// downlink power transfer and the uplink offloading of the same slot.
struct SlotState {
    int t = 0;
    std::vector<double> gain;         // h_i, dimensionless
    std::vector<double> collectible;  // A_i, bits
    std::vector<double> processing;   // r_i, bits
};

/// Large-scale gain 1e-3 * d^-alpha. Throws ConfigError for d <= 0.
double mean_gain(double distance_m, double alpha);

/// Seeded source of i.i.d. slot draws. Every (device, quantity) pair owns a
/// separate stream derived from the master seed, so the draws of one device
/// do not depend on how many other devices exist. Each stream advances by
/// exactly one value per slot.
class Environment {
public:
    Environment(const NetworkConfig& cfg, std::uint64_t seed);

    /// Draws the next slot.
    SlotState next();

    [[nodiscard]] int slot() const noexcept { return t_; }

private:
    enum Quantity : std::uint32_t { Fading = 0, Arrival = 1, Processing = 2 };

    static double unit(std::mt19937_64& gen);

    NetworkConfig cfg_;
    std::vector<double> mean_gain_;
    std::vector<std::mt19937_64> fading_;
    std::vector<std::mt19937_64> arrival_;
    std::vector<std::mt19937_64> processing_;
    int t_ = 0;
};

/// Slot `t` of the stream identified by `seed`; equal to the t-th call of
/// Environment::next() on a fresh environment.
SlotState sample_slot(const NetworkConfig& cfg, std::uint64_t seed, int t);

}  // namespace wpmec
