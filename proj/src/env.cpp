#include <wpmec/env.hpp>

#include <cmath>

namespace wpmec {

double mean_gain(double distance_m, double alpha) {
    if (!(distance_m > 0.0)) {
        throw ConfigError("distances", "distance must be > 0");
    }
    return 1e-3 * std::pow(distance_m, -alpha);
}

namespace {

std::mt19937_64 make_stream(std::uint64_t seed, std::size_t device, std::uint32_t quantity) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(device), quantity, 0x5eedu};
    return std::mt19937_64(seq);
}

double bounded(Distribution dist, double u, double max) {
    switch (dist) {
        case Distribution::Uniform: return u * max;
        case Distribution::ConstantMax: return max;
    }
    return max;
}

}  // namespace

Environment::Environment(const NetworkConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    const std::size_t n = cfg.size();
    mean_gain_.reserve(n);
    fading_.reserve(n);
    arrival_.reserve(n);
    processing_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        mean_gain_.push_back(mean_gain(cfg.devices[i].distance_m, cfg.path_loss_exponent));
        fading_.push_back(make_stream(seed, i, Fading));
        arrival_.push_back(make_stream(seed, i, Arrival));
        processing_.push_back(make_stream(seed, i, Processing));
    }
}

double Environment::unit(std::mt19937_64& gen) {
    // Midpoint of a 2^-53 cell: strictly inside (0, 1).
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

SlotState Environment::next() {
    const std::size_t n = mean_gain_.size();
    SlotState s;
    s.t = t_++;
    s.gain.resize(n);
    s.collectible.resize(n);
    s.processing.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& dev = cfg_.devices[i];
        // Inverse CDF of Exponential(1).
        const double fading = -std::log1p(-unit(fading_[i]));
        s.gain[i] = mean_gain_[i] * fading;
        s.collectible[i] = bounded(cfg_.arrival_dist, unit(arrival_[i]), dev.a_max_bits);
        s.processing[i] = bounded(cfg_.rate_dist, unit(processing_[i]), dev.r_max_bits);
    }
    return s;
}

SlotState sample_slot(const NetworkConfig& cfg, std::uint64_t seed, int t) {
    Environment env(cfg, seed);
    SlotState s;
    for (int k = 0; k <= t; ++k) {
        s = env.next();
    }
    return s;
}

}  // namespace wpmec
