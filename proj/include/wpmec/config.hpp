#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wpmec {

enum class DeviceKind { TypeI, TypeII };

/// Family used for the per-slot random draws of collectible data and AP
/// processing capacity. Both are supported on [0, max].
enum class Distribution { Uniform, ConstantMax };

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Per-device physical parameters, already converted to per-slot units.
struct DeviceParams {
    DeviceKind kind = DeviceKind::TypeI;
    double distance_m = 1.0;
    double harvest_eff = 0.8;      // xi, in (0, 1)
    double eta = 1.0;              // share of the harvest a Type-I device spends
    double p_max_w = 1.0;          // Type-II transmit power cap
    double a_max_bits = 1e5;       // collectible data cap per slot
    double r_max_bits = 5e3;       // AP processing cap per slot
    double c_max_bits = 1e5;       // uplink capacity cap per slot
    double e_h_max_j = 1.6e-4;     // harvest cap per slot
    double e_min_j = 5e-6;         // smallest non-zero transmit energy
    double feedback_eps = 0.05;    // feedback airtime as a fraction of the slot
};

/// All physical and algorithmic parameters of one network. Rates given in
/// configuration files (bps, seconds) are converted to per-slot quantities
/// when the config is parsed.
struct NetworkConfig {
    double slot_s = 0.1;
    double bandwidth_hz = 2e5;
    double noise_w = 1e-9;
    double ap_power_w = 2.0;
    double path_loss_exponent = 2.0;

    std::vector<DeviceParams> devices;

    double feedback_bits = 16.0;
    int compulsory_interval = 4;
    double control_v = 300.0;

    int horizon = 1000;
    std::uint64_t seed = 1;
    Distribution arrival_dist = Distribution::Uniform;
    Distribution rate_dist = Distribution::Uniform;

    [[nodiscard]] std::size_t size() const noexcept { return devices.size(); }
    [[nodiscard]] std::size_t count(DeviceKind kind) const noexcept;

    /// Feedback airtime of every device, in seconds.
    void set_feedback_seconds(double eps_s);
    /// Feedback airtime in seconds; all devices share one value in the
    /// configurations this library builds, the first device is reported.
    [[nodiscard]] double feedback_seconds() const noexcept;
};

/// The simulation setting used throughout: five Type-I and five Type-II
/// devices at 3..11 m, T = 100 ms, W = 0.2 MHz, P0 = 2 W, 1000 slots.
NetworkConfig default_config();

/// Throws ConfigError naming the first offending field.
void validate(const NetworkConfig& cfg);

/// Parses INI-style text with [radio], [devices], [algorithm], [experiment]
/// sections. Keys not present keep their default_config() values.
NetworkConfig parse_config(std::string_view text);
NetworkConfig load_config(const std::filesystem::path& path);

std::string_view to_string(DeviceKind kind) noexcept;
std::string_view to_string(Distribution dist) noexcept;
Distribution parse_distribution(std::string_view name);

}  // namespace wpmec
