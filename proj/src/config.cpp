#include <wpmec/config.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wpmec {

namespace pt = boost::property_tree;

std::size_t NetworkConfig::count(DeviceKind kind) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        devices.begin(), devices.end(), [kind](const DeviceParams& d) { return d.kind == kind; }));
}

void NetworkConfig::set_feedback_seconds(double eps_s) {
    for (auto& d : devices) {
        d.feedback_eps = eps_s / slot_s;
    }
}

double NetworkConfig::feedback_seconds() const noexcept {
    return devices.empty() ? 0.0 : devices.front().feedback_eps * slot_s;
}

NetworkConfig default_config() {
    NetworkConfig cfg;
    const std::vector<double> distances{3, 5, 7, 9, 11};
    for (DeviceKind kind : {DeviceKind::TypeI, DeviceKind::TypeII}) {
        for (double d : distances) {
            DeviceParams p;
            p.kind = kind;
            p.distance_m = d;
            p.a_max_bits = 1e6 * cfg.slot_s;
            p.r_max_bits = 50e3 * cfg.slot_s;
            p.feedback_eps = 0.005 / cfg.slot_s;
            cfg.devices.push_back(p);
        }
    }
    return cfg;
}

namespace {

void require(bool ok, const char* field, const std::string& what) {
    if (!ok) {
        throw ConfigError(field, what);
    }
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void validate(const NetworkConfig& cfg) {
    require(positive(cfg.slot_s), "slot_T", "must be > 0");
    require(positive(cfg.bandwidth_hz), "bandwidth_W", "must be > 0");
    require(positive(cfg.noise_w), "noise_N0", "must be > 0");
    require(positive(cfg.ap_power_w), "ap_power_P0", "must be > 0");
    require(std::isfinite(cfg.path_loss_exponent) && cfg.path_loss_exponent >= 2.0,
            "path_loss_exponent", "must be >= 2");
    require(positive(cfg.feedback_bits), "feedback_bits_L", "must be > 0");
    require(cfg.compulsory_interval >= 1, "compulsory_interval_m", "must be >= 1");
    require(positive(cfg.control_v), "control_V", "must be > 0");
    require(cfg.horizon >= 0, "horizon", "must be >= 0");
    require(!cfg.devices.empty(), "n1_count", "network has no devices");

    for (const auto& d : cfg.devices) {
        require(positive(d.distance_m), "distances", "every distance must be > 0");
        require(d.harvest_eff > 0.0 && d.harvest_eff < 1.0, "harvest_eff", "must lie in (0, 1)");
        require(d.eta > 0.0 && d.eta <= 1.0, "eta", "must lie in (0, 1]");
        require(positive(d.p_max_w), "p_max", "must be > 0");
        require(positive(d.a_max_bits), "a_max_bps", "must be > 0");
        require(positive(d.r_max_bits), "r_max_bps", "must be > 0");
        require(positive(d.c_max_bits), "c_max_bits", "must be > 0");
        require(positive(d.e_h_max_j), "e_h_max", "must be > 0");
        require(positive(d.e_min_j), "e_min", "must be > 0");
        require(d.feedback_eps > 0.0 && d.feedback_eps < 1.0, "feedback_eps_s",
                "must lie in (0, slot_T)");
    }
}

Distribution parse_distribution(std::string_view name) {
    if (name == "uniform") {
        return Distribution::Uniform;
    }
    if (name == "constant-max" || name == "constant") {
        return Distribution::ConstantMax;
    }
    throw ConfigError("distribution", "unknown distribution '" + std::string(name) + "'");
}

std::string_view to_string(Distribution dist) noexcept {
    switch (dist) {
        case Distribution::Uniform: return "uniform";
        case Distribution::ConstantMax: return "constant-max";
    }
    return "?";
}

std::string_view to_string(DeviceKind kind) noexcept {
    return kind == DeviceKind::TypeI ? "I" : "II";
}

namespace {

std::vector<double> parse_list(const std::string& field, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) {
            throw ConfigError(field, "empty list entry");
        }
        item = item.substr(b, e - b + 1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size()) {
            throw ConfigError(field, "not a number: '" + item + "'");
        }
        out.push_back(v);
    }
    return out;
}

template <typename T>
T get(const pt::ptree& tree, const char* section, const char* key, T fallback) {
    const std::string path = std::string(section) + "." + key;
    const auto node = tree.get_optional<std::string>(path);
    if (!node) {
        return fallback;
    }
    try {
        return tree.get<T>(path);
    } catch (const pt::ptree_bad_data&) {
        throw ConfigError(key, "cannot parse value '" + *node + "'");
    }
}

}  // namespace

NetworkConfig parse_config(std::string_view text) {
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config", e.message());
    }

    NetworkConfig cfg = default_config();
    const DeviceParams base = cfg.devices.front();

    cfg.slot_s = get(tree, "radio", "slot_T", cfg.slot_s);
    cfg.bandwidth_hz = get(tree, "radio", "bandwidth_W", cfg.bandwidth_hz);
    cfg.noise_w = get(tree, "radio", "noise_N0", cfg.noise_w);
    cfg.ap_power_w = get(tree, "radio", "ap_power_P0", cfg.ap_power_w);
    cfg.path_loss_exponent = get(tree, "radio", "path_loss_exponent", cfg.path_loss_exponent);

    const int n1 = get(tree, "devices", "n1_count", 5);
    const int n2 = get(tree, "devices", "n2_count", 5);
    require(n1 >= 0 && n2 >= 0, "n1_count", "device counts must be >= 0");
    const auto count = static_cast<std::size_t>(n1 + n2);

    std::vector<double> distances{3, 5, 7, 9, 11, 3, 5, 7, 9, 11};
    if (auto text_list = tree.get_optional<std::string>("devices.distances")) {
        distances = parse_list("distances", *text_list);
    }
    if (distances.size() != count) {
        // A list sized for one type is reused for the other.
        if (n1 == n2 && distances.size() == static_cast<std::size_t>(n1)) {
            distances.insert(distances.end(), distances.begin(), distances.end());
        } else {
            throw ConfigError("distances", "expected " + std::to_string(count) + " entries, got " +
                                               std::to_string(distances.size()));
        }
    }

    DeviceParams proto = base;
    proto.p_max_w = get(tree, "devices", "p_max", base.p_max_w);
    proto.harvest_eff = get(tree, "devices", "harvest_eff", base.harvest_eff);
    proto.eta = get(tree, "devices", "eta", base.eta);
    proto.a_max_bits = get(tree, "devices", "a_max_bps", 1e6) * cfg.slot_s;
    proto.r_max_bits = get(tree, "devices", "r_max_bps", 50e3) * cfg.slot_s;
    proto.c_max_bits = get(tree, "devices", "c_max_bits", base.c_max_bits);
    proto.e_h_max_j = get(tree, "devices", "e_h_max", base.e_h_max_j);
    proto.e_min_j = get(tree, "devices", "e_min", base.e_min_j);
    proto.feedback_eps = get(tree, "devices", "feedback_eps_s", 0.005) / cfg.slot_s;

    cfg.devices.clear();
    for (std::size_t i = 0; i < count; ++i) {
        DeviceParams p = proto;
        p.kind = i < static_cast<std::size_t>(n1) ? DeviceKind::TypeI : DeviceKind::TypeII;
        p.distance_m = distances[i];
        cfg.devices.push_back(p);
    }

    cfg.control_v = get(tree, "algorithm", "control_V", cfg.control_v);
    cfg.feedback_bits = get(tree, "algorithm", "feedback_bits_L", cfg.feedback_bits);
    cfg.compulsory_interval = get(tree, "algorithm", "compulsory_interval_m", cfg.compulsory_interval);

    cfg.horizon = get(tree, "experiment", "horizon", cfg.horizon);
    cfg.seed = get(tree, "experiment", "seed", cfg.seed);
    cfg.arrival_dist = parse_distribution(get<std::string>(tree, "experiment", "arrival_dist", "uniform"));
    cfg.rate_dist = parse_distribution(get<std::string>(tree, "experiment", "rate_dist", "uniform"));

    validate(cfg);
    return cfg;
}

NetworkConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", "cannot open " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace wpmec
