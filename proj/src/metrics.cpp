#include <wpmec/metrics.hpp>

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wpmec {

double utility(double a) {
    if (a < 0.0) {
        throw std::domain_error("utility: negative data volume");
    }
    return std::log1p(a);
}

std::optional<double> jain_index(std::span<const double> x) {
    if (x.empty()) {
        throw std::invalid_argument("jain_index: empty vector");
    }
    double sum = 0.0;
    double sq = 0.0;
    for (double v : x) {
        if (v < 0.0) {
            throw std::invalid_argument("jain_index: negative entry");
        }
        sum += v;
        sq += v * v;
    }
    if (sq == 0.0) {
        return std::nullopt;
    }
    return sum * sum / (static_cast<double>(x.size()) * sq);
}

double time_average(std::span<const double> series) {
    if (series.empty()) {
        throw std::invalid_argument("time_average: empty series");
    }
    return std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
}

double steady_state_average(std::span<const double> series) {
    if (series.empty()) {
        throw std::invalid_argument("steady_state_average: empty series");
    }
    return time_average(series.subspan(series.size() / 2));
}

std::string_view to_string(Invariant inv) noexcept {
    switch (inv) {
        case Invariant::QueueBound: return "queue_bound";
        case Invariant::ApQueueBound: return "ap_queue_bound";
        case Invariant::BacklogGap: return "backlog_gap";
        case Invariant::EnergyAvailable: return "energy_available";
        case Invariant::PowerCap: return "power_cap";
        case Invariant::BatteryRange: return "battery_range";
        case Invariant::TimeBudget: return "time_budget";
        case Invariant::Collection: return "collection";
        case Invariant::Staleness: return "staleness";
        case Invariant::DataAvailable: return "data_available";
    }
    return "?";
}

long InvariantReport::total() const noexcept {
    long sum = 0;
    for (const auto& e : entries) {
        sum += e.count;
    }
    return sum;
}

InvariantReport verify_invariants(const Trace& trace, const NetworkConfig& cfg) {
    constexpr double rel = 1e-9;
    InvariantReport rep;
    auto flag = [&](Invariant inv, int t) {
        auto& e = rep.entries[static_cast<std::size_t>(inv)];
        if (e.count++ == 0) {
            e.first_slot = t;
        }
    };
    const std::vector<double> theta = battery_capacity(cfg);
    const bool bounded = queue_aware(trace.algo);
    const bool stale = uses_feedback(trace.algo);
    const double v = cfg.control_v;

    for (int t = 0; t < trace.slots(); ++t) {
        double airtime = trace.at(t, 0).mu0;
        for (std::size_t i = 0; i < trace.devices; ++i) {
            const TraceRecord& r = trace.at(t, i);
            const DeviceParams& dev = cfg.devices[i];
            const double q_prev = t == 0 ? 0.0 : trace.at(t - 1, i).queue;
            const double e_prev = t == 0 ? 0.0 : trace.at(t - 1, i).battery;
            airtime += r.mu;

            if (bounded) {
                if (r.queue > (v + dev.a_max_bits) * (1 + rel)) {
                    flag(Invariant::QueueBound, t);
                }
                if (r.ap_queue > (v + dev.a_max_bits + dev.c_max_bits) * (1 + rel)) {
                    flag(Invariant::ApQueueBound, t);
                }
                if (r.ap_queue - r.queue > 2.0 * dev.c_max_bits * (1 + rel)) {
                    flag(Invariant::BacklogGap, t);
                }
            }
            if (r.energy > (e_prev + r.harvested) * (1 + rel)) {
                flag(Invariant::EnergyAvailable, t);
            }
            if (r.from_battery && r.energy > dev.p_max_w * r.mu * cfg.slot_s * (1 + rel)) {
                flag(Invariant::PowerCap, t);
            }
            const double cap = dev.kind == DeviceKind::TypeII ? theta[i] : 0.0;
            if (r.battery < 0.0 || r.battery > cap * (1 + rel)) {
                flag(Invariant::BatteryRange, t);
            }
            if (r.collect < 0.0 || r.collect > r.collectible * (1 + rel)) {
                flag(Invariant::Collection, t);
            }
            if (stale) {
                const double gap = q_prev - r.believed;
                if (gap < -1e-6 ||
                    gap > cfg.compulsory_interval * dev.a_max_bits * (1 + rel)) {
                    flag(Invariant::Staleness, t);
                }
            }
            if (r.delivered > q_prev * (1 + rel) + 1e-9) {
                flag(Invariant::DataAvailable, t);
            }
        }
        if (airtime > 1.0 + rel) {
            flag(Invariant::TimeBudget, t);
        }
    }
    return rep;
}

RunSummary summarize(const Trace& trace, const NetworkConfig& cfg, std::uint64_t seed) {
    RunSummary s;
    s.algo = trace.algo;
    s.control_v = cfg.control_v;
    s.eps_s = cfg.feedback_seconds();
    s.interval = cfg.compulsory_interval;
    s.seed = seed;
    s.invariants = verify_invariants(trace, cfg);

    const int slots = trace.slots();
    const std::size_t n = trace.devices;
    if (slots == 0 || n == 0) {
        return s;
    }
    const double horizon = slots;
    std::vector<double> per_device(n, 0.0);
    std::vector<double> q(static_cast<std::size_t>(slots));
    std::vector<double> ap(static_cast<std::size_t>(slots));
    for (std::size_t i = 0; i < n; ++i) {
        double delivered = 0.0;
        double admitted = 0.0;
        double util = 0.0;
        for (int t = 0; t < slots; ++t) {
            const TraceRecord& r = trace.at(t, i);
            delivered += r.delivered;
            admitted += r.collect;
            util += utility(r.collect);
            q[static_cast<std::size_t>(t)] = r.queue;
            ap[static_cast<std::size_t>(t)] = r.ap_queue;
        }
        per_device[i] = delivered / horizon;
        s.avg_delivered += delivered / horizon;
        s.avg_admitted += admitted / horizon;
        s.avg_utility += util / horizon;
        s.avg_queue += steady_state_average(q) / static_cast<double>(n);
        s.avg_ap_queue += steady_state_average(ap) / static_cast<double>(n);
    }

    std::vector<double> t1;
    std::vector<double> t2;
    for (std::size_t i = 0; i < n; ++i) {
        (cfg.devices[i].kind == DeviceKind::TypeI ? t1 : t2).push_back(per_device[i]);
    }
    s.jain_all = jain_index(per_device);
    if (!t1.empty()) {
        s.jain_t1 = jain_index(t1);
    }
    if (!t2.empty()) {
        s.jain_t2 = jain_index(t2);
    }
    s.no_traffic = !s.jain_all.has_value();
    return s;
}

}  // namespace wpmec
