#include <wpmec/harness.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

namespace wpmec {

RunResult run(const NetworkConfig& cfg, Algorithm algo, std::uint64_t seed,
              const SchedulerOptions& opts) {
    validate(cfg);
    const std::size_t n = cfg.size();
    RunResult out;
    out.trace.algo = algo;
    out.trace.devices = n;
    out.trace.records.reserve(static_cast<std::size_t>(cfg.horizon) * n);

    Environment env(cfg, seed);
    SystemState state = SystemState::zero(n);
    for (int t = 0; t < cfg.horizon; ++t) {
        const SlotState slot = env.next();
        StepOutcome o;
        try {
            o = step(algo, state, slot, cfg, opts);
        } catch (const std::exception& e) {
            throw RunAborted(t, e.what());
        }
        for (std::size_t i = 0; i < n; ++i) {
            TraceRecord r;
            r.t = t;
            r.device = i;
            r.kind = cfg.devices[i].kind;
            r.queue = o.next.queue[i];
            r.ap_queue = o.next.ap_queue[i];
            r.battery = o.next.battery[i];
            r.collect = o.decision.collect[i];
            r.collectible = slot.collectible[i];
            r.capacity = o.decision.capacity[i];
            r.delivered = o.decision.delivered[i];
            r.energy = o.decision.energy[i];
            r.mu = o.decision.mu[i];
            r.harvested = o.decision.harvested[i];
            r.mu0 = o.decision.mu0;
            r.in_due = o.due[i];
            r.believed = o.believed[i];
            r.role = o.decision.role[i];
            r.from_battery = o.from_battery[i] && o.decision.role[i] != Role::Silent;
            out.trace.records.push_back(r);
        }
        state = std::move(o.next);
    }
    out.summary = summarize(out.trace, cfg, seed);
    return out;
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = text.find(sep, start);
        std::string item(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        out.push_back(item);
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(key, "not a number: '" + s + "'");
}

}  // namespace

void SweepGrid::add(std::string_view spec) {
    const auto eq = spec.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("sweep", "expected key=v1,v2,... got '" + std::string(spec) + "'");
    }
    const std::string key(spec.substr(0, eq));
    for (const std::string& item : split(spec.substr(eq + 1), ',')) {
        if (item.empty()) {
            continue;
        }
        if (key == "V") {
            control_v.push_back(to_double(item, key));
        } else if (key == "eps") {
            eps_s.push_back(to_double(item, key));
        } else if (key == "m") {
            const double m = to_double(item, key);
            if (m != std::floor(m)) {
                throw ConfigError(key, "interval must be an integer");
            }
            interval.push_back(static_cast<int>(m));
        } else if (key == "algo") {
            algo.push_back(parse_algorithm(item));
        } else {
            throw ConfigError("sweep", "unknown key '" + key + "' (V, eps, m, algo)");
        }
    }
}

std::size_t SweepGrid::points() const noexcept {
    auto size = [](std::size_t k) { return std::max<std::size_t>(k, 1); };
    return size(control_v.size()) * size(eps_s.size()) * size(interval.size()) * size(algo.size());
}

std::vector<RunSummary> sweep(const NetworkConfig& base, Algorithm algo, const SweepGrid& grid,
                              std::span<const std::uint64_t> seeds, const SchedulerOptions& opts,
                              unsigned threads) {
    const std::size_t runs = grid.points() * seeds.size();
    if (runs > kMaxSweepRuns) {
        throw SweepTooLarge(runs);
    }

    struct Job {
        NetworkConfig cfg;
        Algorithm algo;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    jobs.reserve(runs);
    const std::vector<Algorithm> algos = grid.algo.empty() ? std::vector{algo} : grid.algo;
    const std::vector<double> vs = grid.control_v.empty() ? std::vector{base.control_v} : grid.control_v;
    const std::vector<double> eps =
        grid.eps_s.empty() ? std::vector{base.feedback_seconds()} : grid.eps_s;
    const std::vector<int> ms =
        grid.interval.empty() ? std::vector{base.compulsory_interval} : grid.interval;
    for (Algorithm a : algos) {
        for (double v : vs) {
            for (double e : eps) {
                for (int m : ms) {
                    NetworkConfig cfg = base;
                    cfg.control_v = v;
                    cfg.set_feedback_seconds(e);
                    cfg.compulsory_interval = m;
                    validate(cfg);
                    for (std::uint64_t s : seeds) {
                        jobs.push_back({cfg, a, s});
                    }
                }
            }
        }
    }

    std::vector<RunSummary> rows(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            try {
                rows[k] = run(jobs[k].cfg, jobs[k].algo, jobs[k].seed, opts).summary;
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs.size(), 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back(worker);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    std::stable_sort(rows.begin(), rows.end(), [](const RunSummary& a, const RunSummary& b) {
        return std::tuple(static_cast<int>(a.algo), a.control_v, a.eps_s, a.interval, a.seed) <
               std::tuple(static_cast<int>(b.algo), b.control_v, b.eps_s, b.interval, b.seed);
    });
    return rows;
}

std::vector<SeedMean> seed_means(std::span<const RunSummary> rows) {
    std::vector<SeedMean> out;
    std::size_t k = 0;
    while (k < rows.size()) {
        const RunSummary& head = rows[k];
        std::size_t end = k;
        while (end < rows.size() && rows[end].algo == head.algo &&
               rows[end].control_v == head.control_v && rows[end].eps_s == head.eps_s &&
               rows[end].interval == head.interval) {
            ++end;
        }
        SeedMean m;
        m.algo = head.algo;
        m.control_v = head.control_v;
        m.eps_s = head.eps_s;
        m.interval = head.interval;
        m.seeds = end - k;
        const double cnt = static_cast<double>(m.seeds);
        std::size_t j_all = 0, j1 = 0, j2 = 0;
        for (std::size_t r = k; r < end; ++r) {
            const RunSummary& s = rows[r];
            m.avg_delivered += s.avg_delivered / cnt;
            m.avg_admitted += s.avg_admitted / cnt;
            m.avg_utility += s.avg_utility / cnt;
            m.avg_queue += s.avg_queue / cnt;
            m.avg_ap_queue += s.avg_ap_queue / cnt;
            m.violations += s.invariants.total();
            if (s.jain_all) { m.jain_all += *s.jain_all; ++j_all; }
            if (s.jain_t1) { m.jain_t1 += *s.jain_t1; ++j1; }
            if (s.jain_t2) { m.jain_t2 += *s.jain_t2; ++j2; }
        }
        m.jain_all = j_all ? m.jain_all / static_cast<double>(j_all) : std::nan("");
        m.jain_t1 = j1 ? m.jain_t1 / static_cast<double>(j1) : std::nan("");
        m.jain_t2 = j2 ? m.jain_t2 / static_cast<double>(j2) : std::nan("");
        if (m.seeds > 1) {
            double ss = 0.0;
            for (std::size_t r = k; r < end; ++r) {
                const double d = rows[r].avg_delivered - m.avg_delivered;
                ss += d * d;
            }
            m.sd_delivered = std::sqrt(ss / (cnt - 1.0));
        }
        out.push_back(m);
        k = end;
    }
    return out;
}

std::string format_number(double x) {
    if (std::isnan(x)) {
        return "no-traffic";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x == 0.0 ? 0.0 : x);
    return buf;
}

namespace {

std::string fmt_opt(const std::optional<double>& x) {
    return x ? format_number(*x) : "no-traffic";
}

}  // namespace

void write_summary_csv(std::ostream& os, std::span<const RunSummary> rows) {
    os << "algo,V,eps_s,m,seed,avg_delivered,avg_admitted,avg_utility,jain_all,jain_t1,jain_t2,"
          "avg_Q_mean,avg_S_mean,violations\n";
    for (const RunSummary& s : rows) {
        os << to_string(s.algo) << ',' << format_number(s.control_v) << ','
           << format_number(s.eps_s) << ',' << s.interval << ',' << s.seed << ','
           << format_number(s.avg_delivered) << ',' << format_number(s.avg_admitted) << ','
           << format_number(s.avg_utility) << ',' << fmt_opt(s.jain_all) << ','
           << fmt_opt(s.jain_t1) << ',' << fmt_opt(s.jain_t2) << ','
           << format_number(s.avg_queue) << ',' << format_number(s.avg_ap_queue) << ','
           << s.invariants.total() << '\n';
    }
}

void write_seed_mean_csv(std::ostream& os, std::span<const SeedMean> rows) {
    os << "algo,V,eps_s,m,seeds,avg_delivered,sd_delivered,avg_admitted,avg_utility,jain_all,"
          "jain_t1,jain_t2,avg_Q_mean,avg_S_mean,violations\n";
    for (const SeedMean& s : rows) {
        os << to_string(s.algo) << ',' << format_number(s.control_v) << ','
           << format_number(s.eps_s) << ',' << s.interval << ',' << s.seeds << ','
           << format_number(s.avg_delivered) << ',' << format_number(s.sd_delivered) << ','
           << format_number(s.avg_admitted) << ',' << format_number(s.avg_utility) << ','
           << format_number(s.jain_all) << ',' << format_number(s.jain_t1) << ','
           << format_number(s.jain_t2) << ',' << format_number(s.avg_queue) << ','
           << format_number(s.avg_ap_queue) << ',' << s.violations << '\n';
    }
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
    os << "t,device,kind,Q,S,E,a,A,c,c_delivered,e,mu,harvested,mu0,in_Mt,Q_hat,role,"
          "from_battery\n";
    for (const TraceRecord& r : trace.records) {
        const char* role = r.role == Role::Data ? "data" : r.role == Role::Feedback ? "feedback" : "silent";
        os << r.t << ',' << r.device << ',' << (r.kind == DeviceKind::TypeI ? "I" : "II") << ','
           << format_number(r.queue) << ',' << format_number(r.ap_queue) << ','
           << format_number(r.battery) << ',' << format_number(r.collect) << ','
           << format_number(r.collectible) << ',' << format_number(r.capacity) << ','
           << format_number(r.delivered) << ',' << format_number(r.energy) << ','
           << format_number(r.mu) << ',' << format_number(r.harvested) << ','
           << format_number(r.mu0) << ',' << (r.in_due ? 1 : 0) << ','
           << format_number(r.believed) << ',' << role << ',' << (r.from_battery ? 1 : 0)
           << '\n';
    }
}

}  // namespace wpmec
