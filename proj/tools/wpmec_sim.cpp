// Command-line driver: single runs and parameter sweeps.

#include <wpmec/harness.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"Wireless-powered edge offloading simulator"};

    std::string config_path;
    std::string algo_name = "ers-on";
    std::uint64_t seed = 1;
    int slots = -1;
    std::vector<std::string> sweeps;
    unsigned seeds = 1;
    std::string out_dir;
    bool trace = false;
    unsigned threads = 0;

    app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--algo", algo_name, "ers-rn, ers-on, hdo-on, eot-on, pfn or gan");
    app.add_option("--seed", seed, "first seed");
    app.add_option("--slots", slots, "override the horizon");
    app.add_option("--sweep", sweeps, "key=v1,v2,... with key V, eps (seconds), m or algo");
    app.add_option("--seeds", seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_flag("--trace", trace, "also write per-slot traces");
    app.add_option("--threads", threads, "worker threads (0: all cores)");

    CLI11_PARSE(app, argc, argv);

    try {
        wpmec::NetworkConfig cfg =
            config_path.empty() ? wpmec::default_config() : wpmec::load_config(config_path);
        if (slots >= 0) {
            cfg.horizon = slots;
        }
        const wpmec::Algorithm algo = wpmec::parse_algorithm(algo_name);
        wpmec::SweepGrid grid;
        for (const auto& s : sweeps) {
            grid.add(s);
        }
        std::vector<std::uint64_t> seed_list;
        for (unsigned k = 0; k < seeds; ++k) {
            seed_list.push_back(seed + k);
        }

        fs::create_directories(out_dir);
        const auto rows = wpmec::sweep(cfg, algo, grid, seed_list, {}, threads);
        {
            std::ofstream os(fs::path(out_dir) / "summary.csv", std::ios::binary);
            wpmec::write_summary_csv(os, rows);
        }
        {
            const auto means = wpmec::seed_means(rows);
            std::ofstream os(fs::path(out_dir) / "summary_mean.csv", std::ios::binary);
            wpmec::write_seed_mean_csv(os, means);
        }
        if (trace) {
            // Traces are large; only written for the base grid point.
            for (std::uint64_t s : seed_list) {
                const auto res = wpmec::run(cfg, algo, s);
                std::ofstream os(fs::path(out_dir) / ("trace_" + std::string(wpmec::to_string(algo)) +
                                                      "_" + std::to_string(s) + ".csv"),
                                 std::ios::binary);
                wpmec::write_trace_csv(os, res.trace);
            }
        }
        long violations = 0;
        for (const auto& r : rows) {
            violations += r.invariants.total();
        }
        std::cout << rows.size() << " runs, " << violations << " invariant violations\n";
    } catch (const wpmec::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
