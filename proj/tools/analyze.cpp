// Config-driven experiment runner: builds the space/ideal/sequence from a
// JSON config, runs the requested analyses, and writes a deterministic JSON
// report (plus an optional CSV of the first grid classification).
//
// Exit codes: 0 all verdicts hold, 1 any fails, 2 any unknown (none
// failing), 3 config or validation error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "roughlim/roughlim.hpp"

namespace {

std::uint64_t window_cap_from_env() {
    if (const char* v = std::getenv("ROUGHLIM_WINDOW_CAP")) {
        char* end = nullptr;
        const unsigned long long parsed = std::strtoull(v, &end, 10);
        if (end && *end == '\0' && parsed >= 1) return parsed;
        std::cerr << "warning: ignoring unparsable ROUGHLIM_WINDOW_CAP=\"" << v << "\"\n";
    }
    return roughlim::kDefaultWindowCap;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rough ideal convergence analyses over a JSON experiment config"};
    app.name("analyze");

    std::string config_path;
    std::string out_path;
    std::string csv_path;
    std::uint64_t window_override = 0;
    std::string epsilons_arg;

    app.add_option("config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out_path, "write the report JSON here (default: stdout)");
    app.add_option("--csv", csv_path, "write the first grid classification as CSV");
    app.add_option("--window", window_override, "override the enumeration window");
    app.add_option("--epsilons", epsilons_arg, "comma-separated epsilon schedule override");

    CLI11_PARSE(app, argc, argv);

    const std::uint64_t cap = window_cap_from_env();

    roughlim::ExperimentConfig cfg;
    try {
        cfg = roughlim::load_config(config_path, cap);
        if (window_override != 0) {
            if (window_override > cap) throw roughlim::ConfigError("--window exceeds window cap");
            cfg.window = window_override;
        }
        if (!epsilons_arg.empty()) {
            std::vector<double> eps;
            std::stringstream ss(epsilons_arg);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                const double e = std::stod(tok);
                if (!(e > 0)) throw roughlim::ConfigError("--epsilons entries must be positive");
                eps.push_back(e);
            }
            if (eps.empty()) throw roughlim::ConfigError("--epsilons parsed to an empty schedule");
            cfg.schedule.epsilons = std::move(eps);
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    }

    try {
        const roughlim::Report report = roughlim::run_experiment(cfg);

        if (!csv_path.empty()) {
            if (const auto* est = report.first_estimate())
                roughlim::emit_grid_csv(*est, csv_path);
            else
                std::ofstream(csv_path)
                    << "candidate,classification,master_density_upper,certificate_id\n";
        }

        const std::string text = report.document.dump(2) + "\n";
        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(out_path);
            if (!out) {
                std::cerr << "cannot write report to \"" << out_path << "\"\n";
                return 3;
            }
            out << text;
        }
        return report.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
