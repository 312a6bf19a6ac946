// rstoda command line: simulate, verify and sweep scenarios from JSON configs.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 config error,
// 3 runtime error. Errors are printed to stderr as
// {"error": {"kind": ..., "message": ...}} and, for verify and sweep, also
// written to the report path.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rstoda/errors.hpp"
#include "rstoda/harness.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

nlohmann::json error_json(std::string_view kind, const std::string& message) {
    return {{"error", {{"kind", std::string(kind)}, {"message", message}}}};
}

void write_json(const std::string& path, const nlohmann::json& j) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw rstoda::Error(rstoda::ErrorKind::ConfigError, "cannot write report " + path);
    out << j.dump(2) << '\n';
}

int report_error(const nlohmann::json& err, const std::string& report_path, int code) {
    std::cerr << err.dump() << '\n';
    try {
        write_json(report_path, err);
    } catch (const std::exception&) {
    }
    return code;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
            throw rstoda::Error(rstoda::ErrorKind::ConfigError, "invalid sweep value '" + item + "'");
        values.push_back(v);
    }
    return values;
}

/// Loading and validation failures are config errors whatever their kind.
rstoda::ScenarioConfig load(const std::string& path) { return rstoda::load_config(path); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ruijsenaars-Schneider pole dynamics and 2D Toda tau-functions"};
    app.require_subcommand(1);

    std::string config_path, out_dir, report_path, axis, values_csv;

    auto* simulate = app.add_subcommand("simulate", "integrate the configured flows and write CSV trajectories");
    simulate->add_option("--config", config_path, "scenario JSON")->required();
    simulate->add_option("--out", out_dir, "output directory")->required();

    auto* verify = app.add_subcommand("verify", "run the registered identity checks");
    verify->add_option("--config", config_path, "scenario JSON")->required();
    verify->add_option("--report", report_path, "report JSON")->required();

    auto* sweep = app.add_subcommand("sweep", "repeat verify along one parameter axis");
    sweep->add_option("--config", config_path, "scenario JSON")->required();
    sweep->add_option("--axis", axis, "gamma, eta, N, duration or rtol")->required();
    sweep->add_option("--values", values_csv, "comma separated values")->required();
    sweep->add_option("--report", report_path, "aggregate JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitConfig;
    }

    rstoda::ScenarioConfig config;
    std::vector<double> values;
    try {
        config = load(config_path);
        if (sweep->parsed()) values = parse_values(values_csv);
    } catch (const rstoda::Error& e) {
        return report_error(error_json(rstoda::to_string(e.kind()), e.what()), report_path, kExitConfig);
    } catch (const std::exception& e) {
        return report_error(error_json("ConfigError", e.what()), report_path, kExitConfig);
    }

    try {
        if (simulate->parsed()) {
            for (const auto& p : rstoda::run_simulate(config, out_dir)) std::cout << p.string() << '\n';
            return kExitPass;
        }
        if (verify->parsed()) {
            const rstoda::VerificationReport report = rstoda::run_verify(config);
            nlohmann::json j = report.to_json();
            j["config"] = rstoda::config_to_json(config);
            write_json(report_path, j);
            for (const auto& r : report.records)
                std::printf("%-24s %-6s residual %.3e tol %.1e %s\n", r.name.c_str(), r.tag.c_str(), r.residual,
                            r.tolerance, r.passed ? "PASS" : "FAIL");
            std::printf("%zu/%zu checks passed\n", report.passed_count(), report.records.size());
            return report.all_passed() ? kExitPass : kExitFail;
        }
        rstoda::SweepResult result;
        try {
            result = rstoda::run_sweep(config, axis, values);
        } catch (const rstoda::Error& e) {
            if (e.kind() != rstoda::ErrorKind::ConfigError && e.kind() != rstoda::ErrorKind::CollisionSingularity)
                throw;
            return report_error(error_json(rstoda::to_string(e.kind()), e.what()), report_path, kExitConfig);
        }
        write_json(report_path, result.table);
        std::printf("%zu sweep rows, %s\n", result.table["rows"].size(), result.all_passed ? "all pass" : "failures");
        return result.all_passed ? kExitPass : kExitFail;
    } catch (const rstoda::Error& e) {
        return report_error(error_json(rstoda::to_string(e.kind()), e.what()), report_path, kExitRuntime);
    } catch (const std::exception& e) {
        return report_error(error_json("RuntimeError", e.what()), report_path, kExitRuntime);
    }
}
