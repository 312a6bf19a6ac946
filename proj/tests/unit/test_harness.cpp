#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "rstoda/errors.hpp"
#include "rstoda/harness.hpp"

using namespace rstoda;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("rstoda_harness_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> read_csv(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::ConfigError;
}

}  // namespace

TEST_CASE("registry lists the sixteen checks sorted with tags") {
    const auto& reg = check_registry();
    REQUIRE(reg.size() == 16);
    for (std::size_t i = 1; i < reg.size(); ++i) CHECK(reg[i - 1].name < reg[i].name);
    for (const auto& c : reg) {
        CHECK(!c.tag.empty());
        CHECK(c.tolerance > 0.0);
    }
}

TEST_CASE("config parsing") {
    const ScenarioConfig d = parse_config(json::object());
    CHECK(d.params.n == 3);
    CHECK(d.flows.size() == 6);
    CHECK(d.checks.empty());

    const json j = json::parse(R"({
        "params": {"gamma": [0.4, 0.1], "eta": 1.2, "N": 2},
        "seed": 7, "draws": 2,
        "state": {"x": [[0.1, 0.0], [1.3, 0.2]], "p": [[0.0, 0.0], [0.2, -0.1]]},
        "flows": [{"m": -2, "duration": [0.1, 0.05], "samples": 5}],
        "checks": ["ts14", {"name": "h6a", "tolerance": 1e-12}]
    })");
    const ScenarioConfig c = parse_config(j);
    CHECK(c.params.gamma == cplx(0.4, 0.1));
    CHECK(c.params.eta == cplx(1.2, 0.0));
    CHECK(c.seed == 7u);
    REQUIRE(c.state.has_value());
    CHECK(c.state->x[1] == cplx(1.3, 0.2));
    CHECK(c.flows[0].m == -2);
    CHECK(c.flows[0].duration == cplx(0.1, 0.05));
    CHECK(c.checks[1].tolerance.value() == 1e-12);
    CHECK(parse_config(config_to_json(c)).state->p[1] == c.state->p[1]);
}

TEST_CASE("config errors") {
    CHECK(kind_of([] { parse_config(json::parse(R"({"bogus": 1})")); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { parse_config(json::parse(R"({"checks": ["nope"]})")); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { parse_config(json::parse(R"({"params": {"gamma": [1, 2, 3]}})")); }) ==
          ErrorKind::ConfigError);
    CHECK(kind_of([] { parse_config(json::parse(R"({"flows": [{"m": 0}]})")); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] {
              parse_config(json::parse(R"({"params": {"N": 2}, "state": {"x": [0.1, 0.1], "p": [0, 0]}})"));
          }) == ErrorKind::CollisionSingularity);
}

TEST_CASE("single check config gives one record") {
    ScenarioConfig c = default_config();
    c.checks = {{"ts14", std::nullopt}};
    const VerificationReport r = run_verify(c, 1);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].name == "ts14");
    CHECK(r.records[0].tag == "ts14");
    CHECK(r.all_passed());
}

TEST_CASE("tolerance override can fail a check") {
    ScenarioConfig c = default_config();
    c.checks = {{"gradient-FD", 1e-30}};
    const VerificationReport r = run_verify(c, 1);
    CHECK(!r.all_passed());
    CHECK(r.to_json()["summary"]["failed"] == 1);
}

TEST_CASE("default verify passes and is deterministic across thread counts") {
    const ScenarioConfig c = default_config();
    const VerificationReport a = run_verify(c, 1);
    const VerificationReport b = run_verify(c, 3);
    CHECK(a.records.size() == 16);
    for (const auto& r : a.records) {
        CAPTURE(r.name);
        CAPTURE(r.residual);
        CHECK(r.passed);
    }
    CHECK(a.to_json(false).dump() == b.to_json(false).dump());
}

TEST_CASE("sweep axes") {
    ScenarioConfig c = default_config();
    c.checks = {{"ts14", std::nullopt}, {"lax-residual", std::nullopt}};
    const SweepResult empty = run_sweep(c, "N", {});
    CHECK(empty.all_passed);
    CHECK(empty.table["rows"].empty());

    const SweepResult sizes = run_sweep(c, "N", {1, 2, 3, 4});
    CHECK(sizes.all_passed);
    CHECK(sizes.table["rows"].size() == 4);

    CHECK(with_axis_value(c, "gamma", 0.3).params.gamma == cplx(0.3, 0.0));
    CHECK(with_axis_value(c, "rtol", 1e-8).flows[0].rtol == 1e-8);
    CHECK(with_axis_value(c, "duration", 0.1).flows[3].duration == cplx(0.1, 0.0));
    CHECK(kind_of([&] { with_axis_value(c, "N", 2.5); }) == ErrorKind::ConfigError);
    CHECK(kind_of([&] { run_sweep(c, "temperature", {}); }) == ErrorKind::ConfigError);
}

TEST_CASE("rtol sweep lowers the flow-dependent residuals") {
    ScenarioConfig c = default_config();
    c.checks = {{"commutator-defect", std::nullopt}, {"tau-zero-correspondence", std::nullopt}};
    const SweepResult s = run_sweep(c, "rtol", {1e-8, 1e-10});
    for (const char* name : {"commutator-defect", "tau-zero-correspondence"}) {
        const double coarse = s.table["rows"][0]["checks"][name]["residual"];
        const double fine = s.table["rows"][1]["checks"][name]["residual"];
        CAPTURE(name);
        CHECK(fine < coarse);
    }
}

TEST_CASE("simulate: free particle moves linearly and reruns are identical") {
    ScenarioConfig c = parse_config(json::parse(R"({
        "params": {"N": 1}, "state": {"x": [[0.2, 0.1]], "p": [[0.1, 0.0]]},
        "flows": [{"m": 1, "duration": [0.3, 0.0], "samples": 7}]
    })"));
    const auto dir = scratch_dir("free");
    const auto files = run_simulate(c, dir / "a");
    run_simulate(c, dir / "b");
    REQUIRE(files.size() == 1);
    CHECK(slurp(files[0]) == slurp(dir / "b" / files[0].filename()));

    const auto rows = read_csv(files[0]);
    REQUIRE(rows.size() == 7);
    REQUIRE(rows[0].size() == 2 + 4 + 2);
    const cplx v = velocity_map(c.params, *c.state)[0];
    for (const auto& r : rows) {
        const cplx expected = c.state->x[0] + r[0] * v;
        CHECK(std::abs(cplx(r[2], r[3]) - expected) <= 1e-10);
    }
}

TEST_CASE("simulate: invariant columns are conserved") {
    ScenarioConfig c = default_config();
    FlowSpec f;
    f.m = 2;
    f.duration = 0.3;
    c.flows = {f};
    const auto files = run_simulate(c, scratch_dir("invariants"));
    const auto rows = read_csv(files[0]);
    const std::size_t n = c.params.n;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t col = 2 + 4 * n + 2 * k;
        const cplx first(rows.front()[col], rows.front()[col + 1]);
        for (const auto& r : rows) CHECK(std::abs(cplx(r[col], r[col + 1]) - first) <= 1e-7 * std::abs(first));
    }
}

TEST_CASE("thread limit from the environment") {
    ::setenv("RSTODA_THREADS", "2", 1);
    CHECK(thread_limit() == 2);
    ::setenv("RSTODA_THREADS", "zero", 1);
    CHECK(thread_limit() >= 1);
    ::unsetenv("RSTODA_THREADS");
    CHECK(thread_limit() >= 1);
}
