#include "rstoda/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <thread>

#include "rstoda/backlund.hpp"
#include "rstoda/errors.hpp"
#include "rstoda/random_state.hpp"
#include "rstoda/tau.hpp"
#include "rstoda/wave.hpp"

namespace rstoda {

using nlohmann::json;

namespace {

// --- JSON helpers -----------------------------------------------------------

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

cplx complex_from_json(const json& j, const std::string& key) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    config_error(key + " must be a number or an [re, im] pair");
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

CVector vector_from_json(const json& j, const std::string& key) {
    if (!j.is_array()) config_error(key + " must be a list of [re, im] pairs");
    CVector v;
    for (const auto& e : j) v.push_back(complex_from_json(e, key));
    return v;
}

json vector_to_json(const CVector& v) {
    json a = json::array();
    for (const auto& z : v) a.push_back(complex_to_json(z));
    return a;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            config_error("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T number_at(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) config_error(std::string(key) + " must be an integer");
    } else {
        if (!v.is_number()) config_error(std::string(key) + " must be a number");
    }
    return v.get<T>();
}

FlowSpec flow_from_json(const json& j) {
    if (!j.is_object()) config_error("each flow must be an object");
    reject_unknown_keys(j, {"m", "duration", "samples", "rtol", "atol", "max_step", "max_steps"}, "flow");
    FlowSpec f;
    f.m = number_at<int>(j, "m", f.m);
    if (j.contains("duration")) f.duration = complex_from_json(j.at("duration"), "duration");
    f.samples = number_at<std::size_t>(j, "samples", f.samples);
    f.rtol = number_at<double>(j, "rtol", f.rtol);
    f.atol = number_at<double>(j, "atol", f.atol);
    f.max_step = number_at<double>(j, "max_step", f.max_step);
    f.max_steps = number_at<std::size_t>(j, "max_steps", f.max_steps);
    return f;
}

json flow_to_json(const FlowSpec& f) {
    return json{{"m", f.m},           {"duration", complex_to_json(f.duration)},
                {"samples", f.samples}, {"rtol", f.rtol},
                {"atol", f.atol},     {"max_step", f.max_step},
                {"max_steps", f.max_steps}};
}

void validate_config(ScenarioConfig& c) {
    c.params.validate();
    if (c.params.n == 0) config_error("N must be at least 1");
    if (c.draws < 1) config_error("draws must be at least 1");
    for (const auto& f : c.flows) f.validate(c.params);
    for (const auto& chk : c.checks) {
        const auto& reg = check_registry();
        if (std::none_of(reg.begin(), reg.end(), [&](const CheckInfo& i) { return i.name == chk.name; }))
            config_error("unknown check '" + chk.name + "'");
        if (chk.tolerance && !(*chk.tolerance > 0.0)) config_error("tolerance of '" + chk.name + "' must be positive");
    }
    if (c.state) {
        if (c.state->x.size() != c.params.n || c.state->p.size() != c.params.n)
            config_error("state.x and state.p must have N entries");
        check_state(c.params, *c.state);
    }
}

// --- check helpers ----------------------------------------------------------

struct CheckOutcome {
    double residual = 0.0;
    std::string detail;
};

using CheckFn = std::function<CheckOutcome(const ScenarioConfig&, std::uint64_t)>;

std::vector<PhaseState> check_states(const ScenarioConfig& c, std::uint64_t stream) {
    if (c.state) return {*c.state};
    SplitMix64 rng(stream);
    std::vector<PhaseState> out;
    for (int k = 0; k < c.draws; ++k) out.push_back(random_state(c.params, rng));
    return out;
}

double max_abs_of(const CVector& v) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

double max_abs_diff_of(const CVector& a, const CVector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

template <class F>
CheckOutcome per_state(const ScenarioConfig& c, std::uint64_t stream, F&& f) {
    CheckOutcome out;
    const auto states = check_states(c, stream);
    for (const auto& s : states) out.residual = std::max(out.residual, f(s));
    out.detail = std::to_string(states.size()) + " states";
    return out;
}

const int kFlowIndices[] = {1, 2, 3, -1, -2, -3};
const char* const kSweepAxes[] = {"gamma", "eta", "N", "duration", "rtol"};

Gradients fd_gradients(const ModelParams& pr, const PhaseState& s, int m, double h) {
    Gradients g{CVector(pr.n), CVector(pr.n)};
    for (std::size_t i = 0; i < pr.n; ++i) {
        PhaseState a = s, b = s;
        a.p[i] += h;
        b.p[i] -= h;
        g.dp[i] = (hamiltonian(pr, a, m) - hamiltonian(pr, b, m)) / (2.0 * h);
        a = s;
        b = s;
        a.x[i] += h;
        b.x[i] -= h;
        g.dx[i] = (hamiltonian(pr, a, m) - hamiltonian(pr, b, m)) / (2.0 * h);
    }
    return g;
}

double max_modulus(const CVector& w) { return max_abs_of(w); }

double min_modulus(const CVector& w) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& v : w) m = std::min(m, std::abs(v));
    return m;
}

bool well_separated(const CVector& w, cplx z, double rel) {
    return std::all_of(w.begin(), w.end(), [&](cplx wk) { return std::abs(z - wk) >= rel * std::abs(z); });
}

cplx random_point(SplitMix64& rng, double lo, double hi) {
    return std::polar(rng.uniform(lo, hi), rng.uniform(-M_PI, M_PI));
}

HierarchyTimes random_times(SplitMix64& rng, bool negative) {
    HierarchyTimes t;
    t.positive[1] = cplx(rng.uniform(-0.1, 0.1), rng.uniform(-0.05, 0.05));
    t.positive[2] = cplx(rng.uniform(-0.05, 0.05), rng.uniform(-0.03, 0.03));
    if (negative) t.negative[1] = cplx(rng.uniform(-0.1, 0.1), rng.uniform(-0.05, 0.05));
    return t;
}

enum class Bilinear { Positive, Mixed };

CheckOutcome bilinear_check(const ScenarioConfig& c, std::uint64_t stream, Bilinear which) {
    constexpr int kPerState = 10;
    SplitMix64 rng(stream ^ 0x5bd1e995ULL);
    CheckOutcome out;
    int evaluated = 0;
    for (const auto& s : check_states(c, stream)) {
        const TauContext ctx(c.params, s);
        const double q = std::abs(c.params.q());
        for (int k = 0, attempts = 0; k < kPerState && attempts < 50 * kPerState; ++attempts) {
            const HierarchyTimes t = random_times(rng, which == Bilinear::Mixed);
            const ZeroSet z = tau_zeros(ctx, t);
            const cplx w = random_point(rng, 0.5 * min_modulus(z.w), 1.5 * max_modulus(z.w));
            const cplx lambda = random_point(rng, 0.3, 3.0);
            const cplx other = random_point(rng, 0.3, 3.0);
            if (!well_separated(z.w, w, 1e-3) || !well_separated(z.w, q * w, 1e-3) ||
                !well_separated(z.w, w / q, 1e-3))
                continue;
            try {
                const IdentityResidual r = which == Bilinear::Positive
                                               ? bilinear_residual_positive(ctx, t, w, lambda, other)
                                               : bilinear_residual_mixed(ctx, t, w, lambda, other);
                out.residual = std::max(out.residual, r.relative());
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::ResolventSingular) throw;
                continue;
            }
            ++k;
            ++evaluated;
        }
    }
    out.detail = std::to_string(evaluated) + " draws";
    return out;
}

HierarchyTimes tau_form_times() {
    HierarchyTimes t;
    t.positive[1] = cplx(0.05, 0.02);
    t.positive[2] = cplx(0.03, -0.01);
    t.negative[1] = cplx(-0.04, 0.01);
    return t;
}

cplx backlund_mu(const TauContext& ctx) { return 5.0 * spectral_radius_bound(ctx.l0()) * std::polar(1.0, 0.7); }

// --- the registry -----------------------------------------------------------

struct Entry {
    CheckInfo info;
    CheckFn run;
};

std::vector<Entry> build_registry() {
    std::vector<Entry> r;
    r.push_back({{"ts14", "ts14", "commutation relation of W and L (relative)", 1e-11},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     return per_state(c, st, [&](const PhaseState& s) { return commutation_residual(c.params, s); });
                 }});
    r.push_back({{"lax-residual", "ts16b", "max |dL/dt + [L, M']| with analytic accelerations", 1e-10},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     return per_state(c, st, [&](const PhaseState& s) { return lax_equation_residual(c.params, s); });
                 }});
    r.push_back({{"h6a", "h6a", "max_i |A^(i) + dL/dx_i + [C^(i), L]|", 1e-11},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     return per_state(c, st,
                                      [&](const PhaseState& s) { return a_matrix_identity_residual(c.params, s); });
                 }});
    r.push_back({{"gradient-FD", "h3", "analytic gradients of H_m, |m| <= 3, against central differences (relative)",
                  1e-7},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     return per_state(c, st, [&](const PhaseState& s) {
                         double worst = 0.0;
                         for (int m : kFlowIndices) {
                             const Gradients an = hamiltonian_gradients(c.params, s, m);
                             const Gradients fd = fd_gradients(c.params, s, m, 1e-6);
                             const double scale = std::max(max_abs_of(an.dp), max_abs_of(an.dx));
                             worst = std::max(worst, std::max(max_abs_diff_of(an.dp, fd.dp),
                                                              max_abs_diff_of(an.dx, fd.dx)) / scale);
                         }
                         return worst;
                     });
                 }});
    r.push_back({{"involution", "ts17", "|{H_m, H_n}| / (|H_m| |H_n|), m, n in +-1..3", 1e-8},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     return per_state(c, st, [&](const PhaseState& s) {
                         double worst = 0.0;
                         for (int m : kFlowIndices)
                             for (int n : kFlowIndices) {
                                 const double scale =
                                     std::abs(hamiltonian(c.params, s, m)) * std::abs(hamiltonian(c.params, s, n));
                                 worst = std::max(worst, std::abs(poisson_bracket(c.params, s, m, n)) / scale);
                             }
                         return worst;
                     });
                 }});
    r.push_back({{"cauchy-n11", "n11", "max |C C^{-1} - I| with the closed-form inverse", 1e-10},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     return per_state(c, st, [&](const PhaseState& s) {
                         const CVector w = exp_positions(c.params, s.x);
                         const ComplexMatrix prod = cauchy_matrix(c.params, w) * cauchy_inverse(c.params, w);
                         return (prod - ComplexMatrix::identity(c.params.n)).max_abs();
                     });
                 }});
    r.push_back({{"similarity-Lbar", "n9", "max |L^{-1} + S Lbar^T S^{-1}|, S = W^{-1} U_-", 1e-9},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     return per_state(c, st, [&](const PhaseState& s) { return similarity_residual(c.params, s); });
                 }});
    r.push_back({{"tau-zero-correspondence", "t1",
                  "max |x_i(t) - zeros of tau'| along each configured flow (draws with log-spread > 25 skipped)",
                  1e-6},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     CheckOutcome out;
                     int compared = 0, skipped = 0;
                     for (const auto& s : check_states(c, st)) {
                         const TauContext ctx(c.params, s);
                         for (const auto& spec : c.flows) {
                             const Trajectory flow = integrate_flow(c.params, s, spec);
                             double spread = 0.0;
                             for (const auto& smp : flow.samples)
                                 spread = std::max(spread, log_magnitude_spread(c.params, smp.state.x));
                             if (spread > kResolvableLogSpread) {
                                 ++skipped;
                                 continue;
                             }
                             const auto zeros = track_zeros_along(ctx, spec.m, spec.duration, spec.samples);
                             for (std::size_t k = 0; k < spec.samples; ++k)
                                 out.residual = std::max(out.residual,
                                                         max_abs_diff_of(zeros[k].x, flow.samples[k].state.x));
                             ++compared;
                         }
                     }
                     out.detail = std::to_string(compared) + " flows compared, " + std::to_string(skipped) +
                                  " skipped (log-spread > 25)";
                     return out;
                 }});
    r.push_back({{"bilinear-t4", "t4", "three-term identity with +[lambda^-1], -[mu^-1] (relative)", 1e-9},
                 [](const ScenarioConfig& c, std::uint64_t st) { return bilinear_check(c, st, Bilinear::Positive); }});
    r.push_back({{"bilinear-t7", "t7", "mixed identity with +[lambda^-1], tbar - [nu] (relative)", 1e-9},
                 [](const ScenarioConfig& c, std::uint64_t st) { return bilinear_check(c, st, Bilinear::Mixed); }});
    r.push_back({{"toda-mkp18a", "mkp18a", "Toda equation in tau form, central differences (relative)", 1e-5},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     return per_state(c, st, [&](const PhaseState& s) {
                         const TauContext ctx(c.params, s);
                         const HierarchyTimes t = tau_form_times();
                         const cplx w = separated_point(c.params, tau_zeros(ctx, t).w);
                         return toda_equation_residual(ctx, t, w).relative();
                     });
                 }});
    r.push_back({{"mkp-mkp18", "mkp18", "mKP equation in tau form, central differences (relative)", 1e-5},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     return per_state(c, st, [&](const PhaseState& s) {
                         const TauContext ctx(c.params, s);
                         const HierarchyTimes t = tau_form_times();
                         const cplx w = separated_point(c.params, tau_zeros(ctx, t).w);
                         return mkp_equation_residual(ctx, t, w).relative();
                     });
                 }});
    r.push_back({{"residue-h1h2", "h1=h2", "contour residue velocities against trace velocities, |m| <= 3", 1e-8},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     return per_state(c, st, [&](const PhaseState& s) {
                         double worst = 0.0;
                         for (int m : kFlowIndices)
                             worst = std::max(worst, residue_velocity_identity(c.params, s, m).max_difference());
                         return worst;
                     });
                 }});
    r.push_back({{"backlund-g3", "g3", "both Backlund pair equations, |mu| = 5 spectral radius", 1e-8},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     return per_state(c, st, [&](const PhaseState& s) {
                         const TauContext ctx(c.params, s);
                         return max_abs_of(backlund_residual(c.params, backlund_partner(ctx, {}, backlund_mu(ctx))));
                     });
                 }});
    r.push_back({{"discrete-g6", "g6", "discrete-time equation, |mu| = 5 spectral radius", 1e-8},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     return per_state(c, st, [&](const PhaseState& s) {
                         const TauContext ctx(c.params, s);
                         return max_abs_of(discrete_time_residual(ctx, {}, backlund_mu(ctx)));
                     });
                 }});
    r.push_back({{"commutator-defect", "sec1", "flow_b(flow_a) - flow_a(flow_b) for neighbouring configured flows",
                  1e-6},
                 [](const ScenarioConfig& c, std::uint64_t st) {
                     return per_state(c, st, [&](const PhaseState& s) {
                         double worst = 0.0;
                         const std::size_t nf = c.flows.size();
                         for (std::size_t i = 0; nf > 1 && i < nf; ++i) {
                             const FlowSpec& a = c.flows[i];
                             const FlowSpec& b = c.flows[(i + 1) % nf];
                             if (a.m == b.m) continue;
                             worst = std::max(worst, flow_commutator_defect(c.params, s, a, b));
                         }
                         return worst;
                     });
                 }});
    std::sort(r.begin(), r.end(), [](const Entry& a, const Entry& b) { return a.info.name < b.info.name; });
    return r;
}

const std::vector<Entry>& registry() {
    static const std::vector<Entry> r = build_registry();
    return r;
}

const Entry& find_entry(const std::string& name) {
    for (const auto& e : registry())
        if (e.info.name == name) return e;
    config_error("unknown check '" + name + "'");
}

std::vector<CheckSettings> enabled_checks(const ScenarioConfig& c) {
    std::vector<CheckSettings> out = c.checks;
    if (out.empty())
        for (const auto& e : registry()) out.push_back({e.info.name, std::nullopt});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    out.erase(std::unique(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name == b.name; }),
              out.end());
    return out;
}

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

}  // namespace

// --- configs ----------------------------------------------------------------

ScenarioConfig default_config() {
    ScenarioConfig c;
    c.params = ModelParams{};
    c.params.n = 3;
    for (int m : kFlowIndices) {
        FlowSpec f;
        f.m = m;
        f.duration = 0.3;
        f.rtol = 1e-10;
        f.atol = 1e-12;
        f.samples = 11;
        c.flows.push_back(f);
    }
    return c;
}

ScenarioConfig parse_config(const json& j) {
    if (!j.is_object()) config_error("config must be a JSON object");
    reject_unknown_keys(j, {"params", "seed", "draws", "state", "flows", "checks"}, "config");
    ScenarioConfig c = default_config();
    if (j.contains("params")) {
        const json& p = j.at("params");
        if (!p.is_object()) config_error("params must be an object");
        reject_unknown_keys(p, {"gamma", "eta", "N", "collision_eps", "max_flow_index"}, "params");
        if (p.contains("gamma")) c.params.gamma = complex_from_json(p.at("gamma"), "gamma");
        if (p.contains("eta")) c.params.eta = complex_from_json(p.at("eta"), "eta");
        c.params.n = number_at<std::size_t>(p, "N", c.params.n);
        c.params.collision_eps = number_at<double>(p, "collision_eps", c.params.collision_eps);
        c.params.max_flow_index = number_at<int>(p, "max_flow_index", c.params.max_flow_index);
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer()) config_error("seed must be an integer");
        c.seed = j.at("seed").is_number_unsigned() ? j.at("seed").get<std::uint64_t>()
                                                   : static_cast<std::uint64_t>(j.at("seed").get<std::int64_t>());
    }
    c.draws = number_at<int>(j, "draws", c.draws);
    if (j.contains("state")) {
        const json& s = j.at("state");
        if (!s.is_object() || !s.contains("x") || !s.contains("p")) config_error("state needs x and p");
        reject_unknown_keys(s, {"x", "p"}, "state");
        c.state = PhaseState{vector_from_json(s.at("x"), "state.x"), vector_from_json(s.at("p"), "state.p")};
    }
    if (j.contains("flows")) {
        if (!j.at("flows").is_array()) config_error("flows must be a list");
        c.flows.clear();
        for (const auto& f : j.at("flows")) c.flows.push_back(flow_from_json(f));
    }
    if (j.contains("checks")) {
        if (!j.at("checks").is_array()) config_error("checks must be a list");
        for (const auto& e : j.at("checks")) {
            if (e.is_string()) {
                c.checks.push_back({e.get<std::string>(), std::nullopt});
            } else if (e.is_object() && e.contains("name") && e.at("name").is_string()) {
                reject_unknown_keys(e, {"name", "tolerance"}, "check");
                CheckSettings cs{e.at("name").get<std::string>(), std::nullopt};
                if (e.contains("tolerance")) cs.tolerance = number_at<double>(e, "tolerance", 0.0);
                c.checks.push_back(cs);
            } else {
                config_error("each check must be a name or {\"name\", \"tolerance\"}");
            }
        }
    }
    validate_config(c);
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        config_error("invalid JSON in " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

json config_to_json(const ScenarioConfig& c) {
    json j;
    j["params"] = {{"gamma", complex_to_json(c.params.gamma)},
                   {"eta", complex_to_json(c.params.eta)},
                   {"N", c.params.n},
                   {"collision_eps", c.params.collision_eps},
                   {"max_flow_index", c.params.max_flow_index}};
    j["seed"] = c.seed;
    j["draws"] = c.draws;
    if (c.state) j["state"] = {{"x", vector_to_json(c.state->x)}, {"p", vector_to_json(c.state->p)}};
    j["flows"] = json::array();
    for (const auto& f : c.flows) j["flows"].push_back(flow_to_json(f));
    j["checks"] = json::array();
    for (const auto& chk : c.checks) {
        if (chk.tolerance)
            j["checks"].push_back({{"name", chk.name}, {"tolerance", *chk.tolerance}});
        else
            j["checks"].push_back(chk.name);
    }
    return j;
}

const std::vector<CheckInfo>& check_registry() {
    static const std::vector<CheckInfo> infos = [] {
        std::vector<CheckInfo> v;
        for (const auto& e : registry()) v.push_back(e.info);
        return v;
    }();
    return infos;
}

// --- verify -----------------------------------------------------------------

std::size_t VerificationReport::passed_count() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.passed; }));
}

bool VerificationReport::all_passed() const { return passed_count() == records.size(); }

json VerificationReport::to_json(bool include_runtime) const {
    json recs = json::array();
    for (const auto& r : records) {
        json e = {{"name", r.name},           {"tag", r.tag},       {"residual", r.residual},
                  {"tolerance", r.tolerance}, {"passed", r.passed}, {"detail", r.detail}};
        if (include_runtime) e["runtime_s"] = r.runtime_s;
        recs.push_back(e);
    }
    return json{{"records", recs},
                {"summary",
                 {{"total", records.size()},
                  {"passed", passed_count()},
                  {"failed", records.size() - passed_count()},
                  {"all_passed", all_passed()}}}};
}

unsigned thread_limit() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("RSTODA_THREADS");
    if (!env || !*env) return hw;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) return hw;
    return static_cast<unsigned>(std::min<long>(v, 1024));
}

PhaseState scenario_state(const ScenarioConfig& config, std::uint64_t stream_seed) {
    if (config.state) return *config.state;
    SplitMix64 rng(stream_seed);
    return random_state(config.params, rng);
}

CheckRecord run_check(const ScenarioConfig& config, const CheckSettings& check) {
    const Entry& entry = find_entry(check.name);
    CheckRecord rec;
    rec.name = entry.info.name;
    rec.tag = entry.info.tag;
    rec.tolerance = check.tolerance.value_or(entry.info.tolerance);
    const auto start = std::chrono::steady_clock::now();
    try {
        const CheckOutcome out = entry.run(config, config.seed ^ fnv1a(entry.info.name));
        rec.residual = out.residual;
        rec.detail = out.detail;
        rec.passed = std::isfinite(out.residual) && out.residual <= rec.tolerance;
    } catch (const std::exception& e) {
        rec.residual = std::numeric_limits<double>::infinity();
        rec.detail = e.what();
        rec.passed = false;
    }
    rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

VerificationReport run_verify(const ScenarioConfig& config, unsigned threads) {
    const std::vector<CheckSettings> checks = enabled_checks(config);
    for (const auto& c : checks) find_entry(c.name);
    VerificationReport report;
    report.records.resize(checks.size());
    if (threads == 0) threads = thread_limit();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(checks.size())));

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < checks.size(); i = next++) report.records[i] = run_check(config, checks[i]);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return report;
}

// --- sweep ------------------------------------------------------------------

ScenarioConfig with_axis_value(const ScenarioConfig& config, const std::string& axis, double value) {
    ScenarioConfig c = config;
    if (!std::isfinite(value)) config_error("sweep value must be finite");
    if (axis == "gamma") {
        c.params.gamma = value;
    } else if (axis == "eta") {
        c.params.eta = value;
    } else if (axis == "N") {
        if (value < 1 || value != std::floor(value)) config_error("N must be a positive integer");
        if (c.state) config_error("cannot sweep N with an explicit initial state");
        c.params.n = static_cast<std::size_t>(value);
    } else if (axis == "duration") {
        for (auto& f : c.flows) f.duration = value;
    } else if (axis == "rtol") {
        for (auto& f : c.flows) f.rtol = value;
    } else {
        config_error("unknown sweep axis '" + axis + "' (gamma, eta, N, duration, rtol)");
    }
    validate_config(c);
    return c;
}

SweepResult run_sweep(const ScenarioConfig& config, const std::string& axis, const std::vector<double>& values,
                      unsigned threads) {
    if (std::none_of(std::begin(kSweepAxes), std::end(kSweepAxes), [&](const char* a) { return axis == a; }))
        config_error("unknown sweep axis '" + axis + "' (gamma, eta, N, duration, rtol)");
    SweepResult out;
    out.table = json{{"axis", axis}, {"values", values}, {"rows", json::array()}};
    std::vector<ScenarioConfig> configs;
    for (double v : values) configs.push_back(with_axis_value(config, axis, v));
    for (std::size_t k = 0; k < values.size(); ++k) {
        const VerificationReport rep = run_verify(configs[k], threads);
        json checks = json::object();
        for (const auto& r : rep.records)
            checks[r.name] = {{"residual", r.residual}, {"tolerance", r.tolerance}, {"passed", r.passed}};
        out.table["rows"].push_back({{"value", values[k]}, {"all_passed", rep.all_passed()}, {"checks", checks}});
        out.all_passed = out.all_passed && rep.all_passed();
    }
    return out;
}

// --- simulate ---------------------------------------------------------------

std::vector<std::filesystem::path> run_simulate(const ScenarioConfig& config,
                                                const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const ModelParams& pr = config.params;
    const PhaseState s0 = scenario_state(config, config.seed ^ fnv1a("simulate"));
    std::vector<std::filesystem::path> written;
    for (std::size_t f = 0; f < config.flows.size(); ++f) {
        const FlowSpec& spec = config.flows[f];
        const auto path = out_dir / ("flow_" + std::to_string(f) + "_m" + std::to_string(spec.m) + ".csv");
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
        written.push_back(path);

        out << "tau_re,tau_im";
        for (std::size_t i = 1; i <= pr.n; ++i) out << ",x" << i << "_re,x" << i << "_im";
        for (std::size_t i = 1; i <= pr.n; ++i) out << ",p" << i << "_re,p" << i << "_im";
        for (std::size_t k = 1; k <= pr.n; ++k) out << ",trL" << k << "_re,trL" << k << "_im";
        out << '\n';

        const auto write_row = [&](cplx tau, const PhaseState& s) {
            std::string row = csv_number(tau.real()) + ',' + csv_number(tau.imag());
            for (const auto& v : s.x) row += ',' + csv_number(v.real()) + ',' + csv_number(v.imag());
            for (const auto& v : s.p) row += ',' + csv_number(v.real()) + ',' + csv_number(v.imag());
            for (const auto& v : conserved_spectrum(pr, s))
                row += ',' + csv_number(v.real()) + ',' + csv_number(v.imag());
            out << row << '\n';
            out.flush();
        };

        PhaseState s = s0;
        write_row(0.0, s);
        FlowSpec seg = spec;
        seg.samples = 2;
        seg.duration = spec.duration / static_cast<double>(spec.samples - 1);
        for (std::size_t k = 1; k < spec.samples; ++k) {
            s = evolve(pr, s, seg);
            write_row(static_cast<double>(k) * seg.duration, s);
        }
    }
    return written;
}

}  // namespace rstoda
