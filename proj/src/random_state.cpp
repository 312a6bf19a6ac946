#include "rstoda/random_state.hpp"

#include <algorithm>
#include <cmath>

#include "rstoda/errors.hpp"

namespace rstoda {

std::uint64_t fnv1a(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

constexpr int kRadiusRounds = 8;

}  // namespace

PhaseState random_state(const ModelParams& params, SplitMix64& rng, const RandomStateOptions& opts) {
    const std::size_t n = params.n;
    const double a = opts.x_half_width_per_particle * static_cast<double>(n);
    PhaseState s{CVector(n), CVector(n)};
    const int per_round = std::max(1, opts.max_attempts / kRadiusRounds);
    for (int attempt = 0; attempt < per_round * kRadiusRounds; ++attempt) {
        for (std::size_t i = 0; i < n; ++i) {
            s.x[i] = {rng.uniform(-a, a), rng.uniform(-opts.x_imag, opts.x_imag)};
            s.p[i] = {rng.uniform(-opts.p_half_width, opts.p_half_width), rng.uniform(-opts.p_imag, opts.p_imag)};
        }
        if (n > 1 && min_separation(params, s.x) < opts.min_separation) continue;
        try {
            if (opts.normalize_spectrum) {
                // L -> diag(e^{eta c}) L under p -> p + c.
                const double log_det = std::log(std::abs(determinant(lax_matrix(params, s))));
                const cplx c = -log_det / (static_cast<double>(n) * params.eta);
                for (auto& p : s.p) p += c;
            }
            if (opts.max_lax_radius_factor > 0.0) {
                const double relax = std::pow(std::sqrt(2.0), attempt / per_round);
                const double cap = relax * opts.max_lax_radius_factor *
                                   std::exp(std::abs(params.gamma * params.eta) * 0.5 * (static_cast<double>(n) - 1.0));
                const ComplexMatrix l = lax_matrix(params, s);
                if (spectral_radius_bound(l) > cap || spectral_radius_bound(inverse(l)) > cap) continue;
            }
        } catch (const Error&) {
            continue;
        }
        return s;
    }
    throw Error(ErrorKind::ConfigError, "no admissible random state within the attempt budget");
}

}  // namespace rstoda
