#pragma once

// Seeded random phase-space states. The generator is splitmix64 so that
// streams can be reproduced outside this library from the seed alone.

#include <cstdint>
#include <string_view>

#include "rstoda/model.hpp"

namespace rstoda {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

/// 64-bit FNV-1a, used to derive per-check substreams from one seed.
std::uint64_t fnv1a(std::string_view text) noexcept;

struct RandomStateOptions {
    double x_half_width_per_particle = 1.0;  ///< Re x_i in [-a N, a N]
    double x_imag = 0.25;                     ///< Im x_i in [-b, b]
    double p_half_width = 0.5;  ///< Re p_i - p_shift uniform in [-w, w]
    double p_imag = 0.1;
    double min_separation = 0.25;  ///< lower bound for min_separation()
    /// Shift all momenta by one constant so that |det L|^{1/N} = 1, which
    /// centres the Lax spectrum on the unit circle.
    bool normalize_spectrum = true;
    /// Reject draws whose L or L^{-1} spectral radius exceeds
    /// factor * e^{|gamma eta| (N-1)/2}; 0 disables the test. The attempts
    /// run in 8 equal rounds and the cap grows by sqrt(2) per round, which
    /// only matters for N >= 5, where the bound typically exceeds the cap.
    double max_lax_radius_factor = 2.0;
    int max_attempts = 20000;
};

/// Rejection sampling until the separation and spectral bounds hold. Throws
/// Error(ConfigError) when no admissible draw is found.
PhaseState random_state(const ModelParams& params, SplitMix64& rng, const RandomStateOptions& opts = {});

}  // namespace rstoda
