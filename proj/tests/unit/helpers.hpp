#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "rstoda/linalg.hpp"
#include "rstoda/model.hpp"
#include "rstoda/random_state.hpp"

namespace testing {

using rstoda::cplx;
using rstoda::CVector;

inline rstoda::ModelParams params_for(std::size_t n) {
    rstoda::ModelParams p;
    p.n = n;
    return p;
}

inline rstoda::PhaseState draw(const rstoda::ModelParams& params, std::uint64_t seed) {
    rstoda::SplitMix64 rng(seed);
    return rstoda::random_state(params, rng);
}

/// Central difference of a holomorphic scalar function.
inline cplx central(const std::function<cplx(cplx)>& f, cplx at, double h) {
    return (f(at + h) - f(at - h)) / (2.0 * h);
}

inline double max_abs_diff(const CVector& a, const CVector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(const CVector& a) {
    double m = 0.0;
    for (const auto& v : a) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace testing
