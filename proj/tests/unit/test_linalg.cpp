#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "rstoda/errors.hpp"

using namespace rstoda;
using testing::max_abs_diff;

namespace {

ComplexMatrix random_matrix(std::size_t n, SplitMix64& rng, double scale = 1.0) {
    ComplexMatrix a(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = scale * cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return a;
}

/// Taylor series with many terms; independent of the Pade path for small norms.
ComplexMatrix exp_series(const ComplexMatrix& a) {
    ComplexMatrix sum = ComplexMatrix::identity(a.n());
    ComplexMatrix term = sum;
    for (int k = 1; k < 60; ++k) {
        term = (1.0 / k) * (term * a);
        sum += term;
    }
    return sum;
}

/// Smallest max-distance over all matchings (brute force, n <= 7).
double matched_distance(CVector a, const CVector& b) {
    std::vector<std::size_t> idx(a.size());
    std::iota(idx.begin(), idx.end(), 0);
    double best = 1e300;
    do {
        double d = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[idx[i]] - b[i]));
        best = std::min(best, d);
    } while (std::next_permutation(idx.begin(), idx.end()));
    return best;
}

}  // namespace

TEST_CASE("lu_det_solve on identity and diagonal") {
    const ComplexMatrix id = ComplexMatrix::identity(3);
    const std::vector<CVector> rhs{{1.0, 0.0, 0.0}};
    const DetSolve r = lu_det_solve(id, rhs);
    CHECK(std::abs(r.det - 1.0) == 0.0);
    CHECK(max_abs_diff(r.x[0], rhs[0]) == 0.0);

    const CVector d{2.0, cplx(0, 3)};
    CHECK(std::abs(lu_det_solve(ComplexMatrix::diagonal(d)).det - cplx(0, 6)) < 1e-15);
}

TEST_CASE("lu inverse residual and determinant multiplicativity") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexMatrix a = random_matrix(5, rng) + 3.0 * ComplexMatrix::identity(5);
        const ComplexMatrix b = random_matrix(5, rng) + 3.0 * ComplexMatrix::identity(5);
        CHECK((a * inverse(a) - ComplexMatrix::identity(5)).max_abs() <= 1e-12);
        const cplx dab = determinant(a * b);
        CHECK(std::abs(dab - determinant(a) * determinant(b)) <= 1e-10 * std::abs(dab));
        CHECK(std::isfinite(condition_estimate(a)));
    }
}

TEST_CASE("lu_det_solve solves several right-hand sides") {
    SplitMix64 rng(5);
    const ComplexMatrix a = random_matrix(4, rng) + 2.0 * ComplexMatrix::identity(4);
    std::vector<CVector> rhs(2, CVector(4));
    for (auto& b : rhs)
        for (auto& v : b) v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const DetSolve r = lu_det_solve(a, rhs);
    for (std::size_t k = 0; k < rhs.size(); ++k) {
        const CVector back = a * std::span<const cplx>(r.x[k]);
        CHECK(max_abs_diff(back, rhs[k]) <= 1e-12 * testing::max_abs(rhs[k]));
    }
    const CVector xt = LuFactor(a).solve_transposed(rhs[0]);
    CHECK(max_abs_diff(left_multiply(xt, a), rhs[0]) <= 1e-12);
}

TEST_CASE("singular matrix is reported") {
    ComplexMatrix a(2, 1.0);
    CHECK_THROWS_AS(LuFactor{a}, Error);
    try {
        LuFactor f(a);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SingularMatrix);
    }
    CHECK(determinant(a) == 0.0);
    CHECK(std::isinf(condition_estimate(a)));
}

TEST_CASE("mat_exp trivial cases") {
    CHECK((mat_exp(ComplexMatrix(3)) - ComplexMatrix::identity(3)).max_abs() == 0.0);
    const CVector d{1.0, -1.0};
    const ComplexMatrix e = mat_exp(ComplexMatrix::diagonal(d));
    CHECK(std::abs(e(0, 0) - std::exp(1.0)) < 1e-15 * std::exp(1.0) * 4);
    CHECK(std::abs(e(1, 1) - std::exp(-1.0)) < 1e-15);
    CHECK(std::abs(e(0, 1)) == 0.0);
}

TEST_CASE("mat_exp against series, inverse pairing and commutation") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const ComplexMatrix small = random_matrix(4, rng, 0.5);
        const ComplexMatrix e = mat_exp(small);
        CHECK((e - exp_series(small)).max_abs() <= 1e-13 * e.max_abs());

        const ComplexMatrix a = random_matrix(4, rng, 2.0);
        const ComplexMatrix ea = mat_exp(a);
        CHECK((ea * mat_exp(-1.0 * a) - ComplexMatrix::identity(4)).max_abs() <= 1e-11);
        CHECK(commutator(ea, a).max_abs() <= 1e-11 * a.max_abs() * ea.max_abs());
    }
}

TEST_CASE("mat_exp overflow") {
    const CVector d{800.0};
    CHECK_THROWS_AS(mat_exp(ComplexMatrix::diagonal(d)), Error);
}

TEST_CASE("poly_roots trivial polynomials") {
    const ComplexPolynomial p(CVector{-1.0, 0.0, 1.0});
    CVector r = poly_roots(p);
    std::sort(r.begin(), r.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    CHECK(std::abs(r[0] + 1.0) < 1e-12);
    CHECK(std::abs(r[1] - 1.0) < 1e-12);

    const ComplexPolynomial c(CVector{-6.0, 11.0, -6.0, 1.0});
    CHECK(matched_distance(poly_roots(c), CVector{1.0, 2.0, 3.0}) < 1e-12);
}

TEST_CASE("poly_roots recovers sampled roots") {
    SplitMix64 rng(3);
    int tested = 0;
    while (tested < 30) {
        CVector roots(6);
        for (auto& z : roots) z = cplx(rng.uniform(-7, 7), rng.uniform(-7, 7));
        double sep = 1e300;
        for (std::size_t i = 0; i < roots.size(); ++i)
            for (std::size_t j = i + 1; j < roots.size(); ++j) sep = std::min(sep, std::abs(roots[i] - roots[j]));
        if (sep < 1e-3) continue;
        ++tested;
        const ComplexPolynomial p = ComplexPolynomial::from_roots(roots);
        CHECK(p.degree() == 6);
        CHECK(matched_distance(poly_roots(p), roots) <= 1e-9);
    }
}

TEST_CASE("poly_roots keeps warm start order") {
    const CVector roots{cplx(1, 1), cplx(-2, 0.5), cplx(0.3, -1)};
    const ComplexPolynomial p = ComplexPolynomial::from_roots(roots);
    CVector guess = roots;
    for (auto& g : guess) g += cplx(0.01, -0.02);
    const CVector r = poly_roots(p, std::span<const cplx>(guess));
    CHECK(max_abs_diff(r, roots) < 1e-12);
}

TEST_CASE("contour residue conventions") {
    const auto inv = [](cplx z) { return 1.0 / z; };
    const auto inv2 = [](cplx z) { return 1.0 / (z * z); };
    CHECK(std::abs(contour_residue_at_infinity(inv, 0, 2.0) - 1.0) < 1e-14);
    CHECK(std::abs(contour_residue_at_infinity(inv2, 0, 2.0)) < 1e-14);
    CHECK(std::abs(contour_residue_at_zero(inv, 0, 0.5) - 1.0) < 1e-14);

    SplitMix64 rng(9);
    const ComplexMatrix a = random_matrix(3, rng);
    const double rho = spectral_radius_bound(a);
    const auto resolvent_trace = [&](cplx z) { return inverse(z * ComplexMatrix::identity(3) - a).trace(); };
    const cplx r1 = contour_residue_at_infinity(resolvent_trace, 1, 3.0 * rho);
    const cplx r2 = contour_residue_at_infinity(resolvent_trace, 1, 6.0 * rho);
    CHECK(std::abs(r1 - a.trace()) <= 1e-10);
    CHECK(std::abs(r1 - r2) <= 1e-9);
    const cplx r3 = contour_residue_at_infinity(resolvent_trace, 2, 3.0 * rho);
    CHECK(std::abs(r3 - (a * a).trace()) <= 1e-10);
}

TEST_CASE("spectral radius bound dominates eigenvalues of a triangular matrix") {
    ComplexMatrix a(3);
    a(0, 0) = 2.0;
    a(1, 1) = cplx(0, -3);
    a(2, 2) = 0.5;
    a(0, 2) = 10.0;
    const double rho = spectral_radius_bound(a);
    CHECK(rho >= 3.0 * (1 - 1e-12));
    CHECK(rho <= 3.0 * 1.5);
}
