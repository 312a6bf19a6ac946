#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace rstoda {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

/// Dense square complex matrix, row-major.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    explicit ComplexMatrix(std::size_t n, cplx fill = 0.0) : n_(n), a_(n * n, fill) {}

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix diagonal(std::span<const cplx> d);
    /// All-ones matrix E = e e^T.
    static ComplexMatrix ones(std::size_t n);

    std::size_t n() const noexcept { return n_; }
    cplx& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
    std::span<const cplx> data() const noexcept { return a_; }

    ComplexMatrix& operator+=(const ComplexMatrix& o);
    ComplexMatrix& operator-=(const ComplexMatrix& o);
    ComplexMatrix& operator*=(cplx s);

    cplx trace() const;
    CVector diag() const;
    ComplexMatrix transpose() const;
    double max_abs() const;
    double norm1() const;
    double norm_inf() const;
    double norm_fro() const;
    bool all_finite() const;

private:
    std::size_t n_ = 0;
    std::vector<cplx> a_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(cplx s, ComplexMatrix a);
CVector operator*(const ComplexMatrix& a, std::span<const cplx> v);
/// Row vector times matrix: (v^T A)_j.
CVector left_multiply(std::span<const cplx> v, const ComplexMatrix& a);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
/// A^k for k >= 0 by repeated squaring.
ComplexMatrix matrix_power(const ComplexMatrix& a, unsigned k);
/// D A D^{-1} style product diag(l) * A * diag(r).
ComplexMatrix scale_rows_cols(std::span<const cplx> l, const ComplexMatrix& a, std::span<const cplx> r);

struct LinalgTolerances {
    double pivot = 1e-14;         ///< relative to the largest row norm
    int max_root_iterations = 500;
    double root_step = 1e-15;     ///< Aberth stopping: relative correction size
    double root_residual = 1e-10; ///< accepted |p/p'| relative to max(1,|z|)
};

/// LU factorization with partial pivoting, P A = L U.
class LuFactor {
public:
    /// Throws Error(SingularMatrix) when a pivot falls below tol * max row norm.
    explicit LuFactor(const ComplexMatrix& a, double pivot_tol = LinalgTolerances{}.pivot);

    cplx determinant() const;
    CVector solve(std::span<const cplx> b) const;
    /// Solves x^T A = b^T.
    CVector solve_transposed(std::span<const cplx> b) const;
    ComplexMatrix solve(const ComplexMatrix& b) const;
    ComplexMatrix inverse() const;
    std::size_t n() const noexcept { return lu_.n(); }

private:
    ComplexMatrix lu_;
    std::vector<std::size_t> perm_;
    int sign_ = 1;
};

struct DetSolve {
    cplx det;
    std::vector<CVector> x;  ///< one solution per right-hand side
};

/// Determinant of A together with the solutions of A x = b for each b.
/// Throws Error(SingularMatrix).
DetSolve lu_det_solve(const ComplexMatrix& a, std::span<const CVector> rhs = {});

cplx determinant(const ComplexMatrix& a);
ComplexMatrix inverse(const ComplexMatrix& a);
/// kappa_1(A) = |A|_1 |A^-1|_1, +inf when the factorization fails.
double condition_estimate(const ComplexMatrix& a);

/// e^A by scaling and squaring with the degree-13 Pade approximant.
/// Throws Error(Overflow) when the result is not finite.
ComplexMatrix mat_exp(const ComplexMatrix& a);

/// Upper bound on the spectral radius via |A^16|_F^{1/16} (Gelfand).
double spectral_radius_bound(const ComplexMatrix& a);

/// Monic polynomial with ascending coefficients, c[degree] == 1.
class ComplexPolynomial {
public:
    ComplexPolynomial() = default;
    /// Normalizes by the leading coefficient.
    explicit ComplexPolynomial(CVector ascending);
    static ComplexPolynomial from_roots(std::span<const cplx> roots);

    std::size_t degree() const noexcept { return c_.empty() ? 0 : c_.size() - 1; }
    std::span<const cplx> coefficients() const noexcept { return c_; }

    cplx operator()(cplx z) const;
    /// Value and derivative by Horner.
    std::pair<cplx, cplx> eval_with_derivative(cplx z) const;

private:
    CVector c_;
};

/// All roots by Aberth-Ehrlich simultaneous iteration. Warm start guesses are
/// used in the given order and the returned roots keep that order.
/// Throws Error(NoConvergence) when the iteration does not settle.
CVector poly_roots(const ComplexPolynomial& p, std::optional<std::span<const cplx>> warm_start = std::nullopt,
                   const LinalgTolerances& tol = {});

/// res_inf(z^m f(z)) under the convention res_inf(z^-1) = 1, via the
/// trapezoidal rule on |z| = radius.
cplx contour_residue_at_infinity(const std::function<cplx(cplx)>& f, int m, double radius, int nodes = 256);

/// res_0(z^m f(z)) with res_0(z^-1) = 1, trapezoidal rule on |z| = radius.
cplx contour_residue_at_zero(const std::function<cplx(cplx)>& f, int m, double radius, int nodes = 256);

}  // namespace rstoda
