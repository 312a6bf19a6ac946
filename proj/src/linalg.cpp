#include "rstoda/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "rstoda/errors.hpp"

namespace rstoda {

// ---------------------------------------------------------------------------
// ComplexMatrix

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> d) {
    ComplexMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

ComplexMatrix ComplexMatrix::ones(std::size_t n) { return ComplexMatrix(n, 1.0); }

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
    for (auto& v : a_) v *= s;
    return *this;
}

cplx ComplexMatrix::trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
}

CVector ComplexMatrix::diag() const {
    CVector d(n_);
    for (std::size_t i = 0; i < n_; ++i) d[i] = (*this)(i, i);
    return d;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix t(n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double ComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
}

double ComplexMatrix::norm1() const {
    double m = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) s += std::abs((*this)(i, j));
        m = std::max(m, s);
    }
    return m;
}

double ComplexMatrix::norm_inf() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) s += std::abs((*this)(i, j));
        m = std::max(m, s);
    }
    return m;
}

double ComplexMatrix::norm_fro() const {
    double s = 0.0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
}

bool ComplexMatrix::all_finite() const {
    return std::all_of(a_.begin(), a_.end(),
                       [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::size_t n = a.n();
    ComplexMatrix c(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const cplx aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

CVector operator*(const ComplexMatrix& a, std::span<const cplx> v) {
    CVector r(a.n(), 0.0);
    for (std::size_t i = 0; i < a.n(); ++i)
        for (std::size_t j = 0; j < a.n(); ++j) r[i] += a(i, j) * v[j];
    return r;
}

CVector left_multiply(std::span<const cplx> v, const ComplexMatrix& a) {
    CVector r(a.n(), 0.0);
    for (std::size_t i = 0; i < a.n(); ++i)
        for (std::size_t j = 0; j < a.n(); ++j) r[j] += v[i] * a(i, j);
    return r;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

ComplexMatrix matrix_power(const ComplexMatrix& a, unsigned k) {
    ComplexMatrix result = ComplexMatrix::identity(a.n());
    ComplexMatrix base = a;
    while (k > 0) {
        if (k & 1U) result = result * base;
        k >>= 1U;
        if (k > 0) base = base * base;
    }
    return result;
}

ComplexMatrix scale_rows_cols(std::span<const cplx> l, const ComplexMatrix& a, std::span<const cplx> r) {
    ComplexMatrix m(a.n());
    for (std::size_t i = 0; i < a.n(); ++i)
        for (std::size_t j = 0; j < a.n(); ++j) m(i, j) = l[i] * a(i, j) * r[j];
    return m;
}

// ---------------------------------------------------------------------------
// LU

LuFactor::LuFactor(const ComplexMatrix& a, double pivot_tol) : lu_(a), perm_(a.n()) {
    const std::size_t n = a.n();
    if (n == 0) throw Error(ErrorKind::SingularMatrix, "empty matrix");
    const double scale = a.norm_inf();
    if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorKind::SingularMatrix, "zero or non-finite matrix");
    const double floor = pivot_tol * scale;
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(lu_(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best < floor) throw Error(ErrorKind::SingularMatrix, "pivot below threshold at column " + std::to_string(k));
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
            std::swap(perm_[k], perm_[piv]);
            sign_ = -sign_;
        }
        const cplx inv_pivot = 1.0 / lu_(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const cplx f = lu_(i, k) * inv_pivot;
            lu_(i, k) = f;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
        }
    }
}

cplx LuFactor::determinant() const {
    cplx d = static_cast<double>(sign_);
    for (std::size_t i = 0; i < lu_.n(); ++i) d *= lu_(i, i);
    return d;
}

CVector LuFactor::solve(std::span<const cplx> b) const {
    const std::size_t n = lu_.n();
    CVector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= lu_(ii, j) * x[j];
        x[ii] /= lu_(ii, ii);
    }
    return x;
}

CVector LuFactor::solve_transposed(std::span<const cplx> b) const {
    // A^T x = b with P A = L U  =>  U^T L^T P x = b.
    const std::size_t n = lu_.n();
    CVector y(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) y[i] -= lu_(j, i) * y[j];
        y[i] /= lu_(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;)
        for (std::size_t j = ii + 1; j < n; ++j) y[ii] -= lu_(j, ii) * y[j];
    CVector x(n);
    for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = y[i];
    return x;
}

ComplexMatrix LuFactor::solve(const ComplexMatrix& b) const {
    const std::size_t n = lu_.n();
    ComplexMatrix x(n);
    CVector col(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = b(i, j);
        const CVector s = solve(col);
        for (std::size_t i = 0; i < n; ++i) x(i, j) = s[i];
    }
    return x;
}

ComplexMatrix LuFactor::inverse() const { return solve(ComplexMatrix::identity(lu_.n())); }

DetSolve lu_det_solve(const ComplexMatrix& a, std::span<const CVector> rhs) {
    const LuFactor lu(a);
    DetSolve out{lu.determinant(), {}};
    out.x.reserve(rhs.size());
    for (const auto& b : rhs) out.x.push_back(lu.solve(b));
    return out;
}

cplx determinant(const ComplexMatrix& a) {
    try {
        return LuFactor(a, 0.0).determinant();
    } catch (const Error&) {
        return 0.0;
    }
}

ComplexMatrix inverse(const ComplexMatrix& a) { return LuFactor(a).inverse(); }

double condition_estimate(const ComplexMatrix& a) {
    try {
        return a.norm1() * LuFactor(a).inverse().norm1();
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
}

// ---------------------------------------------------------------------------
// Matrix exponential (Higham 2005, degree 13 only)

ComplexMatrix mat_exp(const ComplexMatrix& a) {
    static constexpr std::array<double, 14> b = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
        1323241920.0,        40840800.0,          960960.0,           16380.0,
        182.0,               1.0};
    static constexpr double theta13 = 5.371920351148152;

    const std::size_t n = a.n();
    if (!a.all_finite()) throw Error(ErrorKind::Overflow, "non-finite matrix exponent");
    const double norm = a.norm1();
    int s = 0;
    if (norm > theta13) s = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    ComplexMatrix x = a;
    if (s > 0) x *= std::ldexp(1.0, -s);

    const ComplexMatrix id = ComplexMatrix::identity(n);
    const ComplexMatrix x2 = x * x;
    const ComplexMatrix x4 = x2 * x2;
    const ComplexMatrix x6 = x4 * x2;

    ComplexMatrix u_inner = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id;
    const ComplexMatrix u = x * u_inner;
    const ComplexMatrix v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;

    ComplexMatrix r = LuFactor(v - u, 0.0).solve(v + u);
    for (int k = 0; k < s; ++k) r = r * r;
    if (!r.all_finite()) throw Error(ErrorKind::Overflow, "matrix exponential overflowed");
    return r;
}

double spectral_radius_bound(const ComplexMatrix& a) {
    // Rescale before powering so the 16th power stays representable.
    const double s = a.norm_fro();
    if (s == 0.0) return 0.0;
    ComplexMatrix m = (1.0 / s) * a;
    for (int k = 0; k < 4; ++k) m = m * m;
    return s * std::pow(m.norm_fro(), 1.0 / 16.0);
}

// ---------------------------------------------------------------------------
// Polynomials

ComplexPolynomial::ComplexPolynomial(CVector ascending) : c_(std::move(ascending)) {
    while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
    if (c_.empty() || c_.back() == 0.0) throw Error(ErrorKind::DegenerateNodes, "zero polynomial");
    const cplx lead = c_.back();
    for (auto& v : c_) v /= lead;
}

ComplexPolynomial ComplexPolynomial::from_roots(std::span<const cplx> roots) {
    CVector c{1.0};
    for (const cplx& r : roots) {
        CVector next(c.size() + 1, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k + 1] += c[k];
            next[k] -= r * c[k];
        }
        c = std::move(next);
    }
    return ComplexPolynomial(std::move(c));
}

cplx ComplexPolynomial::operator()(cplx z) const {
    cplx v = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) v = v * z + c_[k];
    return v;
}

std::pair<cplx, cplx> ComplexPolynomial::eval_with_derivative(cplx z) const {
    cplx v = 0.0;
    cplx d = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) {
        d = d * z + v;
        v = v * z + c_[k];
    }
    return {v, d};
}

namespace {

CVector initial_guesses(const ComplexPolynomial& p) {
    const std::size_t n = p.degree();
    const auto c = p.coefficients();
    // Geometric mean of root moduli is |c0|^{1/n}; Fujiwara bound caps it.
    double bound = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        bound = std::max(bound, std::pow(std::abs(c[k]), 1.0 / static_cast<double>(n - k)));
    double r = std::pow(std::abs(c[0]), 1.0 / static_cast<double>(n));
    if (!(r > 0.0)) r = bound > 0.0 ? 0.5 * bound : 1.0;
    CVector z(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) + 0.4;
        z[k] = std::polar(r, th);
    }
    return z;
}

}  // namespace

CVector poly_roots(const ComplexPolynomial& p, std::optional<std::span<const cplx>> warm_start,
                   const LinalgTolerances& tol) {
    const std::size_t n = p.degree();
    if (n == 0) throw Error(ErrorKind::NoConvergence, "constant polynomial has no roots");
    if (n == 1) return {-p.coefficients()[0]};

    CVector z;
    if (warm_start && warm_start->size() == n) {
        z.assign(warm_start->begin(), warm_start->end());
        // Split coincident guesses so the Aberth correction stays finite.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (std::abs(z[i] - z[j]) <= 1e-12 * std::max(1.0, std::abs(z[i])))
                    z[i] += std::polar(1e-6 * std::max(1.0, std::abs(z[i])), 0.7 + static_cast<double>(i));
    } else {
        z = initial_guesses(p);
    }

    std::vector<bool> done(n, false);
    for (int it = 0; it < tol.max_root_iterations; ++it) {
        bool all_done = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i]) continue;
            const auto [v, d] = p.eval_with_derivative(z[i]);
            if (v == 0.0) {
                done[i] = true;
                continue;
            }
            const cplx ratio = v / d;
            cplx s = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) s += 1.0 / (z[i] - z[j]);
            const cplx offset = ratio / (1.0 - ratio * s);
            if (!std::isfinite(offset.real()) || !std::isfinite(offset.imag())) {
                z[i] += std::polar(1e-8 * std::max(1.0, std::abs(z[i])), 1.3);
                all_done = false;
                continue;
            }
            z[i] -= offset;
            if (std::abs(offset) <= tol.root_step * std::max(1.0, std::abs(z[i])))
                done[i] = true;
            else
                all_done = false;
        }
        if (all_done) break;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const auto [v, d] = p.eval_with_derivative(z[i]);
        const double step = d == 0.0 ? (v == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()) : std::abs(v / d);
        if (!(step <= tol.root_residual * std::max(1.0, std::abs(z[i]))))
            throw Error(ErrorKind::NoConvergence, "Aberth iteration did not converge (clustered roots?)");
    }
    return z;
}

// ---------------------------------------------------------------------------
// Contour residues

namespace {

cplx trapezoid_residue(const std::function<cplx(cplx)>& f, int m, double radius, int nodes) {
    cplx sum = 0.0;
    for (int k = 0; k < nodes; ++k) {
        const cplx z = std::polar(radius, 2.0 * std::numbers::pi * k / nodes);
        sum += std::pow(z, m + 1) * f(z);
    }
    return sum / static_cast<double>(nodes);
}

}  // namespace

cplx contour_residue_at_infinity(const std::function<cplx(cplx)>& f, int m, double radius, int nodes) {
    return trapezoid_residue(f, m, radius, nodes);
}

cplx contour_residue_at_zero(const std::function<cplx(cplx)>& f, int m, double radius, int nodes) {
    return trapezoid_residue(f, m, radius, nodes);
}

}  // namespace rstoda
