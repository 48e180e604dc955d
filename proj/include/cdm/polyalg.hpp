#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace cdm {

// Real polynomial, coefficients in ascending power order (coeffs()[i] multiplies s^i).
// Always normalized: the highest-index coefficient is nonzero, and the zero
// polynomial is the single coefficient 0.
class Polynomial {
public:
    Polynomial() : coeffs_{0.0} {}
    Polynomial(std::initializer_list<double> coeffs);
    explicit Polynomial(std::vector<double> coeffs);

    static Polynomial zero() { return Polynomial{}; }
    static Polynomial constant(double c) { return Polynomial{c}; }
    static Polynomial monomial(std::size_t power, double c = 1.0);

    [[nodiscard]] std::span<const double> coeffs() const { return coeffs_; }
    [[nodiscard]] const std::vector<double>& vec() const { return coeffs_; }
    [[nodiscard]] std::size_t degree() const { return coeffs_.size() - 1; }
    [[nodiscard]] bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }
    [[nodiscard]] double leading() const { return coeffs_.back(); }
    [[nodiscard]] double max_abs() const;

    // Coefficient of s^i, zero past the degree.
    [[nodiscard]] double operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    void normalize();
    std::vector<double> coeffs_;
};

Polynomial add(const Polynomial& p, const Polynomial& q);
Polynomial sub(const Polynomial& p, const Polynomial& q);
Polynomial mul(const Polynomial& p, const Polynomial& q);
Polynomial scale(const Polynomial& p, double c);

inline Polynomial operator+(const Polynomial& p, const Polynomial& q) { return add(p, q); }
inline Polynomial operator-(const Polynomial& p, const Polynomial& q) { return sub(p, q); }
inline Polynomial operator*(const Polynomial& p, const Polynomial& q) { return mul(p, q); }
inline Polynomial operator*(double c, const Polynomial& p) { return scale(p, c); }

std::complex<double> evaluate(const Polynomial& p, std::complex<double> s);
double evaluate(const Polynomial& p, double s);

// All degree-many roots (with multiplicity) from the eigenvalues of the
// companion matrix, each refined by a few Newton steps.
// Throws ValidationError for constant polynomials.
std::vector<std::complex<double>> roots(const Polynomial& p);

// Rebuilds prod (s - r_i); imaginary parts of conjugate pairs cancel.
Polynomial from_roots(std::span<const std::complex<double>> rs, double leading = 1.0);

struct RouthVerdict {
    bool stable = false;
    std::vector<double> first_column;
    bool degenerate = false;
};

// Routh array test. A negative leading coefficient is handled by negating the
// polynomial first. Zero pivots are replaced by 1e-12 * max|a_i| and a row
// that vanishes entirely is rebuilt from the derivative of the auxiliary
// polynomial; either event marks the verdict degenerate and not stable
// (a Hurwitz polynomial never produces a zero in the first column).
RouthVerdict routh_stable(const Polynomial& p);

inline constexpr double kDefaultPruneTol = 1e-8;

// Zeroes every |a_i| < rel_tol * max|a_j|.
Polynomial prune_epsilon(const Polynomial& p, double rel_tol = kDefaultPruneTol);

// True iff every coefficient is nonzero and all share one sign.
bool sign_uniform(const Polynomial& p);

} // namespace cdm
