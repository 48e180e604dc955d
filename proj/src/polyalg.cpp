#include "cdm/polyalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "cdm/error.hpp"

namespace cdm {

Polynomial::Polynomial(std::initializer_list<double> coeffs) : Polynomial(std::vector<double>(coeffs)) {}

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (!std::isfinite(coeffs_[i]))
            throw ValidationError("polynomial coefficient " + std::to_string(i) + " is not finite");
    }
    normalize();
}

Polynomial Polynomial::monomial(std::size_t power, double c) {
    std::vector<double> v(power + 1, 0.0);
    v[power] = c;
    return Polynomial(std::move(v));
}

void Polynomial::normalize() {
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0)
        coeffs_.pop_back();
    if (coeffs_.empty())
        coeffs_.push_back(0.0);
    // -0.0 and 0.0 compare equal but serialize differently
    for (double& c : coeffs_)
        if (c == 0.0)
            c = 0.0;
}

double Polynomial::max_abs() const {
    double m = 0.0;
    for (double c : coeffs_)
        m = std::max(m, std::abs(c));
    return m;
}

Polynomial add(const Polynomial& p, const Polynomial& q) {
    std::vector<double> out(std::max(p.vec().size(), q.vec().size()), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = p[i] + q[i];
    return Polynomial(std::move(out));
}

Polynomial sub(const Polynomial& p, const Polynomial& q) {
    std::vector<double> out(std::max(p.vec().size(), q.vec().size()), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = p[i] - q[i];
    return Polynomial(std::move(out));
}

Polynomial mul(const Polynomial& p, const Polynomial& q) {
    if (p.is_zero() || q.is_zero())
        return Polynomial::zero();
    const auto& a = p.vec();
    const auto& b = q.vec();
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            out[i + j] += a[i] * b[j];
    return Polynomial(std::move(out));
}

Polynomial scale(const Polynomial& p, double c) {
    std::vector<double> out = p.vec();
    for (double& x : out)
        x *= c;
    return Polynomial(std::move(out));
}

std::complex<double> evaluate(const Polynomial& p, std::complex<double> s) {
    const auto& a = p.vec();
    std::complex<double> acc = a.back();
    for (std::size_t i = a.size() - 1; i-- > 0;)
        acc = acc * s + a[i];
    return acc;
}

double evaluate(const Polynomial& p, double s) {
    const auto& a = p.vec();
    double acc = a.back();
    for (std::size_t i = a.size() - 1; i-- > 0;)
        acc = acc * s + a[i];
    return acc;
}

namespace {

std::complex<double> evaluate_derivative(const std::vector<double>& a, std::complex<double> s) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = a.size() - 1; i >= 1; --i)
        acc = acc * s + static_cast<double>(i) * a[i];
    return acc;
}

std::complex<double> polish(const std::vector<double>& a, std::complex<double> r) {
    Polynomial p(a);
    double best = std::abs(evaluate(p, r));
    for (int it = 0; it < 4 && best > 0.0; ++it) {
        auto d = evaluate_derivative(a, r);
        if (std::abs(d) == 0.0)
            break;
        auto next = r - evaluate(p, r) / d;
        double res = std::abs(evaluate(p, next));
        if (!(res < best))
            break;
        r = next;
        best = res;
    }
    return r;
}

} // namespace

std::vector<std::complex<double>> roots(const Polynomial& p) {
    if (p.degree() == 0)
        throw ValidationError("constant polynomial has no roots");

    std::vector<double> a = p.vec();
    std::vector<std::complex<double>> out;
    // Exact zero roots first; they make the companion matrix singular for no benefit.
    std::size_t shift = 0;
    while (a[shift] == 0.0)
        ++shift;
    out.assign(shift, std::complex<double>(0.0, 0.0));
    a.erase(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(shift));

    const auto n = static_cast<Eigen::Index>(a.size() - 1);
    if (n == 0)
        return out;

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i)
        companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < n; ++i)
        companion(i, n - 1) = -a[static_cast<std::size_t>(i)] / a.back();

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success)
        throw ComputationError("companion eigenvalue iteration did not converge");
    const auto& ev = solver.eigenvalues();
    for (Eigen::Index i = 0; i < n; ++i) {
        auto r = polish(a, ev(i));
        // Keep real roots real; Newton in complex arithmetic can leave a 1e-300 imaginary part.
        if (ev(i).imag() == 0.0)
            r = {r.real(), 0.0};
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(), [](auto x, auto y) {
        if (x.real() != y.real())
            return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return out;
}

Polynomial from_roots(std::span<const std::complex<double>> rs, double leading) {
    std::vector<std::complex<double>> acc{std::complex<double>(leading, 0.0)};
    for (auto r : rs) {
        std::vector<std::complex<double>> next(acc.size() + 1, 0.0);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            next[i + 1] += acc[i];
            next[i] -= r * acc[i];
        }
        acc = std::move(next);
    }
    std::vector<double> re(acc.size());
    std::transform(acc.begin(), acc.end(), re.begin(), [](auto c) { return c.real(); });
    return Polynomial(std::move(re));
}

RouthVerdict routh_stable(const Polynomial& input) {
    if (input.is_zero())
        throw ValidationError("Routh test of the zero polynomial");
    if (input.degree() == 0)
        throw ValidationError("Routh test requires degree >= 1");

    const Polynomial p = input.leading() < 0.0 ? scale(input, -1.0) : input;
    const std::size_t n = p.degree();
    const std::size_t width = n / 2 + 1;
    const double eps = 1e-12 * p.max_abs();

    std::vector<std::vector<double>> rows(n + 1, std::vector<double>(width + 1, 0.0));
    for (std::size_t j = 0; j < width; ++j) {
        if (n >= 2 * j)
            rows[0][j] = p[n - 2 * j];
        if (n >= 2 * j + 1)
            rows[1][j] = p[n - 2 * j - 1];
    }

    RouthVerdict v;
    auto row_vanishes = [&](const std::vector<double>& r) {
        return std::all_of(r.begin(), r.end(), [&](double x) { return std::abs(x) <= eps; });
    };

    for (std::size_t k = 1; k <= n; ++k) {
        if (k >= 2) {
            const auto& a = rows[k - 2];
            const auto& b = rows[k - 1];
            for (std::size_t j = 0; j < width; ++j)
                rows[k][j] = (b[0] * a[j + 1] - a[0] * b[j + 1]) / b[0];
        }
        if (row_vanishes(rows[k])) {
            // Auxiliary polynomial from the row above has power n-k+1 and steps of 2.
            v.degenerate = true;
            const std::size_t m = n - k + 1;
            for (std::size_t j = 0; j < width; ++j) {
                const double power = static_cast<double>(m) - 2.0 * static_cast<double>(j);
                rows[k][j] = power > 0.0 ? rows[k - 1][j] * power : 0.0;
            }
        }
        if (std::abs(rows[k][0]) <= eps) {
            v.degenerate = true;
            rows[k][0] = eps;
        }
    }

    v.first_column.reserve(n + 1);
    for (const auto& r : rows)
        v.first_column.push_back(r[0]);
    v.stable = !v.degenerate &&
               std::all_of(v.first_column.begin(), v.first_column.end(), [](double x) { return x > 0.0; });
    return v;
}

Polynomial prune_epsilon(const Polynomial& p, double rel_tol) {
    if (rel_tol < 0.0)
        throw ValidationError("prune_epsilon: rel_tol must be >= 0");
    const double cut = rel_tol * p.max_abs();
    std::vector<double> out = p.vec();
    for (double& c : out)
        if (std::abs(c) < cut)
            c = 0.0;
    return Polynomial(std::move(out));
}

bool sign_uniform(const Polynomial& p) {
    const auto c = p.coeffs();
    const bool pos = c[0] > 0.0;
    return std::all_of(c.begin(), c.end(), [&](double x) { return x != 0.0 && ((x > 0.0) == pos); });
}

} // namespace cdm
