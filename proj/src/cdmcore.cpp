#include "cdm/cdmcore.hpp"

#include <cmath>
#include <sstream>

#include "cdm/error.hpp"

namespace cdm {

namespace {

std::optional<double> inverse(const std::optional<double>& x) {
    if (!x || *x == 0.0)
        return std::nullopt;
    return 1.0 / *x;
}

} // namespace

StabilityProfile profile(const Polynomial& p) {
    const std::size_t n = p.degree();
    if (n < 2)
        throw ValidationError("stability profile requires degree >= 2");
    if (p[0] == 0.0)
        throw ComputationError("equivalent time constant undefined (a0 = 0)");

    StabilityProfile out;
    out.coeffs = p.vec();
    out.tau = p[1] / p[0];
    out.sign_uniform = sign_uniform(p);

    for (std::size_t i = 1; i <= n - 1; ++i) {
        const double prev = p[i - 1], cur = p[i], next = p[i + 1];
        if (prev == 0.0 || next == 0.0)
            out.gammas.emplace_back(std::nullopt);
        else
            out.gammas.emplace_back((cur / next) * (cur / prev));
        out.taus.emplace_back(cur == 0.0 ? std::nullopt : std::optional<double>(next / cur));
    }

    // gamma_0 = gamma_n = inf contribute 0 to the limit index.
    for (std::size_t k = 0; k < out.gammas.size(); ++k) {
        std::optional<double> left = k == 0 ? std::optional<double>(0.0) : inverse(out.gammas[k - 1]);
        std::optional<double> right =
            k + 1 == out.gammas.size() ? std::optional<double>(0.0) : inverse(out.gammas[k + 1]);
        if (left && right)
            out.gamma_stars.emplace_back(*left + *right);
        else
            out.gamma_stars.emplace_back(std::nullopt);
    }
    return out;
}

std::vector<double> standard_gammas(std::size_t degree) {
    if (degree < 2)
        return {};
    std::vector<double> g(degree - 1, 2.0);
    g[0] = 2.5;
    return g;
}

Polynomial target_polynomial(double a0, double tau, const std::vector<double>& gammas) {
    if (!(a0 > 0.0))
        throw ValidationError("target_polynomial: a0 must be > 0");
    if (!(tau > 0.0))
        throw ValidationError("target_polynomial: tau must be > 0");
    for (std::size_t k = 0; k < gammas.size(); ++k)
        if (!(gammas[k] > 0.0))
            throw ValidationError("target_polynomial: gamma[" + std::to_string(k + 1) + "] must be > 0");

    const std::size_t n = gammas.size() + 1;
    std::vector<double> a(n + 1);
    a[0] = a0;
    a[1] = a0 * tau;
    // a_i = a_{i-1} * tau_{i-1}, tau_{i-1} = tau_{i-2} / gamma_{i-1}
    double tau_i = tau;
    for (std::size_t i = 2; i <= n; ++i) {
        tau_i /= gammas[i - 2];
        a[i] = a[i - 1] * tau_i;
    }
    return Polynomial(std::move(a));
}

ConditionReport check_stability_condition(const Polynomial& p) {
    ConditionReport r;
    const std::size_t n = p.degree();
    if (n < 4) {
        r.note = "stability condition quantifies i = 2..n-2; empty for degree " + std::to_string(n);
        return r;
    }

    const StabilityProfile prof = profile(p);
    bool all_defined = true;
    bool all_satisfied = true;
    for (std::size_t i = 2; i <= n - 2; ++i) {
        ConditionEntry e;
        e.i = i;
        e.lhs = p[i];
        if (p[i + 1] == 0.0 || p[i - 1] == 0.0) {
            all_defined = false;
        } else {
            e.rhs = kStabilityMargin * ((p[i - 1] / p[i + 1]) * p[i + 2] + (p[i + 1] / p[i - 1]) * p[i - 2]);
            e.satisfied = *e.lhs > *e.rhs;
        }
        e.index_lhs = prof.gammas[i - 1];
        if (prof.gamma_stars[i - 1])
            e.index_rhs = kStabilityMargin * *prof.gamma_stars[i - 1];
        all_satisfied = all_satisfied && e.satisfied;
        r.entries.push_back(e);
    }

    const bool uniform = sign_uniform(p);
    r.sufficiently_stable = all_defined && all_satisfied && uniform;
    r.inconclusive = !r.sufficiently_stable;
    if (!all_defined)
        r.note = "undefined index (zero neighbouring coefficient)";
    else if (!uniform)
        r.note = "coefficients not of uniform sign; verdict withheld";
    return r;
}

ConditionReport check_instability_condition(const Polynomial& input) {
    const std::size_t n = input.degree();
    if (n < 3)
        throw ValidationError("instability condition requires degree >= 3");

    ConditionReport r;
    const bool uniform = sign_uniform(input);
    const Polynomial p = input.leading() < 0.0 ? scale(input, -1.0) : input;

    bool any = false;
    for (std::size_t i = 1; i <= n - 2; ++i) {
        ConditionEntry e;
        e.i = i;
        e.lhs = p[i + 1] * p[i];
        e.rhs = p[i + 2] * p[i - 1];
        e.satisfied = *e.lhs <= *e.rhs;
        if (p[i + 2] != 0.0 && p[i] != 0.0 && p[i - 1] != 0.0) {
            const double g_i = (p[i] / p[i + 1]) * (p[i] / p[i - 1]);
            const double g_next = (p[i + 1] / p[i + 2]) * (p[i + 1] / p[i]);
            e.index_lhs = g_next * g_i;
            e.index_rhs = 1.0;
        }
        any = any || e.satisfied;
        r.entries.push_back(e);
    }

    if (!uniform) {
        r.sufficiently_unstable = true;
        r.note = "coefficients not of uniform sign (necessary condition for stability fails)";
    } else {
        r.sufficiently_unstable = any;
    }
    r.inconclusive = !r.sufficiently_unstable;
    return r;
}

DiagramDataset coefficient_diagram(const std::vector<std::pair<std::string, Polynomial>>& curves) {
    DiagramDataset d;
    for (const auto& [name, poly] : curves) {
        std::vector<DiagramPoint> pts;
        const auto c = poly.coeffs();
        for (std::size_t i = 0; i < c.size(); ++i) {
            DiagramPoint pt;
            pt.i = i;
            if (c[i] != 0.0) {
                pt.log10_magnitude = std::log10(std::abs(c[i]));
                pt.sign = c[i] > 0.0 ? CoeffSign::Positive : CoeffSign::Negative;
            }
            pts.push_back(pt);
        }
        d.curves.emplace_back(name, std::move(pts));
    }
    return d;
}

char sign_char(CoeffSign s) {
    switch (s) {
    case CoeffSign::Negative: return '-';
    case CoeffSign::Positive: return '+';
    default: return '0';
    }
}

std::string to_csv(const DiagramDataset& d) {
    std::ostringstream os;
    os.precision(17);
    os << "curve,i,log10_magnitude,sign\n";
    for (const auto& [name, pts] : d.curves) {
        for (const auto& pt : pts) {
            os << name << ',' << pt.i << ',';
            if (pt.log10_magnitude)
                os << *pt.log10_magnitude;
            os << ',' << sign_char(pt.sign) << '\n';
        }
    }
    return os.str();
}

} // namespace cdm
