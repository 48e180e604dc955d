#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdm/polyalg.hpp"

namespace cdm {

// Stability indices, stability-limit indices and equivalent time constants of
// one characteristic polynomial. Index k of each vector holds the quantity for
// i = k + 1. std::nullopt marks an index that is undefined because a
// neighbouring coefficient is zero.
struct StabilityProfile {
    std::vector<double> coeffs;
    std::vector<std::optional<double>> gammas;      // gamma_i = a_i^2 / (a_{i+1} a_{i-1})
    std::vector<std::optional<double>> gamma_stars; // 1/gamma_{i+1} + 1/gamma_{i-1}, gamma_0 = gamma_n = inf
    double tau = 0.0;                               // a_1 / a_0, seconds
    std::vector<std::optional<double>> taus;        // tau_i = a_{i+1} / a_i, seconds
    bool sign_uniform = false;
};

// Requires degree >= 2 and a_0 != 0 (ValidationError / ComputationError otherwise).
StabilityProfile profile(const Polynomial& p);

// Default design gammas when only tau is given: {2.5, 2, 2, ...}, degree - 1 entries.
std::vector<double> standard_gammas(std::size_t degree);

// a_0 [ sum_{i>=2} (prod_{j=1}^{i-1} gamma_{i-j}^{-j}) (tau s)^i + tau s + 1 ].
Polynomial target_polynomial(double a0, double tau, const std::vector<double>& gammas);

struct ConditionEntry {
    std::size_t i = 0;
    std::optional<double> lhs;
    std::optional<double> rhs;
    bool satisfied = false;
    // Equivalent index form (gamma_i vs 1.12 gamma_i*) for the stability test,
    // (gamma_{i+1} gamma_i vs 1) for the instability test.
    std::optional<double> index_lhs;
    std::optional<double> index_rhs;
};

struct ConditionReport {
    std::vector<ConditionEntry> entries;
    bool sufficiently_stable = false;
    bool sufficiently_unstable = false;
    bool inconclusive = true;
    std::string note;
};

inline constexpr double kStabilityMargin = 1.12;

// a_i > 1.12 [ (a_{i-1}/a_{i+1}) a_{i+2} + (a_{i+1}/a_{i-1}) a_{i-2} ] for i = 2..n-2.
// The arithmetic runs on the coefficients as given, negative ones included;
// the verdict additionally requires uniform signs.
ConditionReport check_stability_condition(const Polynomial& p);

// a_{i+1} a_i <= a_{i+2} a_{i-1} for some i = 1..n-2, on the sign-normalized
// polynomial. Non-uniform signs are reported unstable up front.
ConditionReport check_instability_condition(const Polynomial& p);

enum class CoeffSign { Negative = -1, Zero = 0, Positive = 1 };

struct DiagramPoint {
    std::size_t i = 0;
    std::optional<double> log10_magnitude;
    CoeffSign sign = CoeffSign::Zero;
};

struct DiagramDataset {
    // Insertion order of curves is preserved for output.
    std::vector<std::pair<std::string, std::vector<DiagramPoint>>> curves;
};

DiagramDataset coefficient_diagram(const std::vector<std::pair<std::string, Polynomial>>& curves);

char sign_char(CoeffSign s);

// curve,i,log10_magnitude,sign
std::string to_csv(const DiagramDataset& d);

} // namespace cdm
