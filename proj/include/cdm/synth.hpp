#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cdm/plant.hpp"
#include "cdm/polyalg.hpp"

namespace cdm {

// One coefficient of a controller polynomial: a fixed number or a named gain.
using Slot = std::variant<double, std::string>;
using SlotPolynomial = std::vector<Slot>; // ascending power order
using GainMap = std::map<std::string, double>;

// Scalar-denominator controller driving one plant input:
//   A(s) u = F(s) r - sum_j B_j(s) y_j
struct ControllerSpec {
    Polynomial denominator;                                       // A(s)
    SlotPolynomial reference_numerator;                           // F(s)
    std::vector<std::pair<std::string, SlotPolynomial>> feedback; // output -> B_j(s)
    std::string actuated_input;
    std::vector<std::string> gain_names; // unknowns, first-appearance order

    // Fills gain_names from the slots and checks the structure on its own.
    void finalize();
    // Checks feedback outputs and the actuated input against the plant.
    void validate_against(const TransferMatrix& plant) const;
    // deg A >= deg B_j and deg A >= deg F. Reported, never enforced.
    [[nodiscard]] bool is_proper() const;
};

// The controller of the hover design: A = s, F = k0, B_u = k0 + k1 s,
// B_theta = k2 + k3 s, B_w = k4, driving delta_lon.
ControllerSpec hover_pid_controller();
// Reference gains k0..k4 of the hover design.
GainMap hover_design_gains();

Polynomial instantiate(const SlotPolynomial& slots, const GainMap& gains);

// P(s) = A(s) delta(s) + sum_j B_j(s) N_{j,actuated}(s)
Polynomial closed_loop_poly(const TransferMatrix& plant, const ControllerSpec& ctrl, const GainMap& gains);

// P(g) = base + sum_k g_k columns[k], built structurally (no differencing).
struct AffineClosedLoop {
    Polynomial base;
    std::vector<Polynomial> columns; // aligned with ctrl.gain_names
};

AffineClosedLoop closed_loop_affine(const TransferMatrix& plant, const ControllerSpec& ctrl);

struct GainAssignment {
    GainMap values;
    Polynomial achieved;
    Polynomial target;              // target after leading-coefficient normalization
    std::vector<double> residuals;  // achieved_i - target_i, i = 0..degree
    std::vector<std::size_t> bound; // coefficient indices that entered the solve
    std::size_t rank = 0;
};

struct SolveOptions {
    // Coefficient indices to match; empty = all free coefficients (least squares).
    std::vector<std::size_t> bind;
};

// Least-squares Diophantine solve over the affine gain form. When the leading
// coefficient of P does not depend on the gains the target is rescaled to
// match it and that equation is dropped. Rank deficiency throws
// ComputationError quoting the rank and null-space dimension.
GainAssignment solve_gains(const TransferMatrix& plant, const ControllerSpec& ctrl, const Polynomial& target,
                           const SolveOptions& opts = {});

struct TransferFunction {
    Polynomial num;
    Polynomial den;
};

// num(0) / den(0). Throws ComputationError("pole at origin") when den(0) = 0.
double dc_gain(const TransferFunction& tf);

struct ClosedLoopSystem {
    Polynomial P;
    std::string actuated_input;
    std::vector<std::string> outputs;
    std::map<std::string, TransferFunction> tracking;    // N_j F / P
    std::map<std::string, TransferFunction> disturbance; // A N_j / P, d at the actuated input
    std::map<ChannelKey, TransferFunction> noise;        // (y_j, n_k): -N_j B_k / P
    TransferFunction control_effort;                     // r -> u: F delta / P
    TransferFunction control_effort_disturbance;         // d -> u: -sum_j B_j N_j / P
};

ClosedLoopSystem closed_loop_tf(const TransferMatrix& plant, const ControllerSpec& ctrl, const GainMap& gains);

} // namespace cdm
