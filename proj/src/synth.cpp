#include "cdm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "cdm/error.hpp"

namespace cdm {

namespace {

void collect_gains(const SlotPolynomial& slots, std::vector<std::string>& names, std::set<std::string>& seen) {
    for (const auto& s : slots)
        if (const auto* g = std::get_if<std::string>(&s))
            if (seen.insert(*g).second)
                names.push_back(*g);
}

std::size_t slot_degree(const SlotPolynomial& slots) {
    // Named slots count as nonzero; trailing fixed zeros do not.
    std::size_t deg = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto* v = std::get_if<double>(&slots[i]);
        if (!v || *v != 0.0)
            deg = i;
    }
    return deg;
}

Polynomial fixed_part(const SlotPolynomial& slots) {
    std::vector<double> c(std::max<std::size_t>(slots.size(), 1), 0.0);
    for (std::size_t i = 0; i < slots.size(); ++i)
        if (const auto* v = std::get_if<double>(&slots[i]))
            c[i] = *v;
    return Polynomial(std::move(c));
}

Polynomial gain_basis(const SlotPolynomial& slots, const std::string& gain) {
    std::vector<double> c(std::max<std::size_t>(slots.size(), 1), 0.0);
    for (std::size_t i = 0; i < slots.size(); ++i)
        if (const auto* g = std::get_if<std::string>(&slots[i]); g && *g == gain)
            c[i] = 1.0;
    return Polynomial(std::move(c));
}

} // namespace

void ControllerSpec::finalize() {
    if (denominator.is_zero())
        throw ValidationError("denominator: must be nonzero");
    if (actuated_input.empty())
        throw ValidationError("actuated_input: required");
    std::set<std::string> outs;
    for (const auto& [out, slots] : feedback) {
        if (!outs.insert(out).second)
            throw ValidationError("feedback." + out + ": duplicate output");
        if (slots.empty())
            throw ValidationError("feedback." + out + ": empty coefficient list");
    }
    gain_names.clear();
    std::set<std::string> seen;
    collect_gains(reference_numerator, gain_names, seen);
    for (const auto& [_, slots] : feedback)
        collect_gains(slots, gain_names, seen);
}

void ControllerSpec::validate_against(const TransferMatrix& plant) const {
    if (std::find(plant.input_names.begin(), plant.input_names.end(), actuated_input) == plant.input_names.end())
        throw ValidationError("actuated_input: plant has no input '" + actuated_input + "'");
    for (const auto& [out, _] : feedback)
        if (std::find(plant.output_names.begin(), plant.output_names.end(), out) == plant.output_names.end())
            throw ValidationError("feedback." + out + ": plant has no output '" + out + "'");
}

bool ControllerSpec::is_proper() const {
    const std::size_t da = denominator.degree();
    if (slot_degree(reference_numerator) > da)
        return false;
    return std::all_of(feedback.begin(), feedback.end(),
                       [&](const auto& fb) { return slot_degree(fb.second) <= da; });
}

ControllerSpec hover_pid_controller() {
    ControllerSpec c;
    c.denominator = Polynomial{0, 1};
    c.reference_numerator = {std::string("k0")};
    c.feedback = {
        {"u", {std::string("k0"), std::string("k1")}},
        {"theta", {std::string("k2"), std::string("k3")}},
        {"w", {std::string("k4")}},
    };
    c.actuated_input = "delta_lon";
    c.finalize();
    return c;
}

GainMap hover_design_gains() {
    return {{"k0", 0.08412}, {"k1", -0.30369}, {"k2", -13.90378}, {"k3", -2.56712}, {"k4", 2.46190}};
}

Polynomial instantiate(const SlotPolynomial& slots, const GainMap& gains) {
    std::vector<double> c(std::max<std::size_t>(slots.size(), 1), 0.0);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (const auto* v = std::get_if<double>(&slots[i])) {
            c[i] = *v;
        } else {
            const auto& name = std::get<std::string>(slots[i]);
            auto it = gains.find(name);
            if (it == gains.end())
                throw ValidationError("gains." + name + ": unbound gain");
            c[i] = it->second;
        }
    }
    return Polynomial(std::move(c));
}

Polynomial closed_loop_poly(const TransferMatrix& plant, const ControllerSpec& ctrl, const GainMap& gains) {
    ctrl.validate_against(plant);
    Polynomial P = ctrl.denominator * plant.delta;
    for (const auto& [out, slots] : ctrl.feedback)
        P = P + instantiate(slots, gains) * plant.numerator(out, ctrl.actuated_input);
    return P;
}

AffineClosedLoop closed_loop_affine(const TransferMatrix& plant, const ControllerSpec& ctrl) {
    ctrl.validate_against(plant);
    AffineClosedLoop a;
    a.base = ctrl.denominator * plant.delta;
    for (const auto& [out, slots] : ctrl.feedback)
        a.base = a.base + fixed_part(slots) * plant.numerator(out, ctrl.actuated_input);
    for (const auto& g : ctrl.gain_names) {
        Polynomial col;
        for (const auto& [out, slots] : ctrl.feedback)
            col = col + gain_basis(slots, g) * plant.numerator(out, ctrl.actuated_input);
        a.columns.push_back(col);
    }
    return a;
}

GainAssignment solve_gains(const TransferMatrix& plant, const ControllerSpec& ctrl, const Polynomial& target,
                           const SolveOptions& opts) {
    const AffineClosedLoop form = closed_loop_affine(plant, ctrl);
    const std::size_t unknowns = ctrl.gain_names.size();
    if (unknowns == 0)
        throw ValidationError("controller has no unknown gains to solve for");

    std::size_t n = form.base.degree();
    for (const auto& c : form.columns)
        n = std::max(n, c.degree());
    if (target.degree() != n)
        throw ValidationError("target degree " + std::to_string(target.degree()) +
                              " does not match achievable closed-loop degree " + std::to_string(n));

    const bool lead_fixed = form.base[n] != 0.0 &&
                            std::all_of(form.columns.begin(), form.columns.end(), [&](const auto& c) { return c[n] == 0.0; });

    GainAssignment out;
    out.target = lead_fixed ? scale(target, form.base[n] / target[n]) : target;

    if (opts.bind.empty()) {
        for (std::size_t i = 0; i < (lead_fixed ? n : n + 1); ++i)
            out.bound.push_back(i);
    } else {
        for (std::size_t i : opts.bind) {
            if (i > n)
                throw ValidationError("bind: coefficient index " + std::to_string(i) + " beyond degree " +
                                      std::to_string(n));
            out.bound.push_back(i);
        }
        std::sort(out.bound.begin(), out.bound.end());
        out.bound.erase(std::unique(out.bound.begin(), out.bound.end()), out.bound.end());
    }

    const auto rows = static_cast<Eigen::Index>(out.bound.size());
    const auto cols = static_cast<Eigen::Index>(unknowns);
    Eigen::MatrixXd M(rows, cols);
    Eigen::VectorXd rhs(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t i = out.bound[static_cast<std::size_t>(r)];
        rhs(r) = out.target[i] - form.base[i];
        for (Eigen::Index k = 0; k < cols; ++k)
            M(r, k) = form.columns[static_cast<std::size_t>(k)][i];
    }

    // Unit-norm columns so the rank decision does not depend on gain units.
    Eigen::VectorXd norms = M.colwise().norm().transpose();
    for (Eigen::Index k = 0; k < cols; ++k)
        if (norms(k) > 0.0)
            M.col(k) /= norms(k);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    qr.setThreshold(1e-12);
    out.rank = static_cast<std::size_t>(qr.rank());
    if (out.rank < unknowns)
        throw ComputationError("rank-deficient Diophantine system: rank " + std::to_string(out.rank) + " for " +
                               std::to_string(unknowns) + " unknown gains (null-space dimension " +
                               std::to_string(unknowns - out.rank) + ")");

    Eigen::VectorXd g = qr.solve(rhs);
    for (Eigen::Index k = 0; k < cols; ++k)
        out.values[ctrl.gain_names[static_cast<std::size_t>(k)]] = g(k) / norms(k);

    out.achieved = closed_loop_poly(plant, ctrl, out.values);
    for (std::size_t i = 0; i <= n; ++i)
        out.residuals.push_back(out.achieved[i] - out.target[i]);
    return out;
}

double dc_gain(const TransferFunction& tf) {
    const double d0 = tf.den[0];
    if (d0 == 0.0)
        throw ComputationError("pole at origin");
    return tf.num[0] / d0;
}

ClosedLoopSystem closed_loop_tf(const TransferMatrix& plant, const ControllerSpec& ctrl, const GainMap& gains) {
    ClosedLoopSystem cl;
    cl.P = closed_loop_poly(plant, ctrl, gains);
    cl.actuated_input = ctrl.actuated_input;
    cl.outputs = plant.output_names;

    const Polynomial F = instantiate(ctrl.reference_numerator, gains);
    std::vector<std::pair<std::string, Polynomial>> B;
    for (const auto& [out, slots] : ctrl.feedback)
        B.emplace_back(out, instantiate(slots, gains));

    for (const auto& y : plant.output_names) {
        const Polynomial& N = plant.numerator(y, ctrl.actuated_input);
        cl.tracking[y] = {N * F, cl.P};
        cl.disturbance[y] = {ctrl.denominator * N, cl.P};
        for (const auto& [k, Bk] : B)
            cl.noise[{y, k}] = {scale(N * Bk, -1.0), cl.P};
    }

    Polynomial loop;
    for (const auto& [k, Bk] : B)
        loop = loop + Bk * plant.numerator(k, ctrl.actuated_input);
    cl.control_effort = {F * plant.delta, cl.P};
    cl.control_effort_disturbance = {scale(loop, -1.0), cl.P};
    return cl;
}

} // namespace cdm
