#pragma once

#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cdm/polyalg.hpp"

namespace cdm {

// Location of a named scalar (e.g. X_u) inside A, B or C.
struct ParamRef {
    char matrix = 'A';
    Eigen::Index row = 0;
    Eigen::Index col = 0;
    friend bool operator==(const ParamRef&, const ParamRef&) = default;
};

// Nominal value and accumulated multiplier of a perturbed scalar. Keeping the
// nominal around makes repeated perturbation compose exactly:
// perturb(perturb(m, f), g) and perturb(m, f * g) produce identical bits.
struct Perturbation {
    double nominal = 0.0;
    double factor = 1.0;
    friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

struct StateSpaceModel {
    std::string name;
    Eigen::MatrixXd A, B, C;
    std::vector<std::string> state_names, input_names, output_names;
    std::map<std::string, ParamRef> params;
    std::map<std::string, Perturbation> perturbations;

    // Throws ValidationError naming the offending field.
    void validate() const;
    [[nodiscard]] Eigen::Index states() const { return A.rows(); }
};

bool operator==(const StateSpaceModel& a, const StateSpaceModel& b);

using ChannelKey = std::pair<std::string, std::string>; // (output, input)

struct TransferMatrix {
    std::string name;
    Polynomial delta;
    std::map<ChannelKey, Polynomial> numerators;
    std::vector<std::string> input_names, output_names;
    std::map<std::string, Perturbation> perturbations;

    void validate() const;
    [[nodiscard]] const Polynomial& numerator(const std::string& output, const std::string& input) const;
};

// Model equality compares content; perturbation bookkeeping is ignored.
bool operator==(const TransferMatrix& a, const TransferMatrix& b);

// "u/delta_lon" <-> ("u", "delta_lon")
std::string channel_name(const ChannelKey& k);
ChannelKey parse_channel_name(const std::string& s);

using Model = std::variant<StateSpaceModel, TransferMatrix>;

// Faddeev-LeVerrier: det(sI - A) = sum c_k s^k together with
// adj(sI - A) = sum_{k=1}^{n} M_k s^{n-k}.
struct FaddeevLeverrier {
    Polynomial char_poly;
    std::vector<Eigen::MatrixXd> adjugate_terms; // M_1..M_n, M_1 = I
};

FaddeevLeverrier faddeev_leverrier(const Eigen::MatrixXd& A);
Polynomial char_poly(const Eigen::MatrixXd& A);

// delta = det(sI - A), numerator(j, k) = C_j adj(sI - A) B_k, both pruned.
TransferMatrix transfer_matrix(const StateSpaceModel& ss);

inline constexpr const char* kHoverFixtureName = "r50-hover-lonvert";

// Longitudinal-vertical hover model of the R-50: open-loop characteristic
// polynomial and the eight output/input numerators, epsilon terms dropped.
// sign_corrected replaces theta/delta_lon with (q/delta_lon)/s, restoring theta = q/s.
TransferMatrix fixture_r50_hover_lonvert(bool sign_corrected = true);

std::vector<std::string> fixture_names();
// "r50-hover-lonvert" (sign-corrected) or "r50-hover-lonvert-verbatim".
TransferMatrix load_fixture(const std::string& name);

// State-space names resolve through params; transfer-matrix names are
// "<curve>[i]" with curve "delta" or "<output>/<input>".
Model perturb(const Model& m, const std::map<std::string, double>& factors);
StateSpaceModel perturb(const StateSpaceModel& m, const std::map<std::string, double>& factors);
TransferMatrix perturb(const TransferMatrix& m, const std::map<std::string, double>& factors);

// Throws ValidationError when a name cannot be perturbed on m.
void check_perturbable(const Model& m, const std::vector<std::string>& names);

TransferMatrix to_transfer_matrix(const Model& m);

} // namespace cdm
