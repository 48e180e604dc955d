#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cdm/plant.hpp"
#include "cdm/synth.hpp"

namespace cdm {

enum class SignalKind { Zero, Step, Doublet, Impulse };

struct SignalSpec {
    SignalKind kind = SignalKind::Zero;
    double amplitude = 1.0;  // step / doublet level
    double t0 = 0.0;         // seconds
    double half_width = 5.0; // doublet, seconds
    double area = 1.0;       // impulse

    void validate() const;
    // Value the signal settles to (step amplitude, zero otherwise).
    [[nodiscard]] double final_value() const { return kind == SignalKind::Step ? amplitude : 0.0; }

    static SignalSpec zero() { return {}; }
    static SignalSpec step(double amplitude = 1.0, double t0 = 0.0);
    static SignalSpec doublet(double amplitude = 1.0, double t0 = 1.0, double half_width = 5.0);
    static SignalSpec impulse(double area = 1.0, double t0 = 35.0);
};

const char* to_string(SignalKind k);
SignalKind parse_signal_kind(const std::string& s);

// t_k = k * step, k = 0..count-1.
struct TimeGrid {
    double step = 1e-3;
    std::size_t count = 0;
    [[nodiscard]] double at(std::size_t k) const { return static_cast<double>(k) * step; }
    static TimeGrid over(double horizon, double step);
};

std::vector<double> generate(const SignalSpec& signal, const TimeGrid& grid);

// Controllable canonical form of num/den (den normalized monic).
StateSpaceModel realize(const TransferFunction& tf);

// LTI system with two scalar inputs (reference, disturbance) and named outputs.
struct LinearSystem {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B; // n x 2: [reference, disturbance]
    Eigen::MatrixXd C;
    Eigen::MatrixXd D; // p x 2 direct feedthrough; empty means zero
    std::vector<std::string> output_names;
};

// One canonical block per input, both sharing P: outputs are the plant
// outputs followed by the controller output named after the actuated input.
LinearSystem to_linear_system(const ClosedLoopSystem& cl);

// Reference and disturbance both enter at input `input` of the model.
LinearSystem to_linear_system(const StateSpaceModel& ss, const std::string& input = {});

// Open-loop plant driven at `input` (default: first input).
LinearSystem to_linear_system(const TransferMatrix& tm, const std::string& input = {});

struct Metrics {
    std::optional<double> settling_time_s;
    std::optional<double> overshoot_fraction;
    std::optional<double> steady_state_error;
};

struct SimulationResult {
    std::vector<double> t;
    std::vector<std::pair<std::string, std::vector<double>>> channels;
    double step = 0.0;
    bool diverged = false;

    [[nodiscard]] const std::vector<double>& channel(const std::string& name) const;
    [[nodiscard]] bool has_channel(const std::string& name) const;
};

inline constexpr double kDivergenceLimit = 1e9;

// Exact zero-order-hold stepping: the input is held over [t_k, t_{k+1}) and
// (Ad, Bd) come from the exponential of the augmented [[A, B], [0, 0]] h.
// Channels: outputs, then "reference" and "disturbance". Stops, flagging
// divergence, at the first sample where a channel is non-finite or beyond 1e9.
SimulationResult simulate(const LinearSystem& sys, const SignalSpec& reference, const SignalSpec& disturbance,
                          double horizon, double step);

// Settling time uses a 2% band around reference_final (2% of the channel's
// peak magnitude when reference_final = 0). Unavailable for diverged runs.
Metrics metrics(const SimulationResult& result, const std::string& channel, double reference_final);

// Uniform decimation keeping the first and last sample, at most max_points.
SimulationResult downsample(const SimulationResult& r, std::size_t max_points);

std::string to_csv(const SimulationResult& r);

} // namespace cdm
