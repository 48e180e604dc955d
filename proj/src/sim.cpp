#include "cdm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "cdm/error.hpp"

namespace cdm {

namespace {

// Grid instants are k * step; boundaries within this fraction of a step
// count as hit so that the same edges land identically on refined grids.
constexpr double kEdgeSlack = 1e-9;

bool at_or_after(double t, double edge, double step) { return t >= edge - kEdgeSlack * step; }

struct Canonical {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
};

Canonical canonical_block(const Polynomial& monic_den) {
    const auto n = static_cast<Eigen::Index>(monic_den.degree());
    Canonical c{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
    for (Eigen::Index i = 0; i + 1 < n; ++i)
        c.A(i, i + 1) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j)
        c.A(n - 1, j) = -monic_den[static_cast<std::size_t>(j)];
    c.B(n - 1) = 1.0;
    return c;
}

Eigen::RowVectorXd output_row(const Polynomial& num, double lead, Eigen::Index n, const std::string& what) {
    if (!num.is_zero() && static_cast<Eigen::Index>(num.degree()) >= n)
        throw ValidationError(what + ": improper transfer function (degree num >= degree den)");
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    for (std::size_t i = 0; i <= num.degree(); ++i)
        row(static_cast<Eigen::Index>(i)) = num[i] / lead;
    return row;
}

// Biproper num/den: split off the direct term, num/den = d + rem/den.
struct ProperRow {
    Eigen::RowVectorXd row;
    double feedthrough = 0.0;
};

ProperRow proper_row(const Polynomial& num, const Polynomial& monic_den, double lead, Eigen::Index n,
                     const std::string& what) {
    if (num.is_zero() || static_cast<Eigen::Index>(num.degree()) < n)
        return {output_row(num, lead, n, what), 0.0};
    if (static_cast<Eigen::Index>(num.degree()) > n)
        throw ValidationError(what + ": improper transfer function (degree num > degree den)");
    ProperRow out;
    out.feedthrough = num[static_cast<std::size_t>(n)] / lead;
    out.row = Eigen::RowVectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out.row(i) = num[static_cast<std::size_t>(i)] / lead - out.feedthrough * monic_den[static_cast<std::size_t>(i)];
    return out;
}

} // namespace

void SignalSpec::validate() const {
    if (!(t0 >= 0.0))
        throw ValidationError("signal.t0: must be >= 0");
    if (kind == SignalKind::Doublet && !(half_width > 0.0))
        throw ValidationError("signal.half_width: must be > 0 for a doublet");
    if (!std::isfinite(amplitude) || !std::isfinite(area))
        throw ValidationError("signal: amplitude/area must be finite");
}

SignalSpec SignalSpec::step(double amplitude, double t0) {
    SignalSpec s;
    s.kind = SignalKind::Step;
    s.amplitude = amplitude;
    s.t0 = t0;
    return s;
}

SignalSpec SignalSpec::doublet(double amplitude, double t0, double half_width) {
    SignalSpec s;
    s.kind = SignalKind::Doublet;
    s.amplitude = amplitude;
    s.t0 = t0;
    s.half_width = half_width;
    return s;
}

SignalSpec SignalSpec::impulse(double area, double t0) {
    SignalSpec s;
    s.kind = SignalKind::Impulse;
    s.area = area;
    s.t0 = t0;
    return s;
}

const char* to_string(SignalKind k) {
    switch (k) {
    case SignalKind::Step: return "step";
    case SignalKind::Doublet: return "doublet";
    case SignalKind::Impulse: return "impulse";
    default: return "zero";
    }
}

SignalKind parse_signal_kind(const std::string& s) {
    if (s == "zero")
        return SignalKind::Zero;
    if (s == "step")
        return SignalKind::Step;
    if (s == "doublet")
        return SignalKind::Doublet;
    if (s == "impulse")
        return SignalKind::Impulse;
    throw ValidationError("unknown signal kind '" + s + "' (zero|step|doublet|impulse)");
}

TimeGrid TimeGrid::over(double horizon, double step) {
    if (!(step > 0.0))
        throw ValidationError("step: must be > 0");
    if (!(horizon >= 10.0 * step))
        throw ValidationError("horizon: must be >= 10 * step");
    return {step, static_cast<std::size_t>(std::floor(horizon / step + 0.5)) + 1};
}

std::vector<double> generate(const SignalSpec& signal, const TimeGrid& grid) {
    signal.validate();
    std::vector<double> v(grid.count, 0.0);
    const double h = grid.step;
    switch (signal.kind) {
    case SignalKind::Zero: break;
    case SignalKind::Step:
        for (std::size_t k = 0; k < grid.count; ++k)
            if (at_or_after(grid.at(k), signal.t0, h))
                v[k] = signal.amplitude;
        break;
    case SignalKind::Doublet: {
        const double mid = signal.t0 + signal.half_width;
        const double end = signal.t0 + 2.0 * signal.half_width;
        for (std::size_t k = 0; k < grid.count; ++k) {
            const double t = grid.at(k);
            if (at_or_after(t, end, h))
                continue;
            if (at_or_after(t, mid, h))
                v[k] = -signal.amplitude;
            else if (at_or_after(t, signal.t0, h))
                v[k] = signal.amplitude;
        }
        break;
    }
    case SignalKind::Impulse: {
        const auto k = static_cast<std::size_t>(std::llround(signal.t0 / h));
        if (k < grid.count)
            v[k] = signal.area / h;
        break;
    }
    }
    return v;
}

StateSpaceModel realize(const TransferFunction& tf) {
    if (tf.den.is_zero() || tf.den.degree() < 1)
        throw ValidationError("realize: denominator must have degree >= 1");
    const auto n = static_cast<Eigen::Index>(tf.den.degree());
    const double lead = tf.den.leading();
    const Polynomial monic = scale(tf.den, 1.0 / lead);

    auto block = canonical_block(monic);
    StateSpaceModel ss;
    ss.A = block.A;
    ss.B = block.B;
    ss.C = output_row(tf.num, lead, n, "realize");
    for (Eigen::Index i = 0; i < n; ++i)
        ss.state_names.push_back("x" + std::to_string(i + 1));
    ss.input_names = {"u"};
    ss.output_names = {"y"};
    return ss;
}

LinearSystem to_linear_system(const ClosedLoopSystem& cl) {
    const auto n = static_cast<Eigen::Index>(cl.P.degree());
    if (n < 1)
        throw ComputationError("closed-loop polynomial has degree 0");
    const double lead = cl.P.leading();
    const Polynomial monic = scale(cl.P, 1.0 / lead);
    const auto block = canonical_block(monic);

    LinearSystem sys;
    sys.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    sys.A.topLeftCorner(n, n) = block.A;
    sys.A.bottomRightCorner(n, n) = block.A;
    sys.B = Eigen::MatrixXd::Zero(2 * n, 2);
    sys.B.block(0, 0, n, 1) = block.B;
    sys.B.block(n, 1, n, 1) = block.B;

    const auto rows = static_cast<Eigen::Index>(cl.outputs.size()) + 1;
    sys.C = Eigen::MatrixXd::Zero(rows, 2 * n);
    for (Eigen::Index j = 0; j + 1 < rows; ++j) {
        const auto& y = cl.outputs[static_cast<std::size_t>(j)];
        sys.C.block(j, 0, 1, n) = output_row(cl.tracking.at(y).num, lead, n, "tracking " + y);
        sys.C.block(j, n, 1, n) = output_row(cl.disturbance.at(y).num, lead, n, "disturbance " + y);
        sys.output_names.push_back(y);
    }
    // A static controller makes the controller output biproper.
    sys.D = Eigen::MatrixXd::Zero(rows, 2);
    const auto ce_r = proper_row(cl.control_effort.num, monic, lead, n, "control effort");
    const auto ce_d = proper_row(cl.control_effort_disturbance.num, monic, lead, n, "control effort");
    sys.C.block(rows - 1, 0, 1, n) = ce_r.row;
    sys.C.block(rows - 1, n, 1, n) = ce_d.row;
    sys.D(rows - 1, 0) = ce_r.feedthrough;
    sys.D(rows - 1, 1) = ce_d.feedthrough;
    sys.output_names.push_back(cl.actuated_input);
    return sys;
}

LinearSystem to_linear_system(const StateSpaceModel& ss, const std::string& input) {
    ss.validate();
    Eigen::Index col = 0;
    if (!input.empty()) {
        auto it = std::find(ss.input_names.begin(), ss.input_names.end(), input);
        if (it == ss.input_names.end())
            throw ValidationError("input: model has no input '" + input + "'");
        col = it - ss.input_names.begin();
    }
    LinearSystem sys;
    sys.A = ss.A;
    sys.B.resize(ss.A.rows(), 2);
    sys.B.col(0) = ss.B.col(col);
    sys.B.col(1) = ss.B.col(col);
    sys.C = ss.C;
    sys.output_names = ss.output_names;
    return sys;
}

LinearSystem to_linear_system(const TransferMatrix& tm, const std::string& input) {
    tm.validate();
    const std::string in = input.empty() ? tm.input_names.front() : input;
    if (std::find(tm.input_names.begin(), tm.input_names.end(), in) == tm.input_names.end())
        throw ValidationError("input: model has no input '" + in + "'");
    const auto n = static_cast<Eigen::Index>(tm.delta.degree());
    const double lead = tm.delta.leading();
    const auto block = canonical_block(scale(tm.delta, 1.0 / lead));

    LinearSystem sys;
    sys.A = block.A;
    sys.B.resize(n, 2);
    sys.B.col(0) = block.B;
    sys.B.col(1) = block.B;
    sys.C.resize(static_cast<Eigen::Index>(tm.output_names.size()), n);
    for (std::size_t j = 0; j < tm.output_names.size(); ++j) {
        const auto& y = tm.output_names[j];
        sys.C.row(static_cast<Eigen::Index>(j)) = output_row(tm.numerator(y, in), lead, n, y + "/" + in);
        sys.output_names.push_back(y);
    }
    return sys;
}

const std::vector<double>& SimulationResult::channel(const std::string& name) const {
    for (const auto& [n, v] : channels)
        if (n == name)
            return v;
    throw ValidationError("unknown channel '" + name + "'");
}

bool SimulationResult::has_channel(const std::string& name) const {
    return std::any_of(channels.begin(), channels.end(), [&](const auto& c) { return c.first == name; });
}

SimulationResult simulate(const LinearSystem& sys, const SignalSpec& reference, const SignalSpec& disturbance,
                          double horizon, double step) {
    const TimeGrid grid = TimeGrid::over(horizon, step);
    const auto r = generate(reference, grid);
    const auto d = generate(disturbance, grid);

    const Eigen::Index n = sys.A.rows();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 2, n + 2);
    aug.topLeftCorner(n, n) = sys.A * step;
    aug.topRightCorner(n, 2) = sys.B * step;
    const Eigen::MatrixXd phi = aug.exp();
    const Eigen::MatrixXd Ad = phi.topLeftCorner(n, n);
    const Eigen::MatrixXd Bd = phi.topRightCorner(n, 2);

    SimulationResult res;
    res.step = step;
    const auto p = static_cast<std::size_t>(sys.C.rows());
    std::vector<std::vector<double>> out(p);
    for (auto& o : out)
        o.reserve(grid.count);
    res.t.reserve(grid.count);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::Vector2d u;
    std::size_t k = 0;
    const bool has_d = sys.D.size() > 0;
    for (; k < grid.count; ++k) {
        u << r[k], d[k];
        Eigen::VectorXd y = sys.C * x;
        if (has_d)
            y += sys.D * u;
        res.t.push_back(grid.at(k));
        bool blown = false;
        for (std::size_t j = 0; j < p; ++j) {
            const double v = y(static_cast<Eigen::Index>(j));
            out[j].push_back(v);
            blown = blown || !std::isfinite(v) || std::abs(v) > kDivergenceLimit;
        }
        if (blown) {
            res.diverged = true;
            ++k;
            break;
        }
        x = Ad * x + Bd * u;
    }

    for (std::size_t j = 0; j < p; ++j)
        res.channels.emplace_back(sys.output_names[j], std::move(out[j]));
    res.channels.emplace_back("reference", std::vector<double>(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k)));
    res.channels.emplace_back("disturbance", std::vector<double>(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k)));
    return res;
}

Metrics metrics(const SimulationResult& result, const std::string& channel, double reference_final) {
    const auto& y = result.channel(channel);
    Metrics m;
    if (result.diverged || y.empty())
        return m;

    double peak = 0.0;
    for (double v : y)
        peak = std::max(peak, std::abs(v));
    const double band = reference_final != 0.0 ? 0.02 * std::abs(reference_final) : 0.02 * peak;

    std::optional<std::size_t> last_out;
    for (std::size_t k = y.size(); k-- > 0;) {
        if (std::abs(y[k] - reference_final) > band) {
            last_out = k;
            break;
        }
    }
    if (!last_out)
        m.settling_time_s = 0.0;
    else if (*last_out + 1 < y.size())
        m.settling_time_s = result.t[*last_out + 1];

    if (reference_final != 0.0) {
        const double dir = reference_final > 0.0 ? 1.0 : -1.0;
        double extreme = -std::numeric_limits<double>::infinity();
        for (double v : y)
            extreme = std::max(extreme, dir * v);
        m.overshoot_fraction = std::max(0.0, (extreme - std::abs(reference_final)) / std::abs(reference_final));
    }

    const std::size_t tail = std::max<std::size_t>(1, y.size() / 10);
    double sum = 0.0;
    for (std::size_t k = y.size() - tail; k < y.size(); ++k)
        sum += y[k];
    m.steady_state_error = sum / static_cast<double>(tail) - reference_final;
    return m;
}

SimulationResult downsample(const SimulationResult& r, std::size_t max_points) {
    if (max_points < 2 || r.t.size() <= max_points)
        return r;
    const std::size_t n = r.t.size();
    std::vector<std::size_t> idx;
    idx.reserve(max_points);
    for (std::size_t i = 0; i < max_points; ++i)
        idx.push_back(static_cast<std::size_t>(
            std::llround(static_cast<double>(i) * static_cast<double>(n - 1) / static_cast<double>(max_points - 1))));

    SimulationResult out;
    out.step = r.step * static_cast<double>(n - 1) / static_cast<double>(max_points - 1);
    out.diverged = r.diverged;
    for (auto i : idx)
        out.t.push_back(r.t[i]);
    for (const auto& [name, v] : r.channels) {
        std::vector<double> s;
        s.reserve(idx.size());
        for (auto i : idx)
            s.push_back(v[i]);
        out.channels.emplace_back(name, std::move(s));
    }
    return out;
}

std::string to_csv(const SimulationResult& r) {
    std::ostringstream os;
    os.precision(17);
    os << 't';
    for (const auto& [name, _] : r.channels)
        os << ',' << name;
    os << '\n';
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        os << r.t[k];
        for (const auto& [_, v] : r.channels)
            os << ',' << v[k];
        os << '\n';
    }
    return os.str();
}

} // namespace cdm
