#include "cdm/robust.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "cdm/error.hpp"

namespace cdm {

void SweepPlan::validate() const {
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw ValidationError("plan.fraction: must lie in [0, 1)");
    if (include_corners && parameters.size() > 20)
        throw ValidationError("plan.parameters: too many parameters for corner enumeration");
    if (parameters.empty())
        throw ValidationError("plan.parameters: at least one parameter required");
}

std::size_t SweepPlan::total_runs() const {
    return samples + (include_corners ? (std::size_t{1} << parameters.size()) : 0);
}

double SeededUniform::next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

std::vector<std::vector<double>> sweep_factors(const SweepPlan& plan) {
    plan.validate();
    const std::size_t k = plan.parameters.size();
    std::vector<std::vector<double>> rows;
    rows.reserve(plan.total_runs());
    if (plan.include_corners) {
        for (std::size_t c = 0; c < (std::size_t{1} << k); ++c) {
            std::vector<double> f(k);
            for (std::size_t j = 0; j < k; ++j)
                f[j] = (c >> j) & 1U ? 1.0 + plan.fraction : 1.0 - plan.fraction;
            rows.push_back(std::move(f));
        }
    }
    SeededUniform rng(plan.seed);
    for (std::size_t s = 0; s < plan.samples; ++s) {
        std::vector<double> f(k);
        for (std::size_t j = 0; j < k; ++j)
            f[j] = rng.next(1.0 - plan.fraction, 1.0 + plan.fraction);
        rows.push_back(std::move(f));
    }
    return rows;
}

unsigned default_workers() {
    if (const char* env = std::getenv("CDM_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0)
            return static_cast<unsigned>(v);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

namespace {

SweepRun evaluate(const Model& model, const ControllerSpec& ctrl, const GainMap& gains, const SweepPlan& plan,
                  const Scenario& scenario, std::vector<double> factors) {
    std::map<std::string, double> f;
    for (std::size_t j = 0; j < plan.parameters.size(); ++j)
        f[plan.parameters[j]] = factors[j];

    SweepRun run;
    run.factors = std::move(factors);
    const TransferMatrix plant = to_transfer_matrix(perturb(model, f));
    const ClosedLoopSystem cl = closed_loop_tf(plant, ctrl, gains);
    const RouthVerdict v = routh_stable(cl.P);
    run.stable = v.stable;
    run.degenerate = v.degenerate;
    const auto rs = roots(cl.P);
    run.max_root_real = std::max_element(rs.begin(), rs.end(), [](auto a, auto b) { return a.real() < b.real(); })->real();

    const SimulationResult sim =
        simulate(to_linear_system(cl), scenario.reference, scenario.disturbance, scenario.horizon, scenario.step);
    run.diverged = sim.diverged;
    const Metrics m = metrics(sim, scenario.metric_channel, scenario.reference.final_value());
    run.settling_time_s = m.settling_time_s;
    run.steady_state_error = m.steady_state_error;
    return run;
}

} // namespace

SweepReport sweep(const Model& model, const ControllerSpec& ctrl, const GainMap& gains, const SweepPlan& plan,
                  const Scenario& scenario, unsigned workers) {
    plan.validate();
    check_perturbable(model, plan.parameters);
    // Surface structural errors once, before any run.
    {
        const TransferMatrix nominal = to_transfer_matrix(model);
        ctrl.validate_against(nominal);
        (void)instantiate(ctrl.reference_numerator, gains);
        for (const auto& [_, slots] : ctrl.feedback)
            (void)instantiate(slots, gains);
        if (std::find(nominal.output_names.begin(), nominal.output_names.end(), scenario.metric_channel) ==
                nominal.output_names.end() &&
            scenario.metric_channel != ctrl.actuated_input)
            throw ValidationError("scenario.metric_channel: unknown channel '" + scenario.metric_channel + "'");
    }

    auto rows = sweep_factors(plan);
    SweepReport report;
    report.plan = plan;
    report.runs.resize(rows.size());

    if (workers == 0)
        workers = default_workers();
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, rows.size())));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            try {
                report.runs[i] = evaluate(model, ctrl, gains, plan, scenario, rows[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);

    aggregate(report);
    return report;
}

void aggregate(SweepReport& report) {
    std::size_t stable = 0;
    std::vector<double> settle;
    for (const auto& r : report.runs) {
        stable += r.stable ? 1 : 0;
        if (r.settling_time_s)
            settle.push_back(*r.settling_time_s);
    }
    report.fraction_stable =
        report.runs.empty() ? 0.0 : static_cast<double>(stable) / static_cast<double>(report.runs.size());
    report.settling_min = report.settling_median = report.settling_max = std::nullopt;
    if (!settle.empty()) {
        std::sort(settle.begin(), settle.end());
        report.settling_min = settle.front();
        report.settling_max = settle.back();
        const std::size_t m = settle.size() / 2;
        report.settling_median = settle.size() % 2 ? settle[m] : 0.5 * (settle[m - 1] + settle[m]);
    }
}

std::string to_csv(const SweepReport& report) {
    std::ostringstream os;
    os.precision(17);
    const auto& plan = report.plan;
    os << "# seed=" << plan.seed << " fraction=" << plan.fraction << " samples=" << plan.samples
       << " include_corners=" << (plan.include_corners ? "true" : "false") << '\n';
    os << "run";
    for (const auto& p : plan.parameters)
        os << ',' << p;
    os << ",stable,settling_time_s,steady_state_error,diverged\n";
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        const auto& r = report.runs[i];
        os << i;
        for (double f : r.factors)
            os << ',' << f;
        os << ',' << (r.stable ? "true" : "false") << ',';
        if (r.settling_time_s)
            os << *r.settling_time_s;
        os << ',';
        if (r.steady_state_error)
            os << *r.steady_state_error;
        os << ',' << (r.diverged ? "true" : "false") << '\n';
    }
    return os.str();
}

} // namespace cdm
