#include "cdm/plant.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "cdm/error.hpp"

namespace cdm {

namespace {

void check_labels(const std::vector<std::string>& names, Eigen::Index expected, const std::string& field,
                  const std::string& dim) {
    if (static_cast<Eigen::Index>(names.size()) != expected)
        throw ValidationError(field + ": expected " + std::to_string(expected) + " names (" + dim + "), got " +
                              std::to_string(names.size()));
    std::set<std::string> seen;
    for (const auto& n : names)
        if (!seen.insert(n).second)
            throw ValidationError(field + ": duplicate name '" + n + "'");
}

const Eigen::MatrixXd& matrix_of(const StateSpaceModel& m, char id) {
    switch (id) {
    case 'A': return m.A;
    case 'B': return m.B;
    case 'C': return m.C;
    default: throw ValidationError(std::string("unknown matrix id '") + id + "'");
    }
}

Eigen::MatrixXd& matrix_of(StateSpaceModel& m, char id) {
    return const_cast<Eigen::MatrixXd&>(matrix_of(static_cast<const StateSpaceModel&>(m), id));
}

struct CoeffAddress {
    std::string curve;
    std::size_t index = 0;
};

CoeffAddress parse_address(const std::string& name) {
    static const std::regex re(R"(^(.+)\[(\d+)\]$)");
    std::smatch m;
    if (!std::regex_match(name, m, re))
        throw ValidationError("unknown parameter '" + name + "' (expected <curve>[i])");
    return {m[1].str(), static_cast<std::size_t>(std::stoul(m[2].str()))};
}

Polynomial& curve_of(TransferMatrix& m, const std::string& curve, const std::string& full) {
    if (curve == "delta")
        return m.delta;
    auto it = m.numerators.find(parse_channel_name(curve));
    if (it == m.numerators.end())
        throw ValidationError("unknown parameter '" + full + "': no curve '" + curve + "'");
    return it->second;
}

} // namespace

void StateSpaceModel::validate() const {
    const Eigen::Index n = A.rows();
    if (n < 1)
        throw ValidationError("A: at least one state required");
    if (A.cols() != n)
        throw ValidationError("A: must be square, got " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
    if (B.rows() != n)
        throw ValidationError("B: expected " + std::to_string(n) + " rows, got " + std::to_string(B.rows()));
    if (B.cols() < 1)
        throw ValidationError("B: at least one input column required");
    if (C.cols() != n)
        throw ValidationError("C: expected " + std::to_string(n) + " columns, got " + std::to_string(C.cols()));
    if (C.rows() < 1)
        throw ValidationError("C: at least one output row required");
    check_labels(state_names, n, "state_names", "rows of A");
    check_labels(input_names, B.cols(), "input_names", "columns of B");
    check_labels(output_names, C.rows(), "output_names", "rows of C");
    for (const auto& [name, ref] : params) {
        const auto& mat = matrix_of(*this, ref.matrix);
        if (ref.row < 0 || ref.row >= mat.rows() || ref.col < 0 || ref.col >= mat.cols())
            throw ValidationError("params." + name + ": index (" + std::to_string(ref.row) + "," +
                                  std::to_string(ref.col) + ") outside " + ref.matrix);
    }
    if (!A.allFinite() || !B.allFinite() || !C.allFinite())
        throw ValidationError("A/B/C: non-finite entry");
}

bool operator==(const StateSpaceModel& a, const StateSpaceModel& b) {
    auto same = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
    };
    return a.name == b.name && same(a.A, b.A) && same(a.B, b.B) && same(a.C, b.C) &&
           a.state_names == b.state_names && a.input_names == b.input_names && a.output_names == b.output_names &&
           a.params == b.params;
}

bool operator==(const TransferMatrix& a, const TransferMatrix& b) {
    return a.name == b.name && a.delta == b.delta && a.numerators == b.numerators && a.input_names == b.input_names &&
           a.output_names == b.output_names;
}

std::string channel_name(const ChannelKey& k) { return k.first + "/" + k.second; }

ChannelKey parse_channel_name(const std::string& s) {
    const auto slash = s.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == s.size() || s.find('/', slash + 1) != std::string::npos)
        throw ValidationError("channel name '" + s + "' must be <output>/<input>");
    return {s.substr(0, slash), s.substr(slash + 1)};
}

void TransferMatrix::validate() const {
    if (delta.degree() < 1)
        throw ValidationError("delta: degree >= 1 required");
    check_labels(input_names, static_cast<Eigen::Index>(input_names.size()), "input_names", "inputs");
    check_labels(output_names, static_cast<Eigen::Index>(output_names.size()), "output_names", "outputs");
    if (input_names.empty() || output_names.empty())
        throw ValidationError("input_names/output_names: must be non-empty");
    for (const auto& out : output_names) {
        for (const auto& in : input_names) {
            auto it = numerators.find({out, in});
            if (it == numerators.end())
                throw ValidationError("numerators." + out + "/" + in + ": missing");
            if (!it->second.is_zero() && it->second.degree() >= delta.degree())
                throw ValidationError("numerators." + out + "/" + in + ": degree " +
                                      std::to_string(it->second.degree()) + " >= degree(delta) " +
                                      std::to_string(delta.degree()) + " (plant must be strictly proper)");
        }
    }
    for (const auto& [key, _] : numerators) {
        if (std::find(output_names.begin(), output_names.end(), key.first) == output_names.end() ||
            std::find(input_names.begin(), input_names.end(), key.second) == input_names.end())
            throw ValidationError("numerators." + channel_name(key) + ": unknown output or input");
    }
}

const Polynomial& TransferMatrix::numerator(const std::string& output, const std::string& input) const {
    auto it = numerators.find({output, input});
    if (it == numerators.end())
        throw ValidationError("no numerator for " + output + "/" + input);
    return it->second;
}

FaddeevLeverrier faddeev_leverrier(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols())
        throw ValidationError("A: must be square, got " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
    const Eigen::Index n = A.rows();
    if (n < 1)
        throw ValidationError("A: empty matrix");

    FaddeevLeverrier fl;
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    c[static_cast<std::size_t>(n)] = 1.0;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd M = I;
    for (Eigen::Index k = 1; k <= n; ++k) {
        if (k > 1)
            M = A * fl.adjugate_terms.back() + c[static_cast<std::size_t>(n - k + 1)] * I;
        fl.adjugate_terms.push_back(M);
        c[static_cast<std::size_t>(n - k)] = -(A * M).trace() / static_cast<double>(k);
    }
    fl.char_poly = Polynomial(std::move(c));
    return fl;
}

Polynomial char_poly(const Eigen::MatrixXd& A) { return faddeev_leverrier(A).char_poly; }

TransferMatrix transfer_matrix(const StateSpaceModel& ss) {
    ss.validate();
    const auto fl = faddeev_leverrier(ss.A);
    const auto n = static_cast<std::size_t>(ss.A.rows());

    TransferMatrix tm;
    tm.name = ss.name;
    tm.delta = prune_epsilon(fl.char_poly);
    tm.input_names = ss.input_names;
    tm.output_names = ss.output_names;
    for (Eigen::Index j = 0; j < ss.C.rows(); ++j) {
        for (Eigen::Index k = 0; k < ss.B.cols(); ++k) {
            std::vector<double> num(n, 0.0);
            for (std::size_t t = 1; t <= n; ++t)
                num[n - t] = ss.C.row(j).dot(fl.adjugate_terms[t - 1] * ss.B.col(k));
            tm.numerators[{ss.output_names[static_cast<std::size_t>(j)], ss.input_names[static_cast<std::size_t>(k)]}] =
                prune_epsilon(Polynomial(std::move(num)));
        }
    }
    return tm;
}

TransferMatrix fixture_r50_hover_lonvert(bool sign_corrected) {
    TransferMatrix tm;
    tm.name = sign_corrected ? kHoverFixtureName : std::string(kHoverFixtureName) + "-verbatim";
    tm.input_names = {"delta_lon", "delta_col"};
    tm.output_names = {"u", "q", "theta", "w"};
    tm.delta = Polynomial{-24.11, -36.71, 55.56, 97.08, 22.4, 1};
    tm.numerators[{"u", "delta_lon"}] = Polynomial{3550.1, 5782, 43, 70};
    tm.numerators[{"q", "delta_lon"}] = Polynomial{0, -7.98, -123.25, -179.56};
    tm.numerators[{"theta", "delta_lon"}] =
        sign_corrected ? Polynomial{-7.98, -123.25, -179.56} : Polynomial{-7.98, -123.25, 179.56};
    tm.numerators[{"w", "delta_lon"}] = Polynomial{-38.29, 0, 1.07, 21.2};
    tm.numerators[{"w", "delta_col"}] = Polynomial{1798.6, -191, -3833.4, -998, -45.8};
    tm.numerators[{"u", "delta_col"}] = Polynomial::zero();
    tm.numerators[{"q", "delta_col"}] = Polynomial::zero();
    tm.numerators[{"theta", "delta_col"}] = Polynomial::zero();
    return tm;
}

std::vector<std::string> fixture_names() {
    return {kHoverFixtureName, std::string(kHoverFixtureName) + "-verbatim"};
}

TransferMatrix load_fixture(const std::string& name) {
    if (name == kHoverFixtureName)
        return fixture_r50_hover_lonvert(true);
    if (name == std::string(kHoverFixtureName) + "-verbatim")
        return fixture_r50_hover_lonvert(false);
    throw ValidationError("unknown fixture '" + name + "'");
}

StateSpaceModel perturb(const StateSpaceModel& m, const std::map<std::string, double>& factors) {
    StateSpaceModel out = m;
    for (const auto& [name, factor] : factors) {
        auto it = m.params.find(name);
        if (it == m.params.end())
            throw ValidationError("unknown parameter '" + name + "'");
        auto& entry = matrix_of(out, it->second.matrix)(it->second.row, it->second.col);
        auto [rec, inserted] = out.perturbations.try_emplace(name, Perturbation{entry, 1.0});
        rec->second.factor *= factor;
        entry = rec->second.nominal * rec->second.factor;
    }
    return out;
}

TransferMatrix perturb(const TransferMatrix& m, const std::map<std::string, double>& factors) {
    TransferMatrix out = m;
    for (const auto& [name, factor] : factors) {
        const auto addr = parse_address(name);
        Polynomial& curve = curve_of(out, addr.curve, name);
        auto [rec, inserted] = out.perturbations.try_emplace(name, Perturbation{curve[addr.index], 1.0});
        if (inserted && addr.index > curve.degree())
            throw ValidationError("unknown parameter '" + name + "': index beyond degree " +
                                  std::to_string(curve.degree()));
        rec->second.factor *= factor;
        std::vector<double> c = curve.vec();
        c.resize(std::max(c.size(), addr.index + 1), 0.0);
        c[addr.index] = rec->second.nominal * rec->second.factor;
        curve = Polynomial(std::move(c));
    }
    return out;
}

Model perturb(const Model& m, const std::map<std::string, double>& factors) {
    return std::visit([&](const auto& x) -> Model { return perturb(x, factors); }, m);
}

void check_perturbable(const Model& m, const std::vector<std::string>& names) {
    std::map<std::string, double> identity;
    for (const auto& n : names)
        identity[n] = 1.0;
    (void)perturb(m, identity);
}

TransferMatrix to_transfer_matrix(const Model& m) {
    if (const auto* tm = std::get_if<TransferMatrix>(&m))
        return *tm;
    return transfer_matrix(std::get<StateSpaceModel>(m));
}

} // namespace cdm
