#include <doctest.h>

#include <random>

#include "cdm/error.hpp"
#include "cdm/plant.hpp"
#include "cdm/sim.hpp"
#include "oracles.hpp"

using namespace cdm;

namespace {

StateSpaceModel two_state() {
    StateSpaceModel m;
    m.name = "mass-damper";
    m.A.resize(2, 2);
    m.A << 0, 1, -2, -3;
    m.B.resize(2, 1);
    m.B << 0, 1;
    m.C.resize(2, 2);
    m.C << 1, 0, 0, 1;
    m.state_names = {"x", "v"};
    m.input_names = {"f"};
    m.output_names = {"x", "v"};
    m.params["k"] = ParamRef{'A', 1, 0};
    m.params["c"] = ParamRef{'A', 1, 1};
    return m;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            A(i, j) = u(rng);
    return A;
}

} // namespace

TEST_CASE("state-space validation names the offending field") {
    auto m = two_state();
    CHECK_NOTHROW(m.validate());

    auto bad = m;
    bad.B.resize(3, 1);
    bad.B.setZero();
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("B: expected 2 rows"), ValidationError);

    bad = m;
    bad.A.resize(2, 3);
    bad.A.setZero();
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("A: must be square"), ValidationError);

    bad = m;
    bad.output_names = {"x"};
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = m;
    bad.params["bogus"] = ParamRef{'A', 5, 0};
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("params.bogus"), ValidationError);
}

TEST_CASE("faddeev_leverrier on a companion matrix") {
    const auto fl = faddeev_leverrier(two_state().A);
    CHECK(fl.char_poly == Polynomial{2, 3, 1});
    REQUIRE(fl.adjugate_terms.size() == 2);
    CHECK(fl.adjugate_terms[0].isIdentity());
    CHECK_THROWS_AS(faddeev_leverrier(Eigen::MatrixXd(2, 3)), ValidationError);
}

TEST_CASE("transfer_matrix of a second-order system") {
    const auto tm = transfer_matrix(two_state());
    CHECK(tm.delta == Polynomial{2, 3, 1});
    CHECK(tm.numerator("x", "f") == Polynomial{1});
    CHECK(tm.numerator("v", "f") == Polynomial{0, 1});
    CHECK_NOTHROW(tm.validate());
    CHECK_THROWS_AS((void)tm.numerator("x", "nope"), ValidationError);
}

TEST_CASE("char_poly agrees with cofactor expansion") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 50; ++t) {
        const Eigen::Index n = 1 + t % 5;
        const auto A = random_matrix(rng, n);
        const Polynomial p = char_poly(A);
        const auto want = oracle::char_poly_cofactor(A);
        const double scale = std::max(1.0, *std::max_element(want.begin(), want.end(), [](double a, double b) {
            return std::abs(a) < std::abs(b);
        }));
        for (std::size_t i = 0; i < want.size(); ++i)
            CHECK(std::abs(p[i] - want[i]) <= 1e-9 * std::max(std::abs(want[i]), scale));
    }
}

TEST_CASE("numerators agree with a cofactor adjugate oracle") {
    // C adj(sI - A) B = det(sI - A + B C) - det(sI - A) for a single input and output.
    std::mt19937_64 rng(43);
    for (int t = 0; t < 30; ++t) {
        const Eigen::Index n = 1 + t % 4;
        StateSpaceModel m;
        m.A = random_matrix(rng, n);
        m.B = random_matrix(rng, n).col(0);
        m.C = random_matrix(rng, n).row(0);
        for (Eigen::Index k = 0; k < n; ++k)
            m.state_names.push_back("x" + std::to_string(k));
        m.input_names = {"u"};
        m.output_names = {"y"};
        const auto tm = transfer_matrix(m);
        const auto want = oracle::poly_add(oracle::char_poly_cofactor(m.A - m.B * m.C),
                                           oracle::char_poly_cofactor(m.A), -1.0);
        const Polynomial& num = tm.numerator("y", "u");
        for (std::size_t i = 0; i < want.size(); ++i)
            CHECK(std::abs(num[i] - want[i]) <= 1e-9 * std::max(1.0, std::abs(want[i])));
    }
}

TEST_CASE("realize then transfer_matrix round trips") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + static_cast<std::size_t>(t % 6);
        std::vector<double> den(n + 1), num(n);
        for (auto& x : den)
            x = u(rng);
        den.back() = 0.5 + std::abs(den.back());
        for (auto& x : num)
            x = u(rng);
        const TransferFunction tf{Polynomial(num), Polynomial(den)};
        const auto tm = transfer_matrix(realize(tf));
        const double lead = tf.den.leading();
        for (std::size_t i = 0; i <= n; ++i)
            CHECK(std::abs(tm.delta[i] - tf.den[i] / lead) <= 1e-9 * std::max(1.0, std::abs(tf.den[i] / lead)));
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(tm.numerator("y", "u")[i] - tf.num[i] / lead) <=
                  1e-9 * std::max(1.0, std::abs(tf.num[i] / lead)));
    }
}

TEST_CASE("hover fixture") {
    const auto tm = fixture_r50_hover_lonvert(true);
    CHECK_NOTHROW(tm.validate());
    CHECK(tm.name == "r50-hover-lonvert");
    CHECK(tm.delta == Polynomial{-24.11, -36.71, 55.56, 97.08, 22.4, 1});
    CHECK(tm.numerator("u", "delta_lon") == Polynomial{3550.1, 5782, 43, 70});
    CHECK(tm.numerator("w", "delta_col") == Polynomial{1798.6, -191, -3833.4, -998, -45.8});
    CHECK(tm.numerator("q", "delta_col").is_zero());
    // Sign-corrected theta is q/s.
    const Polynomial q = tm.numerator("q", "delta_lon");
    CHECK(q == tm.numerator("theta", "delta_lon") * Polynomial{0, 1});

    const auto verbatim = fixture_r50_hover_lonvert(false);
    CHECK(verbatim.name == "r50-hover-lonvert-verbatim");
    CHECK(verbatim.numerator("theta", "delta_lon") == Polynomial{-7.98, -123.25, 179.56});
    CHECK_FALSE(verbatim == tm);

    CHECK(load_fixture("r50-hover-lonvert") == tm);
    CHECK(fixture_names().size() == 2);
    CHECK_THROWS_AS(load_fixture("nope"), ValidationError);
}

TEST_CASE("transfer-matrix validation") {
    auto tm = fixture_r50_hover_lonvert(true);
    tm.numerators[{"u", "delta_lon"}] = Polynomial{1, 0, 0, 0, 0, 2};
    CHECK_THROWS_WITH_AS(tm.validate(), doctest::Contains("numerators.u/delta_lon"), ValidationError);

    tm = fixture_r50_hover_lonvert(true);
    tm.numerators.erase({"w", "delta_col"});
    CHECK_THROWS_WITH_AS(tm.validate(), doctest::Contains("missing"), ValidationError);
}

TEST_CASE("channel names") {
    CHECK(channel_name({"u", "delta_lon"}) == "u/delta_lon");
    CHECK(parse_channel_name("w/delta_col") == ChannelKey{"w", "delta_col"});
    CHECK_THROWS_AS(parse_channel_name("nodelimiter"), ValidationError);
}

TEST_CASE("perturb a transfer matrix") {
    const auto tm = fixture_r50_hover_lonvert(true);
    const auto p = perturb(tm, {{"delta[2]", 1.3}, {"u/delta_lon[0]", 0.5}});
    CHECK(p.delta[2] == 55.56 * 1.3);
    CHECK(p.numerator("u", "delta_lon")[0] == 3550.1 * 0.5);
    CHECK(p.delta[3] == 97.08);
    CHECK(p == perturb(p, {}));

    CHECK_THROWS_WITH_AS(perturb(tm, {{"delta[9]", 1.1}}), doctest::Contains("unknown parameter"), ValidationError);
    CHECK_THROWS_WITH_AS(perturb(tm, {{"X_u", 1.1}}), doctest::Contains("unknown parameter"), ValidationError);
    CHECK_THROWS_WITH_AS(perturb(tm, {{"zz/delta_lon[0]", 1.1}}), doctest::Contains("unknown parameter"),
                         ValidationError);
}

TEST_CASE("perturb a state-space model") {
    const auto m = two_state();
    const auto p = perturb(m, {{"k", 1.5}});
    CHECK(p.A(1, 0) == -3.0);
    CHECK(char_poly(p.A) == Polynomial{3, 3, 1});
    CHECK_THROWS_AS(perturb(m, {{"mass", 2.0}}), ValidationError);
    CHECK_NOTHROW(check_perturbable(Model{m}, {"k", "c"}));
    CHECK_THROWS_AS(check_perturbable(Model{m}, {"k", "zeta"}), ValidationError);
}

TEST_CASE("perturbation composes exactly") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> f(0.7, 1.3);
    const auto tm = fixture_r50_hover_lonvert(true);
    const auto ss = two_state();
    for (int t = 0; t < 100; ++t) {
        const double a = f(rng), b = f(rng);
        const auto twice = perturb(perturb(tm, {{"delta[1]", a}}), {{"delta[1]", b}});
        const auto once = perturb(tm, {{"delta[1]", a * b}});
        CHECK(twice.delta == once.delta);
        const auto ss2 = perturb(perturb(ss, {{"c", a}}), {{"c", b}});
        CHECK(ss2.A == perturb(ss, {{"c", a * b}}).A);
    }
}

TEST_CASE("to_transfer_matrix over the model variant") {
    CHECK(to_transfer_matrix(Model{two_state()}).delta == Polynomial{2, 3, 1});
    const auto tm = fixture_r50_hover_lonvert(true);
    CHECK(to_transfer_matrix(Model{tm}) == tm);
}
