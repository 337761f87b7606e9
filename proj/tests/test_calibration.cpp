#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "clob/calibration.hpp"
#include "clob/errors.hpp"
#include "clob/random.hpp"

using namespace clob;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> z(0.0, 0.01);
    std::vector<double> x(n);
    for (double& v : x) v = z(rng);
    return x;
}

Objective bowl(const Theta& centre, const Theta& a) {
    return [centre, a](const Theta& t) {
        double f = 0.0;
        for (std::size_t i = 0; i < 3; ++i) f += a[i] * (t[i] - centre[i]) * (t[i] - centre[i]);
        return f;
    };
}

}  // namespace

TEST_CASE("bounds") {
    const Bounds b;
    CHECK(b.contains({0.5, 14.0, 0.8}));
    CHECK_FALSE(b.contains({0.5, -1.0, 0.8}));
    CHECK_FALSE(b.contains({0.5, 14.0, 1.2}));
    const Theta p = b.project({-1.0, 200.0, 0.1});
    CHECK(p == Theta{1e-3, 100.0, 0.4});
}

TEST_CASE("quadratic form and distance") {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(kMomentCount, kMomentCount);
    CHECK(quadratic_form(Eigen::VectorXd::Zero(kMomentCount), I) == 0.0);
    Eigen::VectorXd g(2);
    g << 1.0, 2.0;
    Eigen::MatrixXd W(2, 2);
    W << 2.0, 0.5, 0.5, 1.0;
    CHECK(quadratic_form(g, W) == doctest::Approx(2.0 + 2.0 + 4.0));
    MomentVector m;
    for (std::size_t i = 0; i < kMomentCount; ++i) m.values[i] = static_cast<double>(i);
    const std::vector<MomentVector> same{m, m};
    CHECK(smd_distance(same, m, I) == 0.0);
    MomentVector shifted = m;
    shifted.values[3] += 2.0;
    const std::vector<MomentVector> mixed{m, shifted};
    CHECK(smd_distance(mixed, m, I) == doctest::Approx(1.0));
}

TEST_CASE("moment battery") {
    const auto x = normals(2000, 1);
    const MomentVector m = moments(x, x);
    CHECK(MomentVector::names().size() == kMomentCount);
    CHECK(std::string(MomentVector::names()[8]) == "hill");
    CHECK(m[3] == 0.0);
    CHECK(m[1] == doctest::Approx(0.01).epsilon(0.05));
    CHECK(std::abs(m[2]) < 0.5);
    CHECK(m[4] == doctest::Approx(0.5).epsilon(0.15));
    const std::vector<double> short_series(100, 0.01);
    CHECK_THROWS_AS(moments(short_series, short_series), DomainError);
    const std::vector<double> flat(600, 0.01);
    CHECK_THROWS_AS(moments(flat, flat), DomainError);
}

TEST_CASE("bootstrap weight matrix") {
    const auto x = normals(2000, 2);
    BootstrapOptions opts;
    opts.resamples = 200;
    const WeightMatrix w = bootstrap_weight(x, 5, opts);
    CHECK_FALSE(w.identity_fallback);
    REQUIRE(w.W.rows() == static_cast<Eigen::Index>(kMomentCount));
    CHECK((w.W - w.W.transpose()).cwiseAbs().maxCoeff() < 1e-8 * w.W.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w.W);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    CHECK(bootstrap_weight(x, 5, opts).W == w.W);

    opts.resamples = 10;
    const WeightMatrix few = bootstrap_weight(x, 5, opts);
    CHECK(few.identity_fallback);
    CHECK(few.W == Eigen::MatrixXd::Identity(kMomentCount, kMomentCount));
}

TEST_CASE("NMTA finds the minimum of a bowl, including on a bound") {
    const Theta centre{0.3, 0.0, 0.6};
    const Objective f = bowl(centre, {10.0, 0.01, 50.0});
    const Bounds b;
    NmtaOptions opts;
    opts.iterations = 300;
    const NmtaResult r = nmta(f, {0.5, 14.0, 0.8}, b, opts, 7);
    CHECK(r.theta[0] == doctest::Approx(0.3).epsilon(0.05));
    CHECK(r.theta[1] < 1.0);
    CHECK(r.theta[2] == doctest::Approx(0.6).epsilon(0.05));
    CHECK(b.contains(r.theta));
    REQUIRE(r.trace.size() == opts.iterations);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
    CHECK(r.value == r.trace.back());
    CHECK(r.value < 0.5 * r.initial_mean);
    CHECK(r.nm_moves + r.ta_moves == opts.iterations);

    const NmtaResult again = nmta(f, {0.5, 14.0, 0.8}, b, opts, 7);
    CHECK(again.theta == r.theta);
    CHECK(again.trace == r.trace);
}

TEST_CASE("NMTA treats failed evaluations as infinitely bad") {
    const Objective base = bowl({0.5, 10.0, 0.7}, {1.0, 0.01, 1.0});
    const Objective f = [&](const Theta& t) {
        if (t[0] > 0.55) throw SimulationError("boom", 0, 0.0, {});
        return base(t);
    };
    NmtaOptions opts;
    opts.iterations = 100;
    const NmtaResult r = nmta(f, {0.5, 14.0, 0.8}, Bounds{}, opts, 3);
    CHECK(std::isfinite(r.value));
    CHECK(r.theta[0] <= 0.55);
}

TEST_CASE("confidence intervals of an exact quadratic") {
    const Theta centre{0.5, 20.0, 0.7};
    const Theta a{40.0, 0.02, 300.0};
    const ConfidenceIntervals ci = confidence_intervals(bowl(centre, a), centre, Bounds{});
    CHECK(ci.warning.empty());
    for (std::size_t i = 0; i < 3; ++i) {
        const double expect = 1.959963984540054 * std::sqrt(1.0 / (2.0 * a[i]));
        CHECK(ci.half_width[i] == doctest::Approx(expect).epsilon(1e-6));
        CHECK(ci.lower[i] == doctest::Approx(centre[i] - expect));
        CHECK(ci.hessian(static_cast<int>(i), static_cast<int>(i)) == doctest::Approx(2.0 * a[i]).epsilon(1e-6));
    }
}

TEST_CASE("degenerate Hessians are flagged") {
    const Theta centre{0.5, 20.0, 0.7};
    const ConfidenceIntervals flat = confidence_intervals(bowl(centre, {1.0, 1.0, 0.0}), centre, Bounds{});
    CHECK(flat.warning.find("singular") != std::string::npos);
    for (double hw : flat.half_width) CHECK(std::isinf(hw));

    const Objective saddle = [](const Theta& t) {
        return (t[0] - 0.5) * (t[0] - 0.5) - (t[1] - 20.0) * (t[1] - 20.0) + (t[2] - 0.7) * (t[2] - 0.7);
    };
    const ConfidenceIntervals ind = confidence_intervals(saddle, centre, Bounds{});
    CHECK(ind.warning.find("indefinite") != std::string::npos);
    CHECK(ind.half_width[1] == doctest::Approx(1.959963984540054 * std::sqrt(0.5)).epsilon(1e-6));
}

TEST_CASE("simulated minimum distance objective") {
    SmdSetup setup;
    setup.n_returns = 500;
    setup.replications = 2;
    const std::vector<double> emp = simulate_returns(setup.base, {0.27, 12.55, 0.57}, 500, 99);
    REQUIRE(emp.size() == 500);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(kMomentCount, kMomentCount);
    SmdObjective obj(setup, emp, I, 4);
    const double f1 = obj({0.5, 14.0, 0.8});
    const double f2 = obj({0.5, 14.0, 0.8});
    CHECK(f1 == f2);
    CHECK(f1 >= 0.0);
    CHECK(obj.evaluations() == 2);
    CHECK_THROWS_AS(obj({0.5, 14.0, 1.5}), std::logic_error);
    CHECK_THROWS_AS(SmdObjective(setup, emp, Eigen::MatrixXd::Identity(3, 3), 4), ConfigError);
}

TEST_CASE("calibration report serialisation") {
    CalibrationResult r;
    r.theta_hat = {0.5, 14.0, 0.8};
    r.ci_lower = {0.4, -std::numeric_limits<double>::infinity(), 0.7};
    r.ci_upper = {0.6, std::numeric_limits<double>::infinity(), 0.9};
    r.objective_trace = {3.0, 2.0};
    r.seed = 8;
    r.warning = "singular Hessian; intervals unbounded";
    std::ostringstream js;
    write_calibration_json(js, r);
    const auto j = nlohmann::json::parse(js.str());
    CHECK(j["seed"] == 8);
    CHECK(j["theta_hat"]["nu"] == 14.0);
    CHECK(j["ci_upper"]["nu"].is_null());
    CHECK(j["objective_trace"].size() == 2);
    CHECK(j["empirical_moments"].size() == kMomentCount);
    std::ostringstream cs;
    write_trace_csv(cs, r);
    CHECK(cs.str() == "# seed=8 replications=0\niteration,best_objective\n1,3\n2,2\n");
}

TEST_CASE("NMTA on the unweighted squared distance") {
    const Bounds b;
    NmtaOptions opts;
    opts.iterations = 400;
    for (const Theta& star : {Theta{0.3, 12.0, 0.6}, Theta{0.4, 0.0, 0.7}}) {
        CAPTURE(star[1]);
        const Objective f = bowl(star, {1.0, 1.0, 1.0});
        const NmtaResult r = nmta(f, {0.5, 14.0, 0.8}, b, opts, 11);
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(r.theta[i] - star[i]) < 1e-2);
        CHECK(r.theta[1] >= 0.0);
    }
}

TEST_CASE("objective is smallest near the generating parameters") {
    SmdSetup setup;
    setup.n_returns = 1000;
    setup.replications = 3;
    const Theta star{0.27, 12.55, 0.57};
    const std::vector<double> emp = simulate_returns(setup.base, star, 1000, 123);
    BootstrapOptions bo;
    bo.resamples = 200;
    const WeightMatrix w = bootstrap_weight(emp, 1, bo);
    SmdObjective obj(setup, emp, w.W, 2);
    const double near = obj(star);
    CHECK(near < obj({2.0, 60.0, 0.95}));
    CHECK(near < obj({0.05, 2.0, 0.45}));
}
