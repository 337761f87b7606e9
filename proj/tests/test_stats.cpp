#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "clob/errors.hpp"
#include "clob/optim.hpp"
#include "clob/random.hpp"
#include "clob/stats.hpp"

using namespace clob;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> x(n);
    for (double& v : x) v = z(rng);
    return x;
}

// Fractional Gaussian noise by the Durbin-Levinson recursion on its
// autocovariance 0.5 (|k+1|^2H - 2|k|^2H + |k-1|^2H).
std::vector<double> hosking_fgn(std::size_t n, double H, std::uint64_t seed) {
    auto gamma = [H](double k) {
        return 0.5 * (std::pow(std::abs(k + 1.0), 2 * H) - 2.0 * std::pow(std::abs(k), 2 * H) +
                      std::pow(std::abs(k - 1.0), 2 * H));
    };
    const std::vector<double> z = normals(n, seed);
    std::vector<double> x(n), phi(n, 0.0), prev(n, 0.0);
    double v = gamma(0.0);
    x[0] = std::sqrt(v) * z[0];
    for (std::size_t t = 1; t < n; ++t) {
        double num = gamma(static_cast<double>(t));
        for (std::size_t j = 1; j < t; ++j) num -= prev[j] * gamma(static_cast<double>(t - j));
        const double kappa = num / v;
        phi[t] = kappa;
        for (std::size_t j = 1; j < t; ++j) phi[j] = prev[j] - kappa * prev[t - j];
        v *= 1.0 - kappa * kappa;
        double m = 0.0;
        for (std::size_t j = 1; j <= t; ++j) m += phi[j] * x[t - j];
        x[t] = m + std::sqrt(v) * z[t];
        prev = phi;
    }
    return x;
}

std::vector<double> simulate_garch(std::size_t n, double omega, double a, double b, std::uint64_t seed) {
    const std::vector<double> z = normals(n + 500, seed);
    std::vector<double> r;
    double s2 = omega / (1.0 - a - b), prev = 0.0;
    for (std::size_t t = 0; t < z.size(); ++t) {
        s2 = omega + a * prev * prev + b * s2;
        prev = std::sqrt(s2) * z[t];
        if (t >= 500) r.push_back(prev);
    }
    return r;
}

}  // namespace

TEST_CASE("sample moments of small fixed inputs") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 10.0};
    CHECK(stats::mean(x) == doctest::Approx(4.0));
    CHECK(stats::stddev(x) == doctest::Approx(std::sqrt(12.5)));
    // central moments m2 = 10, m3 = 36, m4 = 278.8 (population form)
    CHECK(stats::skewness(x) == doctest::Approx(36.0 / std::pow(10.0, 1.5)));
    CHECK(stats::excess_kurtosis(x) == doctest::Approx(278.8 / 100.0 - 3.0));
    const std::vector<double> flat{2.0, 2.0, 2.0};
    CHECK_THROWS_AS(stats::excess_kurtosis(flat), DomainError);
}

TEST_CASE("Gaussian white noise sits at the null values") {
    const std::size_t n = 20000;
    const auto x = normals(n, 1);
    const double sn = std::sqrt(static_cast<double>(n));
    CHECK(std::abs(stats::mean(x)) < 4.0 / sn);
    CHECK(std::abs(stats::stddev(x) - 1.0) < 4.0 * std::sqrt(0.5) / sn);
    CHECK(std::abs(stats::skewness(x)) < 4.0 * std::sqrt(6.0) / sn);
    CHECK(std::abs(stats::excess_kurtosis(x)) < 4.0 * std::sqrt(24.0) / sn);
    const auto r = stats::acf(x, 20);
    CHECK(r[0] == doctest::Approx(1.0));
    for (std::size_t k = 1; k <= 20; ++k) CHECK(std::abs(r[k]) < 4.0 / sn);
    CHECK(stats::hurst_dfa(x) == doctest::Approx(0.5).epsilon(0.1));
    CHECK(std::abs(stats::gph(x)) < 0.2);
    std::vector<double> walk(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) walk[i] = s += x[i];
    CHECK(stats::adf_statistic(walk) > -3.5);
    CHECK(stats::adf_statistic(x) < -30.0);
}

TEST_CASE("acf of a deterministic alternating series") {
    std::vector<double> x(100);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 ? 1.0 : -1.0;
    const auto r = stats::acf(x, 2);
    CHECK(r[1] == doctest::Approx(-0.99));
    CHECK(r[2] == doctest::Approx(0.98));
}

TEST_CASE("DFA recovers the Hurst exponent of fractional noise") {
    const auto x = hosking_fgn(4096, 0.7, 5);
    CHECK(stats::hurst_dfa(x) == doctest::Approx(0.7).epsilon(0.1));
    const auto y = hosking_fgn(4096, 0.3, 6);
    CHECK(stats::hurst_dfa(y) == doctest::Approx(0.3).epsilon(0.2));
}

TEST_CASE("GARCH fit recovers persistence") {
    const auto r = simulate_garch(20000, 0.05, 0.1, 0.85, 9);
    const stats::Garch11 g = stats::garch11_fit(r);
    CHECK(g.persistence() == doctest::Approx(0.95).epsilon(0.03));
    CHECK(g.alpha == doctest::Approx(0.1).epsilon(0.35));
    CHECK(g.omega > 0.0);
}

TEST_CASE("stochastic volatility shows volatility clustering") {
    Rng rng = make_rng(12);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> r;
    double h = 0.0;
    for (int t = 0; t < 10000; ++t) {
        h = 0.98 * h + 0.2 * z(rng);
        r.push_back(std::exp(0.5 * h) * z(rng));
    }
    CHECK(stats::garch11_fit(r).persistence() > 0.5);
    std::vector<double> a;
    for (double v : r) a.push_back(std::abs(v));
    CHECK(stats::acf(a, 1)[1] > 0.05);
}

TEST_CASE("Hill estimator on a Pareto sample") {
    Rng rng = make_rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(20000);
    for (double& v : x) v = std::pow(1.0 - u(rng), -1.0 / 3.0);
    CHECK(stats::hill_tail_index(x) == doctest::Approx(3.0).epsilon(0.1));
    CHECK(stats::hill_tail_index(x, 2000) == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("Kolmogorov-Smirnov distance") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{4.0, 5.0, 6.0};
    const std::vector<double> c{1.0, 2.0};
    const std::vector<double> d{1.5, 3.0};
    CHECK(stats::ks_statistic(a, a) == 0.0);
    CHECK(stats::ks_statistic(a, b) == 1.0);
    CHECK(stats::ks_statistic(c, d) == doctest::Approx(0.5));
}

TEST_CASE("rank correlations") {
    const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> b{1.0, 3.0, 2.0, 4.0};
    const std::vector<double> rev{4.0, 3.0, 2.0, 1.0};
    CHECK(stats::kendall_tau(a, b) == doctest::Approx(4.0 / 6.0));
    CHECK(stats::spearman(a, b) == doctest::Approx(0.8));
    CHECK(stats::kendall_tau(a, rev) == doctest::Approx(-1.0));
    // tau-b with one tie in b: concordant 4, discordant 0, n0 = 6, ties_b = 1
    const std::vector<double> tied{1.0, 1.0, 2.0, 3.0};
    CHECK(stats::kendall_tau(a, tied) == doctest::Approx(5.0 / std::sqrt(6.0 * 5.0)));
    const std::vector<double> flat{1.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(stats::kendall_tau(a, flat), DomainError);
}

TEST_CASE("normal quantile") {
    CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(stats::normal_quantile(0.5) == doctest::Approx(0.0));
}

TEST_CASE("Nelder-Mead on the Rosenbrock valley") {
    auto rosen = [](const std::vector<double>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    const auto res = nelder_mead(rosen, {-1.2, 1.0}, 0.5, 5000, 1e-16);
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(res.evaluations <= 5000);
}
