#include <doctest.h>

#include <cmath>
#include <sstream>

#include "clob/errors.hpp"
#include "clob/kernel.hpp"

using namespace clob;

namespace {

// K(1) = alpha and K(n >= 2) are the coefficients of (1 - z)^(1 - alpha),
// the generating-function identity K(z) = psi(z) / Phi(z) for Sibuya waits.
std::vector<double> closed_form_kernel(double alpha, std::size_t N) {
    std::vector<double> w(N + 1);
    w[0] = 1.0;
    for (std::size_t n = 1; n <= N; ++n) w[n] = w[n - 1] * (static_cast<double>(n) - 2.0 + alpha) / static_cast<double>(n);
    std::vector<double> K(N + 1, 0.0);
    K[1] = alpha;
    for (std::size_t n = 2; n <= N; ++n) K[n] = w[n];
    return K;
}

double max_deconvolution_error(double alpha, std::size_t N) {
    const SibuyaTable s = sibuya(alpha, N);
    const std::vector<double> K = memory_kernel(alpha, N);
    double err = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
        double conv = 0.0;
        for (std::size_t m = 1; m <= n; ++m) conv += K[m] * s.phi[n - m];
        err = std::max(err, std::abs(conv - s.psi[n]));
    }
    return err;
}

}  // namespace

TEST_CASE("Sibuya recurrences") {
    const SibuyaTable one = sibuya(1.0, 5);
    CHECK(one.psi[1] == 1.0);
    CHECK(one.phi[0] == 1.0);
    for (std::size_t n = 2; n <= 5; ++n) CHECK(one.psi[n] == 0.0);
    for (std::size_t n = 1; n <= 5; ++n) CHECK(one.phi[n] == 0.0);

    const SibuyaTable half = sibuya(0.5, 4);
    CHECK(half.psi[1] == 0.5);
    CHECK(half.psi[2] == doctest::Approx(0.125).epsilon(1e-15));
    for (std::size_t n = 1; n <= 4; ++n) {
        CHECK(half.psi[n] >= 0.0);
        CHECK(half.phi[n] <= half.phi[n - 1]);
        CHECK(half.phi[n] == doctest::Approx(half.phi[n - 1] - half.psi[n]).epsilon(1e-14));
    }
    CHECK_THROWS_AS(sibuya(0.0, 4), DomainError);
    CHECK_THROWS_AS(sibuya(1.2, 4), DomainError);
}

TEST_CASE("Sibuya survival has tail exponent alpha") {
    const std::size_t N = 10000;
    const SibuyaTable s = sibuya(0.57, N);
    const double slope = std::log(s.phi[N] / s.phi[N / 10]) / std::log(10.0);
    CHECK(std::abs(slope + 0.57) < 0.05);
}

TEST_CASE("kernel collapses at alpha = 1") {
    const auto K = memory_kernel(1.0, 512);
    CHECK(K[1] == 1.0);
    double worst = 0.0;
    for (std::size_t n = 2; n <= 512; ++n) worst = std::max(worst, std::abs(K[n]));
    CHECK(worst < 1e-12);
    CHECK(KernelTable::build(1.0).window() == 1);
}

TEST_CASE("kernel deconvolution identity and closed form") {
    for (double alpha : {0.4, 0.5, 0.57, 0.8, 1.0}) {
        CAPTURE(alpha);
        CHECK(max_deconvolution_error(alpha, 512) < 1e-12);
        const auto K = memory_kernel(alpha, 512);
        const auto oracle = closed_form_kernel(alpha, 512);
        CHECK(K[1] == alpha);
        double worst = 0.0;
        for (std::size_t n = 1; n <= 512; ++n) worst = std::max(worst, std::abs(K[n] - oracle[n]));
        CHECK(worst < 1e-12);
    }
    CHECK(max_deconvolution_error(0.5, 6) < 1e-12);
}

TEST_CASE("kernel window truncation") {
    const KernelTable t = KernelTable::build(0.57, 512, 1e-10);
    CHECK(t.window() == 512);  // |K(n)| ~ n^(alpha - 2) stays above 1e-10 here
    const KernelTable shortw = KernelTable::build(0.57, 40, 1e-10);
    CHECK(shortw.window() == 40);
    const KernelTable loose = KernelTable::build(0.9, 512, 1e-3);
    CHECK(loose.window() < 512);
    CHECK(std::abs(loose.K[loose.window()]) >= 1e-3);
    double sum = 0.0;
    for (std::size_t n = 1; n <= t.window(); ++n) sum += t.K[n];
    CHECK(std::isfinite(sum));
    CHECK(std::abs(sum) < 1.0);

    std::ostringstream os;
    write_kernel_csv(os, loose);
    CHECK(os.str().rfind("n,psi,phi,K\n", 0) == 0);
}
