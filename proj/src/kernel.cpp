#include "clob/kernel.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "clob/errors.hpp"

namespace clob {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw DomainError("alpha must lie in (0, 1], got " + std::to_string(alpha));
}

}  // namespace

SibuyaTable sibuya(double alpha, std::size_t N) {
    check_alpha(alpha);
    if (N < 1) throw DomainError("Sibuya table needs N >= 1");
    SibuyaTable t;
    t.psi.assign(N + 1, 0.0);
    t.phi.assign(N + 1, 0.0);
    t.phi[0] = 1.0;
    t.psi[1] = alpha;
    t.phi[1] = 1.0 - alpha;
    for (std::size_t n = 2; n <= N; ++n) {
        const double dn = static_cast<double>(n);
        t.psi[n] = t.psi[n - 1] * (dn - 1.0 - alpha) / dn;
        // phi(n) = phi(n-1) (n - alpha) / n is the same quantity without the
        // cancellation in phi(n-1) - psi(n) once phi is tiny
        t.phi[n] = t.phi[n - 1] * (dn - alpha) / dn;
    }
    return t;
}

std::vector<double> memory_kernel(double alpha, std::size_t N) {
    const SibuyaTable s = sibuya(alpha, N);
    std::vector<double> K(N + 1, 0.0);
    for (std::size_t n = 1; n <= N; ++n) {
        double acc = s.psi[n];
        for (std::size_t m = 1; m < n; ++m) acc -= K[m] * s.phi[n - m];
        K[n] = acc;
    }
    return K;
}

KernelTable KernelTable::build(double alpha, std::size_t max_window, double tolerance) {
    if (max_window < 1) throw ConfigError("kernel window must be at least 1");
    KernelTable table;
    table.alpha = alpha;
    std::vector<double> K = memory_kernel(alpha, max_window);
    std::size_t window = max_window;
    for (std::size_t n = 2; n <= max_window; ++n) {
        if (std::abs(K[n]) < tolerance) {
            window = n - 1;
            break;
        }
    }
    K.resize(window + 1);
    table.K = std::move(K);
    SibuyaTable s = sibuya(alpha, max_window);
    table.psi = std::move(s.psi);
    table.phi = std::move(s.phi);
    return table;
}

void write_kernel_csv(std::ostream& os, const KernelTable& table) {
    os << "n,psi,phi,K\n";
    os.precision(17);
    for (std::size_t n = 0; n < table.psi.size(); ++n) {
        os << n << ',' << table.psi[n] << ',' << table.phi[n] << ',';
        if (n >= 1 && n < table.K.size()) os << table.K[n];
        os << '\n';
    }
}

}  // namespace clob
