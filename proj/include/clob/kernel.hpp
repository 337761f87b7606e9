#pragma once

#include <iosfwd>
#include <vector>

namespace clob {

/// Sibuya waiting-time law: psi[n] is P(wait = n) for n >= 1 and phi[n] is
/// the survival P(wait > n). Index 0 holds psi = 0 and phi = 1.
struct SibuyaTable {
    std::vector<double> psi;
    std::vector<double> phi;
};

SibuyaTable sibuya(double alpha, std::size_t N);

/// Memory kernel K(1..N) with psi = K * phi (discrete convolution), stored
/// 1-based: K[0] is unused and zero.
std::vector<double> memory_kernel(double alpha, std::size_t N);

/// Immutable kernel for the update equation, truncated to a window.
struct KernelTable {
    double alpha = 1.0;
    std::vector<double> K;    ///< K[1..window], K[0] = 0
    std::vector<double> psi;  ///< psi[0..N]
    std::vector<double> phi;  ///< phi[0..N]

    /// Number of history slices the update sum reaches back over.
    std::size_t window() const { return K.size() - 1; }

    /// Builds K up to `max_window` terms, stopping early once |K(n)| falls
    /// below `tolerance` (n >= 2). alpha = 1 yields a window of one.
    static KernelTable build(double alpha, std::size_t max_window = 512, double tolerance = 1e-10);
};

/// CSV with columns n,psi,phi,K.
void write_kernel_csv(std::ostream& os, const KernelTable& table);

}  // namespace clob
