#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "clob/simulator.hpp"

namespace clob {

struct FourierCoefficients {
    int N = 0;          ///< coefficients for k = -N..N
    double T = 0.0;     ///< period the times were mapped from
    std::vector<std::complex<double>> c;  ///< c[k + N]

    std::complex<double> at(int k) const { return c[static_cast<std::size_t>(k + N)]; }
};

struct NufftOptions {
    double oversampling = 2.0;  ///< fine grid size / number of modes
    int spread_width = 12;      ///< Gaussian half-width in fine-grid points
};

/// Direct type-1 nonuniform DFT sum_j v_j exp(-i k 2 pi t_j / T), O(N M).
FourierCoefficients direct_nudft(std::span<const double> times,
                                 std::span<const std::complex<double>> values, double T, int N);

/// Type-1 NUFFT by fast Gaussian gridding: spread onto an oversampled
/// periodic grid, FFT, then divide out the Gaussian's transform.
FourierCoefficients fgg_nufft(std::span<const double> times,
                              std::span<const std::complex<double>> values, double T, int N,
                              const NufftOptions& options = {});
FourierCoefficients fgg_nufft(std::span<const double> times, std::span<const double> values,
                              double T, int N, const NufftOptions& options = {});

/// Return increments of a path over a window, attributed to the right
/// endpoint of each interval and shifted so the window starts at zero.
struct Increments {
    std::vector<double> t;
    std::vector<double> dp;
    double T = 0.0;
};

/// Increments of `path` with t in (start, end].
Increments increments(const PricePath& path, double start, double end);

struct FourierCovariance {
    double cov = 0.0;
    double var_a = 0.0;
    double var_b = 0.0;

    double rho() const;
};

/// Dirichlet-kernel Fourier estimator of integrated covariance over the
/// common span of both paths, using frequencies |k| <= N.
FourierCovariance fourier_covariance(const PricePath& a, const PricePath& b, int N,
                                     const NufftOptions& options = {});

/// Same estimator for several cutoffs at once; one NUFFT per path at the
/// largest cutoff, partial sums for the others.
std::vector<FourierCovariance> fourier_covariance_sweep(const PricePath& a, const PricePath& b,
                                                        std::span<const int> cutoffs,
                                                        const NufftOptions& options = {});

/// Frequency cutoff paired with an averaging scale: floor(T / (2 dt)).
int cutoff_for_scale(double T, double scale);

struct EppsCurve {
    std::vector<double> scales;
    std::vector<double> rho;     ///< mean over replications
    std::vector<double> std_error;  ///< standard error of the mean (0 when reps = 1)
    std::size_t reps = 0;
};

struct PathPair {
    PricePath a;
    PricePath b;
};

/// Correlation vs averaging scale, averaged over the given path pairs.
EppsCurve epps_curve(std::span<const PathPair> pairs, std::span<const double> scales,
                     const NufftOptions& options = {});

/// Runs `reps` simulations with seeds derived from `seed` and averages
/// their Epps curves (books 0 and 1).
EppsCurve simulated_epps_curve(const SimConfig& config, double horizon,
                               std::span<const double> scales, std::size_t reps,
                               std::uint64_t seed, const NufftOptions& options = {});

/// Two correlated Brownian paths sampled on independent Poisson clocks.
/// correlation = 0 gives the independent null case.
PathPair brownian_pair(double horizon, double rate_a, double rate_b, double correlation,
                       std::uint64_t seed);

struct PowerSpectrum {
    std::vector<int> k;         ///< 1..N
    std::vector<double> power;  ///< |c_k|^2
    double slope = 0.0;         ///< least-squares slope of log power on log k
};

PowerSpectrum power_spectrum(const PricePath& path, int N, const NufftOptions& options = {});

void write_epps_csv(std::ostream& os, const EppsCurve& curve, std::uint64_t seed);
void write_spectrum_csv(std::ostream& os, const PowerSpectrum& spectrum, std::uint64_t seed);

}  // namespace clob
