#pragma once

#include <span>
#include <vector>

namespace clob::stats {

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator).
double stddev(std::span<const double> x);
/// Moment-ratio skewness m3 / m2^1.5.
double skewness(std::span<const double> x);
/// m4 / m2^2 - 3.
double excess_kurtosis(std::span<const double> x);

/// Sample autocorrelation at lags 0..max_lag, direct O(n k) sums.
std::vector<double> acf(std::span<const double> x, std::size_t max_lag);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Hurst exponent of an increment series by first-order detrended
/// fluctuation analysis over log-spaced window sizes.
double hurst_dfa(std::span<const double> x);

/// Geweke-Porter-Hudak log-periodogram estimate of the memory parameter d
/// using the first floor(n^bandwidth) Fourier frequencies.
double gph(std::span<const double> x, double bandwidth = 0.5);

/// Augmented Dickey-Fuller t statistic (constant, `lags` lagged differences)
/// for a level series.
double adf_statistic(std::span<const double> level, std::size_t lags = 1);

struct Garch11 {
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double log_likelihood = 0.0;

    double persistence() const { return alpha + beta; }
};

/// Gaussian quasi-maximum-likelihood GARCH(1,1) fit with variance
/// targeting, optimised by Nelder-Mead.
Garch11 garch11_fit(std::span<const double> returns);

/// Hill estimator of the tail index of |x| from the top k order statistics
/// (k = 0 picks 5% of the sample, at least 10).
double hill_tail_index(std::span<const double> x, std::size_t k = 0);

/// Standard normal quantile.
double normal_quantile(double p);

/// Rank correlations with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);
/// Kendall tau-b.
double kendall_tau(std::span<const double> a, std::span<const double> b);

}  // namespace clob::stats
