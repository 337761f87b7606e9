#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace clob {

struct ReturnMoments {
    double mean = 0.0;
    double std = 0.0;
    double skew = 0.0;
    double excess_kurtosis = 0.0;
};

struct QQPoint {
    double theoretical = 0.0;
    double empirical = 0.0;
};

struct FactsReport {
    std::size_t n = 0;
    ReturnMoments return_moments;
    /// Large-sample standard error of the excess kurtosis, sqrt(24/n).
    double kurtosis_se = 0.0;
    /// 95% white-noise band half-width, 1.96/sqrt(n).
    double acf_band = 0.0;
    std::vector<double> acf_returns;
    std::vector<double> acf_abs_returns;
    std::vector<double> acf_orderflow;
    std::vector<QQPoint> qq_points;
};

/// Tick-rule signs: +1 for an up move, -1 for a down move, zero changes
/// inherit the last non-zero sign (leading zeros are dropped).
std::vector<double> tick_rule_signs(std::span<const double> prices);

/// Log or first-difference returns of a price series.
std::vector<double> log_returns(std::span<const double> prices);
std::vector<double> differences(std::span<const double> series);

/// Facts for a return series. Empty `orderflow_signs` are derived from the
/// returns by the tick rule. Needs at least 2 * max_lag returns.
FactsReport facts_from_returns(std::span<const double> returns,
                               std::span<const double> orderflow_signs, std::size_t max_lag,
                               std::size_t qq_points = 200);

/// Facts for a strictly positive price series (log returns).
FactsReport facts(std::span<const double> prices, std::span<const double> orderflow_signs,
                  std::size_t max_lag, std::size_t qq_points = 200);

void write_facts_json(std::ostream& out, const FactsReport& report, std::uint64_t seed);
/// lag,acf_returns,acf_abs_returns,acf_orderflow
void write_facts_acf_csv(std::ostream& out, const FactsReport& report, std::uint64_t seed);
/// theoretical,empirical
void write_facts_qq_csv(std::ostream& out, const FactsReport& report, std::uint64_t seed);

}  // namespace clob
