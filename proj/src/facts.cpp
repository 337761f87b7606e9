#include "clob/facts.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "clob/errors.hpp"
#include "clob/stats.hpp"

namespace clob {

std::vector<double> tick_rule_signs(std::span<const double> prices) {
    std::vector<double> out;
    double last = 0.0;
    for (std::size_t i = 1; i < prices.size(); ++i) {
        const double d = prices[i] - prices[i - 1];
        if (d > 0.0) last = 1.0;
        else if (d < 0.0) last = -1.0;
        if (last != 0.0) out.push_back(last);
    }
    return out;
}

std::vector<double> log_returns(std::span<const double> prices) {
    std::vector<double> out;
    if (prices.size() < 2) return out;
    out.reserve(prices.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0 && prices[i - 1] > 0.0))
            throw DomainError("log returns need strictly positive prices");
        out.push_back(std::log(prices[i] / prices[i - 1]));
    }
    return out;
}

std::vector<double> differences(std::span<const double> series) {
    std::vector<double> out;
    for (std::size_t i = 1; i < series.size(); ++i) out.push_back(series[i] - series[i - 1]);
    return out;
}

FactsReport facts_from_returns(std::span<const double> returns,
                               std::span<const double> orderflow_signs, std::size_t max_lag,
                               std::size_t qq_points) {
    if (max_lag < 1) throw DomainError("facts need max_lag >= 1");
    if (returns.size() < 2 * max_lag || returns.size() < 4)
        throw DomainError("series too short for the requested lags");
    FactsReport rep;
    rep.n = returns.size();
    const double n = static_cast<double>(rep.n);
    rep.return_moments = {stats::mean(returns), stats::stddev(returns), stats::skewness(returns),
                          stats::excess_kurtosis(returns)};
    rep.kurtosis_se = std::sqrt(24.0 / n);
    rep.acf_band = 1.96 / std::sqrt(n);
    rep.acf_returns = stats::acf(returns, max_lag);

    std::vector<double> abs_r(returns.size());
    std::transform(returns.begin(), returns.end(), abs_r.begin(), [](double v) { return std::abs(v); });
    rep.acf_abs_returns = stats::acf(abs_r, max_lag);

    std::vector<double> signs;
    if (orderflow_signs.empty()) {
        // Returns are increments, so rebuild the level before the tick rule.
        std::vector<double> level(returns.size() + 1, 0.0);
        for (std::size_t i = 0; i < returns.size(); ++i) level[i + 1] = level[i] + returns[i];
        signs = tick_rule_signs(level);
    } else {
        signs.assign(orderflow_signs.begin(), orderflow_signs.end());
    }
    if (signs.size() < 2 * max_lag) throw DomainError("order-flow series too short for the requested lags");
    rep.acf_orderflow = stats::acf(signs, max_lag);

    std::vector<double> z(returns.begin(), returns.end());
    std::sort(z.begin(), z.end());
    const double m = rep.return_moments.mean;
    const double s = rep.return_moments.std;
    const std::size_t count = std::min(qq_points, z.size());
    for (std::size_t q = 0; q < count; ++q) {
        const std::size_t i = count == 1 ? 0 : q * (z.size() - 1) / (count - 1);
        const double p = (static_cast<double>(i) + 0.5) / n;
        rep.qq_points.push_back({stats::normal_quantile(p), (z[i] - m) / s});
    }
    return rep;
}

FactsReport facts(std::span<const double> prices, std::span<const double> orderflow_signs,
                  std::size_t max_lag, std::size_t qq_points) {
    const auto r = log_returns(prices);
    if (orderflow_signs.empty()) {
        const auto signs = tick_rule_signs(prices);
        return facts_from_returns(r, signs, max_lag, qq_points);
    }
    return facts_from_returns(r, orderflow_signs, max_lag, qq_points);
}

void write_facts_json(std::ostream& out, const FactsReport& report, std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["n"] = report.n;
    j["return_moments"] = {{"mean", report.return_moments.mean},
                           {"std", report.return_moments.std},
                           {"skew", report.return_moments.skew},
                           {"excess_kurtosis", report.return_moments.excess_kurtosis}};
    j["kurtosis_se"] = report.kurtosis_se;
    j["acf_band"] = report.acf_band;
    j["acf_returns"] = report.acf_returns;
    j["acf_abs_returns"] = report.acf_abs_returns;
    j["acf_orderflow"] = report.acf_orderflow;
    auto qq = nlohmann::ordered_json::array();
    for (const auto& p : report.qq_points) qq.push_back({p.theoretical, p.empirical});
    j["qq_points"] = qq;
    out << j.dump(2) << '\n';
}

void write_facts_acf_csv(std::ostream& out, const FactsReport& report, std::uint64_t seed) {
    out << "# seed=" << seed << " n=" << report.n << '\n';
    out << "lag,acf_returns,acf_abs_returns,acf_orderflow\n";
    out.precision(17);
    for (std::size_t k = 0; k < report.acf_returns.size(); ++k)
        out << k << ',' << report.acf_returns[k] << ',' << report.acf_abs_returns[k] << ','
            << report.acf_orderflow[k] << '\n';
}

void write_facts_qq_csv(std::ostream& out, const FactsReport& report, std::uint64_t seed) {
    out << "# seed=" << seed << " n=" << report.n << '\n';
    out << "theoretical,empirical\n";
    out.precision(17);
    for (const auto& p : report.qq_points) out << p.theoretical << ',' << p.empirical << '\n';
}

}  // namespace clob
