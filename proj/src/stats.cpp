#include "clob/stats.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "clob/errors.hpp"
#include "clob/optim.hpp"

namespace clob::stats {

namespace {

double central_moment(std::span<const double> x, double m, int order) {
    double s = 0.0;
    for (double v : x) s += std::pow(v - m, order);
    return s / static_cast<double>(x.size());
}

void require_size(std::span<const double> x, std::size_t n, const char* what) {
    if (x.size() < n) throw DomainError(std::string(what) + ": series too short");
}

double ols_slope(std::span<const double> xs, std::span<const double> ys) {
    const double mx = mean(xs);
    const double my = mean(ys);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0) throw DomainError("regression with constant regressor");
    return sxy / sxx;
}

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw DomainError("correlation of a constant series");
    return sab / std::sqrt(saa * sbb);
}

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

}  // namespace

double mean(std::span<const double> x) {
    if (x.empty()) throw DomainError("mean of empty series");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
    require_size(x, 2, "stddev");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

double skewness(std::span<const double> x) {
    require_size(x, 3, "skewness");
    const double m = mean(x);
    const double m2 = central_moment(x, m, 2);
    if (m2 == 0.0) throw DomainError("skewness of a constant series");
    return central_moment(x, m, 3) / std::pow(m2, 1.5);
}

double excess_kurtosis(std::span<const double> x) {
    require_size(x, 4, "kurtosis");
    const double m = mean(x);
    const double m2 = central_moment(x, m, 2);
    if (m2 == 0.0) throw DomainError("kurtosis of a constant series");
    return central_moment(x, m, 4) / (m2 * m2) - 3.0;
}

std::vector<double> acf(std::span<const double> x, std::size_t max_lag) {
    if (x.size() <= max_lag) throw DomainError("acf: series shorter than the lag range");
    const double m = mean(x);
    double c0 = 0.0;
    for (double v : x) c0 += (v - m) * (v - m);
    if (c0 == 0.0) throw DomainError("acf of a constant series");
    std::vector<double> out(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double ck = 0.0;
        for (std::size_t t = 0; t + k < x.size(); ++t) ck += (x[t] - m) * (x[t + k] - m);
        out[k] = ck / c0;
    }
    return out;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DomainError("KS statistic of an empty sample");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == v) ++i;
        while (j < sb.size() && sb[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double hurst_dfa(std::span<const double> x) {
    require_size(x, 64, "hurst");
    const std::size_t n = x.size();
    const double m = mean(x);
    std::vector<double> profile(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) profile[i] = (acc += x[i] - m);

    const double s_min = 8.0;
    const double s_max = static_cast<double>(n) / 4.0;
    const int n_sizes = 16;
    std::vector<double> log_s, log_f;
    std::size_t last = 0;
    for (int q = 0; q < n_sizes; ++q) {
        const auto s = static_cast<std::size_t>(
            std::lround(s_min * std::pow(s_max / s_min, q / double(n_sizes - 1))));
        if (s == last || s < 4) continue;
        last = s;
        const std::size_t segments = n / s;
        // Least-squares line over t = 0..s-1 in closed form.
        const double sd = static_cast<double>(s);
        const double tm = 0.5 * (sd - 1.0);
        const double stt = sd * (sd * sd - 1.0) / 12.0;
        double f2 = 0.0;
        for (std::size_t g = 0; g < segments; ++g) {
            const double* y = profile.data() + g * s;
            double ym = 0.0, sty = 0.0;
            for (std::size_t t = 0; t < s; ++t) ym += y[t];
            ym /= sd;
            for (std::size_t t = 0; t < s; ++t) sty += (static_cast<double>(t) - tm) * (y[t] - ym);
            const double slope = sty / stt;
            for (std::size_t t = 0; t < s; ++t) {
                const double e = y[t] - ym - slope * (static_cast<double>(t) - tm);
                f2 += e * e;
            }
        }
        f2 /= static_cast<double>(segments * s);
        if (f2 <= 0.0) continue;
        log_s.push_back(std::log(sd));
        log_f.push_back(0.5 * std::log(f2));
    }
    if (log_s.size() < 3) throw DomainError("hurst: degenerate series");
    return ols_slope(log_s, log_f);
}

double gph(std::span<const double> x, double bandwidth) {
    require_size(x, 32, "gph");
    const std::size_t n = x.size();
    const auto m = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), bandwidth)));
    if (m < 3) throw DomainError("gph: too few frequencies");
    const double mu = mean(x);
    std::vector<double> reg, logi;
    for (std::size_t j = 1; j <= m; ++j) {
        const double lam = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        const std::complex<double> w = std::polar(1.0, -lam);
        std::complex<double> z = 1.0, s = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            s += (x[t] - mu) * z;
            z *= w;
        }
        const double periodogram = std::norm(s) / (2.0 * std::numbers::pi * static_cast<double>(n));
        if (periodogram <= 0.0) continue;
        const double sn = std::sin(0.5 * lam);
        reg.push_back(-std::log(4.0 * sn * sn));
        logi.push_back(std::log(periodogram));
    }
    if (reg.size() < 3) throw DomainError("gph: degenerate series");
    return ols_slope(reg, logi);
}

double adf_statistic(std::span<const double> level, std::size_t lags) {
    require_size(level, lags + 10, "adf");
    const std::size_t n = level.size();
    std::vector<double> dy(n - 1);
    for (std::size_t t = 1; t < n; ++t) dy[t - 1] = level[t] - level[t - 1];
    const std::size_t rows = dy.size() - lags;
    const std::size_t cols = 2 + lags;
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + lags;  // index into dy
        y(r) = dy[t];
        X(r, 0) = 1.0;
        X(r, 1) = level[t];
        for (std::size_t l = 1; l <= lags; ++l) X(r, 1 + l) = dy[t - l];
    }
    const Eigen::MatrixXd xtx = X.transpose() * X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
    if (ldlt.info() != Eigen::Success) throw DomainError("adf: singular design");
    const Eigen::VectorXd beta = ldlt.solve(X.transpose() * y);
    const Eigen::VectorXd resid = y - X * beta;
    const double s2 = resid.squaredNorm() / static_cast<double>(rows - cols);
    const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(cols, cols));
    const double se = std::sqrt(s2 * inv(1, 1));
    if (!(se > 0.0)) throw DomainError("adf: degenerate series");
    return beta(1) / se;
}

Garch11 garch11_fit(std::span<const double> returns) {
    require_size(returns, 50, "garch");
    const double mu = mean(returns);
    std::vector<double> e(returns.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = returns[i] - mu;
    double var = 0.0;
    for (double v : e) var += v * v;
    var /= static_cast<double>(e.size());
    if (var == 0.0) throw DomainError("garch of a constant series");

    // Variance targeting: omega = var (1 - alpha - beta). Parameters are the
    // persistence and the ARCH share, each mapped through a logistic.
    auto unpack = [var](const std::vector<double>& p) {
        const double pers = logistic(p[0]);
        const double share = logistic(p[1]);
        Garch11 g;
        g.alpha = pers * share;
        g.beta = pers * (1.0 - share);
        g.omega = var * (1.0 - pers);
        return g;
    };
    auto nll = [&](const std::vector<double>& p) {
        const Garch11 g = unpack(p);
        double h = var, s = 0.0;
        for (double v : e) {
            s += std::log(h) + v * v / h;
            h = g.omega + g.alpha * v * v + g.beta * h;
        }
        return 0.5 * s;
    };
    NelderMeadResult best;
    bool first = true;
    for (const auto& start : {std::vector<double>{2.2, -2.2}, std::vector<double>{0.0, 0.0}}) {
        auto r = nelder_mead(nll, start, 1.0, 400, 1e-9);
        if (first || r.f < best.f) best = r;
        first = false;
    }
    Garch11 out = unpack(best.x);
    out.log_likelihood =
        -best.f - 0.5 * static_cast<double>(e.size()) * std::log(2.0 * std::numbers::pi);
    return out;
}

double hill_tail_index(std::span<const double> x, std::size_t k) {
    require_size(x, 20, "hill");
    std::vector<double> a(x.size());
    std::transform(x.begin(), x.end(), a.begin(), [](double v) { return std::abs(v); });
    std::sort(a.begin(), a.end(), std::greater<>());
    if (k == 0) k = std::max<std::size_t>(10, a.size() / 20);
    k = std::min(k, a.size() - 1);
    const double threshold = a[k];
    if (!(threshold > 0.0)) throw DomainError("hill: threshold order statistic is zero");
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += std::log(a[i] / threshold);
    if (s == 0.0) throw DomainError("hill: degenerate tail");
    return static_cast<double>(k) / s;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0,1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw DomainError("spearman: bad sample sizes");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    return pearson(ra, rb);
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw DomainError("kendall: bad sample sizes");
    double concordant = 0.0, discordant = 0.0, ties_a = 0.0, ties_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double da = a[i] - a[j];
            const double db = b[i] - b[j];
            if (da == 0.0 && db == 0.0) continue;
            if (da == 0.0) ties_a += 1.0;
            else if (db == 0.0) ties_b += 1.0;
            else if ((da > 0.0) == (db > 0.0)) concordant += 1.0;
            else discordant += 1.0;
        }
    const double denom =
        std::sqrt((concordant + discordant + ties_a) * (concordant + discordant + ties_b));
    if (denom == 0.0) throw DomainError("kendall: constant input");
    return (concordant - discordant) / denom;
}

}  // namespace clob::stats
