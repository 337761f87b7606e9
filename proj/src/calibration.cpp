#include "clob/calibration.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <stdexcept>

#include "clob/errors.hpp"
#include "clob/random.hpp"
#include "clob/stats.hpp"

namespace clob {

namespace {

constexpr double kZ975 = 1.959963984540054;

Theta axpy(const Theta& a, double t, const Theta& b) {  // a + t (b - a)
    Theta out{};
    for (std::size_t i = 0; i < 3; ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return out;
}

}  // namespace

const std::array<const char*, kMomentCount>& MomentVector::names() {
    static const std::array<const char*, kMomentCount> n{
        "mean", "std", "excess_kurtosis", "ks", "hurst", "gph_abs", "adf", "garch_persistence", "hill"};
    return n;
}

MomentVector moments(std::span<const double> returns, std::span<const double> reference) {
    if (returns.size() < 500) throw DomainError("moment battery needs at least 500 returns");
    const double sd = stats::stddev(returns);
    if (!(sd > 0.0)) throw DomainError("moment battery on a zero-variance series");

    std::vector<double> abs_r(returns.size());
    std::transform(returns.begin(), returns.end(), abs_r.begin(), [](double v) { return std::abs(v); });
    std::vector<double> level(returns.size() + 1, 0.0);
    for (std::size_t i = 0; i < returns.size(); ++i) level[i + 1] = level[i] + returns[i];

    MomentVector m;
    m.values = {stats::mean(returns),
                sd,
                stats::excess_kurtosis(returns),
                stats::ks_statistic(returns, reference),
                stats::hurst_dfa(returns),
                stats::gph(abs_r),
                stats::adf_statistic(level, 1),
                stats::garch11_fit(returns).persistence(),
                stats::hill_tail_index(returns)};
    for (double v : m.values)
        if (!std::isfinite(v)) throw DomainError("moment battery produced a non-finite value");
    return m;
}

WeightMatrix bootstrap_weight(std::span<const double> returns, std::uint64_t seed,
                              const BootstrapOptions& options) {
    const std::size_t n = returns.size();
    const std::size_t block = std::max<std::size_t>(1, std::min(options.block, n));
    Rng rng = make_rng(seed, {0xB007});
    std::uniform_int_distribution<std::size_t> start(0, n - 1);

    std::vector<MomentVector> draws;
    std::vector<double> sample(n);
    for (std::size_t b = 0; b < options.resamples; ++b) {
        for (std::size_t filled = 0; filled < n;) {
            const std::size_t s = start(rng);
            for (std::size_t k = 0; k < block && filled < n; ++k) sample[filled++] = returns[(s + k) % n];
        }
        try {
            draws.push_back(moments(sample, returns));
        } catch (const DomainError&) {
        }
    }
    WeightMatrix out;
    out.W = Eigen::MatrixXd::Identity(kMomentCount, kMomentCount);
    out.identity_fallback = true;
    if (draws.size() < 2 * kMomentCount) return out;

    Eigen::MatrixXd X(draws.size(), kMomentCount);
    for (std::size_t r = 0; r < draws.size(); ++r)
        for (std::size_t c = 0; c < kMomentCount; ++c) X(r, c) = draws[r][c];
    const Eigen::RowVectorXd mu = X.colwise().mean();
    const Eigen::MatrixXd centred = X.rowwise() - mu;
    const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(draws.size() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) return out;
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmax > 0.0) || lmin <= 1e-12 * lmax) return out;
    out.W = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
            eig.eigenvectors().transpose();
    out.W = 0.5 * (out.W + out.W.transpose());
    out.identity_fallback = false;
    return out;
}

Theta Bounds::project(const Theta& theta) const {
    Theta out{};
    for (std::size_t i = 0; i < 3; ++i) out[i] = std::clamp(theta[i], lower[i], upper[i]);
    return out;
}

bool Bounds::contains(const Theta& theta) const {
    for (std::size_t i = 0; i < 3; ++i)
        if (!(theta[i] >= lower[i] && theta[i] <= upper[i])) return false;
    return true;
}

double quadratic_form(const Eigen::VectorXd& g, const Eigen::MatrixXd& W) { return g.dot(W * g); }

SimConfig with_theta(SimConfig base, const Theta& theta) {
    base.lattice.D_alpha = theta[0];
    for (BookParams& b : base.books) b.nu = theta[1];
    base.lattice.alpha = theta[2];
    return base;
}

std::vector<double> simulate_returns(const SimConfig& base, const Theta& theta, std::size_t n,
                                     std::uint64_t seed, std::size_t book) {
    const SimConfig cfg = with_theta(base, theta);
    cfg.validate();
    const double rate = cfg.intensity(book);
    const double want = static_cast<double>(n);
    double horizon = (want + 5.0 * std::sqrt(want) + 10.0) / rate;
    for (int attempt = 0; attempt < 8; ++attempt) {
        const SimulationResult res = simulate(cfg, horizon, seed);
        std::vector<double> r = res.paths.at(book).returns();
        if (r.size() >= n) {
            r.resize(n);
            return r;
        }
        horizon *= 1.5;
    }
    throw SimulationError("too few events for the requested returns", book, horizon, {});
}

double smd_distance(std::span<const MomentVector> simulated, const MomentVector& empirical,
                    const Eigen::MatrixXd& W) {
    if (simulated.empty()) throw DomainError("no simulated moment vectors");
    Eigen::VectorXd g = Eigen::VectorXd::Zero(kMomentCount);
    for (const MomentVector& m : simulated)
        for (std::size_t i = 0; i < kMomentCount; ++i) g(i) += m[i];
    g /= static_cast<double>(simulated.size());
    for (std::size_t i = 0; i < kMomentCount; ++i) g(i) -= empirical[i];
    return quadratic_form(g, W);
}

SmdObjective::SmdObjective(SmdSetup setup, std::vector<double> empirical_returns, Eigen::MatrixXd W,
                           std::uint64_t seed, Bounds bounds)
    : setup_(std::move(setup)),
      empirical_returns_(std::move(empirical_returns)),
      empirical_(moments(empirical_returns_, empirical_returns_)),
      W_(std::move(W)),
      seed_(seed),
      bounds_(bounds) {
    if (W_.rows() != static_cast<Eigen::Index>(kMomentCount) || W_.cols() != W_.rows())
        throw ConfigError("weight matrix must be 9x9");
    if (setup_.replications < 1) throw ConfigError("need at least one replication");
}

MomentVector SmdObjective::simulated_moments(const Theta& theta) const {
    if (!bounds_.contains(theta)) throw std::logic_error("objective evaluated outside the bounds");
    ++evaluations_;
    // replications run concurrently; each owns its seed, so scheduling
    // cannot change the result
    auto replicate = [&](std::size_t i) {
        const std::uint64_t s = derive_seed(seed_, {i});
        std::vector<double> r;
        try {
            r = simulate_returns(setup_.base, theta, setup_.n_returns, s, setup_.book);
        } catch (const SimulationError&) {
            r = simulate_returns(setup_.base, theta, setup_.n_returns, derive_seed(s, {1}), setup_.book);
        }
        return moments(r, empirical_returns_);
    };
    std::vector<std::future<MomentVector>> jobs;
    for (std::size_t i = 1; i < setup_.replications; ++i) jobs.push_back(std::async(std::launch::async, replicate, i));
    std::vector<MomentVector> reps{replicate(0)};
    for (auto& j : jobs) reps.push_back(j.get());
    MomentVector avg;
    for (const auto& m : reps)
        for (std::size_t i = 0; i < kMomentCount; ++i) avg.values[i] += m[i] / static_cast<double>(reps.size());
    return avg;
}

double SmdObjective::operator()(const Theta& theta) const {
    const MomentVector m = simulated_moments(theta);
    return smd_distance(std::span<const MomentVector>(&m, 1), empirical_, W_);
}

NmtaResult nmta(const Objective& objective, const Theta& theta0, const Bounds& bounds,
                const NmtaOptions& options, std::uint64_t seed) {
    if (options.iterations < 1) throw ConfigError("nmta needs at least one iteration");
    Rng rng = make_rng(seed, {0x4E4D});
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    NmtaResult res;
    res.value = std::numeric_limits<double>::infinity();
    auto eval = [&](const Theta& theta) {
        if (!bounds.contains(theta)) throw std::logic_error("nmta candidate outside the bounds");
        ++res.evaluations;
        double f;
        try {
            f = objective(theta);
        } catch (const SimulationError&) {
            f = std::numeric_limits<double>::infinity();
        }
        if (std::isnan(f)) f = std::numeric_limits<double>::infinity();
        if (f < res.value) {
            res.value = f;
            res.theta = theta;
        }
        return f;
    };

    std::array<Theta, 4> x{};
    std::array<double, 4> f{};
    x[0] = bounds.project(theta0);
    for (std::size_t i = 0; i < 3; ++i) {
        Theta v = x[0];
        const double step = options.initial_step[i] * std::max(std::abs(x[0][i]), 1e-3);
        v[i] = x[0][i] + step <= bounds.upper[i] ? x[0][i] + step : x[0][i] - step;
        x[i + 1] = bounds.project(v);
    }
    for (std::size_t i = 0; i < 4; ++i) f[i] = eval(x[i]);
    double finite_sum = 0.0, fmin = res.value, fmax = -std::numeric_limits<double>::infinity();
    std::size_t finite = 0;
    for (double v : f)
        if (std::isfinite(v)) {
            finite_sum += v;
            fmax = std::max(fmax, v);
            ++finite;
        }
    res.initial_mean = finite ? finite_sum / static_cast<double>(finite) : std::numeric_limits<double>::infinity();
    double tau = options.tau0 >= 0.0 ? options.tau0 : (finite ? fmax - fmin : 0.0);

    for (std::size_t it = 0; it < options.iterations; ++it) {
        std::array<std::size_t, 4> order{0, 1, 2, 3};
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return f[a] < f[b]; });
        const std::size_t best = order[0], second = order[2], worst = order[3];

        if (unif(rng) < options.p_nm) {
            ++res.nm_moves;
            Theta c{};
            for (std::size_t k = 0; k < 3; ++k)
                for (std::size_t d = 0; d < 3; ++d) c[d] += x[order[k]][d] / 3.0;
            const Theta xr = bounds.project(axpy(c, -1.0, x[worst]));
            const double fr = eval(xr);
            if (fr < f[best]) {
                const Theta xe = bounds.project(axpy(c, -2.0, x[worst]));
                const double fe = eval(xe);
                if (fe < fr) {
                    x[worst] = xe;
                    f[worst] = fe;
                } else {
                    x[worst] = xr;
                    f[worst] = fr;
                }
            } else if (fr < f[second]) {
                x[worst] = xr;
                f[worst] = fr;
            } else {
                const bool outside = fr < f[worst];
                const Theta xc = bounds.project(axpy(c, 0.5, outside ? xr : x[worst]));
                const double fc = eval(xc);
                if (fc < std::min(fr, f[worst])) {
                    x[worst] = xc;
                    f[worst] = fc;
                } else {
                    for (std::size_t k = 0; k < 4; ++k) {
                        if (k == best) continue;
                        x[k] = bounds.project(axpy(x[best], 0.5, x[k]));
                        f[k] = eval(x[k]);
                    }
                }
            }
        } else {
            ++res.ta_moves;
            const auto i = static_cast<std::size_t>(unif(rng) * 4.0) % 4;
            Theta prop = x[i];
            for (std::size_t d = 0; d < 3; ++d) {
                double lo = x[0][d], hi = x[0][d];
                for (const Theta& v : x) {
                    lo = std::min(lo, v[d]);
                    hi = std::max(hi, v[d]);
                }
                const double sigma = 0.5 * (hi - lo) + 1e-3 * (1.0 + std::abs(x[i][d]));
                prop[d] += sigma * gauss(rng);
            }
            prop = bounds.project(prop);
            const double fp = eval(prop);
            if (fp - f[i] < tau) {
                x[i] = prop;
                f[i] = fp;
                ++res.ta_accepted;
            }
            tau *= options.tau_decay;
        }
        res.trace.push_back(res.value);
    }
    return res;
}

ConfidenceIntervals confidence_intervals(const Objective& objective, const Theta& theta_hat,
                                         const Bounds& bounds, const HessianOptions& options) {
    Theta h{}, c{};
    for (std::size_t i = 0; i < 3; ++i) {
        h[i] = std::max(options.relative_step * std::abs(theta_hat[i]), options.min_step);
        const double span = bounds.upper[i] - bounds.lower[i];
        h[i] = std::min(h[i], 0.25 * span);
        c[i] = std::clamp(theta_hat[i], bounds.lower[i] + h[i], bounds.upper[i] - h[i]);
    }
    auto at = [&](int i, int si, int j, int sj) {
        Theta p = c;
        if (i >= 0) p[i] += si * h[i];
        if (j >= 0) p[j] += sj * h[j];
        return objective(bounds.project(p));
    };
    const double f0 = at(-1, 0, -1, 0);
    Eigen::Matrix3d H;
    for (int i = 0; i < 3; ++i) {
        H(i, i) = (at(i, 1, -1, 0) - 2.0 * f0 + at(i, -1, -1, 0)) / (h[i] * h[i]);
        for (int j = i + 1; j < 3; ++j) {
            const double v = (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) /
                             (4.0 * h[i] * h[j]);
            H(i, j) = H(j, i) = v;
        }
    }
    ConfidenceIntervals ci;
    ci.hessian = H;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(H);
    Eigen::Vector3d lam = eig.eigenvalues();
    const double lmax = lam.cwiseAbs().maxCoeff();
    Theta se{};
    if (!std::isfinite(lmax) || !(lmax > 0.0) || lam.cwiseAbs().minCoeff() <= 1e-12 * lmax) {
        ci.warning = "singular Hessian; intervals unbounded";
        se.fill(std::numeric_limits<double>::infinity());
    } else {
        if (lam.minCoeff() < 0.0) ci.warning = "indefinite Hessian; absolute eigenvalues used";
        const Eigen::Matrix3d inv =
            eig.eigenvectors() * lam.cwiseAbs().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
        for (int i = 0; i < 3; ++i) se[i] = std::sqrt(inv(i, i));
    }
    for (std::size_t i = 0; i < 3; ++i) {
        ci.half_width[i] = kZ975 * se[i];
        ci.lower[i] = theta_hat[i] - ci.half_width[i];
        ci.upper[i] = theta_hat[i] + ci.half_width[i];
    }
    return ci;
}

CalibrationResult calibrate(std::span<const double> empirical_returns,
                            const CalibrationOptions& options, std::uint64_t seed) {
    std::vector<double> emp(empirical_returns.begin(), empirical_returns.end());
    const WeightMatrix W = bootstrap_weight(emp, derive_seed(seed, {1}), options.bootstrap);
    SmdObjective obj(options.setup, emp, W.W, derive_seed(seed, {2}), options.bounds);
    Objective f = [&obj](const Theta& t) { return obj(t); };
    const NmtaResult opt = nmta(f, options.theta0, options.bounds, options.nmta, derive_seed(seed, {3}));
    const ConfidenceIntervals ci = confidence_intervals(f, opt.theta, options.bounds, options.hessian);

    CalibrationResult r;
    r.theta_hat = opt.theta;
    r.ci_lower = ci.lower;
    r.ci_upper = ci.upper;
    r.objective = opt.value;
    r.initial_mean = opt.initial_mean;
    r.objective_trace = opt.trace;
    r.replications = options.setup.replications;
    r.evaluations = obj.evaluations();
    r.seed = seed;
    r.empirical_moments = obj.empirical_moments();
    r.fitted_moments = obj.simulated_moments(opt.theta);
    r.identity_weight = W.identity_fallback;
    r.warning = ci.warning;
    return r;
}

void write_calibration_json(std::ostream& out, const CalibrationResult& r) {
    using json = nlohmann::ordered_json;
    const char* names[3] = {"D_alpha", "nu", "alpha"};
    json j;
    j["seed"] = r.seed;
    j["replications"] = r.replications;
    json theta, lo, hi;
    for (std::size_t i = 0; i < 3; ++i) {
        theta[names[i]] = r.theta_hat[i];
        lo[names[i]] = r.ci_lower[i];  // non-finite values serialise as null
        hi[names[i]] = r.ci_upper[i];
    }
    j["theta_hat"] = theta;
    j["ci_lower"] = lo;
    j["ci_upper"] = hi;
    j["objective"] = r.objective;
    j["initial_simplex_mean"] = r.initial_mean;
    j["evaluations"] = r.evaluations;
    j["identity_weight"] = r.identity_weight;
    json em, fm;
    for (std::size_t i = 0; i < kMomentCount; ++i) {
        em[MomentVector::names()[i]] = r.empirical_moments[i];
        fm[MomentVector::names()[i]] = r.fitted_moments[i];
    }
    j["empirical_moments"] = em;
    j["fitted_moments"] = fm;
    j["objective_trace"] = r.objective_trace;
    if (!r.warning.empty()) j["warning"] = r.warning;
    out << j.dump(2) << '\n';
}

void write_trace_csv(std::ostream& out, const CalibrationResult& r) {
    out << "# seed=" << r.seed << " replications=" << r.replications << '\n';
    out << "iteration,best_objective\n";
    out.precision(17);
    for (std::size_t i = 0; i < r.objective_trace.size(); ++i)
        out << i + 1 << ',' << r.objective_trace[i] << '\n';
}

}  // namespace clob
