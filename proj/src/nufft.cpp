#include "clob/nufft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <ostream>
#include <string>

#include "clob/errors.hpp"
#include "clob/random.hpp"

namespace clob {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

void forward_fft(std::vector<std::complex<double>>& data) {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
}

void check_inputs(std::span<const double> times, std::size_t n_values, double T, int N) {
    if (times.empty()) throw DomainError("NUFFT needs at least one source point");
    if (times.size() != n_values) throw DomainError("times and values differ in length");
    if (!(T > 0.0)) throw DomainError("NUFFT period must be positive");
    if (N < 0) throw DomainError("NUFFT cutoff must be non-negative");
}

}  // namespace

FourierCoefficients direct_nudft(std::span<const double> times,
                                 std::span<const std::complex<double>> values, double T, int N) {
    check_inputs(times, values.size(), T, N);
    FourierCoefficients out;
    out.N = N;
    out.T = T;
    out.c.assign(static_cast<std::size_t>(2 * N + 1), {0.0, 0.0});
    for (std::size_t j = 0; j < times.size(); ++j) {
        const double x = kTwoPi * times[j] / T;
        for (int k = -N; k <= N; ++k)
            out.c[static_cast<std::size_t>(k + N)] += values[j] * std::polar(1.0, -k * x);
    }
    return out;
}

FourierCoefficients fgg_nufft(std::span<const double> times,
                              std::span<const std::complex<double>> values, double T, int N,
                              const NufftOptions& options) {
    check_inputs(times, values.size(), T, N);
    const double R = options.oversampling;
    const int sw = options.spread_width;
    if (sw < 1) throw DomainError("spread width must be at least 1");
    const double modes = 2.0 * N + 1.0;
    // the fine grid must resolve |k| <= N with room for the Gaussian tail
    if (!(R > 1.0)) throw DomainError("cutoff exceeds the oversampled grid's Nyquist limit");
    std::size_t Mr = static_cast<std::size_t>(std::ceil(R * modes));
    Mr = std::max<std::size_t>(Mr + (Mr % 2), static_cast<std::size_t>(2 * sw + 2));
    if (static_cast<double>(N) >= 0.5 * static_cast<double>(Mr))
        throw DomainError("cutoff exceeds the oversampled grid's Nyquist limit");

    const double h = kTwoPi / static_cast<double>(Mr);
    // width chosen for the actual oversampling, which exceeds R for small N
    const double Re = static_cast<double>(Mr) / modes;
    const double tau = std::numbers::pi * sw / (modes * modes * Re * (Re - 0.5));

    std::vector<double> E3(static_cast<std::size_t>(2 * sw));
    for (int l = -sw + 1; l <= sw; ++l)
        E3[static_cast<std::size_t>(l + sw - 1)] = std::exp(-(l * h) * (l * h) / (4.0 * tau));

    std::vector<std::complex<double>> grid(Mr, {0.0, 0.0});
    const auto Mri = static_cast<std::ptrdiff_t>(Mr);
    for (std::size_t j = 0; j < times.size(); ++j) {
        double x = std::fmod(kTwoPi * times[j] / T, kTwoPi);
        if (x < 0.0) x += kTwoPi;
        const auto m0 = static_cast<std::ptrdiff_t>(std::floor(x / h));
        const double xi = x - static_cast<double>(m0) * h;
        const double E1 = std::exp(-xi * xi / (4.0 * tau));
        const double E2 = std::exp(xi * h / (2.0 * tau));
        double E2l = std::pow(E2, static_cast<double>(-sw + 1));
        const std::complex<double> v = values[j] * E1;
        for (int l = -sw + 1; l <= sw; ++l) {
            std::ptrdiff_t m = (m0 + l) % Mri;
            if (m < 0) m += Mri;
            grid[static_cast<std::size_t>(m)] += v * (E2l * E3[static_cast<std::size_t>(l + sw - 1)]);
            E2l *= E2;
        }
    }

    forward_fft(grid);

    FourierCoefficients out;
    out.N = N;
    out.T = T;
    out.c.resize(static_cast<std::size_t>(2 * N + 1));
    const double scale = std::sqrt(std::numbers::pi / tau) / static_cast<double>(Mr);
    for (int k = -N; k <= N; ++k) {
        const std::size_t idx = k >= 0 ? static_cast<std::size_t>(k) : Mr - static_cast<std::size_t>(-k);
        out.c[static_cast<std::size_t>(k + N)] = grid[idx] * (scale * std::exp(k * k * tau));
    }
    return out;
}

FourierCoefficients fgg_nufft(std::span<const double> times, std::span<const double> values,
                              double T, int N, const NufftOptions& options) {
    std::vector<std::complex<double>> v(values.begin(), values.end());
    return fgg_nufft(times, v, T, N, options);
}

Increments increments(const PricePath& path, double start, double end) {
    Increments inc;
    inc.T = end - start;
    for (std::size_t i = 1; i < path.t.size(); ++i) {
        if (path.t[i] <= start || path.t[i] > end) continue;
        inc.t.push_back(path.t[i] - start);
        inc.dp.push_back(path.p[i] - path.p[i - 1]);
    }
    return inc;
}

double FourierCovariance::rho() const {
    const double denom = std::sqrt(var_a * var_b);
    return denom > 0.0 ? cov / denom : 0.0;
}

std::vector<FourierCovariance> fourier_covariance_sweep(const PricePath& a, const PricePath& b,
                                                        std::span<const int> cutoffs,
                                                        const NufftOptions& options) {
    if (a.t.size() < 2 || b.t.size() < 2)
        throw DomainError("each path needs at least two events");
    if (cutoffs.empty()) return {};
    const double start = std::max(a.t.front(), b.t.front());
    const double end = std::min(a.t.back(), b.t.back());
    if (!(end > start)) throw DomainError("paths do not overlap in time");
    const Increments ia = increments(a, start, end);
    const Increments ib = increments(b, start, end);
    if (ia.t.empty() || ib.t.empty()) throw DomainError("no increments inside the common span");
    int n_max = 0;
    for (int n : cutoffs) {
        if (n < 1) throw DomainError("frequency cutoff must be at least 1");
        n_max = std::max(n_max, n);
    }
    const FourierCoefficients ca = fgg_nufft(ia.t, ia.dp, ia.T, n_max, options);
    const FourierCoefficients cb = fgg_nufft(ib.t, ib.dp, ib.T, n_max, options);

    // running sums over |k| <= n
    std::vector<double> s_ab(static_cast<std::size_t>(n_max) + 1);
    std::vector<double> s_aa(s_ab.size());
    std::vector<double> s_bb(s_ab.size());
    double ab = std::real(ca.at(0) * std::conj(cb.at(0)));
    double aa = std::norm(ca.at(0));
    double bb = std::norm(cb.at(0));
    s_ab[0] = ab;
    s_aa[0] = aa;
    s_bb[0] = bb;
    for (int k = 1; k <= n_max; ++k) {
        ab += std::real(ca.at(k) * std::conj(cb.at(k))) + std::real(ca.at(-k) * std::conj(cb.at(-k)));
        aa += std::norm(ca.at(k)) + std::norm(ca.at(-k));
        bb += std::norm(cb.at(k)) + std::norm(cb.at(-k));
        s_ab[static_cast<std::size_t>(k)] = ab;
        s_aa[static_cast<std::size_t>(k)] = aa;
        s_bb[static_cast<std::size_t>(k)] = bb;
    }
    std::vector<FourierCovariance> out;
    out.reserve(cutoffs.size());
    for (int n : cutoffs) {
        const double w = 1.0 / (2.0 * n + 1.0);
        const auto i = static_cast<std::size_t>(n);
        out.push_back({w * s_ab[i], w * s_aa[i], w * s_bb[i]});
    }
    return out;
}

FourierCovariance fourier_covariance(const PricePath& a, const PricePath& b, int N,
                                     const NufftOptions& options) {
    const int cutoff[1] = {N};
    return fourier_covariance_sweep(a, b, cutoff, options).front();
}

int cutoff_for_scale(double T, double scale) {
    if (!(scale > 0.0)) throw DomainError("averaging scale must be positive");
    const double n = std::floor(T / (2.0 * scale));
    if (n < 1.0)
        throw DomainError("scale " + std::to_string(scale) + " admits no frequency over span " +
                          std::to_string(T));
    return static_cast<int>(n);
}

EppsCurve epps_curve(std::span<const PathPair> pairs, std::span<const double> scales,
                     const NufftOptions& options) {
    if (pairs.empty()) throw DomainError("Epps curve needs at least one path pair");
    if (scales.empty()) throw DomainError("Epps curve needs at least one scale");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] > 0.0)) throw DomainError("scales must be positive");
        if (i > 0 && !(scales[i] > scales[i - 1])) throw DomainError("scales must be strictly increasing");
    }
    const std::size_t ns = scales.size();
    std::vector<double> sum(ns, 0.0);
    std::vector<double> sum2(ns, 0.0);
    for (const PathPair& pair : pairs) {
        const double start = std::max(pair.a.t.front(), pair.b.t.front());
        const double end = std::min(pair.a.t.back(), pair.b.t.back());
        std::vector<int> cutoffs(ns);
        for (std::size_t i = 0; i < ns; ++i) cutoffs[i] = cutoff_for_scale(end - start, scales[i]);
        const std::vector<FourierCovariance> est = fourier_covariance_sweep(pair.a, pair.b, cutoffs, options);
        for (std::size_t i = 0; i < ns; ++i) {
            const double r = est[i].rho();
            sum[i] += r;
            sum2[i] += r * r;
        }
    }
    EppsCurve curve;
    curve.reps = pairs.size();
    curve.scales.assign(scales.begin(), scales.end());
    const double n = static_cast<double>(pairs.size());
    for (std::size_t i = 0; i < ns; ++i) {
        const double mean = sum[i] / n;
        curve.rho.push_back(mean);
        const double var = n > 1.0 ? std::max(0.0, (sum2[i] - n * mean * mean) / (n - 1.0)) : 0.0;
        curve.std_error.push_back(std::sqrt(var / n));
    }
    return curve;
}

EppsCurve simulated_epps_curve(const SimConfig& config, double horizon,
                               std::span<const double> scales, std::size_t reps,
                               std::uint64_t seed, const NufftOptions& options) {
    if (reps < 1) throw DomainError("reps must be at least 1");
    if (config.books.size() < 2) throw ConfigError("Epps estimation needs two books");
    std::vector<PathPair> pairs;
    pairs.reserve(reps);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        SimulationResult res = simulate(config, horizon, derive_seed(seed, {rep}));
        pairs.push_back({std::move(res.paths[0]), std::move(res.paths[1])});
    }
    return epps_curve(pairs, scales, options);
}

PathPair brownian_pair(double horizon, double rate_a, double rate_b, double correlation,
                       std::uint64_t seed) {
    if (!(horizon > 0.0) || !(rate_a > 0.0) || !(rate_b > 0.0))
        throw DomainError("Brownian pair needs positive horizon and rates");
    if (!(correlation >= -1.0 && correlation <= 1.0)) throw DomainError("correlation must be in [-1, 1]");
    Rng rng = make_rng(seed, {0xB0});
    std::normal_distribution<double> normal(0.0, 1.0);
    std::exponential_distribution<double> gap_a(rate_a);
    std::exponential_distribution<double> gap_b(rate_b);
    // merged event grid of both clocks; latent Brownian motions advance on it
    PathPair pair;
    pair.a.book_id = 0;
    pair.b.book_id = 1;
    pair.a.t = {0.0};
    pair.a.p = {0.0};
    pair.b.t = {0.0};
    pair.b.p = {0.0};
    double t = 0.0;
    double wa = 0.0;
    double wb = 0.0;
    double next_a = gap_a(rng);
    double next_b = gap_b(rng);
    const double orth = std::sqrt(1.0 - correlation * correlation);
    for (;;) {
        const double next = std::min(next_a, next_b);
        if (next > horizon) break;
        const double s = std::sqrt(next - t);
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        wa += s * z1;
        wb += s * (correlation * z1 + orth * z2);
        t = next;
        if (next_a == next) {
            pair.a.t.push_back(t);
            pair.a.p.push_back(wa);
            next_a = t + gap_a(rng);
        }
        if (next_b == next) {
            pair.b.t.push_back(t);
            pair.b.p.push_back(wb);
            next_b = t + gap_b(rng);
        }
    }
    return pair;
}

PowerSpectrum power_spectrum(const PricePath& path, int N, const NufftOptions& options) {
    if (path.t.size() < 3) throw DomainError("power spectrum needs at least two increments");
    if (N < 2) throw DomainError("power spectrum needs N >= 2");
    const Increments inc = increments(path, path.t.front(), path.t.back());
    const FourierCoefficients c = fgg_nufft(inc.t, inc.dp, inc.T, N, options);
    PowerSpectrum ps;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, n = 0.0;
    for (int k = 1; k <= N; ++k) {
        const double p = std::norm(c.at(k));
        ps.k.push_back(k);
        ps.power.push_back(p);
        if (p > 0.0) {
            const double lx = std::log(static_cast<double>(k));
            const double ly = std::log(p);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            n += 1.0;
        }
    }
    const double denom = n * sxx - sx * sx;
    ps.slope = denom > 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    return ps;
}

void write_epps_csv(std::ostream& os, const EppsCurve& curve, std::uint64_t seed) {
    os << "# seed=" << seed << " reps=" << curve.reps << '\n';
    os << "scale,rho,stderr\n";
    os.precision(17);
    for (std::size_t i = 0; i < curve.scales.size(); ++i)
        os << curve.scales[i] << ',' << curve.rho[i] << ',' << curve.std_error[i] << '\n';
}

void write_spectrum_csv(std::ostream& os, const PowerSpectrum& spectrum, std::uint64_t seed) {
    os << "# seed=" << seed << " slope=" << spectrum.slope << '\n';
    os << "k,power\n";
    os.precision(17);
    for (std::size_t i = 0; i < spectrum.k.size(); ++i)
        os << spectrum.k[i] << ',' << spectrum.power[i] << '\n';
}

}  // namespace clob
