#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace clob {

using Rng = std::mt19937_64;

/// Background log-price lattice and the fractional-diffusion constants that
/// tie time steps to jump lengths.
struct LatticeConfig {
    double L = 200.0;        ///< system length (log-price)
    int M = 400;             ///< number of divisions
    double x0 = 130.0;       ///< left edge (log-price)
    double r = 0.5;          ///< self-jump probability
    double D_alpha = 0.5;    ///< anomalous diffusion rate
    double alpha = 1.0;      ///< fractional time exponent

    double dx() const { return L / M; }

    /// Throws ConfigError when any invariant is violated.
    void validate() const;
};

/// Left edge that places `p0` at the centre of a lattice of length `L`.
inline double centred_x0(double L, double p0) { return p0 - 0.5 * L; }

class Lattice {
public:
    explicit Lattice(const LatticeConfig& config);

    std::size_t size() const { return points_.size(); }
    double x0() const { return x0_; }
    double dx() const { return dx_; }
    double x(std::size_t i) const { return points_[i]; }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }
    const std::vector<double>& points() const { return points_; }

    bool contains(double x) const { return x > front() && x < back(); }

private:
    double x0_;
    double dx_;
    std::vector<double> points_;
};

/// Grid of M+1 points x_i = x0 + i*dx.
std::vector<double> build_lattice(const LatticeConfig& config);

/// Mean time step implied by the diffusion limit: (r dx^2 / (2 D))^(1/alpha).
/// With `unit_exponent` the 1/alpha power is dropped, reproducing the
/// calibrated-table value that was evaluated as if alpha were 1.
double base_dt(const LatticeConfig& config, bool unit_exponent = false);

/// Jump length consistent with the diffusion limit for a step of length dt.
double jump_length(double dt, double D_alpha, double alpha, double r);

enum class SamplingMode { Uniform, Exponential };

/// Per-book event clock. Exponential mode draws i.i.d. Exp(rate) gaps;
/// uniform mode returns 1/rate every time.
class EventClock {
public:
    EventClock(SamplingMode mode, double rate);

    double next_dt(Rng& rng);
    double rate() const { return rate_; }
    SamplingMode mode() const { return mode_; }

private:
    SamplingMode mode_;
    double rate_;
    std::exponential_distribution<double> exp_;
};

struct TimeGrid {
    std::vector<double> t;   ///< event times, t[0] = 0
    std::vector<double> dt;  ///< dt[n] = t[n+1] - t[n]
    std::vector<double> dx;  ///< jump length for each dt[n]

    std::size_t steps() const { return dt.size(); }
};

/// Accumulates event times from 0 until the next event would pass `horizon`.
TimeGrid sample_time_grid(const LatticeConfig& config, SamplingMode mode, double rate,
                          double horizon, Rng& rng);

/// CSV with columns index,t,dt,dx.
void write_time_grid_csv(std::ostream& os, const TimeGrid& grid);

}  // namespace clob
