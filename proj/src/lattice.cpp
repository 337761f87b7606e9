#include "clob/lattice.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "clob/errors.hpp"

namespace clob {

void LatticeConfig::validate() const {
    if (!(L > 0.0)) throw ConfigError("L must be positive, got " + std::to_string(L));
    if (M < 2) throw ConfigError("M must be at least 2, got " + std::to_string(M));
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("r must lie in (0, 1], got " + std::to_string(r));
    if (!(D_alpha > 0.0)) throw ConfigError("D_alpha must be positive, got " + std::to_string(D_alpha));
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ConfigError("alpha must lie in (0, 1], got " + std::to_string(alpha));
    if (!std::isfinite(x0)) throw ConfigError("x0 must be finite");
}

Lattice::Lattice(const LatticeConfig& config)
    : x0_(config.x0), dx_(config.dx()), points_(build_lattice(config)) {}

std::vector<double> build_lattice(const LatticeConfig& config) {
    config.validate();
    const double dx = config.dx();
    std::vector<double> x(static_cast<std::size_t>(config.M) + 1);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = config.x0 + static_cast<double>(i) * dx;
    return x;
}

double base_dt(const LatticeConfig& config, bool unit_exponent) {
    config.validate();
    const double dx = config.dx();
    const double ratio = config.r * dx * dx / (2.0 * config.D_alpha);
    if (unit_exponent || config.alpha == 1.0) return ratio;
    return std::pow(ratio, 1.0 / config.alpha);
}

double jump_length(double dt, double D_alpha, double alpha, double r) {
    const double scaled = alpha == 1.0 ? dt : std::pow(dt, alpha);
    return std::sqrt(2.0 * D_alpha * scaled / r);
}

EventClock::EventClock(SamplingMode mode, double rate) : mode_(mode), rate_(rate), exp_(1.0) {
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw ConfigError("event rate must be positive, got " + std::to_string(rate));
    exp_ = std::exponential_distribution<double>(rate);
}

double EventClock::next_dt(Rng& rng) {
    if (mode_ == SamplingMode::Uniform) return 1.0 / rate_;
    double dt = 0.0;
    while (!(dt > 0.0)) dt = exp_(rng);
    return dt;
}

TimeGrid sample_time_grid(const LatticeConfig& config, SamplingMode mode, double rate,
                          double horizon, Rng& rng) {
    config.validate();
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    EventClock clock(mode, rate);
    TimeGrid grid;
    grid.t.push_back(0.0);
    const double lattice_dx = config.dx();
    for (;;) {
        const double dt = clock.next_dt(rng);
        const double next = grid.t.back() + dt;
        if (next > horizon) break;
        double dx = jump_length(dt, config.D_alpha, config.alpha, config.r);
        // uniform steps at the lattice base step land on the lattice spacing
        if (mode == SamplingMode::Uniform && std::abs(dx - lattice_dx) <= 1e-12 * lattice_dx)
            dx = lattice_dx;
        grid.t.push_back(next);
        grid.dt.push_back(dt);
        grid.dx.push_back(dx);
    }
    return grid;
}

void write_time_grid_csv(std::ostream& os, const TimeGrid& grid) {
    os << "index,t,dt,dx\n";
    os.precision(17);
    for (std::size_t n = 0; n < grid.steps(); ++n)
        os << n << ',' << grid.t[n] << ',' << grid.dt[n] << ',' << grid.dx[n] << '\n';
}

}  // namespace clob
