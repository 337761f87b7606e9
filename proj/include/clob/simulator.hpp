#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "clob/kernel.hpp"
#include "clob/lattice.hpp"
#include "clob/orderbook.hpp"

namespace clob {

/// Which jump length the off-lattice neighbours of a history slice use.
enum class JumpReference {
    SliceDx,   ///< x_i +- dx_m, the slice's own jump length
    LatestDx,  ///< x_i +- dx_{n-1} for every slice
};

struct ForceParams {
    double kappa = 1.0;
    double sigma_V = 1.0;
    bool independent = false;         ///< one force stream per book (uncoupled test hook)
    std::optional<double> fixed_drift;  ///< overrides F on every step when set
};

struct ScheduledShock {
    std::size_t book = 0;
    Shock shock;  ///< shock.time is measured from the end of burn-in
};

struct SimConfig {
    LatticeConfig lattice;
    std::vector<BookParams> books{2};
    SamplingMode sampling = SamplingMode::Exponential;
    std::vector<double> intensities;    ///< events per unit time; empty = 1 / base_dt
    std::vector<double> phase_offsets;  ///< uniform mode only; empty = staggered j * dt / N
    ForceParams force;
    bool coupling = true;
    CouplingForm coupling_form = CouplingForm::Balanced;
    std::size_t kernel_window = 512;
    double kernel_tolerance = 1e-10;
    double history_cutoff = 1e-14;  ///< history slices with decay weight below this are skipped
    std::size_t burn_in = 200;      ///< in mean steps
    double nu_floor = 1.0;
    double eps_p_fraction = 0.1;    ///< coupling cutoff as a fraction of dx
    bool unit_exponent_dt = false;
    JumpReference jump_reference = JumpReference::SliceDx;
    std::vector<ScheduledShock> shocks;

    void validate() const;
    double mean_dt() const { return base_dt(lattice, unit_exponent_dt); }
    double intensity(std::size_t book) const;
};

/// Table 1 base parameters: two books, L = 200, M = 400, r = 0.5, D = 0.5,
/// nu = 14, alpha = 1, p(0) = 230, lambda = 1, mu = 0.1.
SimConfig table1_config();

/// Table 1 with the calibrated values D = 0.27, nu = 12.55, alpha = 0.57.
SimConfig table2_config();

/// F = clamp(kappa dV dt / dx, -r, r).
double drift_coefficient(double force_increment, double dt, double dx, double kappa, double r);

/// Evolves one density through the memory update
///   phi_n = sum_m K_{n-m} e^{-nu (t_{n-1} - t_m)} [ (r+F)/2 phi^-_m + (r-F)/2 phi^+_m - r phi_m ]
///           + e^{-nu dt} phi_{n-1} + c dt
/// with phi^-+_m the linear interpolant of slice m at x_i -+ dx_m. Boundary
/// values are pinned to zero. No price bookkeeping happens here.
class DensityStepper {
public:
    DensityStepper(const Lattice& lattice, const KernelTable& kernel, double r, double nu,
                   double history_cutoff = 1e-14,
                   JumpReference reference = JumpReference::SliceDx);

    void reset(std::span<const double> phi, double t0);

    /// Advances by dt with jump length dx and drift F. `creation` holds
    /// c(x) and is multiplied by dt; `impulse`, when non-empty, is added as is.
    const std::vector<double>& step(double dt, double dx, double F, std::span<const double> creation,
                                    std::span<const double> impulse = {});

    const std::vector<double>& density() const { return current_; }
    double time() const { return time_; }
    std::size_t history_size() const { return count_; }
    double nu() const { return nu_; }

private:
    struct Slice {
        std::vector<double> phi;
        std::vector<double> sym;   // r/2 (phi^- + phi^+) - r phi
        std::vector<double> skew;  // (phi^- - phi^+) / 2
        double t = 0.0;
        double dx = 0.0;
    };

    void fill_brackets(Slice& slice, double dx) const;
    Slice& slice_at(std::size_t age);  // age 0 = newest

    const Lattice* lattice_;
    const KernelTable* kernel_;
    double r_;
    double nu_;
    double history_cutoff_;
    JumpReference reference_;
    std::vector<Slice> ring_;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
    std::vector<double> current_;
    std::vector<double> acc_sym_;
    std::vector<double> acc_skew_;
    std::vector<double> tmp_sym_;
    std::vector<double> tmp_skew_;
    double time_ = 0.0;
};

struct PricePath {
    std::size_t book_id = 0;
    std::vector<double> t;
    std::vector<double> p;

    std::vector<double> returns() const;
};

/// Everything that happened on one book event, for diagnostics and oracles.
struct StepRecord {
    std::size_t book = 0;
    double t_prev = 0.0;
    double t = 0.0;
    double dx = 0.0;
    double F = 0.0;
    double price_prev = 0.0;
    double other_price = 0.0;
    double price = 0.0;
    std::size_t crossings = 0;
    bool shocked = false;
};

struct DensitySnapshot {
    std::size_t book = 0;
    double t = 0.0;
    double price = 0.0;
    std::vector<double> phi;
};

/// N coupled books on a shared lattice, driven by a single shared force
/// potential and advanced on a merged queue of per-book event clocks.
class CoupledSystem {
public:
    CoupledSystem(SimConfig config, std::uint64_t seed);
    CoupledSystem(const CoupledSystem&) = delete;
    CoupledSystem& operator=(const CoupledSystem&) = delete;

    /// Processes the next event (ties go to the lower book index).
    StepRecord advance();

    /// Advances until the next event would pass time `t`.
    void run_until(double t);

    /// Replaces a book's density and price, clearing its history.
    void set_density(std::size_t book, std::span<const double> phi, double price);

    std::size_t book_count() const { return books_.size(); }
    const BookState& book(std::size_t j) const { return books_[j]; }
    double book_time(std::size_t j) const { return steppers_[j].time(); }
    double next_event_time(std::size_t j) const { return next_time_[j]; }
    std::size_t events(std::size_t j) const { return events_[j]; }
    double clock() const { return clock_; }
    const Lattice& lattice() const { return lattice_; }
    const KernelTable& kernel() const { return kernel_; }
    const SimConfig& config() const { return config_; }

    /// Shocks are scheduled relative to this time.
    void set_time_origin(double t0) { origin_ = t0; }

private:
    std::vector<double> creation_for(std::size_t j) const;
    double force_increment(std::size_t j, double t_new);

    SimConfig config_;
    Lattice lattice_;
    KernelTable kernel_;
    std::vector<BookState> books_;
    std::vector<DensityStepper> steppers_;
    std::vector<EventClock> clocks_;
    std::vector<Rng> clock_rngs_;
    std::vector<double> next_time_;
    std::vector<std::size_t> events_;
    Rng force_rng_;
    std::vector<Rng> book_force_rngs_;
    double shared_V_ = 0.0;
    double shared_V_time_ = 0.0;
    std::vector<double> V_at_last_;
    std::vector<bool> shock_done_;
    double clock_ = 0.0;
    double origin_ = 0.0;
    double eps_p_ = 0.0;
};

struct SimulationOptions {
    std::size_t snapshot_every = 0;  ///< record densities every k events per book (0 = off)
    std::function<void(const StepRecord&)> on_step;
};

struct SimulationResult {
    std::vector<PricePath> paths;
    std::vector<DensitySnapshot> snapshots;
    std::size_t multiple_crossing_events = 0;
};

/// Burns in, then records (t, p) for every event of every book up to
/// `horizon` time units after burn-in. Deterministic in `seed`.
SimulationResult simulate(const SimConfig& config, double horizon, std::uint64_t seed,
                          const SimulationOptions& options = {});

struct ImpactRow {
    double Q = 0.0;
    double dp = 0.0;
};

struct ImpactOptions {
    std::size_t book = 0;
    double location = -1.0;      ///< shock centre relative to the price
    std::size_t settle_events = 500;
};

/// Matched-seed shocked vs unshocked runs; dp is the price difference of
/// the shocked book after `settle_events` of its events.
std::vector<ImpactRow> measure_impact(const SimConfig& config, std::span<const double> Q_values,
                                      std::uint64_t seed, const ImpactOptions& options = {});

/// CSV helpers.
void write_paths_csv(std::ostream& os, std::span<const PricePath> paths, std::uint64_t seed);
/// Reads the write_paths_csv format; '#' lines are skipped.
std::vector<PricePath> read_paths_csv(std::istream& is);
void write_snapshots_csv(std::ostream& os, const Lattice& lattice,
                         std::span<const DensitySnapshot> snapshots, std::uint64_t seed);

}  // namespace clob
