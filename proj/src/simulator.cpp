#include "clob/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "clob/errors.hpp"
#include "clob/random.hpp"

namespace clob {

namespace {

constexpr std::uint64_t kClockStream = 1;
constexpr std::uint64_t kForceStream = 2;
constexpr std::uint64_t kBookForceStream = 3;

}  // namespace

void SimConfig::validate() const {
    lattice.validate();
    if (books.empty()) throw ConfigError("at least one book is required");
    for (const BookParams& b : books) {
        b.validate();
        if (!(b.p0 > lattice.x0 && b.p0 < lattice.x0 + lattice.L))
            throw ConfigError("initial price " + std::to_string(b.p0) + " outside the lattice");
    }
    if (!intensities.empty() && intensities.size() != books.size())
        throw ConfigError("intensities must list one value per book");
    for (double v : intensities)
        if (!(v > 0.0)) throw ConfigError("intensities must be positive");
    if (!phase_offsets.empty() && phase_offsets.size() != books.size())
        throw ConfigError("phase_offsets must list one value per book");
    for (double v : phase_offsets)
        if (!(v >= 0.0)) throw ConfigError("phase offsets must be non-negative");
    if (kernel_window < 1) throw ConfigError("kernel window must be at least 1");
    if (!(force.sigma_V >= 0.0)) throw ConfigError("sigma_V must be non-negative");
    if (!(nu_floor > 0.0)) throw ConfigError("nu_floor must be positive");
    for (const ScheduledShock& s : shocks)
        if (s.book >= books.size()) throw ConfigError("shock targets a missing book");
}

double SimConfig::intensity(std::size_t book) const {
    if (!intensities.empty()) return intensities[book];
    return 1.0 / mean_dt();
}

SimConfig table1_config() {
    SimConfig c;
    c.lattice.L = 200.0;
    c.lattice.M = 400;
    c.lattice.r = 0.5;
    c.lattice.D_alpha = 0.5;
    c.lattice.alpha = 1.0;
    c.lattice.x0 = centred_x0(200.0, 230.0);
    BookParams b;
    b.lambda = 1.0;
    b.mu = 0.1;
    b.nu = 14.0;
    b.p0 = 230.0;
    c.books = {b, b};
    return c;
}

SimConfig table2_config() {
    SimConfig c = table1_config();
    c.lattice.D_alpha = 0.27;
    c.lattice.alpha = 0.57;
    for (BookParams& b : c.books) b.nu = 12.55;
    return c;
}

double drift_coefficient(double force_increment, double dt, double dx, double kappa, double r) {
    const double F = kappa * force_increment * dt / dx;
    return std::clamp(F, -r, r);
}

// ---------------------------------------------------------------------------

DensityStepper::DensityStepper(const Lattice& lattice, const KernelTable& kernel, double r,
                               double nu, double history_cutoff, JumpReference reference)
    : lattice_(&lattice),
      kernel_(&kernel),
      r_(r),
      nu_(nu),
      history_cutoff_(history_cutoff),
      reference_(reference),
      ring_(kernel.window()) {
    const std::size_t n = lattice.size();
    for (Slice& s : ring_) {
        s.phi.assign(n, 0.0);
        s.sym.assign(n, 0.0);
        s.skew.assign(n, 0.0);
    }
    current_.assign(n, 0.0);
    acc_sym_.assign(n, 0.0);
    acc_skew_.assign(n, 0.0);
    tmp_sym_.assign(n, 0.0);
    tmp_skew_.assign(n, 0.0);
}

void DensityStepper::reset(std::span<const double> phi, double t0) {
    if (phi.size() != lattice_->size()) throw DomainError("density size does not match lattice");
    current_.assign(phi.begin(), phi.end());
    current_.front() = 0.0;
    current_.back() = 0.0;
    head_ = 0;
    count_ = 1;
    ring_[0].phi = current_;
    ring_[0].t = t0;
    ring_[0].dx = 0.0;
    time_ = t0;
}

DensityStepper::Slice& DensityStepper::slice_at(std::size_t age) {
    const std::size_t cap = ring_.size();
    return ring_[(head_ + cap - age) % cap];
}

namespace {

// phi^-(x_i) = phi(x_i - d) and phi^+(x_i) = phi(x_i + d), linear
// interpolation on the lattice, zero beyond the boundaries.
void off_lattice(std::span<const double> phi, double d, double lattice_dx, double r,
                 std::span<double> sym, std::span<double> skew) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(phi.size());
    const double shift = d / lattice_dx;
    const double qf = std::floor(shift);
    const std::ptrdiff_t q = static_cast<std::ptrdiff_t>(qf);
    const double f = shift - qf;
    auto at = [&](std::ptrdiff_t j) { return (j >= 0 && j < n) ? phi[static_cast<std::size_t>(j)] : 0.0; };
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double plus = (1.0 - f) * at(i + q) + f * at(i + q + 1);
        const double minus = f * at(i - q - 1) + (1.0 - f) * at(i - q);
        const double centre = phi[static_cast<std::size_t>(i)];
        sym[static_cast<std::size_t>(i)] = 0.5 * r * (minus + plus) - r * centre;
        skew[static_cast<std::size_t>(i)] = 0.5 * (minus - plus);
    }
}

}  // namespace

void DensityStepper::fill_brackets(Slice& slice, double dx) const {
    off_lattice(slice.phi, dx, lattice_->dx(), r_, slice.sym, slice.skew);
}

const std::vector<double>& DensityStepper::step(double dt, double dx, double F,
                                                std::span<const double> creation,
                                                std::span<const double> impulse) {
    if (!(dt > 0.0) || !(dx > 0.0)) throw DomainError("step needs dt > 0 and dx > 0");
    const std::size_t n = current_.size();
    if (creation.size() != n) throw DomainError("creation term size does not match lattice");
    if (!impulse.empty() && impulse.size() != n) throw DomainError("impulse size does not match lattice");

    Slice& newest = slice_at(0);
    newest.dx = dx;
    fill_brackets(newest, dx);

    std::fill(acc_sym_.begin(), acc_sym_.end(), 0.0);
    std::fill(acc_skew_.begin(), acc_skew_.end(), 0.0);
    const double t_prev = time_;
    const std::size_t reach = std::min(count_, kernel_->window());
    for (std::size_t age = 0; age < reach; ++age) {
        Slice& slice = slice_at(age);
        const double decay = nu_ == 0.0 ? 1.0 : std::exp(-nu_ * (t_prev - slice.t));
        if (decay < history_cutoff_) break;
        const double w = kernel_->K[age + 1] * decay;
        if (w == 0.0) continue;
        const double* sym = slice.sym.data();
        const double* skew = slice.skew.data();
        if (reference_ == JumpReference::LatestDx && age > 0) {
            off_lattice(slice.phi, dx, lattice_->dx(), r_, tmp_sym_, tmp_skew_);
            sym = tmp_sym_.data();
            skew = tmp_skew_.data();
        }
        double* as = acc_sym_.data();
        double* ak = acc_skew_.data();
        for (std::size_t i = 0; i < n; ++i) {
            as[i] += w * sym[i];
            ak[i] += w * skew[i];
        }
    }

    const double survive = std::exp(-nu_ * dt);
    const std::vector<double>& prev = newest.phi;
    for (std::size_t i = 0; i < n; ++i)
        current_[i] = acc_sym_[i] + F * acc_skew_[i] + survive * prev[i] + creation[i] * dt;
    if (!impulse.empty())
        for (std::size_t i = 0; i < n; ++i) current_[i] += impulse[i];
    current_.front() = 0.0;
    current_.back() = 0.0;

    time_ = t_prev + dt;
    head_ = (head_ + 1) % ring_.size();
    count_ = std::min(count_ + 1, ring_.size());
    Slice& fresh = ring_[head_];
    fresh.phi = current_;
    fresh.t = time_;
    fresh.dx = 0.0;
    return current_;
}

// ---------------------------------------------------------------------------

std::vector<double> PricePath::returns() const {
    std::vector<double> out;
    if (p.size() < 2) return out;
    out.reserve(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) out.push_back(p[i] - p[i - 1]);
    return out;
}

CoupledSystem::CoupledSystem(SimConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      lattice_((config_.validate(), config_.lattice)),
      kernel_(KernelTable::build(config_.lattice.alpha, config_.kernel_window, config_.kernel_tolerance)),
      force_rng_(make_rng(seed, {kForceStream})) {
    const std::size_t nb = config_.books.size();
    const double mean_dt = config_.mean_dt();
    eps_p_ = config_.eps_p_fraction * lattice_.dx();
    books_.resize(nb);
    steppers_.reserve(nb);
    next_time_.assign(nb, 0.0);
    events_.assign(nb, 0);
    V_at_last_.assign(nb, 0.0);
    shock_done_.assign(config_.shocks.size(), false);

    std::vector<double> offsets(nb, 0.0);
    if (config_.sampling == SamplingMode::Uniform) {
        if (!config_.phase_offsets.empty())
            offsets = config_.phase_offsets;
        else
            for (std::size_t j = 0; j < nb; ++j)
                offsets[j] = static_cast<double>(j) * mean_dt / static_cast<double>(nb);
    }

    for (std::size_t j = 0; j < nb; ++j) {
        const BookParams& bp = config_.books[j];
        BookState& state = books_[j];
        state.params = bp;
        state.price = bp.p0;
        state.phi = source_term(lattice_.points(), bp.p0, bp.lambda, bp.mu);
        const double scale = 1.0 / std::max(bp.nu, config_.nu_floor);
        for (double& v : state.phi) v *= scale;
        steppers_.emplace_back(lattice_, kernel_, config_.lattice.r, bp.nu, config_.history_cutoff,
                               config_.jump_reference);
        steppers_.back().reset(state.phi, offsets[j]);
        state.phi = steppers_.back().density();
        clocks_.emplace_back(config_.sampling, config_.intensity(j));
        clock_rngs_.push_back(make_rng(seed, {kClockStream, j}));
        book_force_rngs_.push_back(make_rng(seed, {kBookForceStream, j}));
        next_time_[j] = offsets[j] + clocks_[j].next_dt(clock_rngs_[j]);
    }

    // the shared potential is sampled forward in time, so books that start
    // late read V at their start
    std::vector<std::size_t> order(nb);
    for (std::size_t j = 0; j < nb; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return offsets[a] < offsets[b]; });
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t j : order) {
        const double gap = offsets[j] - shared_V_time_;
        if (gap > 0.0) {
            shared_V_ += config_.force.sigma_V * std::sqrt(gap) * normal(force_rng_);
            shared_V_time_ = offsets[j];
        }
        V_at_last_[j] = shared_V_;
    }
}

void CoupledSystem::set_density(std::size_t book, std::span<const double> phi, double price) {
    steppers_.at(book).reset(phi, steppers_[book].time());
    books_[book].phi = steppers_[book].density();
    books_[book].price = price;
}

double CoupledSystem::force_increment(std::size_t j, double t_new) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = config_.force.sigma_V;
    if (config_.force.independent) {
        const double dt = t_new - steppers_[j].time();
        return sigma * std::sqrt(dt) * normal(book_force_rngs_[j]);
    }
    if (t_new > shared_V_time_) {
        shared_V_ += sigma * std::sqrt(t_new - shared_V_time_) * normal(force_rng_);
        shared_V_time_ = t_new;
    }
    const double dV = shared_V_ - V_at_last_[j];
    V_at_last_[j] = shared_V_;
    return dV;
}

std::vector<double> CoupledSystem::creation_for(std::size_t j) const {
    const BookState& me = books_[j];
    std::vector<double> c = source_term(lattice_.points(), me.price, me.params.lambda, me.params.mu);
    if (config_.coupling) {
        for (std::size_t k = 0; k < books_.size(); ++k) {
            if (k == j) continue;
            const std::vector<double> G = coupling_term(lattice_.points(), me.price, books_[k].price,
                                                        me.params.lambda, me.params.mu, eps_p_,
                                                        config_.coupling_form);
            for (std::size_t i = 0; i < c.size(); ++i) c[i] += G[i];
        }
    }
    return c;
}

StepRecord CoupledSystem::advance() {
    std::size_t j = 0;
    for (std::size_t k = 1; k < next_time_.size(); ++k)
        if (next_time_[k] < next_time_[j]) j = k;

    DensityStepper& stepper = steppers_[j];
    BookState& state = books_[j];
    const LatticeConfig& lc = config_.lattice;

    StepRecord rec;
    rec.book = j;
    rec.t_prev = stepper.time();
    rec.t = next_time_[j];
    rec.price_prev = state.price;
    rec.other_price = books_.size() > 1 ? books_[j == 0 ? 1 : 0].price : state.price;

    const double dt = rec.t - rec.t_prev;
    double dx = jump_length(dt, lc.D_alpha, lc.alpha, lc.r);
    if (config_.sampling == SamplingMode::Uniform && std::abs(dx - lattice_.dx()) <= 1e-12 * lattice_.dx())
        dx = lattice_.dx();
    rec.dx = dx;

    const double dV = force_increment(j, rec.t);
    rec.F = config_.force.fixed_drift ? std::clamp(*config_.force.fixed_drift, -lc.r, lc.r)
                                      : drift_coefficient(dV, dt, dx, config_.force.kappa, lc.r);

    const std::vector<double> creation = creation_for(j);
    std::vector<double> impulse;
    for (std::size_t s = 0; s < config_.shocks.size(); ++s) {
        const ScheduledShock& sh = config_.shocks[s];
        if (shock_done_[s] || sh.book != j || !(rec.t > origin_ + sh.shock.time)) continue;
        shock_done_[s] = true;
        const double centre = state.price + sh.shock.location;
        if (!lattice_.contains(centre))
            throw DomainError("shock location " + std::to_string(centre) + " outside the lattice");
        if (sh.shock.size == 0.0) continue;
        const std::vector<double> bump = shock_profile(lattice_, centre, sh.shock.size, lattice_.dx());
        if (impulse.empty()) impulse.assign(bump.size(), 0.0);
        for (std::size_t i = 0; i < bump.size(); ++i) impulse[i] += bump[i];
        rec.shocked = true;
    }

    const std::vector<double>& phi = stepper.step(dt, dx, rec.F, creation, impulse);
    PriceExtraction px;
    try {
        px = extract_price(phi, lattice_, state.price);
    } catch (const DomainError& e) {
        throw SimulationError(std::string("price extraction failed: ") + e.what(), j, rec.t, phi);
    }
    if (!std::isfinite(px.price) || !lattice_.contains(px.price))
        throw SimulationError("price left the lattice", j, rec.t, phi);
    state.phi = phi;
    state.price = px.price;
    rec.price = px.price;
    rec.crossings = px.crossings;

    next_time_[j] = rec.t + clocks_[j].next_dt(clock_rngs_[j]);
    ++events_[j];
    clock_ = rec.t;
    return rec;
}

void CoupledSystem::run_until(double t) {
    for (;;) {
        const double next = *std::min_element(next_time_.begin(), next_time_.end());
        if (next > t) break;
        advance();
    }
}

// ---------------------------------------------------------------------------

SimulationResult simulate(const SimConfig& config, double horizon, std::uint64_t seed,
                          const SimulationOptions& options) {
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    CoupledSystem system(config, seed);
    const double origin = static_cast<double>(config.burn_in) * system.config().mean_dt();
    system.set_time_origin(origin);
    system.run_until(origin);

    SimulationResult result;
    const std::size_t nb = system.book_count();
    result.paths.resize(nb);
    std::vector<std::size_t> since_snapshot(nb, 0);
    for (std::size_t j = 0; j < nb; ++j) {
        result.paths[j].book_id = j;
        result.paths[j].t.push_back(0.0);
        result.paths[j].p.push_back(system.book(j).price);
        if (options.snapshot_every > 0)
            result.snapshots.push_back({j, 0.0, system.book(j).price, system.book(j).phi});
    }
    const double end = origin + horizon;
    for (;;) {
        double next = system.next_event_time(0);
        for (std::size_t j = 1; j < nb; ++j) next = std::min(next, system.next_event_time(j));
        if (next > end) break;
        const StepRecord rec = system.advance();
        PricePath& path = result.paths[rec.book];
        path.t.push_back(rec.t - origin);
        path.p.push_back(rec.price);
        if (rec.crossings > 1) ++result.multiple_crossing_events;
        if (options.on_step) options.on_step(rec);
        if (options.snapshot_every > 0 && ++since_snapshot[rec.book] >= options.snapshot_every) {
            since_snapshot[rec.book] = 0;
            result.snapshots.push_back({rec.book, rec.t - origin, rec.price, system.book(rec.book).phi});
        }
    }
    return result;
}

namespace {

double settled_price(const SimConfig& config, std::uint64_t seed, std::size_t book,
                     std::size_t settle_events) {
    CoupledSystem system(config, seed);
    const double origin = static_cast<double>(config.burn_in) * system.config().mean_dt();
    system.set_time_origin(origin);
    system.run_until(origin);
    const std::size_t start = system.events(book);
    while (system.events(book) - start < settle_events) system.advance();
    return system.book(book).price;
}

}  // namespace

std::vector<ImpactRow> measure_impact(const SimConfig& config, std::span<const double> Q_values,
                                      std::uint64_t seed, const ImpactOptions& options) {
    if (options.book >= config.books.size()) throw ConfigError("impact book index out of range");
    for (double Q : Q_values)
        if (!std::isfinite(Q)) throw DomainError("shock sizes must be finite");
    SimConfig base = config;
    base.shocks.clear();
    const double reference = settled_price(base, seed, options.book, options.settle_events);
    std::vector<ImpactRow> rows;
    for (double Q : Q_values) {
        SimConfig shocked = base;
        shocked.shocks.push_back({options.book, Shock{Q, options.location, 0.0}});
        const double p = settled_price(shocked, seed, options.book, options.settle_events);
        rows.push_back({Q, p - reference});
    }
    return rows;
}

void write_paths_csv(std::ostream& os, std::span<const PricePath> paths, std::uint64_t seed) {
    os << "# seed=" << seed << '\n';
    os << "book_id,t,p\n";
    os.precision(17);
    for (const PricePath& path : paths)
        for (std::size_t i = 0; i < path.t.size(); ++i)
            os << path.book_id << ',' << path.t[i] << ',' << path.p[i] << '\n';
}

std::vector<PricePath> read_paths_csv(std::istream& is) {
    std::vector<PricePath> paths;
    std::string line;
    bool header = false;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line.rfind("book_id,t,p", 0) != 0) throw ConfigError("price-path CSV must start with 'book_id,t,p'");
            header = true;
            continue;
        }
        std::istringstream ss(line);
        std::size_t book = 0;
        double t = 0.0, p = 0.0;
        char c1 = 0, c2 = 0;
        if (!(ss >> book >> c1 >> t >> c2 >> p) || c1 != ',' || c2 != ',')
            throw ConfigError("bad price-path row at line " + std::to_string(lineno));
        auto it = std::find_if(paths.begin(), paths.end(), [&](const PricePath& q) { return q.book_id == book; });
        if (it == paths.end()) {
            paths.push_back(PricePath{book, {}, {}});
            it = paths.end() - 1;
        }
        if (!it->t.empty() && t < it->t.back())
            throw ConfigError("price-path times must be non-decreasing (line " + std::to_string(lineno) + ")");
        it->t.push_back(t);
        it->p.push_back(p);
    }
    if (!header) throw ConfigError("price-path CSV has no header");
    return paths;
}

void write_snapshots_csv(std::ostream& os, const Lattice& lattice,
                         std::span<const DensitySnapshot> snapshots, std::uint64_t seed) {
    os << "# seed=" << seed << '\n';
    os << "book_id,t,price,x,phi\n";
    os.precision(17);
    for (const DensitySnapshot& s : snapshots)
        for (std::size_t i = 0; i < s.phi.size(); ++i)
            os << s.book << ',' << s.t << ',' << s.price << ',' << lattice.x(i) << ',' << s.phi[i] << '\n';
}

}  // namespace clob
