#include "clob/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "clob/errors.hpp"

namespace clob {

namespace {

using json = nlohmann::ordered_json;

// Reads keys from one JSON object and rejects any key it was not asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("'" + path_ + "' must be an object");
    }

    template <class T>
    bool get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return false;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError("'" + name(key) + "': " + e.what());
        }
        return true;
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    Section child(const std::string& key) {
        seen_.insert(key);
        return Section(j_.at(key), name(key));
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key())) throw ConfigError("unknown config key '" + name(item.key()) + "'");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

SamplingMode parse_mode(const std::string& s) {
    if (s == "exponential") return SamplingMode::Exponential;
    if (s == "uniform") return SamplingMode::Uniform;
    throw ConfigError("sampling mode must be 'uniform' or 'exponential', got '" + s + "'");
}

CouplingForm parse_form(const std::string& s) {
    if (s == "balanced") return CouplingForm::Balanced;
    if (s == "literal") return CouplingForm::Literal;
    throw ConfigError("coupling form must be 'balanced' or 'literal', got '" + s + "'");
}

JumpReference parse_reference(const std::string& s) {
    if (s == "slice") return JumpReference::SliceDx;
    if (s == "latest") return JumpReference::LatestDx;
    throw ConfigError("jump_reference must be 'slice' or 'latest', got '" + s + "'");
}

Millis parse_clock_key(Section& s, const std::string& key, Millis fallback) {
    std::string text;
    if (!s.get(key, text)) return fallback;
    try {
        return parse_clock(text);
    } catch (const std::exception& e) {
        throw ConfigError("'" + s.name(key) + "': " + e.what());
    }
}

void read_theta(Section& s, Theta& theta) {
    s.get("D_alpha", theta[0]);
    s.get("nu", theta[1]);
    s.get("alpha", theta[2]);
    s.finish();
}

void read_bounds(Section& s, Bounds& b) {
    const char* keys[3] = {"D_alpha", "nu", "alpha"};
    for (std::size_t i = 0; i < 3; ++i) {
        std::vector<double> pair;
        if (!s.get(keys[i], pair)) continue;
        if (pair.size() != 2) throw ConfigError("'" + s.name(keys[i]) + "' must be [lower, upper]");
        b.lower[i] = pair[0];
        b.upper[i] = pair[1];
    }
    s.finish();
}

void read_model(Section& s, SimConfig& sim) {
    LatticeConfig& lat = sim.lattice;
    s.get("L", lat.L);
    s.get("M", lat.M);
    s.get("r", lat.r);
    s.get("D_alpha", lat.D_alpha);
    s.get("alpha", lat.alpha);
    double nu = 0.0;
    if (s.get("nu", nu))
        for (BookParams& b : sim.books) b.nu = nu;
    s.get("x0", lat.x0);
    double dx = 0.0;
    if (s.get("Delta_x", dx) && std::abs(dx - lat.dx()) > 1e-12)
        throw ConfigError("'" + s.name("Delta_x") + "' disagrees with L / M");
    s.finish();
}

void read_books(const json& arr, const std::string& path, SimConfig& sim) {
    if (!arr.is_array() || arr.empty()) throw ConfigError("'" + path + "' must be a non-empty array");
    const BookParams proto = sim.books.empty() ? BookParams{} : sim.books.front();
    std::vector<BookParams> books;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Section b(arr[i], path + "[" + std::to_string(i) + "]");
        BookParams p = i < sim.books.size() ? sim.books[i] : proto;
        b.get("p(0)", p.p0);
        b.get("lambda", p.lambda);
        b.get("mu", p.mu);
        b.get("nu", p.nu);
        b.finish();
        books.push_back(p);
    }
    sim.books = books;
}

void read_sampling(Section& s, SimConfig& sim) {
    std::string mode;
    if (s.get("mode", mode)) sim.sampling = parse_mode(mode);
    s.get("intensities", sim.intensities);
    s.get("phase_offsets", sim.phase_offsets);
    s.get("unit_exponent_dt", sim.unit_exponent_dt);
    s.finish();
}

void read_shocks(const json& arr, const std::string& path, SimConfig& sim) {
    if (!arr.is_array()) throw ConfigError("'" + path + "' must be an array");
    sim.shocks.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Section s(arr[i], path + "[" + std::to_string(i) + "]");
        ScheduledShock sh;
        s.get("book", sh.book);
        s.get("Q", sh.shock.size);
        s.get("location", sh.shock.location);
        s.get("time", sh.shock.time);
        s.finish();
        sim.shocks.push_back(sh);
    }
}

json theta_json(const Theta& t) { return json{{"D_alpha", t[0]}, {"nu", t[1]}, {"alpha", t[2]}}; }

}  // namespace

std::vector<double> default_epps_scales(double mean_dt, double horizon, std::size_t count) {
    const double lo = 0.25 * mean_dt;
    const double hi = horizon / 20.0;
    if (!(hi > lo) || count < 2) throw ConfigError("horizon too short for an Epps sweep");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(count - 1));
    return out;
}

void RunConfig::validate() const {
    sim.validate();
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
    if (sim.books.size() < 2) throw ConfigError("at least two books are required");

    if (epps.reps < 1) throw ConfigError("epps.reps must be at least 1");
    for (std::size_t i = 0; i < epps.scales.size(); ++i) {
        if (!(epps.scales[i] > 0.0)) throw ConfigError("epps scales must be positive");
        if (i > 0 && !(epps.scales[i] > epps.scales[i - 1])) throw ConfigError("epps scales must increase");
    }
    if (epps.spectrum_N < 1) throw ConfigError("epps.spectrum_N must be at least 1");
    if (!(epps.nufft.oversampling > 1.0)) throw ConfigError("nufft oversampling must exceed 1");
    if (epps.nufft.spread_width < 1) throw ConfigError("nufft spread_width must be at least 1");

    for (double q : impact.Q)
        if (!std::isfinite(q)) throw ConfigError("impact Q values must be finite");
    if (impact.options.book >= sim.books.size()) throw ConfigError("impact.book out of range");
    if (impact.options.settle_events < 1) throw ConfigError("impact.settle_events must be at least 1");

    if (facts.max_lag < 1) throw ConfigError("facts.max_lag must be at least 1");
    if (facts.book >= sim.books.size()) throw ConfigError("facts.book out of range");

    if (!(ingest.session_start < ingest.session_end)) throw ConfigError("ingest session must be non-empty");
    if (ingest.opening_drop < 0) throw ConfigError("ingest.opening_drop_seconds must be non-negative");
    for (const auto& w : ingest.auction_windows)
        if (!(w.first < w.second)) throw ConfigError("auction windows must have start < end");

    const CalibrationOptions& c = calibration;
    for (std::size_t i = 0; i < 3; ++i) {
        if (!(c.bounds.lower[i] <= c.bounds.upper[i])) throw ConfigError("calibration bounds are inverted");
        if (!(c.theta0[i] >= c.bounds.lower[i] && c.theta0[i] <= c.bounds.upper[i]))
            throw ConfigError("calibration theta0 lies outside the bounds");
    }
    if (!(c.bounds.lower[0] > 0.0)) throw ConfigError("D_alpha lower bound must be positive");
    if (c.bounds.lower[1] < 0.0) throw ConfigError("nu lower bound must be non-negative");
    if (!(c.bounds.lower[2] > 0.0) || c.bounds.upper[2] > 1.0)
        throw ConfigError("alpha bounds must lie in (0, 1]");
    if (c.setup.n_returns < 500) throw ConfigError("calibration.n_returns must be at least 500");
    if (c.setup.replications < 1) throw ConfigError("calibration.replications must be at least 1");
    if (c.setup.book >= sim.books.size()) throw ConfigError("calibration.book out of range");
    if (c.nmta.iterations < 1) throw ConfigError("calibration.iterations must be at least 1");
    if (!(c.nmta.p_nm >= 0.0 && c.nmta.p_nm <= 1.0)) throw ConfigError("calibration.p_nm must lie in [0, 1]");
    if (!(c.nmta.tau_decay > 0.0 && c.nmta.tau_decay <= 1.0))
        throw ConfigError("calibration.tau_decay must lie in (0, 1]");
    if (c.bootstrap.block < 1) throw ConfigError("calibration.bootstrap_block must be at least 1");
    if (!(c.hessian.relative_step > 0.0) || !(c.hessian.min_step > 0.0))
        throw ConfigError("calibration Hessian steps must be positive");
}

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    Section top(root, "");
    RunConfig cfg;
    std::string preset = "table1";
    top.get("preset", preset);
    if (preset == "table1") cfg.sim = table1_config();
    else if (preset == "table2") cfg.sim = table2_config();
    else throw ConfigError("preset must be 'table1' or 'table2', got '" + preset + "'");

    top.get("seed", cfg.seed);
    top.get("horizon", cfg.horizon);
    top.get("snapshot_every", cfg.snapshot_every);
    if (top.has("model")) {
        Section s = top.child("model");
        read_model(s, cfg.sim);
    }
    if (top.has("books")) read_books(top.raw("books"), "books", cfg.sim);
    if (top.has("sampling")) {
        Section s = top.child("sampling");
        read_sampling(s, cfg.sim);
    }
    if (top.has("force")) {
        Section s = top.child("force");
        s.get("kappa", cfg.sim.force.kappa);
        s.get("sigma_V", cfg.sim.force.sigma_V);
        s.get("independent", cfg.sim.force.independent);
        double drift = 0.0;
        if (s.get("fixed_drift", drift)) cfg.sim.force.fixed_drift = drift;
        s.finish();
    }
    if (top.has("coupling")) {
        Section s = top.child("coupling");
        s.get("enabled", cfg.sim.coupling);
        std::string form;
        if (s.get("form", form)) cfg.sim.coupling_form = parse_form(form);
        s.get("eps_p_fraction", cfg.sim.eps_p_fraction);
        s.finish();
    }
    if (top.has("kernel")) {
        Section s = top.child("kernel");
        s.get("W", cfg.sim.kernel_window);
        s.get("tolerance", cfg.sim.kernel_tolerance);
        s.get("history_cutoff", cfg.sim.history_cutoff);
        std::string ref;
        if (s.get("jump_reference", ref)) cfg.sim.jump_reference = parse_reference(ref);
        s.finish();
    }
    top.get("burn_in", cfg.sim.burn_in);
    top.get("nu_floor", cfg.sim.nu_floor);
    if (top.has("shocks")) read_shocks(top.raw("shocks"), "shocks", cfg.sim);

    if (top.has("epps")) {
        Section s = top.child("epps");
        s.get("scales", cfg.epps.scales);
        s.get("reps", cfg.epps.reps);
        s.get("spectrum_N", cfg.epps.spectrum_N);
        s.get("oversampling", cfg.epps.nufft.oversampling);
        s.get("spread_width", cfg.epps.nufft.spread_width);
        s.finish();
    }
    if (top.has("impact")) {
        Section s = top.child("impact");
        s.get("Q", cfg.impact.Q);
        s.get("book", cfg.impact.options.book);
        s.get("location", cfg.impact.options.location);
        s.get("settle_events", cfg.impact.options.settle_events);
        s.finish();
    }
    if (top.has("facts")) {
        Section s = top.child("facts");
        s.get("max_lag", cfg.facts.max_lag);
        s.get("qq_points", cfg.facts.qq_points);
        s.get("book", cfg.facts.book);
        s.finish();
    }
    if (top.has("ingest")) {
        Section s = top.child("ingest");
        cfg.ingest.session_start = parse_clock_key(s, "session_start", cfg.ingest.session_start);
        cfg.ingest.session_end = parse_clock_key(s, "session_end", cfg.ingest.session_end);
        double drop = 0.0;
        if (s.get("opening_drop_seconds", drop)) cfg.ingest.opening_drop = std::llround(drop * 1000.0);
        s.get("kept_trade_types", cfg.ingest.kept_trade_types);
        std::vector<std::vector<std::string>> windows;
        if (s.get("auction_windows", windows)) {
            cfg.ingest.auction_windows.clear();
            for (const auto& w : windows) {
                if (w.size() != 2) throw ConfigError("auction windows must be [start, end] pairs");
                try {
                    cfg.ingest.auction_windows.emplace_back(parse_clock(w[0]), parse_clock(w[1]));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(std::string("ingest.auction_windows: ") + e.what());
                }
            }
        }
        s.finish();
    }
    if (top.has("calibration")) {
        Section s = top.child("calibration");
        CalibrationOptions& c = cfg.calibration;
        s.get("n_returns", c.setup.n_returns);
        s.get("replications", c.setup.replications);
        s.get("book", c.setup.book);
        s.get("iterations", c.nmta.iterations);
        s.get("p_nm", c.nmta.p_nm);
        s.get("tau_decay", c.nmta.tau_decay);
        s.get("tau0", c.nmta.tau0);
        if (s.has("initial_step")) {
            Section t = s.child("initial_step");
            read_theta(t, c.nmta.initial_step);
        }
        if (s.has("theta0")) {
            Section t = s.child("theta0");
            read_theta(t, c.theta0);
        }
        if (s.has("bounds")) {
            Section b = s.child("bounds");
            read_bounds(b, c.bounds);
        }
        s.get("bootstrap_block", c.bootstrap.block);
        s.get("bootstrap_resamples", c.bootstrap.resamples);
        s.get("hessian_relative_step", c.hessian.relative_step);
        s.get("hessian_min_step", c.hessian.min_step);
        s.finish();
    }
    if (top.has("paths")) {
        Section s = top.child("paths");
        s.get("out_dir", cfg.paths.out_dir);
        s.get("empirical", cfg.paths.empirical);
        s.finish();
    }
    top.finish();

    // The calibration simulates with the run's own model block.
    cfg.calibration.setup.base = cfg.sim;
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["horizon"] = c.horizon;
    j["snapshot_every"] = c.snapshot_every;
    const LatticeConfig& l = c.sim.lattice;
    j["model"] = {{"L", l.L}, {"M", l.M}, {"r", l.r}, {"D_alpha", l.D_alpha}, {"alpha", l.alpha}, {"x0", l.x0}};
    json books = json::array();
    for (const BookParams& b : c.sim.books)
        books.push_back({{"p(0)", b.p0}, {"lambda", b.lambda}, {"mu", b.mu}, {"nu", b.nu}});
    j["books"] = books;
    j["sampling"] = {{"mode", c.sim.sampling == SamplingMode::Uniform ? "uniform" : "exponential"},
                     {"intensities", c.sim.intensities},
                     {"phase_offsets", c.sim.phase_offsets},
                     {"unit_exponent_dt", c.sim.unit_exponent_dt}};
    j["force"] = {{"kappa", c.sim.force.kappa},
                  {"sigma_V", c.sim.force.sigma_V},
                  {"independent", c.sim.force.independent}};
    if (c.sim.force.fixed_drift) j["force"]["fixed_drift"] = *c.sim.force.fixed_drift;
    j["coupling"] = {{"enabled", c.sim.coupling},
                     {"form", c.sim.coupling_form == CouplingForm::Balanced ? "balanced" : "literal"},
                     {"eps_p_fraction", c.sim.eps_p_fraction}};
    j["kernel"] = {{"W", c.sim.kernel_window},
                   {"tolerance", c.sim.kernel_tolerance},
                   {"history_cutoff", c.sim.history_cutoff},
                   {"jump_reference", c.sim.jump_reference == JumpReference::SliceDx ? "slice" : "latest"}};
    j["burn_in"] = c.sim.burn_in;
    j["nu_floor"] = c.sim.nu_floor;
    json shocks = json::array();
    for (const ScheduledShock& s : c.sim.shocks)
        shocks.push_back({{"book", s.book}, {"Q", s.shock.size}, {"location", s.shock.location}, {"time", s.shock.time}});
    j["shocks"] = shocks;
    j["epps"] = {{"scales", c.epps.scales},
                 {"reps", c.epps.reps},
                 {"spectrum_N", c.epps.spectrum_N},
                 {"oversampling", c.epps.nufft.oversampling},
                 {"spread_width", c.epps.nufft.spread_width}};
    j["impact"] = {{"Q", c.impact.Q},
                   {"book", c.impact.options.book},
                   {"location", c.impact.options.location},
                   {"settle_events", c.impact.options.settle_events}};
    j["facts"] = {{"max_lag", c.facts.max_lag}, {"qq_points", c.facts.qq_points}, {"book", c.facts.book}};
    json windows = json::array();
    for (const auto& w : c.ingest.auction_windows) windows.push_back({format_clock(w.first), format_clock(w.second)});
    j["ingest"] = {{"session_start", format_clock(c.ingest.session_start)},
                   {"session_end", format_clock(c.ingest.session_end)},
                   {"opening_drop_seconds", static_cast<double>(c.ingest.opening_drop) / 1000.0},
                   {"kept_trade_types", c.ingest.kept_trade_types},
                   {"auction_windows", windows}};
    const CalibrationOptions& k = c.calibration;
    json bounds;
    const char* names[3] = {"D_alpha", "nu", "alpha"};
    for (std::size_t i = 0; i < 3; ++i) bounds[names[i]] = {k.bounds.lower[i], k.bounds.upper[i]};
    j["calibration"] = {{"n_returns", k.setup.n_returns},
                        {"replications", k.setup.replications},
                        {"book", k.setup.book},
                        {"iterations", k.nmta.iterations},
                        {"p_nm", k.nmta.p_nm},
                        {"tau_decay", k.nmta.tau_decay},
                        {"tau0", k.nmta.tau0},
                        {"initial_step", theta_json(k.nmta.initial_step)},
                        {"theta0", theta_json(k.theta0)},
                        {"bounds", bounds},
                        {"bootstrap_block", k.bootstrap.block},
                        {"bootstrap_resamples", k.bootstrap.resamples},
                        {"hessian_relative_step", k.hessian.relative_step},
                        {"hessian_min_step", k.hessian.min_step}};
    j["paths"] = {{"out_dir", c.paths.out_dir}, {"empirical", c.paths.empirical}};
    return j.dump(2);
}

}  // namespace clob
