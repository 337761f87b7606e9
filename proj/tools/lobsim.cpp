// lobsim: command-line driver for the coupled order book toolkit.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "clob/calibration.hpp"
#include "clob/config.hpp"
#include "clob/errors.hpp"
#include "clob/facts.hpp"
#include "clob/nufft.hpp"
#include "clob/random.hpp"
#include "clob/simulator.hpp"
#include "clob/taq.hpp"

namespace fs = std::filesystem;
using namespace clob;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool uniform = false;
};

RunConfig load(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
    if (c.config.empty()) {
        cfg.calibration.setup.base = cfg.sim;
        cfg.validate();
    }
    if (c.seed) cfg.seed = *c.seed;
    if (c.uniform) {
        cfg.sim.sampling = SamplingMode::Uniform;
        cfg.calibration.setup.base.sampling = SamplingMode::Uniform;
    }
    if (!c.out_dir.empty()) cfg.paths.out_dir = c.out_dir;
    return cfg;
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.paths.out_dir);
    const fs::path p = fs::path(cfg.paths.out_dir) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + p.string() + "'");
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open input file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool is_taq(const std::string& text) {
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty() && line[0] != '#') return line.find("timestamp") != std::string::npos;
    return false;
}

// One input as a price path: TAQ files give log micro-prices at quote
// times in seconds, path files give the requested book.
struct Series {
    PricePath path;
    std::vector<double> signs;  // empty: tick rule on the path
    bool log_returns = false;
};

Series read_series(const std::string& file, std::size_t book) {
    const std::string text = slurp(file);
    std::istringstream in(text);
    Series s;
    if (is_taq(text)) {
        TaqTable table = read_taq_csv(in);
        auto records = compact(table.records);
        for (const auto& [t, mp] : micro_price_series(records)) {
            s.path.t.push_back(static_cast<double>(t) / 1000.0);
            s.path.p.push_back(std::log(mp));
        }
        s.signs = tick_rule_signs(trade_prices(records));
        s.log_returns = true;
        s.path.book_id = book;
        return s;
    }
    for (PricePath& p : read_paths_csv(in))
        if (p.book_id == book) {
            s.path = std::move(p);
            return s;
        }
    throw ConfigError("'" + file + "' has no rows for book " + std::to_string(book));
}

int cmd_simulate(const Common& c) {
    const RunConfig cfg = load(c);
    SimulationOptions opts;
    opts.snapshot_every = cfg.snapshot_every;
    const SimulationResult res = simulate(cfg.sim, cfg.horizon, cfg.seed, opts);
    for (const PricePath& p : res.paths) {
        auto out = open_out(cfg, "path_" + std::to_string(p.book_id) + ".csv");
        write_paths_csv(out, std::span<const PricePath>(&p, 1), cfg.seed);
    }
    if (cfg.snapshot_every > 0) {
        auto out = open_out(cfg, "snapshots.csv");
        write_snapshots_csv(out, Lattice(cfg.sim.lattice), res.snapshots, cfg.seed);
    }
    std::cout << "simulate: " << res.paths.size() << " paths, " << res.paths.front().t.size()
              << " points in book 0, " << res.multiple_crossing_events << " multiple-crossing events\n";
    return 0;
}

int cmd_epps(const Common& c, const std::string& null_case, const std::vector<std::string>& inputs) {
    const RunConfig cfg = load(c);
    if (!null_case.empty() && null_case != "brownian" && null_case != "identical")
        throw ConfigError("--null must be 'brownian' or 'identical'");
    std::vector<std::string> files = inputs.empty() ? cfg.paths.empirical : inputs;
    if (!null_case.empty()) files.clear();
    if (!files.empty() && files.size() != 2) throw ConfigError("empirical Epps mode needs exactly two inputs");

    std::vector<double> scales = cfg.epps.scales;
    EppsCurve curve;
    PricePath spectrum_path;
    if (!files.empty()) {
        Series a = read_series(files[0], 0);
        Series b = read_series(files[1], files[0] == files[1] ? 1 : 0);
        const double span = std::min(a.path.t.back(), b.path.t.back()) - std::max(a.path.t.front(), b.path.t.front());
        if (scales.empty()) {
            const double n = static_cast<double>(a.path.t.size());
            scales = default_epps_scales(span / n, span);
        }
        std::vector<PathPair> pairs{PathPair{a.path, b.path}};
        curve = epps_curve(pairs, scales, cfg.epps.nufft);
        spectrum_path = a.path;
    } else {
        if (scales.empty()) scales = default_epps_scales(cfg.sim.mean_dt(), cfg.horizon);
        if (null_case.empty()) {
            curve = simulated_epps_curve(cfg.sim, cfg.horizon, scales, cfg.epps.reps, cfg.seed, cfg.epps.nufft);
            spectrum_path = simulate(cfg.sim, cfg.horizon, derive_seed(cfg.seed, {0})).paths[0];
        } else {
            std::vector<PathPair> pairs;
            for (std::size_t r = 0; r < cfg.epps.reps; ++r) {
                PathPair pp = brownian_pair(cfg.horizon, cfg.sim.intensity(0), cfg.sim.intensity(1), 0.0,
                                            derive_seed(cfg.seed, {r}));
                if (null_case == "identical") pp.b = PricePath{1, pp.a.t, pp.a.p};
                pairs.push_back(std::move(pp));
            }
            curve = epps_curve(pairs, scales, cfg.epps.nufft);
            spectrum_path = pairs.front().a;
        }
    }
    const PowerSpectrum ps = power_spectrum(spectrum_path, cfg.epps.spectrum_N, cfg.epps.nufft);
    auto eo = open_out(cfg, "epps.csv");
    write_epps_csv(eo, curve, cfg.seed);
    auto so = open_out(cfg, "spectrum.csv");
    write_spectrum_csv(so, ps, cfg.seed);
    std::cout << "epps: " << curve.scales.size() << " scales, " << curve.reps << " reps, spectrum slope "
              << ps.slope << '\n';
    return 0;
}

int cmd_impact(const Common& c) {
    const RunConfig cfg = load(c);
    const auto rows = measure_impact(cfg.sim, cfg.impact.Q, cfg.seed, cfg.impact.options);
    auto out = open_out(cfg, "impact.csv");
    out << "# seed=" << cfg.seed << " book=" << cfg.impact.options.book << '\n';
    out << "Q,dp\n";
    out.precision(17);
    for (const ImpactRow& r : rows) out << r.Q << ',' << r.dp << '\n';
    std::cout << "impact: " << rows.size() << " rows\n";
    return 0;
}

int cmd_ingest(const Common& c, const std::vector<std::string>& inputs) {
    const RunConfig cfg = load(c);
    const std::vector<std::string> files = inputs.empty() ? cfg.paths.empirical : inputs;
    if (files.empty()) throw ConfigError("ingest needs at least one input file");
    std::vector<TaqRecord> all;
    std::vector<Reject> rejects;
    for (const auto& f : files) {
        TaqTable t = read_taq_csv(f);
        all.insert(all.end(), t.records.begin(), t.records.end());
        for (auto& r : t.rejects) rejects.push_back(r);
    }
    CleanReport report;
    const auto cleaned = compact(clean(all, cfg.ingest, &report));
    auto out = open_out(cfg, "cleaned.csv");
    write_taq_csv(out, cleaned);
    auto rej = open_out(cfg, "rejects.csv");
    write_rejects_csv(rej, rejects);
    std::cout << "ingest: " << report.input << " records in, " << cleaned.size() << " out, " << rejects.size()
              << " rejected, " << report.outside_session << " outside session, " << report.opening_minute
              << " in opening minute, " << report.auction << " in auctions";
    for (const auto& [type, n] : report.dropped_trade_types) std::cout << ", " << n << ' ' << type;
    std::cout << '\n';
    return 0;
}

std::vector<double> returns_of(const Series& s) {
    return s.log_returns ? differences(s.path.p) : s.path.returns();
}

int cmd_facts(const Common& c, const std::vector<std::string>& inputs) {
    const RunConfig cfg = load(c);
    FactsReport rep;
    if (!inputs.empty()) {
        const Series s = read_series(inputs.front(), cfg.facts.book);
        rep = facts_from_returns(returns_of(s), s.signs, cfg.facts.max_lag, cfg.facts.qq_points);
    } else {
        const PricePath p = simulate(cfg.sim, cfg.horizon, cfg.seed).paths.at(cfg.facts.book);
        rep = facts_from_returns(p.returns(), {}, cfg.facts.max_lag, cfg.facts.qq_points);
    }
    auto j = open_out(cfg, "facts.json");
    write_facts_json(j, rep, cfg.seed);
    auto a = open_out(cfg, "facts_acf.csv");
    write_facts_acf_csv(a, rep, cfg.seed);
    auto q = open_out(cfg, "facts_qq.csv");
    write_facts_qq_csv(q, rep, cfg.seed);
    std::cout << "facts: n=" << rep.n << " excess kurtosis " << rep.return_moments.excess_kurtosis << " (se "
              << rep.kurtosis_se << ")\n";
    return 0;
}

int cmd_calibrate(const Common& c, const std::vector<std::string>& inputs, bool synthetic) {
    const RunConfig cfg = load(c);
    std::vector<double> emp;
    if (synthetic) {
        const Theta truth{cfg.sim.lattice.D_alpha, cfg.sim.books[0].nu, cfg.sim.lattice.alpha};
        emp = simulate_returns(cfg.sim, truth, cfg.calibration.setup.n_returns, derive_seed(cfg.seed, {0xDA7A}),
                               cfg.calibration.setup.book);
    } else {
        const std::vector<std::string> files = inputs.empty() ? cfg.paths.empirical : inputs;
        if (files.empty()) throw ConfigError("calibrate needs an empirical input or --synthetic");
        emp = returns_of(read_series(files.front(), cfg.calibration.setup.book));
    }
    const CalibrationResult r = calibrate(emp, cfg.calibration, cfg.seed);
    auto j = open_out(cfg, "calibration.json");
    write_calibration_json(j, r);
    auto t = open_out(cfg, "trace.csv");
    write_trace_csv(t, r);
    std::cout << "calibrate: D_alpha=" << r.theta_hat[0] << " nu=" << r.theta_hat[1] << " alpha=" << r.theta_hat[2]
              << " objective=" << r.objective << '\n';
    if (!r.warning.empty()) std::cerr << "lobsim: warning: " << r.warning << '\n';
    return 0;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON run configuration");
    sub->add_option("--seed", c.seed, "master seed (overrides the config)");
    sub->add_option("--out-dir", c.out_dir, "output directory (overrides the config)");
    sub->add_flag("--uniform", c.uniform, "constant time steps instead of exponential clocks");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled fractional order book simulator and analysis toolkit"};
    app.require_subcommand(1);

    Common common;
    std::string null_case;
    std::vector<std::string> inputs;
    bool synthetic = false;

    auto* sim = app.add_subcommand("simulate", "simulate coupled price paths");
    auto* epps = app.add_subcommand("epps", "Epps curve and power spectrum");
    auto* impact = app.add_subcommand("impact", "price impact of shocks of size Q");
    auto* ingest = app.add_subcommand("ingest", "clean and compact TAQ files");
    auto* facts = app.add_subcommand("facts", "stylised facts of a price series");
    auto* calib = app.add_subcommand("calibrate", "calibrate (D_alpha, nu, alpha)");
    for (auto* s : {sim, epps, impact, ingest, facts, calib}) add_common(s, common);
    epps->add_option("--null", null_case, "null case: brownian | identical");
    for (auto* s : {epps, ingest, facts, calib}) s->add_option("inputs", inputs, "input files");
    calib->add_flag("--synthetic", synthetic, "calibrate against data simulated at the config's parameters");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*sim) return cmd_simulate(common);
        if (*epps) return cmd_epps(common, null_case, inputs);
        if (*impact) return cmd_impact(common);
        if (*ingest) return cmd_ingest(common, inputs);
        if (*facts) return cmd_facts(common, inputs);
        if (*calib) return cmd_calibrate(common, inputs, synthetic);
    } catch (const std::exception& e) {
        std::cerr << "lobsim: error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
