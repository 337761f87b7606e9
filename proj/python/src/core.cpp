#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "clob/calibration.hpp"
#include "clob/config.hpp"
#include "clob/errors.hpp"
#include "clob/facts.hpp"
#include "clob/kernel.hpp"
#include "clob/nufft.hpp"
#include "clob/simulator.hpp"
#include "clob/taq.hpp"

namespace py = pybind11;
using namespace clob;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    return std::vector<double>(a.data(), a.data() + a.size());
}

RunConfig resolve(const std::optional<std::string>& json_text) {
    return json_text ? parse_run_config(*json_text) : parse_run_config("{}");
}

py::dict moments_dict(const MomentVector& m) {
    py::dict d;
    for (std::size_t i = 0; i < kMomentCount; ++i) d[MomentVector::names()[i]] = m[i];
    return d;
}

py::tuple theta_tuple(const Theta& t) { return py::make_tuple(t[0], t[1], t[2]); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Coupled limit order book simulator, Fourier correlation and calibration";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);

    m.def("base_dt", [](double D, double alpha, double r, double dx) {
        LatticeConfig lc;
        lc.D_alpha = D;
        lc.alpha = alpha;
        lc.r = r;
        lc.L = dx * lc.M;
        return base_dt(lc);
    }, py::arg("D_alpha"), py::arg("alpha"), py::arg("r") = 0.5, py::arg("dx") = 0.5);

    m.def("jump_length", &jump_length, py::arg("dt"), py::arg("D_alpha"), py::arg("alpha"), py::arg("r"));

    m.def("memory_kernel", [](double alpha, std::size_t N) { return to_array(memory_kernel(alpha, N)); },
          py::arg("alpha"), py::arg("N"));

    m.def("sibuya", [](double alpha, std::size_t N) {
        const SibuyaTable s = sibuya(alpha, N);
        return py::make_tuple(to_array(s.psi), to_array(s.phi));
    }, py::arg("alpha"), py::arg("N"));

    m.def("normalize_config", [](const std::string& text) { return dump_run_config(parse_run_config(text)); },
          py::arg("json_text"), "Validates a run configuration and returns its canonical JSON.");

    m.def("simulate", [](std::optional<std::string> config, std::optional<double> horizon,
                         std::optional<std::uint64_t> seed) {
        const RunConfig cfg = resolve(config);
        SimulationResult res;
        {
            py::gil_scoped_release release;
            res = simulate(cfg.sim, horizon.value_or(cfg.horizon), seed.value_or(cfg.seed));
        }
        py::list out;
        for (const PricePath& p : res.paths) out.append(py::make_tuple(to_array(p.t), to_array(p.p)));
        return out;
    }, py::arg("config") = py::none(), py::arg("horizon") = py::none(), py::arg("seed") = py::none(),
       "Returns one (t, p) pair of arrays per book.");

    m.def("nufft", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& t,
                      const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& v,
                      double T, int N, bool direct) {
        const std::vector<double> times = to_vector(t);
        const std::vector<std::complex<double>> vals(v.data(), v.data() + v.size());
        const FourierCoefficients c = direct ? direct_nudft(times, vals, T, N) : fgg_nufft(times, vals, T, N);
        return py::array_t<std::complex<double>>(static_cast<py::ssize_t>(c.c.size()), c.c.data());
    }, py::arg("times"), py::arg("values"), py::arg("T"), py::arg("N"), py::arg("direct") = false,
       "Type-1 coefficients for k = -N..N.");

    m.def("epps_curve", [](std::optional<std::string> config, std::vector<double> scales, std::size_t reps,
                           std::optional<std::uint64_t> seed) {
        const RunConfig cfg = resolve(config);
        if (scales.empty()) scales = default_epps_scales(cfg.sim.mean_dt(), cfg.horizon);
        EppsCurve c;
        {
            py::gil_scoped_release release;
            c = simulated_epps_curve(cfg.sim, cfg.horizon, scales, reps, seed.value_or(cfg.seed),
                                     cfg.epps.nufft);
        }
        return py::make_tuple(to_array(c.scales), to_array(c.rho), to_array(c.std_error));
    }, py::arg("config") = py::none(), py::arg("scales") = std::vector<double>{}, py::arg("reps") = 10,
       py::arg("seed") = py::none());

    m.def("impact", [](std::optional<std::string> config, std::vector<double> Q, std::optional<std::uint64_t> seed) {
        const RunConfig cfg = resolve(config);
        if (Q.empty()) Q = cfg.impact.Q;
        std::vector<ImpactRow> rows;
        {
            py::gil_scoped_release release;
            rows = measure_impact(cfg.sim, Q, seed.value_or(cfg.seed), cfg.impact.options);
        }
        std::vector<double> dp;
        for (const ImpactRow& r : rows) dp.push_back(r.dp);
        return py::make_tuple(to_array(Q), to_array(dp));
    }, py::arg("config") = py::none(), py::arg("Q") = std::vector<double>{}, py::arg("seed") = py::none());

    m.def("facts", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& returns,
                      std::size_t max_lag, std::size_t qq_points) {
        const FactsReport f = facts_from_returns(to_vector(returns), {}, max_lag, qq_points);
        py::dict d;
        d["n"] = f.n;
        d["mean"] = f.return_moments.mean;
        d["std"] = f.return_moments.std;
        d["skew"] = f.return_moments.skew;
        d["excess_kurtosis"] = f.return_moments.excess_kurtosis;
        d["kurtosis_se"] = f.kurtosis_se;
        d["acf_band"] = f.acf_band;
        d["acf_returns"] = to_array(f.acf_returns);
        d["acf_abs_returns"] = to_array(f.acf_abs_returns);
        d["acf_orderflow"] = to_array(f.acf_orderflow);
        return d;
    }, py::arg("returns"), py::arg("max_lag") = 50, py::arg("qq_points") = 200,
       "Stylised facts of a return series; order flow from the tick rule.");

    m.def("moments", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& returns) {
        const std::vector<double> r = to_vector(returns);
        return moments_dict(moments(r, r));
    }, py::arg("returns"));

    m.def("ingest", [](const std::string& csv_text, std::optional<std::string> config) {
        const RunConfig cfg = resolve(config);
        std::istringstream in(csv_text);
        const TaqTable t = read_taq_csv(in);
        CleanReport rep;
        const auto out = compact(clean(t.records, cfg.ingest, &rep));
        std::ostringstream os;
        write_taq_csv(os, out);
        py::dict d;
        d["csv"] = os.str();
        d["input"] = rep.input;
        d["kept"] = out.size();
        d["rejects"] = t.rejects.size();
        d["dropped_trade_types"] = rep.dropped_trade_types;
        return d;
    }, py::arg("csv_text"), py::arg("config") = py::none(), "Clean and compact a TAQ CSV document.");

    m.def("simulate_returns", [](std::optional<std::string> config, std::array<double, 3> theta, std::size_t n,
                                 std::uint64_t seed) {
        const RunConfig cfg = resolve(config);
        std::vector<double> r;
        {
            py::gil_scoped_release release;
            r = simulate_returns(cfg.calibration.setup.base, theta, n, seed);
        }
        return to_array(r);
    }, py::arg("config") = py::none(), py::arg("theta") = std::array<double, 3>{0.27, 12.55, 0.57},
       py::arg("n") = 1000, py::arg("seed") = 1);

    m.def("calibrate", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& returns,
                          std::optional<std::string> config, std::optional<std::uint64_t> seed) {
        const RunConfig cfg = resolve(config);
        const std::vector<double> r = to_vector(returns);
        CalibrationResult res;
        {
            py::gil_scoped_release release;
            res = calibrate(r, cfg.calibration, seed.value_or(cfg.seed));
        }
        py::dict d;
        d["theta_hat"] = theta_tuple(res.theta_hat);
        d["ci_lower"] = theta_tuple(res.ci_lower);
        d["ci_upper"] = theta_tuple(res.ci_upper);
        d["objective"] = res.objective;
        d["initial_simplex_mean"] = res.initial_mean;
        d["objective_trace"] = to_array(res.objective_trace);
        d["evaluations"] = res.evaluations;
        d["identity_weight"] = res.identity_weight;
        d["empirical_moments"] = moments_dict(res.empirical_moments);
        d["fitted_moments"] = moments_dict(res.fitted_moments);
        d["warning"] = res.warning;
        return d;
    }, py::arg("returns"), py::arg("config") = py::none(), py::arg("seed") = py::none());

    m.def("nmta", [](const std::function<double(std::array<double, 3>)>& f, std::array<double, 3> theta0,
                     std::size_t iterations, std::uint64_t seed) {
        NmtaOptions o;
        o.iterations = iterations;
        const NmtaResult r = nmta([&](const Theta& t) { return f(t); }, theta0, Bounds{}, o, seed);
        return py::make_tuple(theta_tuple(r.theta), r.value, to_array(r.trace));
    }, py::arg("objective"), py::arg("theta0"), py::arg("iterations") = 100, py::arg("seed") = 1,
       "Minimise a Python objective over the default (D_alpha, nu, alpha) bounds.");
}
