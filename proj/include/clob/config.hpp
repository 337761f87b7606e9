#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clob/calibration.hpp"
#include "clob/nufft.hpp"
#include "clob/simulator.hpp"
#include "clob/taq.hpp"

namespace clob {

struct EppsSettings {
    std::vector<double> scales;   ///< empty: 16 log-spaced scales from mean_dt / 4 to horizon / 20
    std::size_t reps = 10;
    int spectrum_N = 256;
    NufftOptions nufft;
};

struct ImpactSettings {
    std::vector<double> Q{0.0, 0.005, 0.01, 0.02, 0.04};
    ImpactOptions options;
};

struct FactsSettings {
    std::size_t max_lag = 50;
    std::size_t qq_points = 200;
    std::size_t book = 0;
};

struct PathSettings {
    std::string out_dir = "out";
    std::vector<std::string> empirical;  ///< cleaned TAQ CSVs or price-path CSVs
};

/// Everything one CLI run needs. Loaded from JSON; model keys use the
/// parameter table names (L, M, r, D_alpha, nu, alpha, p(0), lambda, mu).
struct RunConfig {
    std::uint64_t seed = 1;
    double horizon = 200.0;
    std::size_t snapshot_every = 0;
    SimConfig sim = table1_config();
    EppsSettings epps;
    ImpactSettings impact;
    FactsSettings facts;
    CleanOptions ingest;
    CalibrationOptions calibration;
    PathSettings paths;

    /// Runs every module-level validation; throws ConfigError.
    void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
/// Canonical JSON form of a configuration (round-trips through parse).
std::string dump_run_config(const RunConfig& config);

/// Default averaging scales for an Epps sweep.
std::vector<double> default_epps_scales(double mean_dt, double horizon, std::size_t count = 16);

}  // namespace clob
