#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "clob/simulator.hpp"

namespace clob {

inline constexpr std::size_t kMomentCount = 9;

/// mean, std, excess_kurtosis, ks, hurst, gph_abs, adf, garch_persistence, hill
struct MomentVector {
    std::array<double, kMomentCount> values{};

    static const std::array<const char*, kMomentCount>& names();
    double operator[](std::size_t i) const { return values[i]; }
};

/// Moment battery of `returns`; the KS entry compares against `reference`
/// (pass the same series for the empirical vector itself).
MomentVector moments(std::span<const double> returns, std::span<const double> reference);

struct BootstrapOptions {
    std::size_t block = 100;
    std::size_t resamples = 1000;
};

struct WeightMatrix {
    Eigen::MatrixXd W;
    bool identity_fallback = false;
};

/// Inverse moving-block-bootstrap covariance of the empirical moments,
/// identity when the covariance is not safely invertible.
WeightMatrix bootstrap_weight(std::span<const double> returns, std::uint64_t seed,
                              const BootstrapOptions& options = {});

/// (D_alpha, nu, alpha)
using Theta = std::array<double, 3>;

struct Bounds {
    Theta lower{1e-3, 0.0, 0.4};
    Theta upper{10.0, 100.0, 1.0};

    Theta project(const Theta& theta) const;
    bool contains(const Theta& theta) const;
};

/// g'Wg.
double quadratic_form(const Eigen::VectorXd& g, const Eigen::MatrixXd& W);

/// Returns of book `book` over its first `n` post-burn-in events.
std::vector<double> simulate_returns(const SimConfig& base, const Theta& theta, std::size_t n,
                                     std::uint64_t seed, std::size_t book = 0);

SimConfig with_theta(SimConfig base, const Theta& theta);

struct SmdSetup {
    SimConfig base = table2_config();
    std::size_t n_returns = 1000;
    std::size_t book = 0;
    std::size_t replications = 5;
};

/// Simulated minimum distance objective. Replication i always uses the seed
/// derived from (seed, i), so the value is a deterministic function of theta.
class SmdObjective {
public:
    SmdObjective(SmdSetup setup, std::vector<double> empirical_returns, Eigen::MatrixXd W,
                 std::uint64_t seed, Bounds bounds = {});

    double operator()(const Theta& theta) const;
    MomentVector simulated_moments(const Theta& theta) const;
    const MomentVector& empirical_moments() const { return empirical_; }
    std::size_t evaluations() const { return evaluations_; }

private:
    SmdSetup setup_;
    std::vector<double> empirical_returns_;
    MomentVector empirical_;
    Eigen::MatrixXd W_;
    std::uint64_t seed_;
    Bounds bounds_;
    mutable std::size_t evaluations_ = 0;
};

/// g'Wg with g the difference of averaged moments, for callers that hold
/// the replicated moment vectors themselves.
double smd_distance(std::span<const MomentVector> simulated, const MomentVector& empirical,
                    const Eigen::MatrixXd& W);

using Objective = std::function<double(const Theta&)>;

struct NmtaOptions {
    std::size_t iterations = 100;
    double p_nm = 0.5;
    double tau_decay = 0.85;
    double tau0 = -1.0;  ///< negative: objective spread of the initial simplex
    Theta initial_step{0.25, 0.25, 0.25};  ///< relative to |theta0|
};

struct NmtaResult {
    Theta theta{};
    double value = 0.0;
    std::vector<double> trace;  ///< best objective after each iteration
    double initial_mean = 0.0;  ///< mean objective over the initial simplex
    std::size_t evaluations = 0;
    std::size_t nm_moves = 0;
    std::size_t ta_moves = 0;
    std::size_t ta_accepted = 0;
};

/// Nelder-Mead / Threshold-Accepting hybrid over a 4-vertex simplex. Every
/// candidate is projected into `bounds` before evaluation.
NmtaResult nmta(const Objective& objective, const Theta& theta0, const Bounds& bounds,
                const NmtaOptions& options, std::uint64_t seed);

struct ConfidenceIntervals {
    Theta lower{};
    Theta upper{};
    Theta half_width{};
    Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();
    std::string warning;
};

struct HessianOptions {
    double relative_step = 0.1;
    double min_step = 1e-3;
};

/// theta_hat +- 1.96 SE, SE = sqrt(diag(H^-1)) from a central-difference
/// Hessian. Indefinite Hessians use absolute eigenvalues; singular ones
/// give infinite half-widths. Both set `warning`.
ConfidenceIntervals confidence_intervals(const Objective& objective, const Theta& theta_hat,
                                         const Bounds& bounds, const HessianOptions& options = {});

struct CalibrationResult {
    Theta theta_hat{};
    Theta ci_lower{};
    Theta ci_upper{};
    double objective = 0.0;
    double initial_mean = 0.0;
    std::vector<double> objective_trace;
    std::size_t replications = 0;
    std::size_t evaluations = 0;
    std::uint64_t seed = 0;
    MomentVector empirical_moments;
    MomentVector fitted_moments;
    bool identity_weight = false;
    std::string warning;
};

struct CalibrationOptions {
    SmdSetup setup;
    Bounds bounds;
    NmtaOptions nmta;
    HessianOptions hessian;
    BootstrapOptions bootstrap;
    Theta theta0{0.5, 14.0, 0.8};
};

/// Weight matrix, NMTA and intervals in one call.
CalibrationResult calibrate(std::span<const double> empirical_returns,
                            const CalibrationOptions& options, std::uint64_t seed);

void write_calibration_json(std::ostream& out, const CalibrationResult& result);
/// iteration,best_objective
void write_trace_csv(std::ostream& out, const CalibrationResult& result);

}  // namespace clob
