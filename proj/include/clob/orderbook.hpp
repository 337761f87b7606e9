#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "clob/lattice.hpp"

namespace clob {

struct BookParams {
    double lambda = 1.0;  ///< source intensity
    double mu = 0.1;      ///< source rate (1 / log-price^2)
    double nu = 14.0;     ///< cancellation rate
    double p0 = 230.0;    ///< initial mid-price

    void validate() const;
};

/// Signed order density over the lattice: bids positive below the price,
/// asks negative above it.
struct BookState {
    std::vector<double> phi;
    double price = 0.0;
    BookParams params;
};

/// Order volume injected into a book at a given time, centred at
/// `location` relative to the book's price at injection.
struct Shock {
    double size = 0.0;
    double location = 0.0;
    double time = 0.0;
};

/// Lit source profile g(y) = -lambda mu y exp(-mu y^2).
inline double lit_profile(double y, double lambda, double mu) {
    return -lambda * mu * y * std::exp(-mu * y * y);
}

/// s(x) = g(x - price) at every lattice point.
std::vector<double> source_term(std::span<const double> x, double price, double lambda, double mu);

/// Shape of the pairs-trader coupling.
enum class CouplingForm {
    /// Printed piecewise form: g(y) dp on one side of the price and g(y / dp)
    /// on the other. Overshoots and drifts upward; kept for comparison.
    Literal,
    /// Buy/sell symmetric, volume-conserving form: g(y) dp on the pressure
    /// side and dp^2 g(dp y) on the other, mirrored with a sign flip for
    /// dp < 0. Pulls each price toward the other.
    Balanced,
};

/// Pairs-trader coupling G(x) for a book at `p_own` watching a book at
/// `p_other`, with y = x - p_own and dp = p_own - p_other. Vanishes
/// identically when |dp| < eps_p.
std::vector<double> coupling_term(std::span<const double> x, double p_own, double p_other,
                                  double lambda, double mu, double eps_p,
                                  CouplingForm form = CouplingForm::Balanced);

/// Gaussian bump with standard deviation `width` and lattice integral
/// (sum * dx) equal to `volume`, centred at `centre`.
std::vector<double> shock_profile(const Lattice& lattice, double centre, double volume,
                                  double width);

/// Adds the shock bump (width = lattice dx) at state.price + shock.location.
void apply_shock(BookState& state, const Lattice& lattice, const Shock& shock);

struct PriceExtraction {
    double price = 0.0;
    std::size_t crossings = 0;  ///< number of sign changes seen; > 1 is flagged
};

/// Zero crossing of phi nearest to `previous`, found by linear
/// interpolation between the bracketing lattice points. Throws
/// DomainError("book one-sided") when phi has no sign change.
PriceExtraction extract_price(std::span<const double> phi, const Lattice& lattice,
                              double previous);

/// Lattice mass sum(phi) * dx.
double total_mass(std::span<const double> phi, double dx);

}  // namespace clob
