#include "clob/orderbook.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "clob/errors.hpp"

namespace clob {

void BookParams::validate() const {
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    if (!(mu > 0.0)) throw ConfigError("mu must be positive");
    if (!(nu >= 0.0)) throw ConfigError("nu must be non-negative");
    if (!std::isfinite(p0)) throw ConfigError("p0 must be finite");
}

std::vector<double> source_term(std::span<const double> x, double price, double lambda, double mu) {
    std::vector<double> s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) s[i] = lit_profile(x[i] - price, lambda, mu);
    return s;
}

std::vector<double> coupling_term(std::span<const double> x, double p_own, double p_other,
                                  double lambda, double mu, double eps_p, CouplingForm form) {
    std::vector<double> G(x.size(), 0.0);
    const double dp = p_own - p_other;
    if (std::abs(dp) < eps_p) return G;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double y = x[i] - p_own;
        if (form == CouplingForm::Literal) {
            // the divided arm sits below the price when dp > 0 and above it otherwise
            const bool divided_arm = dp > 0.0 ? (y <= 0.0) : (y > 0.0);
            G[i] = divided_arm ? lit_profile(y / dp, lambda, mu) : lit_profile(y, lambda, mu) * dp;
        } else {
            // G(y; dp) for dp > 0, and -G(-y; |dp|) for dp < 0
            const double d = std::abs(dp);
            const double sign = dp > 0.0 ? 1.0 : -1.0;
            const double yy = sign * y;
            const double v = yy > 0.0 ? lit_profile(yy, lambda, mu) * d
                                      : d * d * lit_profile(d * yy, lambda, mu);
            G[i] = sign * v;
        }
    }
    return G;
}

std::vector<double> shock_profile(const Lattice& lattice, double centre, double volume,
                                  double width) {
    std::vector<double> bump(lattice.size(), 0.0);
    if (volume == 0.0) return bump;
    double norm = 0.0;
    for (std::size_t i = 1; i + 1 < lattice.size(); ++i) {
        const double z = (lattice.x(i) - centre) / width;
        bump[i] = std::exp(-0.5 * z * z);
        norm += bump[i];
    }
    if (!(norm > 0.0)) throw DomainError("shock centre too far outside the lattice");
    const double scale = volume / (norm * lattice.dx());
    for (double& b : bump) b *= scale;
    return bump;
}

void apply_shock(BookState& state, const Lattice& lattice, const Shock& shock) {
    const double centre = state.price + shock.location;
    if (!lattice.contains(centre))
        throw DomainError("shock location " + std::to_string(centre) + " outside the lattice");
    if (shock.size == 0.0) return;
    const std::vector<double> bump = shock_profile(lattice, centre, shock.size, lattice.dx());
    for (std::size_t i = 0; i < bump.size(); ++i) state.phi[i] += bump[i];
}

PriceExtraction extract_price(std::span<const double> phi, const Lattice& lattice,
                              double previous) {
    PriceExtraction out;
    double best_distance = std::numeric_limits<double>::infinity();
    // previous nonzero sample; exact zeros between opposite signs are skipped
    std::size_t last = phi.size();
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (phi[i] == 0.0) continue;
        if (last != phi.size() && ((phi[last] > 0.0) != (phi[i] > 0.0))) {
            double root;
            if (last + 1 == i) {
                const double w = phi[last] / (phi[last] - phi[i]);
                root = lattice.x(last) + w * (lattice.x(i) - lattice.x(last));
            } else {
                root = 0.5 * (lattice.x(last + 1) + lattice.x(i - 1));
            }
            ++out.crossings;
            const double d = std::abs(root - previous);
            if (d < best_distance) {
                best_distance = d;
                out.price = root;
            }
        }
        last = i;
    }
    if (out.crossings == 0) throw DomainError("book one-sided: density has no sign change");
    return out;
}

double total_mass(std::span<const double> phi, double dx) {
    double m = 0.0;
    for (double v : phi) m += v;
    return m * dx;
}

}  // namespace clob
