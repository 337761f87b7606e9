#pragma once

#include <functional>
#include <vector>

namespace clob {

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t evaluations = 0;
};

/// Plain Nelder-Mead minimiser with the standard coefficients
/// (1, 2, 0.5, 0.5). Stops after `max_evaluations` or when the simplex
/// objective spread drops below `ftol`.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, double step, std::size_t max_evaluations,
                             double ftol = 1e-10);

}  // namespace clob
