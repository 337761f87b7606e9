#include "clob/optim.hpp"

#include <algorithm>
#include <numeric>

namespace clob {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, double step, std::size_t max_evaluations,
                             double ftol) {
    const std::size_t d = x0.size();
    std::vector<std::vector<double>> pts(d + 1, x0);
    std::vector<double> fv(d + 1);
    std::size_t evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return f(x);
    };
    for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step;
    for (std::size_t i = 0; i <= d; ++i) fv[i] = eval(pts[i]);

    std::vector<std::size_t> order(d + 1);
    auto affine = [d](const std::vector<double>& a, const std::vector<double>& b, double t) {
        std::vector<double> out(d);
        for (std::size_t i = 0; i < d; ++i) out[i] = a[i] + t * (b[i] - a[i]);
        return out;
    };
    while (evals < max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];
        if (fv[worst] - fv[best] < ftol) break;

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i)
            if (i != worst)
                for (std::size_t j = 0; j < d; ++j) centroid[j] += pts[i][j] / static_cast<double>(d);

        const auto xr = affine(centroid, pts[worst], -1.0);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            const auto xe = affine(centroid, pts[worst], -2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                fv[worst] = fe;
            } else {
                pts[worst] = xr;
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            pts[worst] = xr;
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            const auto xc = affine(centroid, outside ? xr : pts[worst], 0.5);
            const double fc = eval(xc);
            if (fc < std::min(fr, fv[worst])) {
                pts[worst] = xc;
                fv[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= d; ++i) {
                    if (i == best) continue;
                    pts[i] = affine(pts[best], pts[i], 0.5);
                    fv[i] = eval(pts[i]);
                }
            }
        }
    }
    const auto it = std::min_element(fv.begin(), fv.end());
    return {pts[static_cast<std::size_t>(it - fv.begin())], *it, evals};
}

}  // namespace clob
