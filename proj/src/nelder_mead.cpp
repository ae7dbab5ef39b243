#include "strusr/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace strusr {

SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& objective, std::vector<double> x0,
                          std::span<const double> steps, std::size_t max_evaluations, double tolerance)
{
    const std::size_t n = x0.size();
    if (steps.size() != n) throw std::invalid_argument("nelder_mead: one step per coordinate required");
    SimplexResult best{x0, 0.0, 0};
    if (max_evaluations == 0) return best;

    std::size_t evals = 0;
    auto f = [&](const std::vector<double>& x) {
        ++evals;
        const double v = objective(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    best.value = f(x0);
    if (n == 0) {
        best.evaluations = evals;
        return best;
    }

    std::vector<std::vector<double>> pts{x0};
    std::vector<double> vals{best.value};
    for (std::size_t i = 0; i < n && evals < max_evaluations; ++i) {
        std::vector<double> x = x0;
        x[i] += steps[i];
        pts.push_back(x);
        vals.push_back(f(x));
    }
    std::vector<std::size_t> order(pts.size());
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    auto affine = [&](std::vector<double>& out, double a, const std::vector<double>& p, double b,
                      const std::vector<double>& q) {
        for (std::size_t k = 0; k < n; ++k) out[k] = a * p[k] + b * q[k];
    };

    while (pts.size() == n + 1 && evals < max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t lo = order.front(), hi = order.back(), second = order[n - 1];
        if (std::isfinite(vals[hi]) && vals[hi] - vals[lo] <= tolerance) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == hi) continue;
            for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);
        }
        affine(xr, 2.0, centroid, -1.0, pts[hi]);
        const double fr = f(xr);
        if (fr < vals[lo]) {
            if (evals >= max_evaluations) {
                pts[hi] = xr;
                vals[hi] = fr;
                break;
            }
            affine(xe, 3.0, centroid, -2.0, pts[hi]);
            const double fe = f(xe);
            if (fe < fr) {
                pts[hi] = xe;
                vals[hi] = fe;
            } else {
                pts[hi] = xr;
                vals[hi] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[hi] = xr;
            vals[hi] = fr;
            continue;
        }
        if (evals >= max_evaluations) break;
        // outside or inside contraction
        const bool outside = fr < vals[hi];
        if (outside) {
            affine(xc, 0.5, centroid, 0.5, xr);
        } else {
            affine(xc, 0.5, centroid, 0.5, pts[hi]);
        }
        const double fc = f(xc);
        if (fc < (outside ? fr : vals[hi])) {
            pts[hi] = xc;
            vals[hi] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n && evals < max_evaluations; ++i) {
            if (i == lo) continue;
            affine(pts[i], 0.5, pts[lo], 0.5, pts[i]);
            vals[i] = f(pts[i]);
        }
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (vals[i] < best.value) {
            best.value = vals[i];
            best.x = pts[i];
        }
    }
    best.evaluations = evals;
    return best;
}

}  // namespace strusr
