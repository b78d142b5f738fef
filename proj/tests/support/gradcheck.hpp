#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>

namespace gradcheck {

/// Relative error with a floor on the denominator so entries whose true
/// gradient is ~0 are judged against finite-difference noise, not zero.
inline double relative_error(double analytic, double numeric, double floor = 1e-5) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct Report {
    double max_error = 0.0;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
};

/// Central differences of `loss` with respect to each entry of `values`
/// (perturbed in place and restored), compared against `analytic`.
inline Report check(std::span<double> values, std::span<const double> analytic, const std::function<double()>& loss,
                    double eps = 1e-6) {
    Report r;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + eps;
        const double up = loss();
        values[i] = saved - eps;
        const double down = loss();
        values[i] = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double err = relative_error(analytic[i], numeric);
        if (err > r.max_error) {
            r.max_error = err;
            r.worst_index = i;
        }
        ++r.checked;
    }
    return r;
}

}  // namespace gradcheck
