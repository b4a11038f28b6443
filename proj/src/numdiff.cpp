#include "scgc/numdiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace scgc {

std::vector<double> finite_difference_gradient(const ScalarFunction& f, std::span<const double> params,
                                               double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_difference_gradient: step must be positive");
    std::vector<double> point(params.begin(), params.end());
    std::vector<double> grad(point.size());
    for (std::size_t k = 0; k < point.size(); ++k) {
        const double original = point[k];
        point[k] = original + h;
        const double forward = f(point);
        point[k] = original - h;
        const double backward = f(point);
        point[k] = original;
        if (!std::isfinite(forward) || !std::isfinite(backward)) {
            throw std::domain_error("finite_difference_gradient: non-finite evaluation at coordinate " +
                                    std::to_string(k));
        }
        grad[k] = (forward - backward) / (2.0 * h);
    }
    return grad;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("relative_error: length mismatch");
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double scale = std::sqrt(std::max(na, nb));
    if (scale == 0.0) return 0.0;
    return std::sqrt(diff) / scale;
}

}  // namespace scgc
