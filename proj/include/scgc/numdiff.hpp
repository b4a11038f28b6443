#pragma once

#include <functional>
#include <span>
#include <vector>

namespace scgc {

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central-difference gradient (f(p + h e_k) - f(p - h e_k)) / 2h for every
/// coordinate k. Throws if any evaluation is non-finite.
std::vector<double> finite_difference_gradient(const ScalarFunction& f, std::span<const double> params,
                                               double h = 1e-5);

/// ||a - b|| / max(||a||, ||b||), or 0 when both vectors vanish.
double relative_error(std::span<const double> a, std::span<const double> b);

}  // namespace scgc
