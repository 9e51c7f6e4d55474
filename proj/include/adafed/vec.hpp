#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace adafed {

// Flat parameter/gradient vector. All model state and every aggregation
// operation speak this type; layout conventions live with the model code.
using ParamVector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale_inplace(std::span<double> x, double alpha) {
    for (double& v : x) v *= alpha;
}

inline bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

inline ParamVector scaled(std::span<const double> x, double alpha) {
    ParamVector out(x.begin(), x.end());
    scale_inplace(out, alpha);
    return out;
}

}  // namespace adafed
