#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace nlgcl {

/// log(sum(exp(x))) with the max subtracted first.
inline double logsumexp(std::span<const double> x) {
    if (x.empty()) {
        return -std::numeric_limits<double>::infinity();
    }
    const double hi = *std::max_element(x.begin(), x.end());
    if (!std::isfinite(hi)) {
        return hi;
    }
    double acc = 0.0;
    for (double v : x) {
        acc += std::exp(v - hi);
    }
    return hi + std::log(acc);
}

/// ln(1 + e^z) without overflow for large |z|.
inline double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace nlgcl
