#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ambientloc/types.hpp"

namespace ambientloc {

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "euclidean_distance: fingerprint length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

inline double euclidean_distance(const Fingerprint& a, const Fingerprint& b) {
    return euclidean_distance(std::span<const double>(a.values),
                              std::span<const double>(b.values));
}

/// Sample Pearson correlation. A vector with zero variance carries no shape
/// information: the similarity is defined as 0 (non-match).
inline double pearson_similarity(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "pearson_similarity: fingerprint length mismatch");
    require(a.size() >= 2, "pearson_similarity: need at least 2 entries");
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double da = a[i] - mean_a;
        double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0)
        return 0.0;
    double r = cov / std::sqrt(var_a * var_b);
    return std::clamp(r, -1.0, 1.0);
}

inline double pearson_similarity(const Fingerprint& a, const Fingerprint& b) {
    return pearson_similarity(std::span<const double>(a.values),
                              std::span<const double>(b.values));
}

/// Hyperbolic fingerprint: all pairwise ratios (f_i+eps)/(f_j+eps), i<j, in
/// fixed lexicographic pair order. Cancels a multiplicative device gain but
/// not an additive bias. Output width is n(n-1)/2. With use_log the entries
/// are the logarithms of those ratios.
inline std::vector<double> ratio_transform(std::span<const double> values, double epsilon,
                                           bool use_log = false) {
    require(values.size() >= 2, "ratio_transform: need at least 2 entries");
    require(epsilon > 0.0, "ratio_transform: epsilon must be positive");
    std::vector<double> out;
    out.reserve(values.size() * (values.size() - 1) / 2);
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            double r = (values[i] + epsilon) / (values[j] + epsilon);
            out.push_back(use_log ? std::log(r) : r);
        }
    }
    return out;
}

inline Fingerprint ratio_transform(const Fingerprint& f, double epsilon, bool use_log = false) {
    Fingerprint out;
    out.values = ratio_transform(std::span<const double>(f.values), epsilon, use_log);
    out.location = f.location;
    return out;
}

}
