#pragma once

#include <optional>
#include <string>

#include "ambientloc/error.hpp"

namespace ambientloc {

enum class EngineKind { KNN, SVM, GP };
enum class Metric { Euclidean, Correlation };

/// How a query (and the map, for Ratio) is re-expressed before matching.
/// Basic compares raw normalized values, Ratio compares pairwise ratios, and
/// Correlation keeps raw values but ranks by Pearson similarity. The latter
/// two exist to survive device-to-device gain and offset differences.
enum class FingerprintTransform { Basic, Ratio, Correlation };
enum class SvmKernel { Linear, RBF };

inline const char* to_string(EngineKind e) {
    switch (e) {
    case EngineKind::KNN: return "knn";
    case EngineKind::SVM: return "svm";
    case EngineKind::GP: return "gp";
    }
    fail("unknown engine enum value");
}

inline EngineKind parse_engine(const std::string& s) {
    if (s == "knn") return EngineKind::KNN;
    if (s == "svm") return EngineKind::SVM;
    if (s == "gp") return EngineKind::GP;
    fail("unknown engine: '" + s + "' (expected knn|svm|gp)");
}

inline const char* to_string(Metric m) {
    return m == Metric::Euclidean ? "euclidean" : "correlation";
}

inline Metric parse_metric(const std::string& s) {
    if (s == "euclidean") return Metric::Euclidean;
    if (s == "correlation") return Metric::Correlation;
    fail("unknown metric: '" + s + "' (expected euclidean|correlation)");
}

inline const char* to_string(FingerprintTransform t) {
    switch (t) {
    case FingerprintTransform::Basic: return "basic";
    case FingerprintTransform::Ratio: return "ratio";
    case FingerprintTransform::Correlation: return "correlation";
    }
    fail("unknown transform enum value");
}

inline FingerprintTransform parse_transform(const std::string& s) {
    if (s == "basic") return FingerprintTransform::Basic;
    if (s == "ratio") return FingerprintTransform::Ratio;
    if (s == "correlation") return FingerprintTransform::Correlation;
    fail("unknown method: '" + s + "' (expected basic|ratio|correlation)");
}

inline const char* to_string(SvmKernel k) {
    return k == SvmKernel::Linear ? "linear" : "rbf";
}

inline SvmKernel parse_svm_kernel(const std::string& s) {
    if (s == "linear") return SvmKernel::Linear;
    if (s == "rbf") return SvmKernel::RBF;
    fail("unknown SVM kernel: '" + s + "' (expected linear|rbf)");
}

struct SvmParams {
    double c = 10.0;
    SvmKernel kernel = SvmKernel::Linear;
    double gamma = 1.0;  // RBF width
};

struct GpParams {
    double lengthscale = 0.5;       // in normalized-fingerprint space
    double signal_variance = 1.0;
    double noise_variance = 0.01;
    bool grid_search = false;       // optional leave-one-out refinement
};

struct EngineConfig {
    EngineKind engine = EngineKind::KNN;
    int k = 1;
    Metric metric = Metric::Euclidean;
    FingerprintTransform transform = FingerprintTransform::Basic;
    double ratio_epsilon = 1e-6;
    bool ratio_log = false;
    SvmParams svm;
    GpParams gp;

    void validate() const {
        require(k >= 1, "engine config: k must be >= 1");
        require(ratio_epsilon > 0.0, "engine config: ratio_epsilon must be positive");
        require(svm.c > 0.0, "engine config: svm.c must be positive");
        require(svm.gamma > 0.0, "engine config: svm.gamma must be positive");
        require(gp.lengthscale > 0.0, "engine config: gp.lengthscale must be positive");
        require(gp.signal_variance > 0.0, "engine config: gp.signal_variance must be positive");
        require(gp.noise_variance > 0.0, "engine config: gp.noise_variance must be positive");
    }
};

/// Result of one localization query. Classifier-style engines set
/// matched_grid_index and return that grid point's coordinates; regression
/// engines leave it unset.
struct LocalizationEstimate {
    double x = 0.0;
    double y = 0.0;
    std::optional<int> matched_grid_index;
    double score = 0.0;  // engine-specific: distance, similarity, votes, or posterior variance
    std::string environment_id;
};

}
