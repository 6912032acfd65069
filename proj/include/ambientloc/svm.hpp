#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "ambientloc/engine_config.hpp"
#include "ambientloc/types.hpp"

namespace ambientloc {

inline double svm_kernel(const SvmParams& params, std::span<const double> a,
                         std::span<const double> b) {
    if (params.kernel == SvmKernel::Linear) {
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            dot += a[i] * b[i];
        return dot;
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-params.gamma * d2);
}

/// Soft-margin binary SVM in dual form: decision(x) = sum_m coef_m * K(sv_m, x) + bias.
struct BinarySvm {
    std::vector<std::size_t> support_indices;  // into the training set it was fit on
    std::vector<double> coef;                  // alpha_i * y_i for each support vector
    double bias = 0.0;
};

namespace detail {

/// Sequential minimal optimization; deterministic working-set choice
/// (first point = first KKT violator in index order, second = max |E1-E2|).
inline BinarySvm smo_train(const std::vector<std::vector<double>>& x,
                           const std::vector<int>& y, const SvmParams& params) {
    const std::size_t n = x.size();
    require(n >= 2, "svm: need at least two training points");
    const double c = params.c;
    const double tol = 1e-9;

    std::vector<std::vector<double>> k(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            k[i][j] = k[j][i] = svm_kernel(params, x[i], x[j]);

    std::vector<double> alpha(n, 0.0);
    std::vector<double> err(n);  // E_i = f(x_i) - y_i, with f including the bias
    double bias = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        err[i] = -static_cast<double>(y[i]);

    auto violates_kkt = [&](std::size_t i) {
        double r = err[i] * y[i];  // y_i f(x_i) - 1
        return (r < -tol && alpha[i] < c) || (r > tol && alpha[i] > 0.0);
    };

    auto take_step = [&](std::size_t i1, std::size_t i2) -> bool {
        if (i1 == i2)
            return false;
        double a1 = alpha[i1], a2 = alpha[i2];
        int y1 = y[i1], y2 = y[i2];
        double e1 = err[i1], e2 = err[i2];
        double s = y1 * y2;
        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(c, c + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - c);
            hi = std::min(c, a1 + a2);
        }
        if (lo >= hi)
            return false;
        double eta = k[i1][i1] + k[i2][i2] - 2.0 * k[i1][i2];
        double a2_new;
        if (eta > 0.0) {
            a2_new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
        } else {
            // Degenerate direction: evaluate the objective at both ends.
            double f1 = y1 * (e1 + bias) - a1 * k[i1][i1] - s * a2 * k[i1][i2];
            double f2 = y2 * (e2 + bias) - s * a1 * k[i1][i2] - a2 * k[i2][i2];
            double l1 = a1 + s * (a2 - lo);
            double h1 = a1 + s * (a2 - hi);
            double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k[i1][i1] +
                            0.5 * lo * lo * k[i2][i2] + s * lo * l1 * k[i1][i2];
            double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k[i1][i1] +
                            0.5 * hi * hi * k[i2][i2] + s * hi * h1 * k[i1][i2];
            if (obj_lo < obj_hi - 1e-12)
                a2_new = lo;
            else if (obj_hi < obj_lo - 1e-12)
                a2_new = hi;
            else
                return false;
        }
        if (std::abs(a2_new - a2) < 1e-14 * (a2_new + a2 + 1e-14))
            return false;
        double a1_new = a1 + s * (a2 - a2_new);

        double d1 = y1 * (a1_new - a1);
        double d2 = y2 * (a2_new - a2);
        double b1 = bias - e1 - d1 * k[i1][i1] - d2 * k[i1][i2];
        double b2 = bias - e2 - d1 * k[i1][i2] - d2 * k[i2][i2];
        double bias_new;
        if (a1_new > tol && a1_new < c - tol)
            bias_new = b1;
        else if (a2_new > tol && a2_new < c - tol)
            bias_new = b2;
        else
            bias_new = 0.5 * (b1 + b2);

        for (std::size_t i = 0; i < n; ++i)
            err[i] += d1 * k[i1][i] + d2 * k[i2][i] + (bias_new - bias);
        alpha[i1] = a1_new;
        alpha[i2] = a2_new;
        bias = bias_new;
        return true;
    };

    const std::size_t max_sweeps = 200 + 50 * n;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        bool changed = false;
        for (std::size_t i1 = 0; i1 < n; ++i1) {
            if (!violates_kkt(i1))
                continue;
            // Partner with the largest error gap; fall back to index order.
            std::size_t best = i1;
            double best_gap = -1.0;
            for (std::size_t i2 = 0; i2 < n; ++i2) {
                if (i2 == i1)
                    continue;
                double gap = std::abs(err[i1] - err[i2]);
                if (gap > best_gap) {
                    best_gap = gap;
                    best = i2;
                }
            }
            if (take_step(i1, best)) {
                changed = true;
                continue;
            }
            for (std::size_t i2 = 0; i2 < n; ++i2) {
                if (i2 != i1 && take_step(i1, i2)) {
                    changed = true;
                    break;
                }
            }
        }
        if (!changed)
            break;
    }

    BinarySvm model;
    model.bias = bias;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > 0.0) {
            model.support_indices.push_back(i);
            model.coef.push_back(alpha[i] * y[i]);
        }
    }
    return model;
}

}  // namespace detail

/// One-vs-one multiclass SVM over integer labels.
struct MulticlassSvm {
    struct Pair {
        int pos_label = 0;  // the lower label; decision >= 0 votes for it
        int neg_label = 0;
        BinarySvm svm;
    };
    std::vector<std::vector<double>> train_x;
    std::vector<int> train_labels;
    std::vector<int> classes;  // sorted ascending
    std::vector<Pair> pairs;
    SvmParams params;

    double pair_decision(const Pair& p, std::span<const double> q) const {
        double d = p.svm.bias;
        for (std::size_t m = 0; m < p.svm.support_indices.size(); ++m)
            d += p.svm.coef[m] * svm_kernel(params, train_x[p.svm.support_indices[m]], q);
        return d;
    }

    int predict(std::span<const double> q) const {
        require(!pairs.empty(), "svm: model has no trained classifiers");
        require(q.size() == train_x.front().size(), "svm: query dimension mismatch");
        std::map<int, int> votes;
        for (const auto& p : pairs) {
            double d = pair_decision(p, q);
            votes[d >= 0.0 ? p.pos_label : p.neg_label] += 1;
        }
        int best_label = classes.front();
        int best_votes = -1;
        for (int label : classes) {  // ascending: vote ties resolve to the lowest label
            auto it = votes.find(label);
            int v = it == votes.end() ? 0 : it->second;
            if (v > best_votes) {
                best_votes = v;
                best_label = label;
            }
        }
        return best_label;
    }
};

inline MulticlassSvm svm_train_multiclass(std::vector<std::vector<double>> x,
                                          std::vector<int> labels, const SvmParams& params) {
    require(x.size() == labels.size(), "svm: sample/label count mismatch");
    MulticlassSvm model;
    model.params = params;
    model.classes = labels;
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                        model.classes.end());
    require(model.classes.size() >= 2, "svm: need at least two distinct classes");
    model.train_x = std::move(x);
    model.train_labels = std::move(labels);

    for (std::size_t a = 0; a < model.classes.size(); ++a) {
        for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
            int pos = model.classes[a], neg = model.classes[b];
            std::vector<std::vector<double>> sub_x;
            std::vector<int> sub_y;
            std::vector<std::size_t> sub_index;
            for (std::size_t i = 0; i < model.train_x.size(); ++i) {
                if (model.train_labels[i] == pos || model.train_labels[i] == neg) {
                    sub_x.push_back(model.train_x[i]);
                    sub_y.push_back(model.train_labels[i] == pos ? 1 : -1);
                    sub_index.push_back(i);
                }
            }
            BinarySvm bin = detail::smo_train(sub_x, sub_y, params);
            for (auto& idx : bin.support_indices)
                idx = sub_index[idx];  // re-anchor into the full training set
            model.pairs.push_back({pos, neg, std::move(bin)});
        }
    }
    return model;
}

/// Trained location classifier: one class per grid point.
struct SvmModel {
    MulticlassSvm classifier;
    std::map<int, Location> class_locations;
    std::string environment_id;
};

inline SvmModel svm_train(const RadioMap& map, const EngineConfig& config) {
    config.validate();
    require(map.fingerprints.size() >= 2, "svm_train: need at least 2 distinct locations");
    SvmModel model;
    model.environment_id = map.environment_id;
    std::vector<std::vector<double>> x;
    std::vector<int> labels;
    for (const auto& fp : map.fingerprints) {
        x.push_back(fp.values);
        labels.push_back(fp.location->grid_index);
        model.class_locations[fp.location->grid_index] = *fp.location;
    }
    model.classifier = svm_train_multiclass(std::move(x), std::move(labels), config.svm);
    return model;
}

inline LocalizationEstimate svm_localize(const SvmModel& model, const Fingerprint& query) {
    int label = model.classifier.predict(std::span<const double>(query.values));
    const Location& loc = model.class_locations.at(label);
    LocalizationEstimate est;
    est.x = loc.x;
    est.y = loc.y;
    est.matched_grid_index = label;
    est.environment_id = model.environment_id;
    double votes = 0.0;
    for (const auto& p : model.classifier.pairs) {
        double d = model.classifier.pair_decision(p, std::span<const double>(query.values));
        if ((d >= 0.0 ? p.pos_label : p.neg_label) == label)
            votes += 1.0;
    }
    est.score = votes;
    return est;
}

}
