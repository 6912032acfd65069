#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ambientloc/engine_config.hpp"
#include "ambientloc/types.hpp"

namespace ambientloc {

/// Squared-exponential covariance: s2 * exp(-|a-b|^2 / (2 l^2)).
inline double se_kernel(std::span<const double> a, std::span<const double> b,
                        double lengthscale, double signal_variance) {
    require(a.size() == b.size(), "se_kernel: dimension mismatch");
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        d2 += d * d;
    }
    return signal_variance * std::exp(-d2 / (2.0 * lengthscale * lengthscale));
}

/// Derivative of se_kernel with respect to the lengthscale.
inline double se_kernel_grad_lengthscale(std::span<const double> a, std::span<const double> b,
                                         double lengthscale, double signal_variance) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        d2 += d * d;
    }
    double l2 = lengthscale * lengthscale;
    return signal_variance * std::exp(-d2 / (2.0 * l2)) * d2 / (l2 * lengthscale);
}

/// Two GP regressors (x and y targets) sharing one kernel factorization.
struct GpModel {
    Eigen::MatrixXd train_x;  // n x d fingerprints
    Eigen::LLT<Eigen::MatrixXd> chol;
    Eigen::VectorXd alpha_x;  // (K + noise I)^-1 (targets - prior)
    Eigen::VectorXd alpha_y;
    double prior_x = 0.0;  // training-target averages
    double prior_y = 0.0;
    GpParams params;
    std::string environment_id;

    struct Prediction {
        double x = 0.0;
        double y = 0.0;
        double variance = 0.0;  // latent posterior variance, per coordinate
    };

    Prediction predict(std::span<const double> query) const {
        const Eigen::Index n = train_x.rows();
        require(static_cast<Eigen::Index>(query.size()) == train_x.cols(),
                "gp: query dimension mismatch");
        Eigen::VectorXd ks(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double d2 = 0.0;
            for (Eigen::Index j = 0; j < train_x.cols(); ++j) {
                double d = query[static_cast<std::size_t>(j)] - train_x(i, j);
                d2 += d * d;
            }
            ks(i) = params.signal_variance *
                    std::exp(-d2 / (2.0 * params.lengthscale * params.lengthscale));
        }
        Prediction p;
        p.x = prior_x + ks.dot(alpha_x);
        p.y = prior_y + ks.dot(alpha_y);
        Eigen::VectorXd v = chol.solve(ks);
        p.variance = std::max(0.0, params.signal_variance - ks.dot(v));
        return p;
    }
};

namespace detail {

inline Eigen::MatrixXd se_gram(const Eigen::MatrixXd& x, const GpParams& p) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = p.signal_variance + p.noise_variance;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double d2 = (x.row(i) - x.row(j)).squaredNorm();
            double v = p.signal_variance *
                       std::exp(-d2 / (2.0 * p.lengthscale * p.lengthscale));
            k(i, j) = k(j, i) = v;
        }
    }
    return k;
}

/// Sum of squared leave-one-out residuals over both coordinate targets,
/// from the closed-form LOO identity mu_i = y_i - [K^-1 r]_i / [K^-1]_ii.
inline double gp_loo_sse(const Eigen::MatrixXd& x, const Eigen::VectorXd& rx,
                         const Eigen::VectorXd& ry, const GpParams& p) {
    const Eigen::Index n = x.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(se_gram(x, p));
    if (llt.info() != Eigen::Success)
        return std::numeric_limits<double>::infinity();
    Eigen::MatrixXd kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::VectorXd ax = llt.solve(rx);
    Eigen::VectorXd ay = llt.solve(ry);
    double sse = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double d = kinv(i, i);
        double ex = ax(i) / d;
        double ey = ay(i) / d;
        sse += ex * ex + ey * ey;
    }
    return sse;
}

}  // namespace detail

inline GpModel gp_train(const RadioMap& map, const EngineConfig& config) {
    config.validate();
    require(map.fingerprints.size() >= 2, "gp_train: need at least 2 locations");
    const Eigen::Index n = static_cast<Eigen::Index>(map.fingerprints.size());
    const Eigen::Index d = static_cast<Eigen::Index>(map.beacons.size());

    GpModel model;
    model.environment_id = map.environment_id;
    model.params = config.gp;
    model.train_x.resize(n, d);
    Eigen::VectorXd tx(n), ty(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Fingerprint& fp = map.fingerprints[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < d; ++j)
            model.train_x(i, j) = fp.values[static_cast<std::size_t>(j)];
        tx(i) = fp.location->x;
        ty(i) = fp.location->y;
    }
    model.prior_x = tx.mean();
    model.prior_y = ty.mean();
    Eigen::VectorXd rx = tx.array() - model.prior_x;
    Eigen::VectorXd ry = ty.array() - model.prior_y;

    if (config.gp.grid_search) {
        // Small deterministic grid, scored by leave-one-out squared error.
        const double lengthscales[] = {0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0};
        const double noises[] = {1e-4, 1e-3, 1e-2, 1e-1};
        double best = std::numeric_limits<double>::infinity();
        GpParams best_params = model.params;
        for (double ls : lengthscales) {
            for (double nv : noises) {
                GpParams trial = model.params;
                trial.lengthscale = ls;
                trial.noise_variance = nv;
                double sse = detail::gp_loo_sse(model.train_x, rx, ry, trial);
                if (sse < best) {
                    best = sse;
                    best_params = trial;
                }
            }
        }
        model.params = best_params;
    }

    model.chol.compute(detail::se_gram(model.train_x, model.params));
    require(model.chol.info() == Eigen::Success,
            "gp_train: kernel matrix not positive definite even with noise jitter");
    model.alpha_x = model.chol.solve(rx);
    model.alpha_y = model.chol.solve(ry);
    return model;
}

inline LocalizationEstimate gp_localize(const GpModel& model, const Fingerprint& query) {
    GpModel::Prediction p = model.predict(std::span<const double>(query.values));
    LocalizationEstimate est;
    est.x = p.x;
    est.y = p.y;
    est.matched_grid_index = std::nullopt;
    est.score = 2.0 * p.variance;  // summed over the two coordinate targets
    est.environment_id = model.environment_id;
    return est;
}

}
