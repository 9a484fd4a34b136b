#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nexc/linalg.hpp"

namespace nexc {

/// Prior of the Normal x Normal x Inverse-Wishart data model plus the DP
/// concentration. kappa scales the shrinkage of class means toward mu0; m
/// plays the Inverse-Wishart degrees-of-freedom role (larger m pins the
/// class covariance closer to sigma0).
struct Hyperparameters {
    Vector mu0;
    double kappa = 0.0;
    Matrix sigma0;
    double m = 0.0;
    double alpha = std::numeric_limits<double>::quiet_NaN(); // unset until calibrated

    int dim() const { return static_cast<int>(mu0.size()); }
    bool has_alpha() const { return std::isfinite(alpha) && alpha > 0.0; }

    // Checks kappa > 0, m + 1 - dim > 0, sigma0 symmetric positive-definite
    // (and alpha > 0 when set). Throws on violation.
    void validate() const;
};

/// Per-class sufficient statistics. scatter is sum_i (e_i - mean)(e_i - mean)^T,
/// i.e. (n-1) * sample covariance, so singleton classes need no special case.
struct ClassStats {
    std::string label;
    long n = 0;
    Vector mean;
    Matrix scatter;

    static ClassStats empty(const std::string& label, int dim);
};

struct StudentTParams {
    Vector loc;
    Matrix scale;
    double df = 0.0;
};

/// n=1 stats around a single record.
ClassStats new_class_stats(const std::string& label, const Vector& e);

// One-pass update; returned stats equal the batch statistics of the enlarged
// multiset (the input is untouched).
ClassStats update_stats(const ClassStats& stats, const Vector& e);

// mu0 = global training mean, sigma0 = pooled covariance
//   S_p = (m - h - 1) * sum_j scatter_j / (n - k).
// alpha is left unset. Throws DegenerateCovariance when S_p has no Cholesky
// factorization; the caller decides how to regularize.
Hyperparameters estimate_hyperparameters(const Matrix& train_embeds,
                                         const std::vector<std::string>& labels, double kappa,
                                         double m);

// Closed-form Student-t posterior predictive of the NNIW model:
//   mu_s = (n mu_bar + kappa mu0) / (n + kappa)
//   Sigma_s = (n+kappa+1) / ((n+kappa)(n+m+1-h)) *
//             (Sigma0 + scatter + n kappa/(n+kappa) (mu0-mu_bar)(mu0-mu_bar)^T)
//   df_s = n + m + 1 - h
// A scale matrix that fails Cholesky is retried once with a small ridge
// (1e-6 * trace/h), logged to stderr; a second failure throws.
StudentTParams posterior_predictive(const ClassStats& stats, const Hyperparameters& hyper);

/// Predictive with no class data: the marginal density of a fresh class.
StudentTParams marginal_predictive(const Hyperparameters& hyper);

// Multivariate Student-t log pdf via Cholesky, stable for df up to ~1e6.
double log_density(const StudentTParams& t, const Vector& e);

} // namespace nexc
