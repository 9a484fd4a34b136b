#include "nexc/niw.hpp"

#include <iostream>
#include <map>
#include <numbers>

#include "nexc/errors.hpp"

namespace nexc {

namespace {

// Cholesky with the ridge-and-retry policy for near-singular scale matrices.
Eigen::LLT<Matrix> cholesky_or_ridge(const Matrix& m, const char* what) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() == Eigen::Success) return llt;
    const double h = static_cast<double>(m.rows());
    const double lambda = std::max(1e-6 * m.trace() / h, 1e-12);
    Matrix ridged = m + lambda * Matrix::Identity(m.rows(), m.cols());
    llt.compute(ridged);
    if (llt.info() == Eigen::Success) {
        std::cerr << "nexc: warning: " << what << " not positive-definite, added ridge " << lambda
                  << "\n";
        return llt;
    }
    throw DegenerateCovariance(std::string(what) + ": not positive-definite even after ridge");
}

} // namespace

void Hyperparameters::validate() const {
    if (mu0.size() == 0) throw Error("Hyperparameters: mu0 is empty");
    if (!(kappa > 0.0)) throw Error("Hyperparameters: kappa must be positive");
    if (!(m + 1.0 - dim() > 0.0))
        throw Error("Hyperparameters: m + 1 - h must be positive for a proper predictive");
    if (sigma0.rows() != dim() || sigma0.cols() != dim())
        throw DimensionError("Hyperparameters: sigma0 shape does not match mu0");
    if (!sigma0.isApprox(sigma0.transpose(), 1e-9))
        throw DegenerateCovariance("Hyperparameters: sigma0 is not symmetric");
    Eigen::LLT<Matrix> llt(sigma0);
    if (llt.info() != Eigen::Success)
        throw DegenerateCovariance("Hyperparameters: sigma0 is not positive-definite");
    if (!std::isnan(alpha) && !(alpha > 0.0))
        throw Error("Hyperparameters: alpha must be positive when set");
}

ClassStats ClassStats::empty(const std::string& label, int dim) {
    return ClassStats{label, 0, Vector::Zero(dim), Matrix::Zero(dim, dim)};
}

ClassStats new_class_stats(const std::string& label, const Vector& e) {
    return ClassStats{label, 1, e, Matrix::Zero(e.size(), e.size())};
}

ClassStats update_stats(const ClassStats& stats, const Vector& e) {
    if (stats.n > 0 && e.size() != stats.mean.size())
        throw DimensionError("update_stats: record dimension " + std::to_string(e.size()) +
                             " vs class dimension " + std::to_string(stats.mean.size()));
    if (stats.n == 0) return new_class_stats(stats.label, e);

    ClassStats out = stats;
    const double n_new = static_cast<double>(stats.n + 1);
    const Vector delta = e - stats.mean;
    out.n = stats.n + 1;
    out.mean = stats.mean + delta / n_new;
    // Welford form: delta * delta^T * n/(n+1) keeps scatter exactly symmetric
    out.scatter = stats.scatter + (static_cast<double>(stats.n) / n_new) * (delta * delta.transpose());
    return out;
}

Hyperparameters estimate_hyperparameters(const Matrix& train_embeds,
                                         const std::vector<std::string>& labels, double kappa,
                                         double m) {
    const Eigen::Index n = train_embeds.rows();
    const int h = static_cast<int>(train_embeds.cols());
    if (static_cast<std::size_t>(n) != labels.size())
        throw DimensionError("estimate_hyperparameters: one label per row required");
    if (n == 0) throw EmptyTrainingSet("estimate_hyperparameters: no training embeddings");
    if (!(m > h + 1.0))
        throw Error("estimate_hyperparameters: need m > h + 1 for the pooled covariance");

    std::map<std::string, ClassStats> per_class;
    for (Eigen::Index i = 0; i < n; ++i) {
        auto it = per_class.find(labels[static_cast<std::size_t>(i)]);
        const Vector e = train_embeds.row(i).transpose();
        if (it == per_class.end())
            per_class.emplace(labels[static_cast<std::size_t>(i)],
                              new_class_stats(labels[static_cast<std::size_t>(i)], e));
        else
            it->second = update_stats(it->second, e);
    }
    const auto k = static_cast<double>(per_class.size());
    if (static_cast<double>(n) < k + 1.0)
        throw Error("estimate_hyperparameters: need at least k+1 records for k classes");

    Matrix scatter_sum = Matrix::Zero(h, h);
    for (const auto& [label, stats] : per_class) scatter_sum += stats.scatter;

    Hyperparameters hyper;
    hyper.mu0 = train_embeds.colwise().mean().transpose();
    hyper.kappa = kappa;
    hyper.m = m;
    hyper.sigma0 = (m - h - 1.0) * scatter_sum / (static_cast<double>(n) - k);

    Eigen::LLT<Matrix> llt(hyper.sigma0);
    if (llt.info() != Eigen::Success)
        throw DegenerateCovariance("estimate_hyperparameters: pooled covariance is singular");
    return hyper;
}

StudentTParams posterior_predictive(const ClassStats& stats, const Hyperparameters& hyper) {
    const int h = hyper.dim();
    const double n = static_cast<double>(stats.n);
    const double kappa = hyper.kappa;

    StudentTParams t;
    t.df = n + hyper.m + 1.0 - h;
    if (stats.n == 0) {
        t.loc = hyper.mu0;
        t.scale = (kappa + 1.0) / (kappa * t.df) * hyper.sigma0;
    } else {
        if (stats.mean.size() != h)
            throw DimensionError("posterior_predictive: class dimension mismatch");
        t.loc = (n * stats.mean + kappa * hyper.mu0) / (n + kappa);
        const Vector dev = hyper.mu0 - stats.mean;
        t.scale = (n + kappa + 1.0) / ((n + kappa) * t.df) *
                  (hyper.sigma0 + stats.scatter + (n * kappa / (n + kappa)) * (dev * dev.transpose()));
    }
    // fail fast on a degenerate scale; log_density would hit it anyway
    cholesky_or_ridge(t.scale, "posterior predictive scale");
    return t;
}

StudentTParams marginal_predictive(const Hyperparameters& hyper) {
    return posterior_predictive(ClassStats::empty("", hyper.dim()), hyper);
}

double log_density(const StudentTParams& t, const Vector& e) {
    const Eigen::Index h = t.loc.size();
    if (e.size() != h) throw DimensionError("log_density: point dimension mismatch");
    const auto llt = cholesky_or_ridge(t.scale, "student-t scale");

    const Vector delta = e - t.loc;
    const Vector white = llt.matrixL().solve(delta);
    const double quad = white.squaredNorm();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < h; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));

    const double hd = static_cast<double>(h);
    return std::lgamma(0.5 * (t.df + hd)) - std::lgamma(0.5 * t.df) -
           0.5 * hd * std::log(t.df * std::numbers::pi) - 0.5 * log_det -
           0.5 * (t.df + hd) * std::log1p(quad / t.df);
}

} // namespace nexc
