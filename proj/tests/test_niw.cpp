#include <doctest.h>

#include <cmath>
#include <random>

#include "nexc/errors.hpp"
#include "nexc/niw.hpp"

using namespace nexc;

namespace {

Hyperparameters scalar_hyper(double mu0, double kappa, double sigma0, double m) {
    Hyperparameters h;
    h.mu0 = Vector::Constant(1, mu0);
    h.kappa = kappa;
    h.sigma0 = Matrix::Constant(1, 1, sigma0);
    h.m = m;
    return h;
}

// independent batch recomputation of mean and scatter
std::pair<Vector, Matrix> batch_stats(const std::vector<Vector>& points) {
    const Eigen::Index h = points.front().size();
    Vector mean = Vector::Zero(h);
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());
    Matrix scatter = Matrix::Zero(h, h);
    for (const auto& p : points) scatter += (p - mean) * (p - mean).transpose();
    return {mean, scatter};
}

// trapezoid quadrature of exp(log_density) on a +-30-scale 1-D grid
double quadrature_1d(const StudentTParams& t, int n_points = 20001) {
    const double s = std::sqrt(t.scale(0, 0));
    const double lo = t.loc(0) - 30.0 * s, hi = t.loc(0) + 30.0 * s;
    const double step = (hi - lo) / (n_points - 1);
    double total = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const double w = (i == 0 || i == n_points - 1) ? 0.5 : 1.0;
        total += w * std::exp(log_density(t, Vector::Constant(1, lo + i * step)));
    }
    return total * step;
}

} // namespace

TEST_CASE("posterior predictive matches the hand-derived scalar fixture") {
    // mu0=0, kappa=1, sigma0=1, m=10, one observation at 2
    const Hyperparameters hyper = scalar_hyper(0.0, 1.0, 1.0, 10.0);
    const ClassStats stats = new_class_stats("c", Vector::Constant(1, 2.0));
    const StudentTParams t = posterior_predictive(stats, hyper);
    CHECK(t.loc(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.scale(0, 0) == doctest::Approx(9.0 / 22.0).epsilon(1e-12));
    CHECK(t.df == doctest::Approx(11.0).epsilon(1e-12));
}

TEST_CASE("marginal predictive is the empty-class reduction") {
    const Hyperparameters hyper = scalar_hyper(0.0, 1.0, 1.0, 10.0);
    const StudentTParams marg = marginal_predictive(hyper);
    CHECK(marg.loc(0) == 0.0);
    CHECK(marg.scale(0, 0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(marg.df == 10.0);

    // exact identity with an n=0 posterior predictive
    const StudentTParams post = posterior_predictive(ClassStats::empty("", 1), hyper);
    CHECK(marg.loc == post.loc);
    CHECK(marg.scale == post.scale);
    CHECK(marg.df == post.df);

    const StudentTParams unit = marginal_predictive(scalar_hyper(0.0, 1.0, 1.0, 2.0));
    CHECK(unit.scale(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(unit.df == 2.0);
}

TEST_CASE("strong shrinkage pins the predictive mean to mu0") {
    Hyperparameters hyper = scalar_hyper(0.0, 1e12, 1.0, 10.0);
    const ClassStats stats = new_class_stats("c", Vector::Constant(1, 2.0));
    const StudentTParams t = posterior_predictive(stats, hyper);
    CHECK(std::abs(t.loc(0)) < 1e-6);
}

TEST_CASE("absorbing the current mean leaves the predictive location fixed") {
    Hyperparameters hyper = scalar_hyper(1.5, 7.0, 1.0, 12.0);
    ClassStats stats = new_class_stats("c", Vector::Constant(1, 1.5));
    stats = update_stats(stats, Vector::Constant(1, 1.5));
    const StudentTParams t = posterior_predictive(stats, hyper);
    CHECK(t.loc(0) == doctest::Approx(1.5).epsilon(1e-12)); // mu0 equals the data mean
}

TEST_CASE("estimate_hyperparameters computes the pooled covariance") {
    // single class, h=1, values {0, 2}: scatter = 2, n-k = 1, S_p = 2(m-2)
    Matrix embeds(2, 1);
    embeds << 0.0, 2.0;
    const double m = 5.0;
    const Hyperparameters hyper = estimate_hyperparameters(embeds, {"a", "a"}, 1.0, m);
    CHECK(hyper.mu0(0) == doctest::Approx(1.0));
    CHECK(hyper.sigma0(0, 0) == doctest::Approx(2.0 * (m - 2.0)).epsilon(1e-12));

    // identical records: zero scatter, singular pooled covariance
    Matrix flat = Matrix::Constant(3, 1, 4.0);
    CHECK_THROWS_AS(estimate_hyperparameters(flat, {"a", "a", "b"}, 1.0, 5.0),
                    DegenerateCovariance);

    CHECK_THROWS_AS(estimate_hyperparameters(embeds, {"a", "a"}, 1.0, 1.5), Error);
}

TEST_CASE("new_class_stats and update_stats") {
    const Vector e = Vector::Constant(1, 3.0);
    const ClassStats fresh = new_class_stats("c", e);
    CHECK(fresh.n == 1);
    CHECK(fresh.mean(0) == 3.0);
    CHECK(fresh.scatter(0, 0) == 0.0);

    // duplicate point keeps the scatter at zero
    const ClassStats dup = update_stats(fresh, e);
    CHECK(dup.n == 2);
    CHECK(dup.scatter(0, 0) == doctest::Approx(0.0));

    // {0} absorb 2 -> n=2, mean=1, scatter=2
    ClassStats s = new_class_stats("c", Vector::Constant(1, 0.0));
    s = update_stats(s, Vector::Constant(1, 2.0));
    CHECK(s.n == 2);
    CHECK(s.mean(0) == doctest::Approx(1.0));
    CHECK(s.scatter(0, 0) == doctest::Approx(2.0));

    CHECK_THROWS_AS(update_stats(s, Vector::Zero(2)), DimensionError);
}

TEST_CASE("incremental statistics equal batch recomputation") {
    const int h = 8;
    std::mt19937_64 rng(99);
    std::normal_distribution<double> gauss(0.0, 2.0);

    std::vector<Vector> points;
    ClassStats stats = ClassStats::empty("c", h);
    for (int i = 0; i < 1000; ++i) {
        Vector e(h);
        for (int j = 0; j < h; ++j) e(j) = gauss(rng) + (j == 0 ? 5.0 : 0.0);
        points.push_back(e);
        stats = update_stats(stats, e);
    }
    const auto [mean, scatter] = batch_stats(points);
    CHECK((stats.mean - mean).norm() <= 1e-9 * (1.0 + mean.norm()));
    CHECK((stats.scatter - scatter).norm() <= 1e-9 * (1.0 + scatter.norm()));
    CHECK(stats.n == 1000);
}

TEST_CASE("log_density matches the standard Cauchy at the origin") {
    StudentTParams t{Vector::Zero(1), Matrix::Identity(1, 1), 1.0};
    CHECK(log_density(t, Vector::Zero(1)) ==
          doctest::Approx(-std::log(std::acos(-1.0))).epsilon(1e-12));
}

TEST_CASE("density integrates to one and peaks at the location") {
    const Hyperparameters hyper = scalar_hyper(0.0, 1.0, 1.0, 10.0);
    const ClassStats stats = new_class_stats("c", Vector::Constant(1, 2.0));
    const StudentTParams t = posterior_predictive(stats, hyper);
    CHECK(quadrature_1d(t) == doctest::Approx(1.0).epsilon(1e-3));

    const double at_loc = log_density(t, t.loc);
    CHECK(at_loc > log_density(t, t.loc + Vector::Constant(1, 0.05)));
    CHECK(at_loc > log_density(t, t.loc - Vector::Constant(1, 0.05)));
}

TEST_CASE("log_density is symmetric for an isotropic scale") {
    StudentTParams t{Vector::Constant(2, 1.0), 0.7 * Matrix::Identity(2, 2), 9.0};
    Vector v(2);
    v << 0.3, -0.4;
    CHECK(log_density(t, t.loc + v) == doctest::Approx(log_density(t, t.loc - v)).epsilon(1e-12));
}

TEST_CASE("log_density stays finite for huge degrees of freedom") {
    StudentTParams t{Vector::Zero(3), Matrix::Identity(3, 3), 1e6};
    const double lp = log_density(t, Vector::Constant(3, 0.5));
    CHECK(std::isfinite(lp));
    // at df ~ 1e6 the density is close to the standard normal
    const double normal_lp = -0.5 * 3.0 * std::log(2.0 * std::acos(-1.0)) - 0.5 * 0.75;
    CHECK(lp == doctest::Approx(normal_lp).epsilon(1e-4));
}
