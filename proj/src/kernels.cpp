#include "nexc/kernels.hpp"

#include "nexc/errors.hpp"

namespace nexc::kernels {

namespace {

void check_inner(Eigen::Index lhs, Eigen::Index rhs, const char* what) {
    if (lhs != rhs)
        throw DimensionError(std::string(what) + ": inner dimensions " + std::to_string(lhs) +
                             " vs " + std::to_string(rhs));
}

} // namespace

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.rows(), "matmul");
    Matrix out(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            out(i, j) = acc;
        }
    }
    return out;
}

Matrix matmul_abt(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.cols(), "matmul_abt");
    Matrix out(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(j, k);
            out(i, j) = acc;
        }
    }
    return out;
}

Matrix matmul_atb(const Matrix& a, const Matrix& b) {
    check_inner(a.rows(), b.rows(), "matmul_atb");
    Matrix out(a.cols(), b.cols());
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < a.rows(); ++k) acc += a(k, i) * b(k, j);
            out(i, j) = acc;
        }
    }
    return out;
}

double squared_residual(const Matrix& x, const Matrix& e, const Matrix& b) {
    check_inner(e.cols(), b.rows(), "squared_residual");
    if (x.rows() != e.rows() || x.cols() != b.cols())
        throw DimensionError("squared_residual: shape mismatch");
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double row_acc = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < e.cols(); ++k) acc += e(i, k) * b(k, j);
            const double r = x(i, j) - acc;
            row_acc += r * r;
        }
        total += row_acc;
    }
    return total;
}

void multiplicative_step(Matrix& t, const Matrix& num, const Matrix& den, double eps) {
    if (t.rows() != num.rows() || t.cols() != num.cols() || t.rows() != den.rows() ||
        t.cols() != den.cols())
        throw DimensionError("multiplicative_step: shape mismatch");
    for (Eigen::Index i = 0; i < t.rows(); ++i)
        for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) *= num(i, j) / (den(i, j) + eps);
}

} // namespace serial

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.rows(), "matmul");
    Matrix out(a.rows(), b.cols());
    const Eigen::Index n = a.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            out(i, j) = acc;
        }
    }
    return out;
}

Matrix matmul_abt(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.cols(), "matmul_abt");
    Matrix out(a.rows(), b.rows());
    const Eigen::Index n = a.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(j, k);
            out(i, j) = acc;
        }
    }
    return out;
}

Matrix matmul_atb(const Matrix& a, const Matrix& b) {
    check_inner(a.rows(), b.rows(), "matmul_atb");
    Matrix out(a.cols(), b.cols());
    const Eigen::Index n = a.cols();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < a.rows(); ++k) acc += a(k, i) * b(k, j);
            out(i, j) = acc;
        }
    }
    return out;
}

double squared_residual(const Matrix& x, const Matrix& e, const Matrix& b) {
    check_inner(e.cols(), b.rows(), "squared_residual");
    if (x.rows() != e.rows() || x.cols() != b.cols())
        throw DimensionError("squared_residual: shape mismatch");
    const Eigen::Index n = x.rows();
    Vector row_sums(n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        double row_acc = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < e.cols(); ++k) acc += e(i, k) * b(k, j);
            const double r = x(i, j) - acc;
            row_acc += r * r;
        }
        row_sums(i) = row_acc;
    }
    // combine in row order so the result does not depend on the thread count
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += row_sums(i);
    return total;
}

void multiplicative_step(Matrix& t, const Matrix& num, const Matrix& den, double eps) {
    if (t.rows() != num.rows() || t.cols() != num.cols() || t.rows() != den.rows() ||
        t.cols() != den.cols())
        throw DimensionError("multiplicative_step: shape mismatch");
    const Eigen::Index n = t.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) *= num(i, j) / (den(i, j) + eps);
}

} // namespace nexc::kernels
