// Times each dense kernel in its serial-reference and OpenMP form and checks
// that the two agree bitwise. Run with OMP_NUM_THREADS set to taste.
#include <chrono>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nexc/kernels.hpp"

using nexc::Matrix;
namespace k = nexc::kernels;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = unif(rng);
    return m;
}

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        f();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                             .count();
        if (s < best) best = s;
    }
    return best;
}

void report(const char* name, double flops, double serial_s, double parallel_s, double max_diff) {
    std::printf("%-22s %10.1f ms %10.1f ms   %5.2fx   %9.2f GF/s   max|diff| %g\n", name,
                serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s,
                flops / parallel_s / 1e9, max_diff);
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel kernels run serially\n");
#endif
    std::printf("%-22s %13s %13s %8s %15s\n", "kernel", "serial", "parallel", "speedup",
                "parallel rate");

    std::mt19937_64 rng(7);

    { // square matmul
        const Eigen::Index n = 384;
        const Matrix a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
        Matrix rs, rp;
        const double ts = time_best_of(3, [&] { rs = k::serial::matmul(a, b); });
        const double tp = time_best_of(3, [&] { rp = k::matmul(a, b); });
        report("matmul 384x384", 2.0 * n * n * n, ts, tp, (rs - rp).cwiseAbs().maxCoeff());
    }
    { // factorization-shaped products
        const Eigen::Index n = 2000, d = 1000, h = 16;
        const Matrix x = random_matrix(n, d, rng);
        const Matrix e = random_matrix(n, h, rng);
        const Matrix b = random_matrix(h, d, rng);
        Matrix rs, rp;
        double ts = time_best_of(3, [&] { rs = k::serial::matmul_abt(x, b); });
        double tp = time_best_of(3, [&] { rp = k::matmul_abt(x, b); });
        report("X B^T 2000x1000x16", 2.0 * n * d * h, ts, tp, (rs - rp).cwiseAbs().maxCoeff());

        ts = time_best_of(3, [&] { rs = k::serial::matmul_atb(e, x); });
        tp = time_best_of(3, [&] { rp = k::matmul_atb(e, x); });
        report("E^T X 2000x1000x16", 2.0 * n * d * h, ts, tp, (rs - rp).cwiseAbs().maxCoeff());

        double ss = 0.0, sp = 0.0;
        ts = time_best_of(3, [&] { ss = k::serial::squared_residual(x, e, b); });
        tp = time_best_of(3, [&] { sp = k::squared_residual(x, e, b); });
        report("residual 2000x1000", 2.0 * n * d * (h + 1), ts, tp, std::abs(ss - sp));
    }
    { // multiplicative step
        const Eigen::Index n = 2000, h = 16;
        Matrix ts_t = random_matrix(n, h, rng);
        Matrix tp_t = ts_t;
        const Matrix num = random_matrix(n, h, rng), den = random_matrix(n, h, rng);
        const double ts =
            time_best_of(3, [&] { k::serial::multiplicative_step(ts_t, num, den, 1e-12); });
        const double tp = time_best_of(3, [&] { k::multiplicative_step(tp_t, num, den, 1e-12); });
        report("mult step 2000x16", 2.0 * n * h, ts, tp, (ts_t - tp_t).cwiseAbs().maxCoeff());
    }
    return 0;
}
