#include "nexc/innmf.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include <json.hpp>

#include "nexc/errors.hpp"
#include "nexc/kernels.hpp"

namespace nexc {

namespace {

constexpr double kDenomEps = 1e-12;

Matrix seeded_uniform(Eigen::Index rows, Eigen::Index cols, double scale, std::mt19937_64& rng) {
    // uniform in (0, 1] so no factor entry starts at exactly zero
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = (1.0 - unif(rng)) * scale;
    return m;
}

} // namespace

FactorModel fit_nnmf(const Matrix& x, int h, int max_iters, double tol, std::uint64_t seed,
                     int inner_steps) {
    const Eigen::Index n = x.rows(), d = x.cols();
    if (h < 1 || h > std::min(n, d))
        throw DimensionError("fit_nnmf: h = " + std::to_string(h) + " outside [1, min(" +
                             std::to_string(n) + ", " + std::to_string(d) + ")]");
    if ((x.array() < 0.0).any()) throw NegativeInput("fit_nnmf: X has negative entries");
    if (max_iters < 1) throw Error("fit_nnmf: max_iters must be >= 1");
    if (inner_steps < 1) throw Error("fit_nnmf: inner_steps must be >= 1");

    std::mt19937_64 rng(seed);
    const double scale = std::max(x.mean(), 1e-12);
    Matrix coeffs = seeded_uniform(n, h, scale, rng); // E: n x h
    Matrix basis = seeded_uniform(h, d, scale, rng);  // B: h x d

    FactorModel model;
    model.h = h;
    model.objective_trace.reserve(static_cast<std::size_t>(max_iters));

    double prev = -1.0;
    for (int it = 0; it < max_iters; ++it) {
        // E <- E .* (X B^T) ./ (E (B B^T))
        {
            const Matrix numer = kernels::matmul_abt(x, basis);
            const Matrix gram = kernels::matmul_abt(basis, basis);
            for (int s = 0; s < inner_steps; ++s) {
                const Matrix denom = kernels::matmul(coeffs, gram);
                kernels::multiplicative_step(coeffs, numer, denom, kDenomEps);
            }
        }
        // B <- B .* (E^T X) ./ ((E^T E) B)
        {
            const Matrix numer = kernels::matmul_atb(coeffs, x);
            const Matrix gram = kernels::matmul_atb(coeffs, coeffs);
            for (int s = 0; s < inner_steps; ++s) {
                const Matrix denom = kernels::matmul(gram, basis);
                kernels::multiplicative_step(basis, numer, denom, kDenomEps);
            }
        }

        const double obj = kernels::squared_residual(x, coeffs, basis);
        model.objective_trace.push_back(obj);
        if (prev >= 0.0 && prev - obj < tol * std::max(prev, 1e-300)) break;
        prev = obj;
    }

    model.basis = std::move(basis);
    model.train_coeffs = std::move(coeffs);
    return model;
}

double nnls_kkt_residual(const Vector& x, const FactorModel& model, const Vector& e) {
    const Matrix& b = model.basis;
    if (x.size() != b.cols()) throw DimensionError("nnls_kkt_residual: x has wrong dimension");
    if (e.size() != b.rows()) throw DimensionError("nnls_kkt_residual: e has wrong dimension");
    const Vector grad = 2.0 * (b * (b.transpose() * e) - b * x);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < e.size(); ++k) {
        const double r = e(k) > 0.0 ? std::abs(grad(k)) : std::max(0.0, -grad(k));
        worst = std::max(worst, r);
    }
    return worst;
}

Vector project(const Vector& x, const FactorModel& model, double tol) {
    const Matrix& b = model.basis;
    const auto h = static_cast<int>(b.rows());
    if (x.size() != b.cols())
        throw DimensionError("project: x has dimension " + std::to_string(x.size()) +
                             ", model expects " + std::to_string(b.cols()));

    // Lawson-Hanson active set on the normal equations:
    // minimize f(e) = e^T G e - 2 q^T e over e >= 0, G = B B^T, q = B x.
    // w = q - G e is -grad/2, so the dual feasibility cut-off is thresh/2.
    const Matrix gram = b * b.transpose();
    const Vector q = b * x;
    const double half_thresh = 0.5 * tol * (1.0 + q.cwiseAbs().maxCoeff());

    Vector e = Vector::Zero(h);
    std::vector<bool> passive(static_cast<std::size_t>(h), false);

    auto solve_passive = [&](const std::vector<int>& idx) {
        const auto p = static_cast<Eigen::Index>(idx.size());
        Matrix gp(p, p);
        Vector qp(p);
        for (Eigen::Index r = 0; r < p; ++r) {
            qp(r) = q(idx[static_cast<std::size_t>(r)]);
            for (Eigen::Index cc = 0; cc < p; ++cc)
                gp(r, cc) = gram(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(cc)]);
        }
        return Eigen::LDLT<Matrix>(gp).solve(qp).eval();
    };

    for (int outer = 0; outer < 4 * h + 16; ++outer) {
        const Vector w = q - gram * e;
        int enter = -1;
        double best = half_thresh;
        for (int k = 0; k < h; ++k)
            if (!passive[static_cast<std::size_t>(k)] && w(k) > best) {
                best = w(k);
                enter = k;
            }
        if (enter < 0) break; // KKT holds on the zero set; passive set is stationary by solve
        passive[static_cast<std::size_t>(enter)] = true;

        for (int inner = 0; inner < 4 * h + 16; ++inner) {
            std::vector<int> idx;
            for (int k = 0; k < h; ++k)
                if (passive[static_cast<std::size_t>(k)]) idx.push_back(k);
            const Vector z = solve_passive(idx);

            double step = 1.0;
            for (std::size_t r = 0; r < idx.size(); ++r)
                if (z(static_cast<Eigen::Index>(r)) <= 0.0) {
                    const double ek = e(idx[r]);
                    step = std::min(step, ek / (ek - z(static_cast<Eigen::Index>(r))));
                }
            if (step >= 1.0) {
                e.setZero();
                for (std::size_t r = 0; r < idx.size(); ++r)
                    e(idx[r]) = z(static_cast<Eigen::Index>(r));
                break;
            }
            for (std::size_t r = 0; r < idx.size(); ++r) {
                const double ek = e(idx[r]);
                e(idx[r]) = ek + step * (z(static_cast<Eigen::Index>(r)) - ek);
            }
            for (int k = 0; k < h; ++k)
                if (passive[static_cast<std::size_t>(k)] && e(k) <= 1e-14 * (1.0 + q.cwiseAbs().maxCoeff())) {
                    e(k) = 0.0;
                    passive[static_cast<std::size_t>(k)] = false;
                }
        }
    }
    return e;
}

void save_factor_model(const FactorModel& model, const std::string& path) {
    nlohmann::json j;
    j["format"] = "nexc-factor-model-v1";
    j["h"] = model.h;
    j["d"] = model.dims();
    j["n"] = model.train_coeffs.rows();
    auto row_major = [](const Matrix& m) {
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(m.size()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index jx = 0; jx < m.cols(); ++jx) out.push_back(m(i, jx));
        return out;
    };
    j["basis"] = row_major(model.basis);
    j["train_coeffs"] = row_major(model.train_coeffs);
    j["objective_trace"] = model.objective_trace;
    std::ofstream out(path);
    if (!out) throw Error(path + ": cannot open for writing");
    out << j.dump() << '\n';
}

FactorModel load_factor_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(path + ": cannot open");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (j.value("format", "") != "nexc-factor-model-v1")
        throw ParseError(path + ": not a nexc factor model checkpoint");

    FactorModel model;
    model.h = j.at("h").get<int>();
    const auto d = j.at("d").get<Eigen::Index>();
    const auto n = j.at("n").get<Eigen::Index>();
    auto from_row_major = [](const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols) {
        if (static_cast<Eigen::Index>(v.size()) != rows * cols)
            throw ParseError("factor model: entry count mismatch");
        Matrix m(rows, cols);
        std::size_t idx = 0;
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index jx = 0; jx < cols; ++jx) m(i, jx) = v[idx++];
        return m;
    };
    model.basis = from_row_major(j.at("basis").get<std::vector<double>>(), model.h, d);
    model.train_coeffs =
        from_row_major(j.at("train_coeffs").get<std::vector<double>>(), n, model.h);
    model.objective_trace = j.at("objective_trace").get<std::vector<double>>();
    return model;
}

} // namespace nexc
