#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nexc/linalg.hpp"

namespace nexc {

/// Latent embedding of one record, with its timestamp year.
struct EmbeddedRecord {
    Vector coeffs; // h non-negative coefficients
    int year = 0;
};

/// Result of the batch non-negative factorization X ~ E * B. The basis B is
/// frozen after fitting; online records are projected onto it with project().
struct FactorModel {
    int h = 0;
    Matrix basis;                        // h x d, non-negative
    Matrix train_coeffs;                 // n x h, non-negative
    std::vector<double> objective_trace; // ||X - E*B||_F^2 per iteration, non-increasing

    int dims() const { return static_cast<int>(basis.cols()); }
};

// Multiplicative-update NNMF with seeded uniform initialization scaled by
// mean(X). Stops after max_iters iterations or when the relative objective
// decrease drops below tol. inner_steps > 1 repeats each factor's update
// while reusing the Gram matrices (cheaper per effective update, same
// update rule, still monotone).
FactorModel fit_nnmf(const Matrix& x, int h, int max_iters = 500, double tol = 1e-5,
                     std::uint64_t seed = 1, int inner_steps = 1);

// Non-negative least squares e = argmin_{e >= 0} ||x - e^T B||^2 by a
// Lawson-Hanson active-set sweep on the normal equations. Stationarity holds
// with every KKT component within tol * (1 + ||B x||_inf); deterministic.
Vector project(const Vector& x, const FactorModel& model, double tol = 1e-8);

// KKT stationarity residual of a candidate solution (for diagnostics/tests):
// max over components of |grad_k| where e_k > 0 and max(0, -grad_k) where e_k == 0.
double nnls_kkt_residual(const Vector& x, const FactorModel& model, const Vector& e);

// Checkpoint format: JSON with explicit h, d, and the basis in row-major
// order. Training coefficients and the objective trace are included so a
// reloaded model is usable for projection consistency checks.
void save_factor_model(const FactorModel& model, const std::string& path);
FactorModel load_factor_model(const std::string& path);

} // namespace nexc
