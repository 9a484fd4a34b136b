#pragma once

#include "nexc/linalg.hpp"

// Dense kernels used by the factorization code. Each kernel exists twice:
// a plain serial reference under kernels::serial and an OpenMP version in
// kernels:: proper. The parallel versions split work by output row and keep
// a fixed accumulation order per element, so they produce bitwise-identical
// results for any thread count; the test suite and the bench tool compare
// the two families directly.
namespace nexc::kernels {

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b);      // a * b
Matrix matmul_abt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix matmul_atb(const Matrix& a, const Matrix& b);  // a^T * b

// ||x - e*b||_F^2 without materializing e*b
double squared_residual(const Matrix& x, const Matrix& e, const Matrix& b);

// t(i,j) *= num(i,j) / (den(i,j) + eps), the multiplicative-update step
void multiplicative_step(Matrix& t, const Matrix& num, const Matrix& den, double eps);

} // namespace serial

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_abt(const Matrix& a, const Matrix& b);
Matrix matmul_atb(const Matrix& a, const Matrix& b);
double squared_residual(const Matrix& x, const Matrix& e, const Matrix& b);
void multiplicative_step(Matrix& t, const Matrix& num, const Matrix& den, double eps);

} // namespace nexc::kernels
