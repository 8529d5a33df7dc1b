#pragma once

// Catalog of test losses with analytic derivatives.

#include <cstdint>
#include <vector>

#include "critpt/problem.hpp"

namespace critpt::problems {

/// L(theta) = 1/2 theta^T A theta + b^T theta.
struct QuadraticSpec {
  Matrix matrix;
  ParamVector offset;  // empty means zero
};

/// L = (1/n_samples) |X - W2 W1 X|_F^2 with theta packing row-major W1 (k x n_features)
/// followed by row-major W2 (n_features x k).
struct LinearAutoencoderSpec {
  Matrix data;  // n_features x n_samples
  int hidden = 1;
};

Problem make_quadratic(const QuadraticSpec& spec);

/// Himmelblau's function (x^2 + y - 11)^2 + (x + y^2 - 7)^2.
Problem make_himmelblau();

Problem make_linear_autoencoder(const LinearAutoencoderSpec& spec);

/// g(theta) = |grad L(theta)|^2 with gradient 2 H grad L. No HVP of its own.
Problem make_surrogate(const Problem& wrapped);

/// Seeded random orthogonal matrix (QR of a Gaussian matrix, signs fixed by diag(R) > 0).
Matrix random_orthogonal(Eigen::Index n, std::uint64_t seed);

/// Data matrix whose sample covariance X X^T / n_samples is exactly
/// basis * diag(eigenvalues) * basis^T (up to rounding). n_samples >= eigenvalues.size().
/// The sample directions are a seeded random orthonormal frame.
Matrix autoencoder_data(const std::vector<double>& eigenvalues, const Matrix& basis,
                        Eigen::Index n_samples, std::uint64_t seed = 0);

/// Splits a packed autoencoder parameter vector into (W1, W2).
std::pair<Matrix, Matrix> unpack_autoencoder(const ParamVector& theta, Eigen::Index n_features,
                                             Eigen::Index hidden);
ParamVector pack_autoencoder(const Matrix& w1, const Matrix& w2);

}  // namespace critpt::problems
