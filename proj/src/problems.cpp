#include "critpt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <fmt/format.h>

#include "critpt/calculus.hpp"
#include "critpt/errors.hpp"

namespace critpt::problems {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Known critical points are only enumerated for catalogs up to this many subsets.
constexpr std::size_t kMaxEnumeratedSubsets = 4096;

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Calls visit(subset) for every subset of {0..n-1} with at most max_size elements.
template <typename Visit>
void for_each_subset(int n, int max_size, Visit&& visit) {
  std::vector<int> subset;
  auto recurse = [&](auto&& self, int start) -> void {
    visit(subset);
    if (static_cast<int>(subset.size()) == max_size) return;
    for (int i = start; i < n; ++i) {
      subset.push_back(i);
      self(self, i + 1);
      subset.pop_back();
    }
  };
  recurse(recurse, 0);
}

}  // namespace

Problem make_quadratic(const QuadraticSpec& spec) {
  const Matrix& a = spec.matrix;
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw DomainError("quadratic matrix must be square and non-empty");
  }
  const Eigen::Index n = a.rows();
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale) {
    throw DomainError("quadratic matrix must be symmetric");
  }
  if (!a.allFinite()) throw DomainError("quadratic matrix must be finite");
  const ParamVector b = spec.offset.size() == 0 ? ParamVector::Zero(n) : spec.offset;
  if (b.size() != n) throw DimensionMismatch("quadratic offset dimension does not match matrix");
  if (!b.allFinite()) throw DomainError("quadratic offset must be finite");

  std::vector<KnownCriticalPoint> known;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  const auto& lambda = eig.eigenvalues();
  const double lambda_scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  if (lambda.cwiseAbs().minCoeff() > 1e-12 * lambda_scale) {
    const Matrix& q = eig.eigenvectors();
    const ParamVector theta = -(q * (q.transpose() * b).cwiseQuotient(lambda));
    const int index = static_cast<int>((lambda.array() < 0.0).count());
    known.push_back({theta, index, 0.5 * theta.dot(a * theta) + b.dot(theta)});
  }

  auto shared = std::make_shared<const std::pair<Matrix, ParamVector>>(a, b);
  return Problem(
      "quadratic", n,
      [shared](const ParamVector& x) {
        return 0.5 * x.dot(shared->first * x) + shared->second.dot(x);
      },
      [shared](const ParamVector& x) -> ParamVector {
        return shared->first * x + shared->second;
      },
      [shared](const ParamVector&, const ParamVector& v) -> ParamVector {
        return shared->first * v;
      },
      std::move(known));
}

Problem make_himmelblau() {
  return Problem(
      "himmelblau", 2,
      [](const ParamVector& t) {
        const double p = t[0] * t[0] + t[1] - 11.0;
        const double q = t[0] + t[1] * t[1] - 7.0;
        return p * p + q * q;
      },
      [](const ParamVector& t) -> ParamVector {
        const double p = t[0] * t[0] + t[1] - 11.0;
        const double q = t[0] + t[1] * t[1] - 7.0;
        ParamVector g(2);
        g << 4.0 * t[0] * p + 2.0 * q, 2.0 * p + 4.0 * t[1] * q;
        return g;
      },
      [](const ParamVector& t, const ParamVector& v) -> ParamVector {
        const double p = t[0] * t[0] + t[1] - 11.0;
        const double q = t[0] + t[1] * t[1] - 7.0;
        const double hxx = 4.0 * p + 8.0 * t[0] * t[0] + 2.0;
        const double hxy = 4.0 * (t[0] + t[1]);
        const double hyy = 4.0 * q + 8.0 * t[1] * t[1] + 2.0;
        ParamVector hv(2);
        hv << hxx * v[0] + hxy * v[1], hxy * v[0] + hyy * v[1];
        return hv;
      });
}

std::pair<Matrix, Matrix> unpack_autoencoder(const ParamVector& theta, Eigen::Index n_features,
                                             Eigen::Index hidden) {
  const Eigen::Index block = hidden * n_features;
  if (theta.size() != 2 * block) {
    throw DimensionMismatch(fmt::format("autoencoder parameters need dimension {}, got {}",
                                        2 * block, theta.size()));
  }
  Matrix w1 = Eigen::Map<const RowMajorMatrix>(theta.data(), hidden, n_features);
  Matrix w2 = Eigen::Map<const RowMajorMatrix>(theta.data() + block, n_features, hidden);
  return {std::move(w1), std::move(w2)};
}

ParamVector pack_autoencoder(const Matrix& w1, const Matrix& w2) {
  if (w1.rows() != w2.cols() || w1.cols() != w2.rows()) {
    throw DimensionMismatch("W1 must be k x n and W2 n x k");
  }
  const Eigen::Index block = w1.size();
  ParamVector theta(2 * block);
  Eigen::Map<RowMajorMatrix>(theta.data(), w1.rows(), w1.cols()) = w1;
  Eigen::Map<RowMajorMatrix>(theta.data() + block, w2.rows(), w2.cols()) = w2;
  return theta;
}

Problem make_linear_autoencoder(const LinearAutoencoderSpec& spec) {
  const Matrix& x = spec.data;
  const Eigen::Index n = x.rows();
  const Eigen::Index samples = x.cols();
  const Eigen::Index k = spec.hidden;
  if (n < 2 || samples < 1) throw DomainError("autoencoder data must be at least 2 x 1");
  if (k < 1 || k >= n) {
    throw DomainError(fmt::format("hidden width must satisfy 1 <= k < n_features ({} vs {})", k, n));
  }
  if (!x.allFinite()) throw DomainError("autoencoder data must be finite");

  Matrix cov = (x * x.transpose()) / static_cast<double>(samples);
  cov = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const ParamVector& lambda = eig.eigenvalues();  // ascending
  const double lambda_scale = std::max(1e-300, lambda.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 1; i < n; ++i) {
    if (lambda[i] - lambda[i - 1] <= 1e-8 * lambda_scale) {
      throw DomainError(fmt::format(
          "autoencoder covariance has (near-)repeated eigenvalues {} and {}; critical points "
          "would not be isolated up to symmetry",
          lambda[i - 1], lambda[i]));
    }
  }

  // Known critical points: projections onto spans of eigenvector subsets of size <= k,
  // listed with eigenvalues in descending order so index 0 is the top eigenvector.
  std::vector<KnownCriticalPoint> known;
  std::size_t subset_count = 0;
  for (Eigen::Index m = 0; m <= k; ++m) subset_count += binomial(n, m);
  if (subset_count <= kMaxEnumeratedSubsets) {
    const Matrix u = eig.eigenvectors().rowwise().reverse();
    const ParamVector desc = lambda.reverse();
    for_each_subset(static_cast<int>(n), static_cast<int>(k), [&](const std::vector<int>& in) {
      Matrix w1 = Matrix::Zero(k, n);
      Matrix w2 = Matrix::Zero(n, k);
      std::vector<bool> used(n, false);
      for (std::size_t r = 0; r < in.size(); ++r) {
        w1.row(r) = u.col(in[r]).transpose();
        w2.col(r) = u.col(in[r]);
        used[in[r]] = true;
      }
      double value = 0.0;
      int index = 0;
      int positive_outside = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (used[j]) continue;
        value += desc[j];
        if (desc[j] > 0.0) ++positive_outside;
        for (int i : in) {
          if (desc[j] > desc[i]) ++index;
        }
      }
      index += static_cast<int>(k - static_cast<Eigen::Index>(in.size())) * positive_outside;
      known.push_back({pack_autoencoder(w1, w2), index, value});
    });
  }

  auto c = std::make_shared<const Matrix>(std::move(cov));
  auto residual_product = [c, n](const Matrix& w1, const Matrix& w2) -> Matrix {
    // (I - W2 W1) C
    return *c - w2 * (w1 * *c);
  };
  return Problem(
      "linear-autoencoder", 2 * k * n,
      [c, n, k](const ParamVector& theta) {
        auto [w1, w2] = unpack_autoencoder(theta, n, k);
        const Matrix e = Matrix::Identity(n, n) - w2 * w1;
        return (e * *c * e.transpose()).trace();
      },
      [residual_product, n, k](const ParamVector& theta) -> ParamVector {
        auto [w1, w2] = unpack_autoencoder(theta, n, k);
        const Matrix r = residual_product(w1, w2);
        return pack_autoencoder(-2.0 * w2.transpose() * r, -2.0 * r * w1.transpose());
      },
      [c, residual_product, n, k](const ParamVector& theta, const ParamVector& v) -> ParamVector {
        auto [w1, w2] = unpack_autoencoder(theta, n, k);
        auto [v1, v2] = unpack_autoencoder(v, n, k);
        const Matrix r = residual_product(w1, w2);
        const Matrix dr = -(v2 * (w1 * *c) + w2 * (v1 * *c));
        return pack_autoencoder(-2.0 * (v2.transpose() * r + w2.transpose() * dr),
                                -2.0 * (dr * w1.transpose() + r * v1.transpose()));
      },
      std::move(known));
}

Problem make_surrogate(const Problem& wrapped) {
  if (!wrapped.has_hvp()) {
    throw DomainError(fmt::format(
        "surrogate of '{}' needs an analytic Hessian-vector product", wrapped.name()));
  }
  auto inner = std::make_shared<const Problem>(wrapped);
  return Problem(
      "surrogate(" + wrapped.name() + ")", wrapped.dimension(),
      [inner](const ParamVector& theta) { return inner->raw_gradient(theta).squaredNorm(); },
      [inner](const ParamVector& theta) -> ParamVector {
        const ParamVector g = inner->raw_gradient(theta);
        return 2.0 * inner->raw_hvp(theta, g);
      },
      {});
}

Matrix random_orthogonal(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Matrix autoencoder_data(const std::vector<double>& eigenvalues, const Matrix& basis,
                        Eigen::Index n_samples, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(eigenvalues.size());
  if (basis.rows() != n || basis.cols() != n) {
    throw DimensionMismatch("basis must be square with one column per eigenvalue");
  }
  if (n_samples < n) throw DomainError("need at least as many samples as features");
  ParamVector root(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(eigenvalues[i] >= 0.0)) throw DomainError("covariance eigenvalues must be >= 0");
    root[i] = std::sqrt(eigenvalues[i]);
  }
  const Matrix frame = random_orthogonal(n_samples, seed).leftCols(n);
  return std::sqrt(static_cast<double>(n_samples)) * basis * root.asDiagonal() *
         frame.transpose();
}

}  // namespace critpt::problems
