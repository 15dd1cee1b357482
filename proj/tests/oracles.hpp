#pragma once

// Test-only reference computations. Nothing here calls into the solver
// paths it is used to check: minimizers are first-order descent, energies are
// brute-force sums.

#include <functional>
#include <random>
#include <vector>

#include "lcdl/model.hpp"

namespace oracle {

using lcdl::Matrix;
using lcdl::Vector;

struct Gen {
  explicit Gen(std::uint64_t seed) : engine(seed) {}
  double normal() { return std::normal_distribution<double>()(engine); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine);
  }
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine);
  }
  std::mt19937_64 engine;
};

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Gen& gen);

/// Unit-norm atoms, `per_class` consecutive atoms for each class.
lcdl::Dictionary random_dictionary(Eigen::Index dim, int num_classes,
                                   int per_class, Gen& gen);

/// Random symmetric nonnegative similarity with zero diagonal.
Matrix random_similarity(Eigen::Index k, Gen& gen);

/// diag(row sums) - M, built entry by entry.
Matrix laplacian_of(const Matrix& similarity);

/// 1/2 sum_i sum_j M_ij ||row_i(Z) - row_j(Z)||^2.
double pairwise_locality(const Matrix& codes, const Matrix& similarity);

double min_eigenvalue(const Matrix& symmetric);

struct Minimum {
  Vector x;
  double value;
  double grad_norm;
  long iterations;
};

/// Accelerated gradient descent with adaptive restart on a convex function
/// whose gradient is `lipschitz`-Lipschitz; runs until the gradient norm is
/// at most `tol`.
Minimum minimize(const std::function<double(const Vector&)>& f,
                 const std::function<Vector(const Vector&)>& grad, Vector x0,
                 double lipschitz, double tol = 1e-10,
                 long max_iters = 20'000'000);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double spectral_radius(const Matrix& symmetric);

/// ||x - Dz||^2 + lambda1 z^T L z
///   + svm_weight * sum_{c in active} (u_c^T z + b_c - y_c)^2
/// with svm_weight = 2 lambda2 theta.
struct CodingProblem {
  Matrix atoms;
  Matrix laplacian;
  Vector sample;
  double lambda1 = 0.0;
  double svm_weight = 0.0;
  Matrix normals;
  Vector biases;
  Vector targets;
  std::vector<int> active;  // 1-based

  double value(const Vector& z) const;
  Vector gradient(const Vector& z) const;
  Minimum solve() const;
};

/// ||u||^2 + theta sum_i max(0, 1 - y_i (u^T z_i + b))^2 over x = [u; b].
struct SvmProblem {
  Matrix codes;
  Vector targets;
  double theta = 0.2;

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Minimum solve() const;
};

/// Gaussian clusters around random means of norm `separation`, samples
/// grouped by class.
lcdl::LabeledDataset make_blobs(int num_classes, Eigen::Index dim,
                                int per_class, double separation, Gen& gen);

/// |a - b| <= tol * max(|b|, floor).
bool rel_close(double a, double b, double tol, double floor = 1e-300);

}  // namespace oracle
