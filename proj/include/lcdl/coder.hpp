#pragma once

#include <vector>

#include "lcdl/graph.hpp"
#include "lcdl/linalg.hpp"
#include "lcdl/svm.hpp"

namespace lcdl {

/// Classes (1-based, ascending) whose margin a sample currently violates.
struct ActiveSet {
  std::vector<int> classes;

  bool empty() const { return classes.empty(); }
  std::size_t size() const { return classes.size(); }
  bool operator==(const ActiveSet&) const = default;
  auto operator<=>(const ActiveSet&) const = default;
};

namespace coder {

/// max(0, 1 - y (u^T z + b))^2.
double quad_hinge(const Vector& code, double target, const Vector& normal,
                  double bias);

/// {c : y^c (u_c^T z + b_c) < 1}. `targets` holds the sample's C one-vs-all
/// targets.
ActiveSet active_classes(const Vector& code, const Vector& targets,
                         const SvmModel& svm);

/// The K × K matrix D^T D + lambda1 L + 2 lambda2 theta sum_{c in phi} u_c u_c^T
/// shared by every sample with the same active set.
Matrix system_matrix(const Dictionary& dict, const Matrix& laplacian,
                     double lambda1, double svm_weight, const SvmModel& svm,
                     const ActiveSet& phi);

/// D^T x + 2 lambda2 theta sum_{c in phi} u_c (y^c - b_c).
Vector system_rhs(const Dictionary& dict, const Vector& sample,
                  double svm_weight, const SvmModel& svm,
                  const Vector& targets, const ActiveSet& phi);

/// Factors a system matrix with the stabilizing-ridge retry; throws
/// SingularSystem when both attempts fail.
linalg::SpdFactor factor_system(const Matrix& system);

/// z = (D^T D + lambda1 L)^{-1} D^T x.
Vector code_initial(const Dictionary& dict, const Matrix& laplacian,
                    const Vector& sample, double lambda1);

/// z = D1^{-1} D2 with the squared-hinge terms of the classes in phi.
Vector code_with_svm(const Dictionary& dict, const Matrix& laplacian,
                     const Vector& sample, const HyperParams& params,
                     const SvmModel& svm, const Vector& targets,
                     const ActiveSet& phi);

struct CodingSweep {
  CodingMatrix codes;
  /// Active set used for each column; empty on the first iteration.
  std::vector<ActiveSet> active_sets;
};

/// Codes every column of X. On iteration 1 the hinge is disabled and each
/// column is code_initial; afterwards each column is code_with_svm with phi
/// evaluated at the matching column of `previous`. Samples that share an
/// active set share one factorization.
CodingSweep code_all(const Dictionary& dict, const Matrix& laplacian,
                     const FeatureMatrix& samples, const Labels& labels,
                     int num_classes, const HyperParams& params,
                     const SvmModel& svm, int iteration,
                     const CodingMatrix& previous);

/// ||(A z) - rhs|| / (1 + ||rhs||) for the system solved by a coder call.
double stationarity_residual(const Matrix& system, const Vector& rhs,
                             const Vector& code);

}  // namespace coder
}  // namespace lcdl
