#pragma once

#include "lcdl/model.hpp"

namespace lcdl {

/// One-vs-all linear SVM: column c of `normals` is u_c, `biases[c]` is b_c.
struct SvmModel {
  Matrix normals;  // K × C
  Vector biases;   // C

  static SvmModel zeros(Eigen::Index num_atoms, int num_classes);
  int num_classes() const { return static_cast<int>(normals.cols()); }
};

namespace svm {

struct BinaryFit {
  Vector normal;
  double bias = 0.0;
  bool converged = true;
  int rounds = 0;
  /// Gradient norm of the squared-hinge objective at (normal, bias).
  double kkt_residual = 0.0;
};

/// ||u||^2 + theta * sum_i max(0, 1 - y_i (u^T z_i + b))^2.
double binary_objective(const CodingMatrix& codes, const Vector& targets,
                        const Vector& normal, double bias, double theta);

/// Gradient of binary_objective with respect to (u, b), stacked as [u; b].
Vector binary_gradient(const CodingMatrix& codes, const Vector& targets,
                       const Vector& normal, double bias, double theta);

/// KKT tolerance accepted for a fit: 1e-8 * (1 + theta * n).
double kkt_tolerance(double theta, Eigen::Index num_samples);

/// Primal active-set Newton on the squared-hinge objective.
///
/// Each round solves the ridge least-squares problem restricted to the
/// margin violators A = {i : y_i (u^T z_i + b) < 1}. When the restricted
/// optimum changes A, the step towards it is taken with an exact line search
/// so the objective never increases. Stops when A is stable, when the
/// gradient already meets kkt_tolerance, or after 100 rounds (converged =
/// false, best iterate returned). With theta = 0 the fit is u = 0, b = 0.
BinaryFit fit_binary_squared_hinge(const CodingMatrix& codes,
                                   const Vector& targets, double theta);

struct MulticlassFit {
  SvmModel model;
  std::vector<BinaryFit> per_class;
};

/// Class c is fit against one_vs_all_targets(labels, c); classes are
/// independent.
MulticlassFit fit_multiclass(const CodingMatrix& codes, const Labels& labels,
                             int num_classes, double theta);

/// s_c = u_c^T z + b_c.
Vector scores(const Vector& code, const SvmModel& model);

}  // namespace svm
}  // namespace lcdl
